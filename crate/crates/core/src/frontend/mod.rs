//! Concrete syntax: lexer, parser, validator and printer.

pub mod ast;
pub mod dist;
mod lexer;
mod parser;
pub mod printer;

pub use ast::*;
pub use dist::dist_support;
pub use printer::{print_command, print_dist, print_expr, print_program};

use crate::rat::{one, zero};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Lex,
    Parse,
    Validation,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct FrontendError {
    pub kind: ErrorKind,
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl FrontendError {
    fn lex(line: usize, col: usize, msg: &str) -> Self {
        FrontendError {
            kind: ErrorKind::Lex,
            line,
            col,
            msg: msg.into(),
        }
    }
    fn parse(line: usize, col: usize, msg: &str) -> Self {
        FrontendError {
            kind: ErrorKind::Parse,
            line,
            col,
            msg: msg.into(),
        }
    }
    fn validation(line: usize, col: usize, msg: &str) -> Self {
        FrontendError {
            kind: ErrorKind::Validation,
            line,
            col,
            msg: msg.into(),
        }
    }
}

impl fmt::Display for FrontendError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ErrorKind::Lex => "lex error",
            ErrorKind::Parse => "parse error",
            ErrorKind::Validation => "invalid program",
        };
        if self.line == 0 {
            write!(f, "{kind}: {}", self.msg)
        } else {
            write!(f, "{kind} at {}:{}: {}", self.line, self.col, self.msg)
        }
    }
}

/// Parses, validates and labels a program.
pub fn parse_program(text: &str) -> Result<Program, FrontendError> {
    let toks = lexer::lex(text)?;
    let mut prog = parser::Parser::new(toks).program()?;
    validate(&prog)?;
    prog.relabel();
    Ok(prog)
}

/// Parses a single expression over the given globals (hints, CLI guards).
pub fn parse_expr(text: &str) -> Result<Expr, FrontendError> {
    let toks = lexer::lex(text)?;
    let mut p = parser::Parser::new(toks);
    p.expr()
}

pub fn validate(prog: &Program) -> Result<(), FrontendError> {
    let mut err = None;
    let fail = |msg: String| Some(FrontendError::validation(0, 0, &msg));
    let check_expr = |e: &Expr, err: &mut Option<FrontendError>| {
        let mut vs = Vec::new();
        e.vars(&mut vs);
        for v in vs {
            if !prog.globals.contains(&v) && err.is_none() {
                *err = fail(format!("undeclared variable '{v}'"));
            }
        }
        if err.is_none() && has_zero_division(e) {
            *err = fail(format!("division by the literal 0 in '{}'", print_expr(e)));
        }
    };
    prog.walk(&mut |c| {
        if err.is_some() {
            return;
        }
        match &c.kind {
            CmdKind::Assert(e) => check_expr(e, &mut err),
            CmdKind::While(e, _) | CmdKind::If(e, ..) => check_expr(e, &mut err),
            CmdKind::Tick(q) if *q < zero() => {
                err = fail("tick amounts must be nonnegative".into())
            }
            CmdKind::Assign(x, e) | CmdKind::Sample(x, e, ..) => {
                if !prog.globals.contains(x) {
                    err = fail(format!("undeclared variable '{x}'"));
                } else {
                    check_expr(e, &mut err);
                }
                if let CmdKind::Sample(_, _, _, d) = &c.kind {
                    if let Err(m) = d.validate() {
                        err = fail(m);
                    }
                }
            }
            CmdKind::ProbIf(p, ..) if *p < zero() || *p > one() => {
                err = fail(format!(
                    "probability {} outside [0,1]",
                    crate::rat::fmt_rat(p)
                ))
            }
            CmdKind::Call(p) if !prog.procs.contains_key(p) => {
                err = fail(format!("call to undefined procedure '{p}'"))
            }
            _ => {}
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn has_zero_division(e: &Expr) -> bool {
    match e {
        Expr::Bin(op, l, r) => {
            (matches!(op, BinOp::Div | BinOp::Mod) && **r == Expr::Num(0))
                || has_zero_division(l)
                || has_zero_division(r)
        }
        _ => false,
    }
}
