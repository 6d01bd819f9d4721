use super::ast::*;
use super::lexer::{Tok, Token};
use super::FrontendError;
use crate::rat::{parse_rat, Rat};
use std::collections::BTreeMap;

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, FrontendError>;

const DIST_NAMES: [&str; 8] = [
    "bernoulli",
    "ber",
    "binomial",
    "bin",
    "unif",
    "uniform",
    "hypergeometric",
    "hyper",
];

impl Parser {
    pub fn new(toks: Vec<Token>) -> Self {
        Parser { toks, pos: 0 }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let t = self.here();
        Err(FrontendError::parse(t.line, t.col, &msg.into()))
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected '{s}', found {}", describe(self.peek())))
        }
    }

    fn expect_kw(&mut self, s: &str) -> PResult<()> {
        if self.is_kw(s) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected '{s}', found {}", describe(self.peek())))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_reserved(&s) => {
                self.bump();
                Ok(s)
            }
            other => self.err(format!("expected identifier, found {}", describe(&other))),
        }
    }

    pub fn program(&mut self) -> PResult<Program> {
        let mut globals = Vec::new();
        let mut procs = BTreeMap::new();
        let mut main = None;
        let mut top = Vec::new();
        while self.is_kw("var") {
            self.bump();
            loop {
                let v = self.ident()?;
                if globals.contains(&v) {
                    return self.err(format!("variable '{v}' declared twice"));
                }
                globals.push(v);
                if !self.eat_sym(",") {
                    break;
                }
            }
            self.expect_sym(";")?;
        }
        loop {
            if matches!(self.peek(), Tok::Eof) {
                break;
            }
            if self.is_kw("proc") {
                self.bump();
                let name = match self.peek().clone() {
                    Tok::Ident(s) if s == "main" => return self.err("'main' is reserved"),
                    _ => self.ident()?,
                };
                if procs.contains_key(&name) {
                    return self.err(format!("procedure '{name}' defined twice"));
                }
                // Accept an empty parameter list for readability: `proc f() {..}`.
                if self.eat_sym("(") {
                    self.expect_sym(")")?;
                }
                self.expect_sym("{")?;
                let body = self.stmt_list()?;
                self.expect_sym("}")?;
                procs.insert(name, body);
                continue;
            }
            if self.is_kw("main") && matches!(self.peek_at(1), Tok::Sym("{")) {
                if main.is_some() || !top.is_empty() {
                    return self.err("duplicate main body");
                }
                self.bump();
                self.expect_sym("{")?;
                main = Some(self.stmt_list()?);
                self.expect_sym("}")?;
                continue;
            }
            if main.is_some() {
                return self.err("statements after the main block");
            }
            top.push(self.stmt()?);
        }
        let main = main.unwrap_or_else(|| wrap(top));
        Ok(Program {
            globals,
            procs,
            main,
        })
    }

    fn stmt_list(&mut self) -> PResult<Command> {
        let mut out = Vec::new();
        while !self.is_sym("}") && !matches!(self.peek(), Tok::Eof) {
            out.push(self.stmt()?);
        }
        Ok(wrap(out))
    }

    /// A statement including its terminator.
    fn stmt(&mut self) -> PResult<Command> {
        let (c, needs_semi) = self.choice()?;
        if needs_semi {
            if !self.eat_sym(";") && !self.is_sym("}") && !matches!(self.peek(), Tok::Eof) {
                return self.err(format!("expected ';', found {}", describe(self.peek())));
            }
        } else {
            self.eat_sym(";");
        }
        Ok(c)
    }

    /// `operand ([p] operand)*`, right associative.
    fn choice(&mut self) -> PResult<(Command, bool)> {
        let (lhs, semi) = self.operand()?;
        if self.eat_sym("[") {
            let p = self.rational()?;
            self.expect_sym("]")?;
            let (rhs, semi) = self.choice()?;
            return Ok((
                Command::new(CmdKind::ProbIf(p, Box::new(lhs), Box::new(rhs))),
                semi,
            ));
        }
        Ok((lhs, semi))
    }

    /// Returns the command and whether it must be followed by `;`.
    fn operand(&mut self) -> PResult<(Command, bool)> {
        if self.eat_sym("{") {
            let body = self.stmt_list()?;
            self.expect_sym("}")?;
            return Ok((body, false));
        }
        let word = match self.peek().clone() {
            Tok::Ident(w) => w,
            other => return self.err(format!("expected a statement, found {}", describe(&other))),
        };
        let simple = |k| Ok((Command::new(k), true));
        match word.as_str() {
            "skip" => {
                self.bump();
                simple(CmdKind::Skip)
            }
            "abort" => {
                self.bump();
                simple(CmdKind::Abort)
            }
            "assert" | "assume" => {
                self.bump();
                self.expect_sym("(")?;
                let e = self.expr()?;
                self.expect_sym(")")?;
                simple(CmdKind::Assert(e))
            }
            "tick" => {
                self.bump();
                self.expect_sym("(")?;
                let q = self.rational()?;
                self.expect_sym(")")?;
                simple(CmdKind::Tick(q))
            }
            "call" => {
                self.bump();
                let name = self.ident()?;
                if self.eat_sym("(") {
                    self.expect_sym(")")?;
                }
                simple(CmdKind::Call(name))
            }
            "if" => {
                self.bump();
                self.expect_sym("(")?;
                if self.is_sym("*") && matches!(self.peek_at(1), Tok::Sym(")")) {
                    self.bump();
                    self.bump();
                    let a = self.body()?;
                    self.expect_kw("else")?;
                    let b = self.body()?;
                    return Ok((
                        Command::new(CmdKind::NonDet(Box::new(a), Box::new(b))),
                        false,
                    ));
                }
                let e = self.expr()?;
                self.expect_sym(")")?;
                let a = self.body()?;
                let b = if self.is_kw("else") {
                    self.bump();
                    self.body()?
                } else {
                    Command::new(CmdKind::Skip)
                };
                Ok((
                    Command::new(CmdKind::If(e, Box::new(a), Box::new(b))),
                    false,
                ))
            }
            "while" => {
                self.bump();
                self.expect_sym("(")?;
                let e = self.expr()?;
                self.expect_sym(")")?;
                let b = self.body()?;
                Ok((Command::new(CmdKind::While(e, Box::new(b))), false))
            }
            _ => {
                let x = self.ident()?;
                self.expect_sym("=")?;
                let kind = self.rhs(x)?;
                simple(kind)
            }
        }
    }

    fn body(&mut self) -> PResult<Command> {
        if self.is_sym("{") {
            self.bump();
            let b = self.stmt_list()?;
            self.expect_sym("}")?;
            Ok(b)
        } else {
            self.stmt()
        }
    }

    fn rhs(&mut self, x: String) -> PResult<CmdKind> {
        if let Some(d) = self.try_dist()? {
            return Ok(CmdKind::Sample(x, Expr::Num(0), SampleOp::Add, d));
        }
        let e = self.expr_prec(6)?;
        // `e + D` / `e - D`: the distribution must be the last additive operand.
        let mut acc = e;
        loop {
            let op = if self.is_sym("+") {
                BinOp::Add
            } else if self.is_sym("-") {
                BinOp::Sub
            } else {
                break;
            };
            self.bump();
            if let Some(d) = self.try_dist()? {
                let sop = if op == BinOp::Add {
                    SampleOp::Add
                } else {
                    SampleOp::Sub
                };
                if self.is_sym("+") || self.is_sym("-") || self.is_sym("*") {
                    return self
                        .err("a distribution must be the last operand of a sampling assignment");
                }
                return Ok(CmdKind::Sample(x, acc, sop, d));
            }
            let r = self.expr_prec(6)?;
            acc = Expr::bin(op, acc, r);
        }
        // Allow any trailing lower-precedence operators (comparisons etc.).
        let e = self.expr_rest(acc, 0)?;
        Ok(CmdKind::Assign(x, e))
    }

    fn try_dist(&mut self) -> PResult<Option<Dist>> {
        let name = match self.peek() {
            Tok::Ident(n) if DIST_NAMES.contains(&n.as_str()) => n.clone(),
            _ => return Ok(None),
        };
        if !matches!(self.peek_at(1), Tok::Sym("(")) {
            return Ok(None);
        }
        let (line, col) = (self.here().line, self.here().col);
        self.bump();
        self.bump();
        let mut args = vec![self.signed_rational()?];
        while self.eat_sym(",") {
            args.push(self.signed_rational()?);
        }
        self.expect_sym(")")?;
        let int = |r: &Rat| -> Option<i64> {
            if r.is_integer() {
                r.to_integer().try_into().ok()
            } else {
                None
            }
        };
        let nat = |r: &Rat| int(r).filter(|v| *v >= 0).map(|v| v as u64);
        let bad = |msg: &str| Err(FrontendError::validation(line, col, msg));
        let d = match (name.as_str(), args.as_slice()) {
            ("bernoulli" | "ber", [p]) => Dist::Bernoulli(p.clone()),
            ("binomial" | "bin", [n, p]) => match nat(n) {
                Some(n) => Dist::Binomial(n, p.clone()),
                None => return bad("binomial size must be a nonnegative integer"),
            },
            ("unif" | "uniform", [a, b]) => match (int(a), int(b)) {
                (Some(a), Some(b)) => Dist::Uniform(a, b),
                _ => return bad("uniform bounds must be integers"),
            },
            ("hypergeometric" | "hyper", [n, k, m]) => match (nat(n), nat(k), nat(m)) {
                (Some(n), Some(k), Some(m)) => Dist::Hypergeometric(n, k, m),
                _ => return bad("hypergeometric parameters must be nonnegative integers"),
            },
            _ => return bad(&format!("wrong number of arguments for {name}")),
        };
        if let Err(m) = d.validate() {
            return bad(&m);
        }
        Ok(Some(d))
    }

    fn signed_rational(&mut self) -> PResult<Rat> {
        if self.eat_sym("-") {
            return Ok(-self.rational()?);
        }
        self.rational()
    }

    /// `n`, `n/m`, or a decimal literal.
    fn rational(&mut self) -> PResult<Rat> {
        let num = match self.peek().clone() {
            Tok::Number(s) => {
                self.bump();
                s
            }
            other => return self.err(format!("expected a number, found {}", describe(&other))),
        };
        if !num.contains('.') && self.is_sym("/") {
            self.bump();
            let den = match self.peek().clone() {
                Tok::Number(s) if !s.contains('.') => {
                    self.bump();
                    s
                }
                other => {
                    return self.err(format!(
                        "expected a denominator, found {}",
                        describe(&other)
                    ))
                }
            };
            return match parse_rat(&format!("{num}/{den}")) {
                Some(r) => Ok(r),
                None => self.err("zero denominator"),
            };
        }
        parse_rat(&num).map_or_else(|| self.err("malformed number"), Ok)
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        self.expr_prec(0)
    }

    fn expr_prec(&mut self, min: u8) -> PResult<Expr> {
        let lhs = self.unary()?;
        self.expr_rest(lhs, min)
    }

    fn expr_rest(&mut self, mut lhs: Expr, min: u8) -> PResult<Expr> {
        while let Some(op) = self.peek_binop() {
            let prec = op.precedence();
            if prec < min {
                break;
            }
            self.bump();
            // Left associative: the right side only takes tighter operators.
            let rhs = self.expr_prec(prec + 1)?;
            lhs = Expr::bin(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn peek_binop(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::Sym("+") => BinOp::Add,
            Tok::Sym("-") => BinOp::Sub,
            Tok::Sym("*") => BinOp::Mul,
            Tok::Sym("%") => BinOp::Mod,
            Tok::Sym("==") => BinOp::Eq,
            Tok::Sym("<>") | Tok::Sym("!=") => BinOp::Ne,
            Tok::Sym(">") => BinOp::Gt,
            Tok::Sym("<") => BinOp::Lt,
            Tok::Sym("<=") => BinOp::Le,
            Tok::Sym(">=") => BinOp::Ge,
            Tok::Sym("&&") | Tok::Sym("&") => BinOp::And,
            Tok::Sym("||") | Tok::Sym("|") => BinOp::Or,
            Tok::Ident(w) if w == "div" => BinOp::Div,
            Tok::Ident(w) if w == "mod" => BinOp::Mod,
            _ => return None,
        })
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat_sym("-") {
            return Ok(match self.unary()? {
                Expr::Num(n) => Expr::Num(-n),
                e => Expr::bin(BinOp::Sub, Expr::Num(0), e),
            });
        }
        if self.eat_sym("(") {
            let e = self.expr()?;
            self.expect_sym(")")?;
            return Ok(e);
        }
        match self.peek().clone() {
            Tok::Number(s) => {
                if s.contains('.') {
                    return self.err(
                        "decimal literals are only allowed in probabilities and tick amounts",
                    );
                }
                self.bump();
                match s.parse::<i64>() {
                    Ok(n) => Ok(Expr::Num(n)),
                    Err(_) => self.err("integer literal out of range"),
                }
            }
            Tok::Ident(w) if w == "true" => {
                self.bump();
                Ok(Expr::Num(1))
            }
            Tok::Ident(w) if w == "false" => {
                self.bump();
                Ok(Expr::Num(0))
            }
            Tok::Ident(_) => Ok(Expr::Var(self.ident()?)),
            other => self.err(format!(
                "expected an expression, found {}",
                describe(&other)
            )),
        }
    }
}

/// Statement lists of length one collapse to the statement itself, so braces
/// are pure grouping and printing can add them freely.
fn wrap(mut cs: Vec<Command>) -> Command {
    if cs.len() == 1 {
        cs.pop().unwrap()
    } else {
        Command::new(CmdKind::Seq(cs))
    }
}

fn is_reserved(s: &str) -> bool {
    matches!(
        s,
        "var"
            | "proc"
            | "skip"
            | "abort"
            | "assert"
            | "assume"
            | "tick"
            | "if"
            | "else"
            | "while"
            | "call"
            | "div"
            | "mod"
            | "true"
            | "false"
    )
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Number(s) => format!("number {s}"),
        Tok::Sym(s) => format!("'{s}'"),
        Tok::Eof => "end of input".into(),
    }
}
