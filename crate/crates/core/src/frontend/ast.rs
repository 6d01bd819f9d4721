use crate::rat::Rat;
use std::collections::BTreeMap;

pub type Label = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Ne,
    Gt,
    Lt,
    Le,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "div",
            BinOp::Mod => "mod",
            BinOp::Eq => "==",
            BinOp::Ne => "<>",
            BinOp::Gt => ">",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength used by the parser and printer (higher binds tighter).
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Gt | BinOp::Lt | BinOp::Le | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 6,
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Eq | BinOp::Ne | BinOp::Gt | BinOp::Lt | BinOp::Le | BinOp::Ge
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Var(String),
    Num(i64),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Bin(op, Box::new(l), Box::new(r))
    }

    pub fn vars(&self, out: &mut Vec<String>) {
        match self {
            Expr::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Expr::Num(_) => {}
            Expr::Bin(_, l, r) => {
                l.vars(out);
                r.vars(out);
            }
        }
    }

    pub fn mentions(&self, x: &str) -> bool {
        match self {
            Expr::Var(v) => v == x,
            Expr::Num(_) => false,
            Expr::Bin(_, l, r) => l.mentions(x) || r.mentions(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Dist {
    Bernoulli(Rat),
    Binomial(u64, Rat),
    Uniform(i64, i64),
    Hypergeometric(u64, u64, u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SampleOp {
    Add,
    Sub,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CmdKind {
    Skip,
    Abort,
    Assert(Expr),
    Tick(Rat),
    Assign(String, Expr),
    /// `x = e op D`; pure sampling `x = D` is stored with `e = 0`, `op = Add`.
    Sample(String, Expr, SampleOp, Dist),
    ProbIf(Rat, Box<Command>, Box<Command>),
    NonDet(Box<Command>, Box<Command>),
    If(Expr, Box<Command>, Box<Command>),
    Seq(Vec<Command>),
    While(Expr, Box<Command>),
    Call(String),
}

/// A command node; `label` is unique within a program (pre-order numbering).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Command {
    pub label: Label,
    pub kind: CmdKind,
}

impl Command {
    pub fn new(kind: CmdKind) -> Command {
        Command { label: 0, kind }
    }

    /// Calls `f` on this node and every descendant, pre-order.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Command)) {
        f(self);
        match &self.kind {
            CmdKind::ProbIf(_, a, b) | CmdKind::NonDet(a, b) | CmdKind::If(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            CmdKind::Seq(cs) => cs.iter().for_each(|c| c.walk(f)),
            CmdKind::While(_, b) => b.walk(f),
            _ => {}
        }
    }

    fn relabel(&mut self, next: &mut Label) {
        self.label = *next;
        *next += 1;
        match &mut self.kind {
            CmdKind::ProbIf(_, a, b) | CmdKind::NonDet(a, b) | CmdKind::If(_, a, b) => {
                a.relabel(next);
                b.relabel(next);
            }
            CmdKind::Seq(cs) => cs.iter_mut().for_each(|c| c.relabel(next)),
            CmdKind::While(_, b) => b.relabel(next),
            _ => {}
        }
    }

    /// Variables assigned or sampled anywhere inside (calls not followed).
    pub fn assigned_vars(&self, out: &mut Vec<String>) {
        self.walk(&mut |c| match &c.kind {
            CmdKind::Assign(x, _) | CmdKind::Sample(x, ..) => {
                if !out.contains(x) {
                    out.push(x.clone())
                }
            }
            _ => {}
        });
    }

    pub fn contains_tick(&self) -> bool {
        let mut found = false;
        self.walk(&mut |c| {
            if matches!(c.kind, CmdKind::Tick(_) | CmdKind::Call(_)) {
                found = true
            }
        });
        found
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub globals: Vec<String>,
    /// Declaration map; ordered for deterministic output.
    pub procs: BTreeMap<String, Command>,
    pub main: Command,
}

impl Program {
    /// Assigns contiguous pre-order labels: main first, then procedures by name.
    pub fn relabel(&mut self) {
        let mut next = 0;
        self.main.relabel(&mut next);
        for body in self.procs.values_mut() {
            body.relabel(&mut next);
        }
    }

    pub fn label_count(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }

    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Command)) {
        self.main.walk(f);
        for body in self.procs.values() {
            body.walk(f);
        }
    }

    pub fn has_nondet(&self) -> bool {
        let mut found = false;
        self.walk(&mut |c| found |= matches!(c.kind, CmdKind::NonDet(..)));
        found
    }

    /// Variables a procedure may modify, following calls transitively.
    pub fn modified_by_proc(&self, name: &str) -> Vec<String> {
        let mut out = Vec::new();
        let mut seen = vec![name.to_string()];
        let mut todo = vec![name.to_string()];
        while let Some(p) = todo.pop() {
            if let Some(body) = self.procs.get(&p) {
                body.assigned_vars(&mut out);
                body.walk(&mut |c| {
                    if let CmdKind::Call(q) = &c.kind {
                        if !seen.contains(q) {
                            seen.push(q.clone());
                            todo.push(q.clone());
                        }
                    }
                });
            }
        }
        out
    }
}
