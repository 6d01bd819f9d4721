use super::ast::*;
use crate::rat::fmt_rat;
use std::fmt::Write;

pub fn print_expr(e: &Expr) -> String {
    fn go(e: &Expr, min: u8, out: &mut String) {
        match e {
            Expr::Var(v) => out.push_str(v),
            Expr::Num(n) => {
                let _ = write!(out, "{n}");
            }
            Expr::Bin(op, l, r) => {
                let p = op.precedence();
                let paren = p < min;
                if paren {
                    out.push('(');
                }
                go(l, p, out);
                let _ = write!(out, " {} ", op.symbol());
                go(r, p + 1, out);
                if paren {
                    out.push(')');
                }
            }
        }
    }
    let mut s = String::new();
    go(e, 0, &mut s);
    s
}

pub fn print_dist(d: &Dist) -> String {
    match d {
        Dist::Bernoulli(p) => format!("bernoulli({})", fmt_rat(p)),
        Dist::Binomial(n, p) => format!("binomial({n}, {})", fmt_rat(p)),
        Dist::Uniform(a, b) => format!("unif({a}, {b})"),
        Dist::Hypergeometric(n, k, m) => format!("hyper({n}, {k}, {m})"),
    }
}

/// Statement text without terminator, for simple commands.
fn simple(c: &Command) -> Option<String> {
    Some(match &c.kind {
        CmdKind::Skip => "skip".into(),
        CmdKind::Abort => "abort".into(),
        CmdKind::Assert(e) => format!("assert({})", print_expr(e)),
        CmdKind::Tick(q) => format!("tick({})", fmt_rat(q)),
        CmdKind::Assign(x, e) => format!("{x} = {}", print_expr(e)),
        CmdKind::Sample(x, e, op, d) => {
            if *e == Expr::Num(0) && *op == SampleOp::Add {
                format!("{x} = {}", print_dist(d))
            } else {
                let o = if *op == SampleOp::Add { "+" } else { "-" };
                format!("{x} = {} {o} {}", print_expr(e), print_dist(d))
            }
        }
        CmdKind::Call(p) => format!("call {p}"),
        _ => return None,
    })
}

struct Printer {
    out: String,
    indent: usize,
}

impl Printer {
    fn line(&mut self, s: &str) {
        for _ in 0..self.indent {
            self.out.push_str("  ");
        }
        self.out.push_str(s);
        self.out.push('\n');
    }

    /// Prints the statements of a body (a `Seq` is spliced).
    fn body(&mut self, c: &Command) {
        match &c.kind {
            CmdKind::Seq(cs) if cs.len() != 1 => cs.iter().for_each(|s| self.stmt(s)),
            _ => self.stmt(c),
        }
    }

    fn block(&mut self, head: &str, c: &Command, tail: &str) {
        self.line(&format!("{head}{{"));
        self.indent += 1;
        self.body(c);
        self.indent -= 1;
        self.line(&format!("}}{tail}"));
    }

    fn stmt(&mut self, c: &Command) {
        if let Some(s) = simple(c) {
            self.line(&format!("{s};"));
            return;
        }
        match &c.kind {
            CmdKind::Seq(_) => self.block("", c, ""),
            CmdKind::If(e, a, b) => {
                self.block(&format!("if ({}) ", print_expr(e)), a, "");
                if b.kind != CmdKind::Skip {
                    self.block("else ", b, "");
                }
            }
            CmdKind::NonDet(a, b) => {
                self.block("if (*) ", a, "");
                self.block("else ", b, "");
            }
            CmdKind::While(e, b) => self.block(&format!("while ({}) ", print_expr(e)), b, ""),
            CmdKind::ProbIf(..) => self.choice(c),
            _ => unreachable!(),
        }
    }

    /// `a [p] b [q] c;` — simple operands inline, others as braced blocks.
    fn choice(&mut self, c: &Command) {
        let mut operands = Vec::new();
        let mut probs = Vec::new();
        let mut cur = c;
        while let CmdKind::ProbIf(p, a, b) = &cur.kind {
            operands.push(a.as_ref());
            probs.push(p);
            cur = b;
        }
        operands.push(cur);
        if operands.iter().all(|o| simple(o).is_some()) {
            let mut s = String::new();
            for (i, o) in operands.iter().enumerate() {
                s.push_str(&simple(o).unwrap());
                if i < probs.len() {
                    let _ = write!(s, " [{}] ", fmt_rat(probs[i]));
                }
            }
            s.push(';');
            self.line(&s);
            return;
        }
        for (i, o) in operands.iter().enumerate() {
            let head = if i == 0 {
                String::new()
            } else {
                format!("[{}] ", fmt_rat(probs[i - 1]))
            };
            self.block(&head, o, "");
        }
    }
}

pub fn print_command(c: &Command) -> String {
    let mut p = Printer {
        out: String::new(),
        indent: 0,
    };
    p.body(c);
    p.out
}

pub fn print_program(prog: &Program) -> String {
    let mut p = Printer {
        out: String::new(),
        indent: 0,
    };
    if !prog.globals.is_empty() {
        p.line(&format!("var {};", prog.globals.join(", ")));
    }
    if prog.procs.is_empty() {
        p.body(&prog.main);
    } else {
        for (name, body) in &prog.procs {
            p.block(&format!("proc {name} "), body, "");
        }
        p.block("main ", &prog.main, "");
    }
    p.out
}
