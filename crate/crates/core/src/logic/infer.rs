use super::LinCtx;
use crate::frontend::{print_dist, print_expr, CmdKind, Command, Label, Program, SampleOp};
use crate::rat::fmt_rat;
use std::collections::BTreeMap;
use std::fmt::Write;

/// Loops and procedure summaries switch from join to widening after this
/// many unstable iterations.
pub const WIDEN_AFTER: usize = 3;

/// Inferred contexts per label. For a loop, `pre` is the entry context and
/// `post` the exit context; the head invariant is kept in `loop_head`.
#[derive(Debug, Clone)]
pub struct Contexts {
    pub pre: Vec<LinCtx>,
    pub post: Vec<LinCtx>,
    pub loop_head: BTreeMap<Label, LinCtx>,
    /// Exit context of each procedure body analyzed from an unconstrained entry.
    pub proc_exit: BTreeMap<String, LinCtx>,
}

struct Analyzer<'a> {
    prog: &'a Program,
    modified: BTreeMap<String, Vec<String>>,
    out: Contexts,
}

impl Analyzer<'_> {
    fn run(&mut self, c: &Command, pre: &LinCtx) -> LinCtx {
        let post = match &c.kind {
            CmdKind::Skip | CmdKind::Tick(_) => pre.clone(),
            CmdKind::Abort => LinCtx::bottom(),
            CmdKind::Assert(e) => pre.assume(e),
            CmdKind::Assign(x, e) => pre.assign(x, e),
            CmdKind::Sample(x, e, op, d) => pre.sample(x, e, *op, d),
            CmdKind::ProbIf(_, a, b) | CmdKind::NonDet(a, b) => {
                let pa = self.run(a, pre);
                let pb = self.run(b, pre);
                pa.join(&pb)
            }
            CmdKind::If(e, a, b) => {
                let pa = self.run(a, &pre.assume(e));
                let pb = self.run(b, &pre.assume_not(e));
                pa.join(&pb)
            }
            CmdKind::Seq(cs) => {
                let mut cur = pre.clone();
                for s in cs {
                    cur = self.run(s, &cur);
                }
                cur
            }
            CmdKind::While(e, body) => {
                let mut inv = pre.clone();
                let mut iter = 0;
                loop {
                    let body_post = self.run(body, &inv.assume(e));
                    let mut next = inv.join(&body_post);
                    if iter >= WIDEN_AFTER {
                        next = inv.widen(&next);
                    }
                    if next.equivalent(&inv) {
                        break;
                    }
                    inv = next;
                    iter += 1;
                }
                // Final pass records body contexts under the stable invariant.
                self.run(body, &inv.assume(e));
                let exit = inv.assume_not(e);
                self.out.loop_head.insert(c.label, inv);
                exit
            }
            CmdKind::Call(p) => self.call(p, pre),
        };
        self.out.pre[c.label] = pre.clone();
        self.out.post[c.label] = post.clone();
        post
    }

    fn call(&self, p: &str, pre: &LinCtx) -> LinCtx {
        if pre.is_bottom() {
            return pre.clone();
        }
        let mut c = pre.clone();
        for x in &self.modified[p] {
            c = c.havoc(x);
        }
        c.conj(&self.out.proc_exit[p])
    }
}

pub fn infer_contexts(prog: &Program) -> Contexts {
    let n = prog.label_count();
    let modified = prog
        .procs
        .keys()
        .map(|p| (p.clone(), prog.modified_by_proc(p)))
        .collect();
    let out = Contexts {
        pre: vec![LinCtx::bottom(); n],
        post: vec![LinCtx::bottom(); n],
        loop_head: BTreeMap::new(),
        proc_exit: prog
            .procs
            .keys()
            .map(|p| (p.clone(), LinCtx::bottom()))
            .collect(),
    };
    let mut a = Analyzer {
        prog,
        modified,
        out,
    };

    // Procedure summaries: least fixpoint from bottom, widened when slow.
    let mut round = 0;
    loop {
        let mut changed = false;
        for (name, body) in &a.prog.procs {
            let exit = a.run(body, &LinCtx::top());
            let old = a.out.proc_exit[name].clone();
            let mut next = old.join(&exit);
            if round >= WIDEN_AFTER {
                next = old.widen(&next);
            }
            if !next.equivalent(&old) {
                a.out.proc_exit.insert(name.clone(), next);
                changed = true;
            }
        }
        if !changed {
            break;
        }
        round += 1;
    }
    a.run(&prog.main, &LinCtx::top());
    a.out
}

/// Short one-line rendering of a statement head for dumps.
pub fn stmt_head(c: &Command) -> String {
    match &c.kind {
        CmdKind::Skip => "skip".into(),
        CmdKind::Abort => "abort".into(),
        CmdKind::Assert(e) => format!("assert({})", print_expr(e)),
        CmdKind::Tick(q) => format!("tick({})", fmt_rat(q)),
        CmdKind::Assign(x, e) => format!("{x} = {}", print_expr(e)),
        CmdKind::Sample(x, e, op, d) => {
            let op = match op {
                SampleOp::Add => "+",
                SampleOp::Sub => "-",
            };
            format!("{x} = {} {op} {}", print_expr(e), print_dist(d))
        }
        CmdKind::ProbIf(p, ..) => format!("[{}] choice", fmt_rat(p)),
        CmdKind::NonDet(..) => "if (*)".into(),
        CmdKind::If(e, ..) => format!("if ({})", print_expr(e)),
        CmdKind::Seq(cs) => format!("seq of {}", cs.len()),
        CmdKind::While(e, _) => format!("while ({})", print_expr(e)),
        CmdKind::Call(p) => format!("call {p}"),
    }
}

/// Text dump: one block per label, in label order.
pub fn dump_contexts(prog: &Program, ctxs: &Contexts) -> String {
    let mut nodes: Vec<&Command> = Vec::new();
    prog.walk(&mut |c| nodes.push(c));
    nodes.sort_by_key(|c| c.label);
    let mut s = String::new();
    for c in nodes {
        let _ = writeln!(s, "@{} {}", c.label, stmt_head(c));
        let _ = writeln!(s, "  pre:  {}", ctxs.pre[c.label]);
        if let Some(inv) = ctxs.loop_head.get(&c.label) {
            let _ = writeln!(s, "  head: {inv}");
        }
        let _ = writeln!(s, "  post: {}", ctxs.post[c.label]);
    }
    s
}
