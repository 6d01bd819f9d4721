//! Backward, syntax-directed constraint generation: every annotation
//! coefficient is an LP variable (or an affine form over LP variables) and
//! each rule contributes linear constraints.
//!
//! Nonnegativity: loop invariants, procedure specifications and the root are
//! fresh nonnegative vectors. Every other annotation is obtained from those
//! by ticks, convex combinations, substitutions and weakenings, all of which
//! preserve nonnegativity of the potential under the local context, so
//! intermediate coefficients (e.g. a negative constant balanced by an
//! interval) are left unconstrained.

use crate::frontend::{dist_support, CmdKind, Command, Label, Program, SampleOp};
use crate::logic::{Contexts, LinCtx, LinExpr};
use crate::lp::{LinForm, LinearProgram};
use crate::potential::{BaseFnSet, Combo, RewriteFn};
use crate::rat::{fmt_rat, Rat};
use num_traits::One;
use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

/// One affine form per base function.
pub type Ann = Vec<LinForm>;

/// Forms longer than this are replaced by a fresh variable.
const COMPACT_TERMS: usize = 12;

#[derive(Debug, Clone)]
pub struct DeriveOptions {
    pub specs_per_proc: usize,
}

impl Default for DeriveOptions {
    fn default() -> Self {
        DeriveOptions { specs_per_proc: 1 }
    }
}

#[derive(Debug, Clone)]
pub struct ProbIfRecord {
    pub label: Label,
    pub p: Rat,
    pub pre: Ann,
    pub left: Ann,
    pub right: Ann,
}

#[derive(Debug, Clone)]
pub struct LoopRecord {
    pub label: Label,
    pub head: Ann,
    pub body_post: Ann,
}

#[derive(Debug, Clone)]
pub struct Derivation {
    pub lp: LinearProgram,
    pub root: Ann,
    /// Pre-annotation of each reachable label.
    pub pre: BTreeMap<Label, Ann>,
    pub probifs: Vec<ProbIfRecord>,
    pub loops: Vec<LoopRecord>,
    /// Specification templates per procedure: (pre, post).
    pub specs: BTreeMap<String, Vec<(Ann, Ann)>>,
}

struct Deriver<'a> {
    ctxs: &'a Contexts,
    b: &'a BaseFnSet,
    rewrites: &'a [RewriteFn],
    lp: LinearProgram,
    applicable: HashMap<(LinCtx, Option<String>), Rc<Vec<usize>>>,
    specs: BTreeMap<String, Vec<(Ann, Ann)>>,
    site_spec: HashMap<Label, usize>,
    out_pre: BTreeMap<Label, Ann>,
    probifs: Vec<ProbIfRecord>,
    loops: Vec<LoopRecord>,
    next_id: usize,
}

impl<'a> Deriver<'a> {
    fn n(&self) -> usize {
        self.b.len()
    }

    fn id(&mut self) -> usize {
        self.next_id += 1;
        self.next_id
    }

    fn zero(&self) -> Ann {
        vec![LinForm::zero(); self.n()]
    }

    fn fresh(&mut self, tag: &str, nonneg: bool) -> Ann {
        let id = self.id();
        (0..self.n())
            .map(|i| LinForm::var(self.lp.new_var(format!("{tag}{id}_{i}"), nonneg)))
            .collect()
    }

    fn compact(&mut self, ann: Ann) -> Ann {
        let mut out = Vec::with_capacity(ann.len());
        for f in ann {
            if f.terms.len() > COMPACT_TERMS {
                let id = self.id();
                let v = self.lp.new_var(format!("t{id}"), false);
                let mut row = f.clone();
                row.add_term(v, &-Rat::one());
                self.lp.add_eq(row);
                out.push(LinForm::var(v));
            } else {
                out.push(f);
            }
        }
        out
    }

    /// Indices of rewrite functions (other than the constant) usable under
    /// `ctx`, optionally restricted to those mentioning `focus`.
    fn applicable(&mut self, ctx: &LinCtx, focus: Option<&str>) -> Rc<Vec<usize>> {
        let key = (ctx.clone(), focus.map(str::to_string));
        if let Some(v) = self.applicable.get(&key) {
            return v.clone();
        }
        let v: Vec<usize> = self
            .rewrites
            .iter()
            .enumerate()
            .filter(|(_, f)| !f.is_constant_one())
            .filter(|(_, f)| focus.map_or(true, |x| f.vars.iter().any(|v| v == x)))
            .filter(|(_, f)| f.applicable(ctx))
            .map(|(i, _)| i)
            .collect();
        let v = Rc::new(v);
        self.applicable.insert(key, v.clone());
        v
    }

    /// `Σ u_F·F` over the applicable rewrites, one fresh `u ≥ 0` each.
    fn rewrite_sum(&mut self, ctx: &LinCtx, focus: Option<&str>) -> Ann {
        let mut acc = self.zero();
        let fs = self.applicable(ctx, focus);
        for &fi in fs.iter() {
            let id = self.id();
            let u = self.lp.new_var(format!("u{id}"), true);
            for (i, c) in &self.rewrites[fi].coeffs {
                acc[*i].add_term(u, c);
            }
        }
        acc
    }

    /// A potential at least `ann` under `ctx`: `ann + Σ u_F·F + a` with a
    /// per-coordinate slack `a ≥ 0` (dropping potential).
    fn weaken(&mut self, ann: &Ann, ctx: &LinCtx, focus: Option<&str>) -> Ann {
        if ctx.is_bottom() {
            return ann.clone();
        }
        let fu = self.rewrite_sum(ctx, focus);
        let id = self.id();
        let mut out = Vec::with_capacity(ann.len());
        for (i, (a, f)) in ann.iter().zip(fu).enumerate() {
            let mut r = a + &f;
            let s = self.lp.new_var(format!("a{id}_{i}"), true);
            r.add_term(s, &Rat::one());
            out.push(r);
        }
        self.compact(out)
    }

    /// Constrains `hi ⪰ lo` under `ctx`: `hi - lo - Σ u_F·F ≥ 0` per coordinate.
    fn le_under(&mut self, lo: &Ann, hi: &Ann, ctx: &LinCtx) {
        if ctx.is_bottom() {
            return;
        }
        let fu = self.rewrite_sum(ctx, None);
        for i in 0..self.n() {
            let row = &(&hi[i] - &lo[i]) - &fu[i];
            self.lp.add_ge(row);
        }
    }

    /// Applies substitution columns: `pre_i = Σ_j A_ij·post_j`, forcing the
    /// unstable coordinates of `post` to zero.
    fn substitute(&mut self, post: &Ann, columns: &[(Rat, Vec<Option<Combo>>)]) -> Ann {
        let mut pre = self.zero();
        let n = self.n();
        for j in 0..n {
            if columns.iter().any(|(_, cols)| cols[j].is_none()) {
                self.lp.add_eq(post[j].clone());
                continue;
            }
            for (p, cols) in columns {
                for (i, a) in cols[j].as_ref().unwrap() {
                    pre[*i].add_scaled(&post[j], &(p * a));
                }
            }
        }
        pre
    }

    fn derive(&mut self, c: &Command, post: &Ann) -> Ann {
        let pre_ctx = &self.ctxs.pre[c.label];
        if pre_ctx.is_bottom() {
            return self.zero();
        }
        let pre_ctx = pre_ctx.clone();
        let pre = match &c.kind {
            CmdKind::Skip | CmdKind::Assert(_) => post.clone(),
            CmdKind::Abort => self.zero(),
            CmdKind::Tick(q) => {
                let mut pre = post.clone();
                pre[0].constant += q;
                pre
            }
            CmdKind::Assign(x, e) => {
                let le = LinExpr::from_expr(e);
                let post_ctx = self.ctxs.post[c.label].clone();
                let q = self.weaken(post, &post_ctx, Some(x));
                let cols = self.b.stable_set(x, le.as_ref(), &pre_ctx);
                let core = self.substitute(&q, &[(Rat::one(), cols)]);
                self.weaken(&core, &pre_ctx, Some(x))
            }
            CmdKind::Sample(x, e, op, d) => {
                let le = LinExpr::from_expr(e);
                let post_ctx = self.ctxs.post[c.label].clone();
                let q = self.weaken(post, &post_ctx, Some(x));
                let columns: Vec<(Rat, Vec<Option<Combo>>)> = dist_support(d)
                    .into_iter()
                    .map(|(v, p)| {
                        let img = le.as_ref().map(|le| match op {
                            SampleOp::Add => le.plus_const(&Rat::from_integer(v.into())),
                            SampleOp::Sub => le.plus_const(&Rat::from_integer((-v).into())),
                        });
                        (p, self.b.stable_set(x, img.as_ref(), &pre_ctx))
                    })
                    .collect();
                let core = self.substitute(&q, &columns);
                let core = self.compact(core);
                self.weaken(&core, &pre_ctx, Some(x))
            }
            CmdKind::ProbIf(p, a, b) => {
                let pa = self.derive(a, post);
                let pb = self.derive(b, post);
                let q = Rat::one() - p;
                let pre: Ann = pa
                    .iter()
                    .zip(&pb)
                    .map(|(l, r)| &l.scaled(p) + &r.scaled(&q))
                    .collect();
                let pre = self.compact(pre);
                self.probifs.push(ProbIfRecord {
                    label: c.label,
                    p: p.clone(),
                    pre: pre.clone(),
                    left: pa,
                    right: pb,
                });
                pre
            }
            CmdKind::NonDet(a, b) | CmdKind::If(_, a, b) => {
                let pa = self.derive(a, post);
                let pb = self.derive(b, post);
                let q = self.fresh("j", false);
                let (ca, cb) = (
                    self.ctxs.pre[a.label].clone(),
                    self.ctxs.pre[b.label].clone(),
                );
                self.le_under(&pa, &q, &ca);
                self.le_under(&pb, &q, &cb);
                q
            }
            CmdKind::Seq(cs) => {
                let mut cur = post.clone();
                for s in cs.iter().rev() {
                    cur = self.derive(s, &cur);
                }
                cur
            }
            CmdKind::While(_, body) => {
                let inv = self.fresh("i", true);
                let pb = self.derive(body, &inv);
                let body_ctx = self.ctxs.pre[body.label].clone();
                self.le_under(&pb, &inv, &body_ctx);
                let exit_ctx = self.ctxs.post[c.label].clone();
                self.le_under(post, &inv, &exit_ctx);
                self.loops.push(LoopRecord {
                    label: c.label,
                    head: inv.clone(),
                    body_post: inv.clone(),
                });
                self.weaken(&inv, &pre_ctx, None)
            }
            CmdKind::Call(p) => {
                let post_ctx = self.ctxs.post[c.label].clone();
                let qc = if post_ctx.is_bottom() {
                    post.clone()
                } else {
                    self.weaken(post, &post_ctx, None)
                };
                let k = self.site_spec[&c.label];
                let (spre, spost) = self.specs[p][k].clone();
                for i in 1..self.n() {
                    self.lp.add_eq(&qc[i] - &spost[i]);
                }
                let frame = &qc[0] - &spost[0];
                self.lp.add_ge(frame.clone());
                let mut pre = spre;
                pre[0] = &pre[0] + &frame;
                pre
            }
        };
        self.out_pre.insert(c.label, pre.clone());
        pre
    }
}

/// Builds the constraint system for a whole program. The root (main's
/// pre-annotation) is a fresh nonnegative vector; main's post is zero.
pub fn derive_program(
    prog: &Program,
    ctxs: &Contexts,
    b: &BaseFnSet,
    rewrites: &[RewriteFn],
    opts: &DeriveOptions,
) -> Derivation {
    let k = opts.specs_per_proc.max(1);
    // Call sites in label order pick specifications round-robin.
    let mut sites: Vec<(Label, String)> = Vec::new();
    prog.walk(&mut |c| {
        if let CmdKind::Call(p) = &c.kind {
            sites.push((c.label, p.clone()));
        }
    });
    sites.sort();
    let mut counters: HashMap<String, usize> = HashMap::new();
    let mut site_spec = HashMap::new();
    for (l, p) in &sites {
        let n = counters.entry(p.clone()).or_insert(0);
        site_spec.insert(*l, *n % k);
        *n += 1;
    }

    let mut d = Deriver {
        ctxs,
        b,
        rewrites,
        lp: LinearProgram::new(),
        applicable: HashMap::new(),
        specs: BTreeMap::new(),
        site_spec,
        out_pre: BTreeMap::new(),
        probifs: Vec::new(),
        loops: Vec::new(),
        next_id: 0,
    };
    for name in prog.procs.keys() {
        let mut v = Vec::new();
        for s in 0..k {
            let pre = d.fresh(&format!("s_{name}{s}_pre"), true);
            let post = d.fresh(&format!("s_{name}{s}_post"), true);
            v.push((pre, post));
        }
        d.specs.insert(name.clone(), v);
    }
    for (name, body) in &prog.procs {
        for s in 0..k {
            let (spre, spost) = d.specs[name][s].clone();
            let got = d.derive(body, &spost);
            d.le_under(&got, &spre, &LinCtx::top());
        }
    }
    let zero = d.zero();
    let core = d.derive(&prog.main, &zero);
    let root = d.fresh("root", true);
    d.le_under(&core, &root, &LinCtx::top());
    Derivation {
        lp: d.lp,
        root,
        pre: d.out_pre,
        probifs: d.probifs,
        loops: d.loops,
        specs: d.specs,
    }
}

/// Human-readable constraint dump (same format as the LP export).
pub fn dump_constraints(d: &Derivation, b: &BaseFnSet) -> String {
    let mut s = String::from("# base functions\n");
    for (i, f) in b.fns.iter().enumerate() {
        s.push_str(&format!("#  b{i} = {f}\n"));
    }
    s.push_str("# root annotation\n");
    for (i, f) in d.root.iter().enumerate() {
        let name = f
            .as_var()
            .map(|v| d.lp.names[v].clone())
            .unwrap_or_else(|| fmt_rat(&f.constant));
        s.push_str(&format!("#  b{i}: {name}\n"));
    }
    s.push_str(&d.lp.to_text());
    s
}
