//! Forward form of the truncated oracle for programs without
//! nondeterminism: an exact distribution over states is pushed through the
//! program, with the same truncation as the backward form (`K` iterations per
//! loop entry, calls nested at most `K` deep).
//!
//! All mass inside a loop has run the same number of iterations, so loop
//! budgets never enter the state; nested loops stay polynomial where the
//! memoized backward recursion needs one entry per budget combination.

use super::ert::{round, EXACT_BITS};
use super::ir::{sample_value, Ir, Node, NodeId};
use super::RuntimeError;
use crate::rat::{one, zero, Rat};
use num_traits::Zero;
use std::collections::HashMap;

type Dist = HashMap<Vec<i64>, Rat>;

struct Fwd<'a> {
    ir: &'a Ir,
    k: u32,
    cap: usize,
    work: usize,
    cost: Rat,
    /// Mass cut off by truncation or lost to rounding.
    residual: Rat,
}

fn add(d: &mut Dist, s: Vec<i64>, m: Rat) {
    if m.is_zero() {
        return;
    }
    match d.get_mut(&s) {
        Some(v) => *v += m,
        None => {
            d.insert(s, m);
        }
    }
}

fn merge(mut a: Dist, b: Dist) -> Dist {
    if a.len() < b.len() {
        return merge(b, a);
    }
    for (s, m) in b {
        add(&mut a, s, m);
    }
    a
}

fn mass(d: &Dist) -> Rat {
    d.values().sum()
}

fn scale(d: &Dist, p: &Rat) -> Dist {
    if p.is_zero() {
        return Dist::new();
    }
    d.iter().map(|(s, m)| (s.clone(), m * p)).collect()
}

fn split(d: Dist, g: &super::ir::CExpr) -> Result<(Dist, Dist), RuntimeError> {
    let (mut yes, mut no) = (Dist::new(), Dist::new());
    for (s, m) in d {
        if g.holds(&s)? {
            yes.insert(s, m);
        } else {
            no.insert(s, m);
        }
    }
    Ok((yes, no))
}

impl Fwd<'_> {
    fn charge(&mut self, n: usize) -> Result<(), RuntimeError> {
        self.work += n;
        if self.work > self.cap {
            return Err(RuntimeError::StateCap(self.cap));
        }
        Ok(())
    }

    /// Adds to the residual, rounding up so its denominator stays bounded.
    fn lose(&mut self, m: Rat) {
        self.residual = round(std::mem::take(&mut self.residual) + m, true);
    }

    /// Rounds masses down where denominators got large; the deficit joins
    /// the residual.
    fn round_down(&mut self, d: &mut Dist) {
        for m in d.values_mut() {
            if m.denom().bits() > EXACT_BITS {
                let r = round(m.clone(), false);
                self.lose(&*m - &r);
                *m = r;
            }
        }
    }

    fn exec(&mut self, id: NodeId, d: Dist, depth: u32) -> Result<Dist, RuntimeError> {
        if d.is_empty() {
            return Ok(d);
        }
        self.charge(d.len())?;
        let ir = self.ir;
        Ok(match &ir.nodes[id] {
            Node::Skip => d,
            Node::Abort => Dist::new(),
            Node::Assert(e) => split(d, e)?.0,
            Node::Tick(_, q) => {
                self.cost = round(std::mem::take(&mut self.cost) + q * mass(&d), false);
                d
            }
            Node::Assign(x, e) => {
                let mut out = Dist::with_capacity(d.len());
                for (mut s, m) in d {
                    s[*x] = e.eval(&s)?;
                    add(&mut out, s, m);
                }
                out
            }
            Node::Sample(x, e, op, smp) => {
                let mut out = Dist::new();
                for (s, m) in d {
                    let base = e.eval(&s)?;
                    for (v, p) in &smp.support {
                        let mut t = s.clone();
                        t[*x] = sample_value(base, *op, *v)?;
                        add(&mut out, t, &m * p);
                    }
                }
                out
            }
            Node::ProbIf(_, p, a, b) => {
                let da = scale(&d, p);
                let db = scale(&d, &(one() - p));
                drop(d);
                let ra = self.exec(*a, da, depth)?;
                let rb = self.exec(*b, db, depth)?;
                merge(ra, rb)
            }
            Node::NonDet(..) => unreachable!("forward oracle needs a nondeterminism-free program"),
            Node::If(g, a, b) => {
                let (yes, no) = split(d, g)?;
                let ra = self.exec(*a, yes, depth)?;
                let rb = self.exec(*b, no, depth)?;
                merge(ra, rb)
            }
            Node::Seq(cs) => {
                let mut d = d;
                for c in cs {
                    d = self.exec(*c, d, depth)?;
                }
                d
            }
            Node::While(g, body) => {
                let mut out = Dist::new();
                let mut cur = d;
                for i in 0..=self.k {
                    let (inside, exit) = split(cur, g)?;
                    out = merge(out, exit);
                    if inside.is_empty() {
                        break;
                    }
                    if i == self.k {
                        self.lose(mass(&inside));
                        break;
                    }
                    cur = self.exec(*body, inside, depth)?;
                    self.round_down(&mut cur);
                }
                out
            }
            Node::Call(body) => {
                if depth >= self.k {
                    self.lose(mass(&d));
                    Dist::new()
                } else {
                    self.exec(*body, d, depth + 1)?
                }
            }
        })
    }
}

/// `(lower, residual)` as in the backward form. Masses are rounded down, so
/// the lower bound needs a nonnegative `f` once rounding kicks in.
pub fn forward(
    ir: &Ir,
    s: Vec<i64>,
    k: u32,
    f: &dyn Fn(&[i64]) -> Rat,
    cap: usize,
) -> Result<(Rat, Rat), RuntimeError> {
    let mut w = Fwd {
        ir,
        k,
        cap,
        work: 0,
        cost: zero(),
        residual: zero(),
    };
    let out = w.exec(ir.main, Dist::from([(s, one())]), 0)?;
    let mut v = w.cost;
    for (s, m) in &out {
        v += m * f(s);
    }
    Ok((v, w.residual))
}
