//! Exact expected cost of the K-unrolled program.
//!
//! Loops run at most `K` iterations per entry and calls nest at most `K`
//! deep; the remaining probability mass is reported as residual. The value is
//! computed backwards over (continuation, state) pairs with memoization, which
//! yields the same number as pushing a state distribution forward.
//!
//! Long chains of probabilistic choices make exact denominators grow without
//! bound (nested loops reach thousands of digits). Once a memoized value's
//! denominator exceeds [`EXACT_BITS`], it is rounded to a dyadic rational:
//! values down, residual masses up. Expected cost is monotone in the values
//! of successor states, so the result stays a lower bound.

use super::ir::{sample_value, Ir, Node, NodeId};
use super::RuntimeError;
use crate::rat::{one, zero, Rat};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use std::collections::HashMap;

/// Denominators up to this size are kept exact.
pub const EXACT_BITS: u64 = 128;
/// Fractional bits kept when rounding.
const ROUND_BITS: usize = 96;

pub(super) fn round(x: Rat, up: bool) -> Rat {
    if x.denom().bits() <= EXACT_BITS {
        return x;
    }
    let scale = BigInt::one() << ROUND_BITS;
    let (q, r) = (x.numer() * &scale).div_mod_floor(x.denom());
    let q = if up && r != BigInt::from(0) { q + 1 } else { q };
    Rat::new(q, scale)
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Frame {
    Exec(NodeId),
    Loop(NodeId, u32),
    Ret,
}

type ContId = u32;
const EMPTY: ContId = 0;

struct Oracle<'a> {
    ir: &'a Ir,
    k: u32,
    f: &'a dyn Fn(&[i64]) -> Rat,
    cap: usize,
    /// Interned continuations: (top, rest, call depth).
    conts: Vec<(Frame, ContId, u32)>,
    intern: HashMap<(Frame, ContId), ContId>,
    memo: HashMap<(ContId, Vec<i64>), (Rat, Rat)>,
}

impl Oracle<'_> {
    fn push(&mut self, fr: Frame, rest: ContId) -> ContId {
        if let Some(&c) = self.intern.get(&(fr, rest)) {
            return c;
        }
        let depth = self.depth(rest) + matches!(fr, Frame::Ret) as u32;
        self.conts.push((fr, rest, depth));
        let id = (self.conts.len() - 1) as ContId;
        self.intern.insert((fr, rest), id);
        id
    }

    fn depth(&self, c: ContId) -> u32 {
        if c == EMPTY {
            0
        } else {
            self.conts[c as usize].2
        }
    }

    fn value(&mut self, c: ContId, s: Vec<i64>) -> Result<(Rat, Rat), RuntimeError> {
        if c == EMPTY {
            return Ok(((self.f)(&s), zero()));
        }
        if let Some(v) = self.memo.get(&(c, s.clone())) {
            return Ok(v.clone());
        }
        let (v, r) = self.step(c, &s)?;
        let v = (round(v, false), round(r, true));
        if self.memo.len() >= self.cap {
            return Err(RuntimeError::StateCap(self.cap));
        }
        self.memo.insert((c, s), v.clone());
        Ok(v)
    }

    fn step(&mut self, c: ContId, s: &[i64]) -> Result<(Rat, Rat), RuntimeError> {
        let (top, rest, _) = self.conts[c as usize];
        let ir = self.ir;
        let id = match top {
            Frame::Ret => return self.value(rest, s.to_vec()),
            Frame::Loop(id, budget) => {
                let Node::While(g, body) = &ir.nodes[id] else {
                    unreachable!()
                };
                if !g.holds(s)? {
                    return self.value(rest, s.to_vec());
                }
                if budget == 0 {
                    return Ok((zero(), one()));
                }
                let after = self.push(Frame::Loop(id, budget - 1), rest);
                let c = self.push(Frame::Exec(*body), after);
                return self.value(c, s.to_vec());
            }
            Frame::Exec(id) => id,
        };
        match &ir.nodes[id] {
            Node::Skip => self.value(rest, s.to_vec()),
            Node::Abort => Ok((zero(), zero())),
            Node::Assert(e) => {
                if e.holds(s)? {
                    self.value(rest, s.to_vec())
                } else {
                    Ok((zero(), zero()))
                }
            }
            Node::Tick(_, q) => {
                let (v, r) = self.value(rest, s.to_vec())?;
                Ok((v + q, r))
            }
            Node::Assign(x, e) => {
                let mut t = s.to_vec();
                t[*x] = e.eval(s)?;
                self.value(rest, t)
            }
            Node::Sample(x, e, op, d) => {
                let base = e.eval(s)?;
                let (mut v, mut r) = (zero(), zero());
                for (val, p) in &d.support {
                    let mut t = s.to_vec();
                    t[*x] = sample_value(base, *op, *val)?;
                    let (vv, rr) = self.value(rest, t)?;
                    v += vv * p;
                    r += rr * p;
                }
                Ok((v, r))
            }
            Node::ProbIf(_, p, a, b) => {
                let ca = self.push(Frame::Exec(*a), rest);
                let cb = self.push(Frame::Exec(*b), rest);
                let (va, ra) = self.value(ca, s.to_vec())?;
                let (vb, rb) = self.value(cb, s.to_vec())?;
                let q = one() - p;
                Ok((va * p + vb * &q, ra * p + rb * &q))
            }
            Node::NonDet(a, b) => {
                let ca = self.push(Frame::Exec(*a), rest);
                let cb = self.push(Frame::Exec(*b), rest);
                let l = self.value(ca, s.to_vec())?;
                let r = self.value(cb, s.to_vec())?;
                Ok(if r.0 > l.0 || (r.0 == l.0 && r.1 > l.1) {
                    r
                } else {
                    l
                })
            }
            Node::If(g, a, b) => {
                let next = if g.holds(s)? { *a } else { *b };
                let c = self.push(Frame::Exec(next), rest);
                self.value(c, s.to_vec())
            }
            Node::Seq(cs) => {
                let mut c = rest;
                for n in cs.iter().rev() {
                    c = self.push(Frame::Exec(*n), c);
                }
                self.value(c, s.to_vec())
            }
            Node::While(..) => {
                let c = self.push(Frame::Loop(id, self.k), rest);
                self.value(c, s.to_vec())
            }
            Node::Call(body) => {
                if self.depth(rest) >= self.k {
                    return Ok((zero(), one()));
                }
                let ret = self.push(Frame::Ret, rest);
                let c = self.push(Frame::Exec(*body), ret);
                self.value(c, s.to_vec())
            }
        }
    }
}

/// Backward form; `cap` bounds the number of memoized entries.
pub(super) fn backward(
    ir: &Ir,
    s: Vec<i64>,
    k: u32,
    f: &dyn Fn(&[i64]) -> Rat,
    cap: usize,
) -> Result<(Rat, Rat), RuntimeError> {
    let mut o = Oracle {
        ir,
        k,
        f,
        cap,
        conts: vec![(Frame::Ret, EMPTY, 0)],
        intern: HashMap::new(),
        memo: HashMap::new(),
    };
    let c = o.push(Frame::Exec(ir.main), EMPTY);
    o.value(c, s)
}

/// Picks the forward form unless the program has nondeterministic choices,
/// which need the maximum over both continuations.
fn solve(
    ir: &Ir,
    s: Vec<i64>,
    k: u32,
    f: &dyn Fn(&[i64]) -> Rat,
    cap: usize,
) -> Result<(Rat, Rat), RuntimeError> {
    if ir.nodes.iter().any(|n| matches!(n, Node::NonDet(..))) {
        backward(ir, s, k, f, cap)
    } else {
        super::fwd::forward(ir, s, k, f, cap)
    }
}

/// Stack size of the worker thread; the recursion is as deep as the longest
/// truncated path.
#[cfg(not(target_arch = "wasm32"))]
const STACK_BYTES: usize = 1 << 30;

#[cfg(not(target_arch = "wasm32"))]
pub fn ert(
    ir: &Ir,
    s: Vec<i64>,
    k: u32,
    f: &(dyn Fn(&[i64]) -> Rat + Sync),
    cap: usize,
) -> Result<(Rat, Rat), RuntimeError> {
    std::thread::scope(|sc| {
        std::thread::Builder::new()
            .stack_size(STACK_BYTES)
            .spawn_scoped(sc, || solve(ir, s, k, f, cap))
            .expect("spawn oracle thread")
            .join()
            .expect("oracle thread panicked")
    })
}

#[cfg(target_arch = "wasm32")]
pub fn ert(
    ir: &Ir,
    s: Vec<i64>,
    k: u32,
    f: &(dyn Fn(&[i64]) -> Rat + Sync),
    cap: usize,
) -> Result<(Rat, Rat), RuntimeError> {
    solve(ir, s, k, f, cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_program;
    use crate::rat::{frac, rat};

    fn both(src: &str, s: &[i64], k: u32) -> ((Rat, Rat), (Rat, Rat)) {
        let ir = Ir::compile(&parse_program(src).unwrap()).unwrap();
        let f = |s: &[i64]| rat(s[0].abs());
        let b = backward(&ir, s.to_vec(), k, &f, 1 << 20).unwrap();
        let w = super::super::fwd::forward(&ir, s.to_vec(), k, &f, 1 << 20).unwrap();
        (b, w)
    }

    #[test]
    fn forward_matches_backward() {
        let progs = [
            ("var x, n; while (x <= n) { x = x + 1 [3/4] x = x - 1; tick(1); }", vec![0, 4]),
            ("var x, y; while (x > 0) { y = x; while (y > 0) { y = y - 1 [1/3] skip; tick(3); } x = x - 1; tick(3); }", vec![3, 0]),
            ("var h, t; while (h <= t) { t = t + 1; h = h + unif(0, 10) [1/2] skip; tick(1); }", vec![0, 3]),
            ("var x; proc f { if (x > 0) { x = x - 1; tick(1); call f; } } main { call f; }", vec![9]),
            ("var x; assert(x > 2); x = x - binomial(3, 1/3); tick(1/2) [1/5] abort;", vec![5]),
            ("var x; assert(x > 2); tick(1);", vec![1]),
        ];
        for (src, s) in progs {
            for k in [0, 1, 3, 7] {
                let (b, w) = both(src, &s, k);
                assert_eq!(b, w, "{src} K={k}");
            }
        }
    }

    #[test]
    fn rounding_is_directed() {
        let x = Rat::new(BigInt::one(), BigInt::from(3).pow(400));
        let (lo, hi) = (round(x.clone(), false), round(x.clone(), true));
        assert!(lo <= x && x <= hi && lo < hi);
        assert!(hi.denom().bits() <= ROUND_BITS as u64 + 1);
        assert_eq!(round(frac(1, 3), false), frac(1, 3));
    }
}
