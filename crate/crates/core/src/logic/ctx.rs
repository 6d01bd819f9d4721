use super::LinExpr;
use crate::frontend::{BinOp, Dist, Expr, SampleOp};
use crate::lp::{LinForm, LinearProgram, LpError};
use crate::rat::Rat;
use num_traits::{One, Signed, Zero};
use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;

/// Above this many facts a context is truncated (dropping facts is sound).
const MAX_FACTS: usize = 48;

/// Conjunction of `expr ≥ 0` facts; `bottom` marks an unreachable point.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct LinCtx {
    ineqs: Vec<LinExpr>,
    bottom: bool,
}

thread_local! {
    static ENTAIL_CACHE: RefCell<HashMap<(Vec<LinExpr>, LinExpr), bool>> = RefCell::new(HashMap::new());
}

/// Minimizes `goal` over the facts: `None` when the facts are infeasible,
/// `Some(None)` when unbounded below.
fn minimize(facts: &[LinExpr], goal: &LinExpr) -> Option<Option<Rat>> {
    let mut lp = LinearProgram::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut form = |e: &LinExpr, lp: &mut LinearProgram| {
        let mut f = LinForm::constant(e.constant.clone());
        for (x, c) in &e.terms {
            let v = *index
                .entry(x.clone())
                .or_insert_with(|| lp.new_var(x.clone(), false));
            f.add_term(v, c);
        }
        f
    };
    for e in facts {
        let f = form(e, &mut lp);
        lp.add_ge(f);
    }
    let obj = form(goal, &mut lp);
    let k = obj.constant.clone();
    lp.objective = obj;
    lp.objective.constant = Rat::zero();
    match lp.solve_min() {
        Ok(s) => Some(Some(s.objective + k)),
        Err(LpError::Unbounded) => Some(None),
        Err(LpError::Infeasible) => None,
    }
}

/// Does every rational point of `facts` satisfy `goal ≥ 0`?
pub fn entails_facts(facts: &[LinExpr], goal: &LinExpr) -> bool {
    if goal.is_constant() && !goal.constant.is_negative() {
        return true;
    }
    // Cheap syntactic check: goal is a fact plus a nonnegative constant.
    for f in facts {
        if f.terms == goal.terms && goal.constant >= f.constant {
            return true;
        }
    }
    let key = (facts.to_vec(), goal.clone());
    if let Some(v) = ENTAIL_CACHE.with(|c| c.borrow().get(&key).copied()) {
        return v;
    }
    let v = match minimize(facts, goal) {
        None => true,
        Some(None) => false,
        Some(Some(m)) => !m.is_negative(),
    };
    ENTAIL_CACHE.with(|c| {
        let mut c = c.borrow_mut();
        if c.len() > 200_000 {
            c.clear();
        }
        c.insert(key, v);
    });
    v
}

impl LinCtx {
    pub fn top() -> Self {
        LinCtx::default()
    }

    pub fn bottom() -> Self {
        LinCtx {
            ineqs: Vec::new(),
            bottom: true,
        }
    }

    pub fn is_bottom(&self) -> bool {
        self.bottom
    }

    pub fn ineqs(&self) -> &[LinExpr] {
        &self.ineqs
    }

    pub fn from_facts(facts: impl IntoIterator<Item = LinExpr>) -> Self {
        let mut c = LinCtx::top();
        for f in facts {
            c.push(f);
        }
        c.check_feasible();
        c.reduce();
        c
    }

    /// Adds `e ≥ 0` without a feasibility check.
    fn push(&mut self, e: LinExpr) {
        if self.bottom {
            return;
        }
        let e = e.normalized();
        if e.is_constant() {
            if e.constant.is_negative() {
                *self = LinCtx::bottom();
            }
            return;
        }
        if let Err(pos) = self.ineqs.binary_search(&e) {
            self.ineqs.insert(pos, e);
        }
    }

    fn check_feasible(&mut self) {
        if self.bottom || self.ineqs.is_empty() {
            return;
        }
        if minimize(&self.ineqs, &LinExpr::default()).is_none() {
            *self = LinCtx::bottom();
        }
    }

    /// `self ∧ e ≥ 0`.
    pub fn with_fact(&self, e: LinExpr) -> LinCtx {
        let mut c = self.clone();
        c.push(e);
        c.check_feasible();
        c.reduce();
        c
    }

    pub fn entails(&self, goal: &LinExpr) -> bool {
        self.bottom || entails_facts(&self.ineqs, goal)
    }

    pub fn entails_ctx(&self, other: &LinCtx) -> bool {
        if self.bottom {
            return true;
        }
        if other.bottom {
            return false;
        }
        other.ineqs.iter().all(|g| self.entails(g))
    }

    pub fn equivalent(&self, other: &LinCtx) -> bool {
        self == other || (self.entails_ctx(other) && other.entails_ctx(self))
    }

    pub fn satisfied_by(&self, env: &dyn Fn(&str) -> Rat) -> bool {
        !self.bottom && self.ineqs.iter().all(|e| !e.eval(env).is_negative())
    }

    /// Removes facts implied by the remaining ones and caps the size.
    fn reduce(&mut self) {
        if self.bottom {
            return;
        }
        let mut i = 0;
        while i < self.ineqs.len() {
            let goal = self.ineqs[i].clone();
            let rest: Vec<LinExpr> = self
                .ineqs
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, e)| e.clone())
                .collect();
            if entails_facts(&rest, &goal) {
                self.ineqs.remove(i);
            } else {
                i += 1;
            }
        }
        self.ineqs.truncate(MAX_FACTS);
    }

    /// Conjoins a boolean condition, or its negation when `positive` is false.
    pub fn assume_cond(&self, e: &Expr, positive: bool) -> LinCtx {
        if self.bottom {
            return self.clone();
        }
        match e {
            Expr::Num(n) => {
                if (*n != 0) == positive {
                    self.clone()
                } else {
                    LinCtx::bottom()
                }
            }
            Expr::Bin(BinOp::And, a, b) if positive => {
                self.assume_cond(a, true).assume_cond(b, true)
            }
            Expr::Bin(BinOp::And, a, b) => {
                self.assume_cond(a, false).join(&self.assume_cond(b, false))
            }
            Expr::Bin(BinOp::Or, a, b) if positive => {
                self.assume_cond(a, true).join(&self.assume_cond(b, true))
            }
            Expr::Bin(BinOp::Or, a, b) => self.assume_cond(a, false).assume_cond(b, false),
            Expr::Bin(op, l, r) if op.is_comparison() => {
                let (Some(l), Some(r)) = (LinExpr::from_expr(l), LinExpr::from_expr(r)) else {
                    return self.clone();
                };
                let op = if positive {
                    *op
                } else {
                    match op {
                        BinOp::Lt => BinOp::Ge,
                        BinOp::Ge => BinOp::Lt,
                        BinOp::Le => BinOp::Gt,
                        BinOp::Gt => BinOp::Le,
                        BinOp::Eq => BinOp::Ne,
                        _ => BinOp::Eq,
                    }
                };
                let one = Rat::one();
                let facts = match op {
                    BinOp::Lt => vec![r.sub(&l).plus_const(&-one)],
                    BinOp::Le => vec![r.sub(&l)],
                    BinOp::Gt => vec![l.sub(&r).plus_const(&-one)],
                    BinOp::Ge => vec![l.sub(&r)],
                    BinOp::Eq => vec![l.sub(&r), r.sub(&l)],
                    _ => vec![],
                };
                let mut c = self.clone();
                for f in facts {
                    c.push(f);
                }
                c.check_feasible();
                c.reduce();
                c
            }
            _ => self.clone(),
        }
    }

    pub fn assume(&self, e: &Expr) -> LinCtx {
        self.assume_cond(e, true)
    }

    pub fn assume_not(&self, e: &Expr) -> LinCtx {
        self.assume_cond(e, false)
    }

    /// Projects `x` out by Fourier–Motzkin elimination.
    pub fn havoc(&self, x: &str) -> LinCtx {
        if self.bottom {
            return self.clone();
        }
        let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for e in &self.ineqs {
            let c = e.coeff(x);
            if c.is_positive() {
                pos.push((e, c));
            } else if c.is_negative() {
                neg.push((e, -c));
            } else {
                rest.push(e.clone());
            }
        }
        if pos.is_empty() && neg.is_empty() {
            return self.clone();
        }
        let mut out = LinCtx::top();
        for e in rest {
            out.push(e);
        }
        for (p, cp) in &pos {
            for (n, cn) in &neg {
                let mut comb = p.scale(cn);
                comb.add_scaled(n, cp);
                comb.terms.remove(x);
                out.push(comb);
            }
        }
        out.reduce();
        out
    }

    /// Strongest linear postcondition of `x := e`.
    pub fn assign(&self, x: &str, e: &Expr) -> LinCtx {
        match LinExpr::from_expr(e) {
            Some(le) => self.assign_lin(x, &le),
            None => self.havoc(x),
        }
    }

    pub fn assign_lin(&self, x: &str, e: &LinExpr) -> LinCtx {
        if self.bottom {
            return self.clone();
        }
        let a = e.coeff(x);
        if !a.is_zero() {
            // Invertible: old x = (x - (e - a·x)) / a.
            let mut rest = e.clone();
            rest.terms.remove(x);
            let inv = LinExpr::var(x).sub(&rest).scale(&a.recip());
            let mut out = LinCtx::top();
            for f in &self.ineqs {
                out.push(f.substitute(x, &inv));
            }
            out.reduce();
            return out;
        }
        let mut out = self.havoc(x);
        let d = LinExpr::var(x).sub(e);
        out.push(d.clone());
        out.push(d.scale(&-Rat::one()));
        out.reduce();
        out
    }

    /// Post-context of `x := e op D`: join of the posts at the support ends.
    pub fn sample(&self, x: &str, e: &Expr, op: SampleOp, d: &Dist) -> LinCtx {
        if self.bottom {
            return self.clone();
        }
        let Some(le) = LinExpr::from_expr(e) else {
            return self.havoc(x);
        };
        let (lo, hi) = d.bounds();
        let at = |v: i64| {
            let v = Rat::from_integer(v.into());
            let shifted = match op {
                SampleOp::Add => le.plus_const(&v),
                SampleOp::Sub => le.plus_const(&-v),
            };
            self.assign_lin(x, &shifted)
        };
        at(lo).join(&at(hi))
    }

    /// Keeps the facts of either side entailed by the other.
    pub fn join(&self, other: &LinCtx) -> LinCtx {
        if self.bottom {
            return other.clone();
        }
        if other.bottom {
            return self.clone();
        }
        let mut out = LinCtx::top();
        for e in &self.ineqs {
            if other.entails(e) {
                out.push(e.clone());
            }
        }
        for e in &other.ineqs {
            if self.entails(e) {
                out.push(e.clone());
            }
        }
        // Facts both sides imply only through a combination, e.g.
        // `h-i >= 0, i-l-1 >= 0` and `h-i-1 >= 0, i-l >= 0` both give `h-l-1 >= 0`.
        for (a, b) in [(self, other), (other, self)] {
            for e in eliminations(&a.ineqs) {
                if b.entails(&e) && !out.entails(&e) {
                    out.push(e);
                }
            }
        }
        out.reduce();
        out
    }

    /// Keeps the facts of `self` that still hold in `next`.
    pub fn widen(&self, next: &LinCtx) -> LinCtx {
        if self.bottom {
            return next.clone();
        }
        if next.bottom {
            return self.clone();
        }
        let mut out = LinCtx::top();
        for e in &self.ineqs {
            if next.entails(e) {
                out.push(e.clone());
            }
        }
        out
    }

    pub fn conj(&self, other: &LinCtx) -> LinCtx {
        if other.bottom {
            return other.clone();
        }
        let mut c = self.clone();
        for e in &other.ineqs {
            c.push(e.clone());
        }
        c.check_feasible();
        c.reduce();
        c
    }
}

/// One Fourier-Motzkin step for every pair of facts with a variable of
/// opposite signs. Skipped on large systems.
fn eliminations(facts: &[LinExpr]) -> Vec<LinExpr> {
    const MAX_FACTS: usize = 24;
    let mut out = Vec::new();
    if facts.len() > MAX_FACTS {
        return out;
    }
    for (i, a) in facts.iter().enumerate() {
        for b in &facts[i + 1..] {
            for (x, ca) in &a.terms {
                let cb = b.coeff(x);
                if ca.is_positive() == cb.is_negative() && !cb.is_zero() {
                    let mut e = a.scale(&cb.abs());
                    e.add_scaled(b, &ca.abs());
                    out.push(e.normalized());
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

impl fmt::Display for LinCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bottom {
            return write!(f, "false");
        }
        if self.ineqs.is_empty() {
            return write!(f, "true");
        }
        let parts: Vec<String> = self.ineqs.iter().map(|e| format!("{e} >= 0")).collect();
        write!(f, "{}", parts.join(", "))
    }
}
