use crate::frontend::{BinOp, Expr};
use crate::rat::{fmt_rat, rat, Rat};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// `constant + Σ coeff·var` over program variables. Zero terms are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LinExpr {
    pub terms: BTreeMap<String, Rat>,
    pub constant: Rat,
}

impl LinExpr {
    pub fn constant(c: Rat) -> Self {
        LinExpr {
            terms: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn var(x: &str) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(x.to_string(), Rat::one());
        LinExpr {
            terms,
            constant: Rat::zero(),
        }
    }

    /// Linear translation of an arithmetic expression; `None` if nonlinear.
    pub fn from_expr(e: &Expr) -> Option<LinExpr> {
        match e {
            Expr::Var(x) => Some(LinExpr::var(x)),
            Expr::Num(n) => Some(LinExpr::constant(rat(*n))),
            Expr::Bin(op, l, r) => {
                let l = LinExpr::from_expr(l)?;
                let r = LinExpr::from_expr(r)?;
                match op {
                    BinOp::Add => Some(l.add(&r)),
                    BinOp::Sub => Some(l.sub(&r)),
                    BinOp::Mul if l.is_constant() => Some(r.scale(&l.constant)),
                    BinOp::Mul if r.is_constant() => Some(l.scale(&r.constant)),
                    _ => None,
                }
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, x: &str) -> Rat {
        self.terms.get(x).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn add_term(&mut self, x: &str, c: &Rat) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(x.to_string()).or_insert_with(Rat::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(x);
        }
    }

    pub fn add_scaled(&mut self, other: &LinExpr, k: &Rat) {
        for (x, c) in &other.terms {
            self.add_term(x, &(c * k));
        }
        self.constant += &other.constant * k;
    }

    pub fn add(&self, other: &LinExpr) -> LinExpr {
        let mut out = self.clone();
        out.add_scaled(other, &Rat::one());
        out
    }

    pub fn sub(&self, other: &LinExpr) -> LinExpr {
        let mut out = self.clone();
        out.add_scaled(other, &-Rat::one());
        out
    }

    pub fn scale(&self, k: &Rat) -> LinExpr {
        let mut out = LinExpr::default();
        out.add_scaled(self, k);
        out
    }

    pub fn plus_const(&self, k: &Rat) -> LinExpr {
        let mut out = self.clone();
        out.constant += k;
        out
    }

    /// `self[e/x]`.
    pub fn substitute(&self, x: &str, e: &LinExpr) -> LinExpr {
        let c = self.coeff(x);
        if c.is_zero() {
            return self.clone();
        }
        let mut out = self.clone();
        out.terms.remove(x);
        out.add_scaled(e, &c);
        out
    }

    pub fn eval(&self, env: &dyn Fn(&str) -> Rat) -> Rat {
        self.terms
            .iter()
            .fold(self.constant.clone(), |acc, (x, c)| acc + c * env(x))
    }

    pub fn vars(&self) -> impl Iterator<Item = &String> {
        self.terms.keys()
    }

    /// Scales a `≥ 0` fact to coprime integer coefficients. The direction of
    /// the inequality is preserved (the factor is positive).
    pub fn normalized(&self) -> LinExpr {
        let mut lcm = BigInt::one();
        for c in self.terms.values().chain(std::iter::once(&self.constant)) {
            lcm = lcm.lcm(c.denom());
        }
        let mut g = BigInt::zero();
        for c in self.terms.values().chain(std::iter::once(&self.constant)) {
            let n = (c * Rat::from_integer(lcm.clone())).to_integer();
            g = g.gcd(&n);
        }
        if g.is_zero() {
            return LinExpr::default();
        }
        self.scale(&Rat::new(lcm, g))
    }
}

impl fmt::Display for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (x, c) in &self.terms {
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            if mag.is_one() {
                write!(f, "{x}")?;
            } else {
                write!(f, "{}*{x}", fmt_rat(&mag))?;
            }
            first = false;
        }
        if first {
            write!(f, "{}", fmt_rat(&self.constant))?;
        } else if !self.constant.is_zero() {
            let sign = if self.constant.is_negative() {
                "-"
            } else {
                "+"
            };
            write!(f, " {sign} {}", fmt_rat(&self.constant.abs()))?;
        }
        Ok(())
    }
}
