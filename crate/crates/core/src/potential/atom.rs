use crate::logic::LinExpr;
use crate::rat::{rat, Rat};
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;

/// Interval endpoint: a variable plus an offset, or a constant (`var = None`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Endpoint {
    pub var: Option<String>,
    pub k: i64,
}

impl Endpoint {
    pub fn lin(&self) -> LinExpr {
        let mut e = LinExpr::constant(rat(self.k));
        if let Some(v) = &self.var {
            e.add_term(v, &Rat::one());
        }
        e
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.var {
            None => write!(f, "{}", self.k),
            Some(v) if self.k == 0 => write!(f, "{v}"),
            Some(v) if self.k > 0 => write!(f, "{v}+{}", self.k),
            Some(v) => write!(f, "{v}-{}", -self.k),
        }
    }
}

/// `|[lo,hi]| = max(0, hi - lo)`.
///
/// Canonical form: an atom is determined by its width `hi - lo`, so the
/// offset lives on `hi` when `lo` is a variable and on `lo` otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub lo: Endpoint,
    pub hi: Endpoint,
}

impl Atom {
    /// The atom whose width is `w`; `None` if `w` is constant or not of the
    /// form `±x + c` / `x - y + c` with an integer `c`.
    pub fn from_width(w: &LinExpr) -> Option<Atom> {
        if !w.constant.is_integer() {
            return None;
        }
        let c = w.constant.to_integer().to_i64()?;
        let (mut hi, mut lo) = (None, None);
        for (x, k) in &w.terms {
            if k.is_one() && hi.is_none() {
                hi = Some(x.clone());
            } else if *k == -Rat::one() && lo.is_none() {
                lo = Some(x.clone());
            } else {
                return None;
            }
        }
        match (lo, hi) {
            (None, None) => None,
            (Some(l), h) => Some(Atom {
                lo: Endpoint { var: Some(l), k: 0 },
                hi: Endpoint { var: h, k: c },
            }),
            (None, Some(h)) => Some(Atom {
                lo: Endpoint { var: None, k: -c },
                hi: Endpoint { var: Some(h), k: 0 },
            }),
        }
    }

    /// Convenience constructor from endpoint strings such as `"x"`, `"n+1"`, `"0"`.
    pub fn parse(lo: &str, hi: &str) -> Option<Atom> {
        let ep = |s: &str| -> Option<LinExpr> {
            let e = crate::frontend::parse_expr(s).ok()?;
            LinExpr::from_expr(&e)
        };
        Atom::from_width(&ep(hi)?.sub(&ep(lo)?))
    }

    pub fn width(&self) -> LinExpr {
        self.hi.lin().sub(&self.lo.lin())
    }

    pub fn mentions(&self, x: &str) -> bool {
        self.lo.var.as_deref() == Some(x) || self.hi.var.as_deref() == Some(x)
    }

    pub fn vars(&self) -> impl Iterator<Item = &String> {
        self.lo.var.iter().chain(self.hi.var.iter())
    }

    pub fn eval(&self, env: &dyn Fn(&str) -> Rat) -> Rat {
        let w = self.width().eval(env);
        if w.is_negative() {
            Rat::zero()
        } else {
            w
        }
    }

    /// Syntactic containment: `self`'s interval includes `other`'s, i.e.
    /// `self.lo <= other.lo` and `other.hi <= self.hi` for equal variables.
    pub fn contains(&self, other: &Atom) -> bool {
        self.lo.var == other.lo.var
            && self.hi.var == other.hi.var
            && self.lo.k <= other.lo.k
            && other.hi.k <= self.hi.k
    }

    fn key(&self) -> (bool, &Option<String>, bool, &Option<String>, i64, i64) {
        (
            self.lo.var.is_none(),
            &self.lo.var,
            self.hi.var.is_none(),
            &self.hi.var,
            self.lo.k,
            self.hi.k,
        )
    }
}

/// Variable-anchored atoms sort first, then by names and offsets.
impl Ord for Atom {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for Atom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|[{},{}]|", self.lo, self.hi)
    }
}
