//! Solved bounds: extraction from an LP solution, canonical form, text and
//! JSON rendering.

use crate::derive::Ann;
use crate::potential::{Atom, BaseFn, BaseFnSet};
use crate::rat::{fmt_decimal, fmt_rat, parse_rat, Rat};
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use std::collections::BTreeMap;

/// Sum of `coeff · monomial`, degree-descending then by atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bound {
    pub terms: Vec<(Rat, BaseFn)>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed bound JSON: {0}")]
pub struct BoundJsonError(pub String);

impl Bound {
    pub fn zero() -> Self {
        Bound { terms: vec![] }
    }

    /// Merges equal monomials, drops zeros and sorts.
    pub fn canonical(terms: impl IntoIterator<Item = (Rat, BaseFn)>) -> Self {
        let mut m: BTreeMap<BaseFn, Rat> = BTreeMap::new();
        for (c, b) in terms {
            let b = BaseFn::new(b.atoms);
            *m.entry(b).or_insert_with(Rat::zero) += c;
        }
        let mut terms: Vec<(Rat, BaseFn)> = m
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(b, c)| (c, b))
            .collect();
        terms.sort_by(|(_, a), (_, b)| b.degree().cmp(&a.degree()).then_with(|| a.cmp(b)));
        Bound { terms }
    }

    pub fn extract(values: &[Rat], root: &Ann, b: &BaseFnSet) -> Self {
        Bound::canonical(
            root.iter()
                .zip(&b.fns)
                .map(|(f, bf)| (f.eval(values), bf.clone())),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms
            .iter()
            .map(|(_, b)| b.degree())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, env: &dyn Fn(&str) -> Rat) -> Rat {
        self.terms.iter().map(|(c, b)| c * b.eval(env)).sum()
    }

    /// Coefficient of a monomial (zero if absent).
    pub fn coeff(&self, b: &BaseFn) -> Rat {
        self.terms
            .iter()
            .find(|(_, m)| m == b)
            .map(|(c, _)| c.clone())
            .unwrap_or_else(Rat::zero)
    }

    fn render(&self, num: &dyn Fn(&Rat) -> String) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (i, (c, b)) in self.terms.iter().enumerate() {
            let mag = c.abs();
            if i > 0 {
                s.push_str(if c.is_negative() { " - " } else { " + " });
            } else if c.is_negative() {
                s.push('-');
            }
            if b.degree() == 0 {
                s.push_str(&num(&mag));
            } else if mag.is_one() {
                s.push_str(&b.to_string());
            } else {
                s.push_str(&format!("{}·{}", num(&mag), b));
            }
        }
        s
    }

    /// Fractions, e.g. `5/4·|[0,x]| + |[0,y]|`.
    pub fn to_text(&self) -> String {
        self.render(&fmt_rat)
    }

    /// Six significant digits, e.g. `1.14286·|[x,n+4]|`.
    pub fn to_text_decimal(&self) -> String {
        self.render(&|r| fmt_decimal(r, 6))
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(c, b)| {
                let atoms: Vec<Value> = b
                    .atoms
                    .iter()
                    .map(|a| json!({"lo": a.lo.to_string(), "hi": a.hi.to_string()}))
                    .collect();
                json!({"coeff": format!("{}/{}", c.numer(), c.denom()), "atoms": atoms})
            })
            .collect();
        json!({ "terms": terms })
    }

    pub fn from_json(v: &Value) -> Result<Self, BoundJsonError> {
        let err = |m: &str| BoundJsonError(m.to_string());
        let terms = v
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| err("missing `terms` array"))?;
        let mut out = Vec::new();
        for t in terms {
            let c = t
                .get("coeff")
                .and_then(Value::as_str)
                .and_then(parse_rat)
                .ok_or_else(|| err("bad `coeff`"))?;
            let atoms = t
                .get("atoms")
                .and_then(Value::as_array)
                .ok_or_else(|| err("missing `atoms`"))?;
            let mut bs = Vec::new();
            for a in atoms {
                let lo = a
                    .get("lo")
                    .and_then(Value::as_str)
                    .ok_or_else(|| err("bad atom"))?;
                let hi = a
                    .get("hi")
                    .and_then(Value::as_str)
                    .ok_or_else(|| err("bad atom"))?;
                bs.push(Atom::parse(lo, hi).ok_or_else(|| err("bad atom endpoints"))?);
            }
            out.push((c, BaseFn::new(bs)));
        }
        Ok(Bound::canonical(out))
    }
}

impl std::fmt::Display for Bound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_text())
    }
}
