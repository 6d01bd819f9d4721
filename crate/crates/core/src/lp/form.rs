use crate::rat::Rat;
use num_traits::Zero;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

/// Affine form `constant + Σ coeff·var` over LP variable indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct LinForm {
    pub terms: BTreeMap<usize, Rat>,
    pub constant: Rat,
}

impl LinForm {
    pub fn zero() -> Self {
        LinForm::default()
    }

    pub fn constant(c: Rat) -> Self {
        LinForm {
            terms: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn var(v: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(v, Rat::from_integer(1.into()));
        LinForm {
            terms,
            constant: Rat::zero(),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Some(v)` if the form is exactly the variable `v`.
    pub fn as_var(&self) -> Option<usize> {
        if self.constant.is_zero() && self.terms.len() == 1 {
            let (v, c) = self.terms.iter().next().unwrap();
            if *c == Rat::from_integer(1.into()) {
                return Some(*v);
            }
        }
        None
    }

    pub fn add_term(&mut self, v: usize, c: &Rat) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(v).or_insert_with(Rat::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&v);
        }
    }

    /// `self += k·other`.
    pub fn add_scaled(&mut self, other: &LinForm, k: &Rat) {
        if k.is_zero() {
            return;
        }
        for (v, c) in &other.terms {
            self.add_term(*v, &(c * k));
        }
        self.constant += &other.constant * k;
    }

    pub fn scaled(&self, k: &Rat) -> LinForm {
        let mut out = LinForm::zero();
        out.add_scaled(self, k);
        out
    }

    pub fn eval(&self, values: &[Rat]) -> Rat {
        self.terms
            .iter()
            .fold(self.constant.clone(), |acc, (v, c)| acc + c * &values[*v])
    }
}

impl Add<&LinForm> for &LinForm {
    type Output = LinForm;
    fn add(self, rhs: &LinForm) -> LinForm {
        let mut out = self.clone();
        out.add_scaled(rhs, &Rat::from_integer(1.into()));
        out
    }
}

impl Sub<&LinForm> for &LinForm {
    type Output = LinForm;
    fn sub(self, rhs: &LinForm) -> LinForm {
        let mut out = self.clone();
        out.add_scaled(rhs, &Rat::from_integer((-1).into()));
        out
    }
}

impl Mul<&Rat> for &LinForm {
    type Output = LinForm;
    fn mul(self, k: &Rat) -> LinForm {
        self.scaled(k)
    }
}

impl Neg for &LinForm {
    type Output = LinForm;
    fn neg(self) -> LinForm {
        self.scaled(&Rat::from_integer((-1).into()))
    }
}
