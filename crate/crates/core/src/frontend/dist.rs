use super::ast::Dist;
use crate::rat::{binom, fmt_rat, one, rat, zero, Rat};
use num_bigint::BigInt;
use num_traits::{One, Zero};

impl Dist {
    /// Inclusive support bounds.
    pub fn bounds(&self) -> (i64, i64) {
        match self {
            Dist::Bernoulli(_) => (0, 1),
            Dist::Binomial(n, _) => (0, *n as i64),
            Dist::Uniform(a, b) => (*a, *b),
            Dist::Hypergeometric(big_n, k, n) => {
                let lo = (*n as i64 + *k as i64 - *big_n as i64).max(0);
                let hi = (*n).min(*k) as i64;
                (lo, hi)
            }
        }
    }

    /// Parameter sanity; returns a message on failure.
    pub fn validate(&self) -> Result<(), String> {
        let unit = |p: &Rat| *p >= zero() && *p <= one();
        match self {
            Dist::Bernoulli(p) | Dist::Binomial(_, p) if !unit(p) => {
                Err(format!("probability {} outside [0,1]", fmt_rat(p)))
            }
            Dist::Uniform(a, b) if a > b => Err(format!("uniform({a},{b}) has empty support")),
            Dist::Hypergeometric(big_n, k, n) if k > big_n || n > big_n => Err(format!(
                "hypergeometric({big_n},{k},{n}) needs K <= N and n <= N"
            )),
            _ => Ok(()),
        }
    }

    /// Mean of the distribution, exactly.
    pub fn mean(&self) -> Rat {
        dist_support(self)
            .into_iter()
            .map(|(v, p)| rat(v) * p)
            .sum()
    }
}

/// Exact probability mass function over the finite support, ascending values.
/// Values with zero mass (e.g. bernoulli(1)) are kept so the support is the
/// full integer interval.
pub fn dist_support(d: &Dist) -> Vec<(i64, Rat)> {
    match d {
        Dist::Bernoulli(p) => vec![(0, one() - p), (1, p.clone())],
        Dist::Binomial(n, p) => (0..=*n)
            .map(|k| {
                let c = Rat::from_integer(binom(*n, k));
                let q = one() - p;
                (k as i64, c * pow(p, k) * pow(&q, n - k))
            })
            .collect(),
        Dist::Uniform(a, b) => {
            let w = Rat::new(BigInt::one(), BigInt::from(b - a + 1));
            (*a..=*b).map(|v| (v, w.clone())).collect()
        }
        Dist::Hypergeometric(big_n, k, n) => {
            let (lo, hi) = d.bounds();
            let total = binom(*big_n, *n);
            (lo..=hi)
                .map(|i| {
                    let i = i as u64;
                    let num = binom(*k, i) * binom(big_n - k, n - i);
                    (i as i64, Rat::new(num, total.clone()))
                })
                .collect()
        }
    }
}

fn pow(r: &Rat, e: u64) -> Rat {
    let mut acc = Rat::one();
    for _ in 0..e {
        acc *= r;
    }
    acc
}

pub fn mass(support: &[(i64, Rat)]) -> Rat {
    support.iter().fold(Rat::zero(), |acc, (_, p)| acc + p)
}
