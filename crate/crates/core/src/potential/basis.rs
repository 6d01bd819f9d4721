use super::Atom;
use crate::logic::{LinCtx, LinExpr};
use crate::rat::{rat, Rat};
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::{BTreeMap, HashMap};
use std::fmt;

/// Product of atoms (a sorted multiset); the empty product is the constant 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BaseFn {
    pub atoms: Vec<Atom>,
}

impl BaseFn {
    pub fn one() -> Self {
        BaseFn { atoms: vec![] }
    }

    pub fn new(mut atoms: Vec<Atom>) -> Self {
        atoms.sort();
        BaseFn { atoms }
    }

    pub fn degree(&self) -> usize {
        self.atoms.len()
    }

    pub fn eval(&self, env: &dyn Fn(&str) -> Rat) -> Rat {
        self.atoms
            .iter()
            .fold(Rat::one(), |acc, a| acc * a.eval(env))
    }

    pub fn mentions(&self, x: &str) -> bool {
        self.atoms.iter().any(|a| a.mentions(x))
    }
}

impl fmt::Display for BaseFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.atoms.is_empty() {
            return write!(f, "1");
        }
        let mut parts = Vec::new();
        let mut i = 0;
        while i < self.atoms.len() {
            let mut j = i;
            while j < self.atoms.len() && self.atoms[j] == self.atoms[i] {
                j += 1;
            }
            if j - i > 1 {
                parts.push(format!("{}^{}", self.atoms[i], j - i));
            } else {
                parts.push(self.atoms[i].to_string());
            }
            i = j;
        }
        write!(f, "{}", parts.join("·"))
    }
}

/// Linear combination over the entries of a [`BaseFnSet`].
pub type Combo = Vec<(usize, Rat)>;

/// Ordered base-function vector `B`; index 0 is always the constant 1, then
/// every atom, then the products up to `degree` of the atoms marked as
/// factors.
#[derive(Debug, Clone)]
pub struct BaseFnSet {
    pub fns: Vec<BaseFn>,
    pub atoms: Vec<Atom>,
    pub degree: usize,
    /// Atoms favoured when the weighted objective ties (the guard intervals).
    pub preferred: Vec<Atom>,
    index: HashMap<BaseFn, usize>,
    by_width: HashMap<LinExpr, usize>,
}

impl BaseFnSet {
    /// Every atom may appear in products.
    pub fn new(atoms: impl IntoIterator<Item = Atom>, degree: usize) -> Self {
        let atoms: Vec<Atom> = atoms.into_iter().collect();
        Self::with_factors(atoms.clone(), &atoms, degree)
    }

    /// Products of degree >= 2 are formed from `factors` only.
    pub fn with_factors(
        atoms: impl IntoIterator<Item = Atom>,
        factors: &[Atom],
        degree: usize,
    ) -> Self {
        let mut atoms: Vec<Atom> = atoms.into_iter().collect();
        atoms.extend(factors.iter().cloned());
        atoms.sort();
        atoms.dedup();
        let factor: Vec<bool> = atoms.iter().map(|a| factors.contains(a)).collect();
        let mut fns = vec![BaseFn::one()];
        let mut layer: Vec<Vec<usize>> = vec![vec![]];
        for _ in 0..degree {
            let mut next = Vec::new();
            for m in &layer {
                let start = m.last().copied().unwrap_or(0);
                for a in start..atoms.len() {
                    if !m.is_empty() && !(factor[a] && m.iter().all(|i| factor[*i])) {
                        continue;
                    }
                    let mut m2 = m.clone();
                    m2.push(a);
                    next.push(m2);
                }
            }
            for m in &next {
                fns.push(BaseFn {
                    atoms: m.iter().map(|i| atoms[*i].clone()).collect(),
                });
            }
            layer = next;
        }
        let index = fns
            .iter()
            .enumerate()
            .map(|(i, b)| (b.clone(), i))
            .collect();
        let by_width = atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (a.width(), i))
            .collect();
        BaseFnSet {
            fns,
            atoms,
            degree,
            preferred: vec![],
            index,
            by_width,
        }
    }

    pub fn len(&self) -> usize {
        self.fns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fns.is_empty()
    }

    pub fn index_of(&self, b: &BaseFn) -> Option<usize> {
        self.index.get(b).copied()
    }

    pub fn atom_index(&self, a: &Atom) -> Option<usize> {
        self.by_width.get(&a.width()).copied()
    }

    /// Entry index of the degree-1 base function for atom number `a`.
    pub fn atom_fn(&self, a: usize) -> usize {
        self.index[&BaseFn {
            atoms: vec![self.atoms[a].clone()],
        }]
    }

    /// Entry index of the product of the given atom numbers, if in `B`.
    pub fn monomial(&self, atoms: &[usize]) -> Option<usize> {
        let b = BaseFn::new(atoms.iter().map(|i| self.atoms[*i].clone()).collect());
        self.index_of(&b)
    }

    pub fn eval_all(&self, env: &dyn Fn(&str) -> Rat) -> Vec<Rat> {
        let av: Vec<Rat> = self.atoms.iter().map(|a| a.eval(env)).collect();
        self.fns
            .iter()
            .map(|b| {
                b.atoms
                    .iter()
                    .fold(Rat::one(), |acc, a| acc * &av[self.by_width[&a.width()]])
            })
            .collect()
    }

    /// Tie-break cost of an entry: its number of non-preferred atoms.
    pub fn tiebreak(&self, i: usize) -> usize {
        self.fns[i]
            .atoms
            .iter()
            .filter(|a| !self.preferred.contains(a))
            .count()
    }

    /// Objective weight of an entry: product over its atoms of
    /// `10^(number of atoms of B whose interval contains it)`.
    pub fn weight(&self, i: usize) -> Rat {
        let ten = rat(10);
        self.fns[i].atoms.iter().fold(Rat::one(), |acc, a| {
            let n = self.atoms.iter().filter(|b| b.contains(a)).count();
            acc * num_traits::pow(ten.clone(), n)
        })
    }

    /// Expresses `atom[e/x]` as `Σ c·atom_i + c0` (atom number `None` is the
    /// constant), or `None` when this needs facts `ctx` cannot provide.
    fn subst_atom(
        &self,
        a: &Atom,
        x: &str,
        e: &LinExpr,
        ctx: &LinCtx,
    ) -> Option<Vec<(Option<usize>, Rat)>> {
        let w = a.width().substitute(x, e);
        if w.is_constant() {
            let c = if w.constant.is_negative() {
                Rat::zero()
            } else {
                w.constant.clone()
            };
            return Some(vec![(None, c)]);
        }
        if let Some(i) = self.by_width.get(&w) {
            return Some(vec![(Some(*i), Rat::one())]);
        }
        if ctx.entails(&w.scale(&-Rat::one())) {
            return Some(vec![]);
        }
        // |[w]| = |[t]| + k when t >= 0 and t + k >= 0 hold.
        let mut best: Option<(i64, usize)> = None;
        for (i, t) in self.atoms.iter().enumerate() {
            let tw = t.width();
            if tw.terms != w.terms {
                continue;
            }
            let k = &w.constant - &tw.constant;
            let Some(k) = k.to_integer().to_i64().filter(|_| k.is_integer()) else {
                continue;
            };
            if best.map_or(false, |(bk, _)| bk.abs() <= k.abs()) {
                continue;
            }
            if ctx.entails(&tw) && ctx.entails(&w) {
                best = Some((k, i));
            }
        }
        let (k, i) = best?;
        Some(vec![(Some(i), Rat::one()), (None, rat(k))])
    }

    /// `b_j[e/x]` as a combination over `B` (`None` if unstable). A `None`
    /// expression stands for a nonlinear right-hand side.
    pub fn substitute(
        &self,
        j: usize,
        x: &str,
        e: Option<&LinExpr>,
        ctx: &LinCtx,
    ) -> Option<Combo> {
        let b = &self.fns[j];
        if !b.mentions(x) {
            return Some(vec![(j, Rat::one())]);
        }
        let e = e?;
        // Polynomial over atom numbers: sorted monomial -> coefficient.
        let mut poly: BTreeMap<Vec<usize>, Rat> = BTreeMap::new();
        poly.insert(vec![], Rat::one());
        for a in &b.atoms {
            let combo = if a.mentions(x) {
                self.subst_atom(a, x, e, ctx)?
            } else {
                vec![(Some(self.by_width[&a.width()]), Rat::one())]
            };
            let mut next = BTreeMap::new();
            for (m, c) in &poly {
                for (t, k) in &combo {
                    if k.is_zero() {
                        continue;
                    }
                    let mut m2 = m.clone();
                    if let Some(t) = t {
                        m2.push(*t);
                        m2.sort();
                    }
                    let v: &mut Rat = next.entry(m2).or_insert_with(Rat::zero);
                    *v += c * k;
                }
            }
            poly = next;
        }
        let mut out = Vec::new();
        for (m, c) in poly {
            if c.is_zero() {
                continue;
            }
            out.push((self.monomial(&m)?, c));
        }
        out.sort_by_key(|(i, _)| *i);
        Some(out)
    }

    /// Column `j` of the substitution matrix for every entry; `None` marks
    /// an unstable base function.
    pub fn stable_set(&self, x: &str, e: Option<&LinExpr>, ctx: &LinCtx) -> Vec<Option<Combo>> {
        (0..self.len())
            .map(|j| self.substitute(j, x, e, ctx))
            .collect()
    }
}
