//! Two-phase primal simplex over exact rationals.
//!
//! Pricing is Dantzig's rule; after a run of degenerate pivots the solver
//! switches to Bland's rule for the rest of the phase, which rules out cycling.
//!
//! Entries are machine-word rationals that individually spill into big
//! rationals on overflow, so the arithmetic is exact throughout.

use super::{Cmp, LinForm, LinearProgram, LpError, Solution};
use crate::rat::Rat;
use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;

const DEGENERATE_STREAK_LIMIT: usize = 5000;

#[derive(Debug)]
struct Overflow;

type Res<T> = Result<T, Overflow>;

trait Scalar: Clone + Ord {
    fn from_rat(r: &Rat) -> Res<Self>;
    fn to_rat(&self) -> Rat;
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn is_one(&self) -> bool;
    fn is_pos(&self) -> bool;
    fn is_neg(&self) -> bool;
    fn add(&self, o: &Self) -> Res<Self>;
    fn sub(&self, o: &Self) -> Res<Self>;
    fn mul(&self, o: &Self) -> Res<Self>;
    fn div(&self, o: &Self) -> Res<Self>;
    fn neg(&self) -> Res<Self> {
        Self::zero().sub(self)
    }
}

type Small = Ratio<i128>;

impl Scalar for Small {
    fn from_rat(r: &Rat) -> Res<Self> {
        match (r.numer().to_i128(), r.denom().to_i128()) {
            (Some(n), Some(d)) => Ok(Ratio::new_raw(n, d)),
            _ => Err(Overflow),
        }
    }
    fn to_rat(&self) -> Rat {
        Rat::new_raw(BigInt::from(*self.numer()), BigInt::from(*self.denom()))
    }
    fn zero() -> Self {
        Ratio::from_integer(0)
    }
    fn one() -> Self {
        Ratio::from_integer(1)
    }
    fn is_zero(&self) -> bool {
        *self.numer() == 0
    }
    fn is_one(&self) -> bool {
        *self.numer() == 1 && *self.denom() == 1
    }
    fn is_pos(&self) -> bool {
        *self.numer() > 0
    }
    fn is_neg(&self) -> bool {
        *self.numer() < 0
    }
    fn add(&self, o: &Self) -> Res<Self> {
        self.checked_add(o).ok_or(Overflow)
    }
    fn sub(&self, o: &Self) -> Res<Self> {
        self.checked_sub(o).ok_or(Overflow)
    }
    fn mul(&self, o: &Self) -> Res<Self> {
        self.checked_mul(o).ok_or(Overflow)
    }
    fn div(&self, o: &Self) -> Res<Self> {
        self.checked_div(o).ok_or(Overflow)
    }
}

/// Machine-word rational that spills into a big rational when an operation
/// would overflow, and drops back once the value fits again.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Hybrid {
    S(Small),
    B(Box<Rat>),
}

impl Hybrid {
    fn big(&self) -> Rat {
        match self {
            Hybrid::S(s) => s.to_rat(),
            Hybrid::B(b) => (**b).clone(),
        }
    }

    fn fit(r: Rat) -> Self {
        match Small::from_rat(&r) {
            Ok(s) => Hybrid::S(s),
            Err(Overflow) => Hybrid::B(Box::new(r)),
        }
    }

    fn op(
        &self,
        o: &Self,
        small: fn(&Small, &Small) -> Option<Small>,
        big: fn(Rat, Rat) -> Rat,
    ) -> Self {
        if let (Hybrid::S(a), Hybrid::S(b)) = (self, o) {
            if let Some(v) = small(a, b) {
                return Hybrid::S(v);
            }
        }
        Hybrid::fit(big(self.big(), o.big()))
    }
}

impl PartialOrd for Hybrid {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Hybrid {
    fn cmp(&self, o: &Self) -> Ordering {
        match (self, o) {
            (Hybrid::S(a), Hybrid::S(b)) => a.cmp(b),
            _ => self.big().cmp(&o.big()),
        }
    }
}

impl Scalar for Hybrid {
    fn from_rat(r: &Rat) -> Res<Self> {
        Ok(Hybrid::fit(r.clone()))
    }
    fn to_rat(&self) -> Rat {
        self.big()
    }
    fn zero() -> Self {
        Hybrid::S(<Small as Scalar>::zero())
    }
    fn one() -> Self {
        Hybrid::S(<Small as Scalar>::one())
    }
    fn is_zero(&self) -> bool {
        matches!(self, Hybrid::S(s) if Scalar::is_zero(s))
    }
    fn is_one(&self) -> bool {
        matches!(self, Hybrid::S(s) if Scalar::is_one(s))
    }
    fn is_pos(&self) -> bool {
        match self {
            Hybrid::S(s) => s.is_pos(),
            Hybrid::B(b) => b.is_positive(),
        }
    }
    fn is_neg(&self) -> bool {
        match self {
            Hybrid::S(s) => Scalar::is_neg(s),
            Hybrid::B(b) => b.is_negative(),
        }
    }
    fn add(&self, o: &Self) -> Res<Self> {
        Ok(self.op(o, |a, b| a.checked_add(b), |a, b| a + b))
    }
    fn sub(&self, o: &Self) -> Res<Self> {
        Ok(self.op(o, |a, b| a.checked_sub(b), |a, b| a - b))
    }
    fn mul(&self, o: &Self) -> Res<Self> {
        Ok(self.op(o, |a, b| a.checked_mul(b), |a, b| a * b))
    }
    fn div(&self, o: &Self) -> Res<Self> {
        Ok(self.op(o, |a, b| a.checked_div(b), |a, b| a / b))
    }
}

type SparseRow<T> = Vec<(usize, T)>;

fn entry<T>(row: &SparseRow<T>, col: usize) -> Option<&T> {
    row.binary_search_by_key(&col, |(c, _)| *c)
        .ok()
        .map(|i| &row[i].1)
}

/// `a - f·b`, both sorted by column.
fn axpy<T: Scalar>(a: &SparseRow<T>, f: &T, b: &SparseRow<T>) -> Res<SparseRow<T>> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ca = a.get(i).map(|x| x.0).unwrap_or(usize::MAX);
        let cb = b.get(j).map(|x| x.0).unwrap_or(usize::MAX);
        if ca < cb {
            out.push(a[i].clone());
            i += 1;
        } else if cb < ca {
            out.push((cb, f.mul(&b[j].1)?.neg()?));
            j += 1;
        } else {
            let v = a[i].1.sub(&f.mul(&b[j].1)?)?;
            if !v.is_zero() {
                out.push((ca, v));
            }
            i += 1;
            j += 1;
        }
    }
    Ok(out)
}

struct Tableau<T> {
    rows: Vec<SparseRow<T>>,
    rhs: Vec<T>,
    basis: Vec<usize>,
    ncols: usize,
    /// Columns that may never enter (artificials in phase 2).
    blocked: Vec<bool>,
    d: Vec<T>,
    zval: T,
    pivots: usize,
}

impl<T: Scalar> Tableau<T> {
    fn pivot(&mut self, r: usize, s: usize) -> Res<()> {
        self.pivots += 1;
        let piv = entry(&self.rows[r], s)
            .expect("pivot on zero entry")
            .clone();
        if !piv.is_one() {
            let inv = T::one().div(&piv)?;
            for (_, v) in self.rows[r].iter_mut() {
                *v = v.mul(&inv)?;
            }
            self.rhs[r] = self.rhs[r].mul(&inv)?;
        }
        let prow = std::mem::take(&mut self.rows[r]);
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            if let Some(f) = entry(&self.rows[i], s).cloned() {
                self.rows[i] = axpy(&self.rows[i], &f, &prow)?;
                self.rhs[i] = self.rhs[i].sub(&f.mul(&prhs)?)?;
            }
        }
        let ds = self.d[s].clone();
        if !ds.is_zero() {
            for (c, v) in &prow {
                self.d[*c] = self.d[*c].sub(&ds.mul(v)?)?;
            }
            self.zval = self.zval.add(&ds.mul(&prhs)?)?;
        }
        self.rows[r] = prow;
        self.basis[r] = s;
        Ok(())
    }

    /// Sets reduced costs for cost vector `c` under the current basis.
    fn price(&mut self, c: &[T]) -> Res<()> {
        self.d = c.to_vec();
        self.zval = T::zero();
        for (i, row) in self.rows.iter().enumerate() {
            let cb = &c[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (col, v) in row {
                self.d[*col] = self.d[*col].sub(&cb.mul(v)?)?;
            }
            self.zval = self.zval.add(&cb.mul(&self.rhs[i])?)?;
        }
        Ok(())
    }

    /// Runs primal simplex to optimality; `Ok(false)` on unboundedness.
    fn optimize(&mut self) -> Res<bool> {
        let mut bland = false;
        let mut streak = 0usize;
        loop {
            let mut enter: Option<usize> = None;
            for j in 0..self.ncols {
                if self.blocked[j] || !self.d[j].is_neg() {
                    continue;
                }
                match enter {
                    None => enter = Some(j),
                    Some(e) if !bland && self.d[j] < self.d[e] => enter = Some(j),
                    _ => {}
                }
                if bland {
                    break;
                }
            }
            let Some(s) = enter else { return Ok(true) };
            let mut leave: Option<(usize, T)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let Some(a) = entry(row, s) else { continue };
                if !a.is_pos() {
                    continue;
                }
                let ratio = self.rhs[i].div(a)?;
                let better = match &leave {
                    None => true,
                    Some((l, best)) => match ratio.cmp(best) {
                        Ordering::Less => true,
                        Ordering::Equal => self.basis[i] < self.basis[*l],
                        Ordering::Greater => false,
                    },
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, ratio)) = leave else {
                return Ok(false);
            };
            if ratio.is_zero() {
                streak += 1;
                if streak > DEGENERATE_STREAK_LIMIT {
                    bland = true;
                }
            } else {
                streak = 0;
            }
            self.pivot(r, s)?;
        }
    }

    /// Dual simplex from a dual-feasible basis; `Ok(false)` when the primal is
    /// infeasible.
    fn dual_optimize(&mut self) -> Res<bool> {
        let mut bland = false;
        let mut streak = 0usize;
        loop {
            let mut leave: Option<usize> = None;
            for i in 0..self.rows.len() {
                if !self.rhs[i].is_neg() {
                    continue;
                }
                let better = match leave {
                    None => true,
                    Some(l) if bland => self.basis[i] < self.basis[l],
                    Some(l) => match self.rhs[i].cmp(&self.rhs[l]) {
                        Ordering::Less => true,
                        Ordering::Equal => self.basis[i] < self.basis[l],
                        Ordering::Greater => false,
                    },
                };
                if better {
                    leave = Some(i);
                }
            }
            let Some(r) = leave else { return Ok(true) };
            let mut enter: Option<(usize, T)> = None;
            for (j, a) in &self.rows[r] {
                if self.blocked[*j] || !a.is_neg() {
                    continue;
                }
                let ratio = self.d[*j].div(a)?.neg()?;
                let better = match &enter {
                    None => true,
                    Some((_, best)) => ratio < *best,
                };
                if better {
                    enter = Some((*j, ratio));
                }
            }
            let Some((s, ratio)) = enter else {
                return Ok(false);
            };
            if ratio.is_zero() {
                streak += 1;
                if streak > DEGENERATE_STREAK_LIMIT {
                    bland = true;
                }
            } else {
                streak = 0;
            }
            self.pivot(r, s)?;
        }
    }

    fn column_values(&self) -> Vec<T> {
        let mut colval = vec![T::zero(); self.ncols];
        for (i, b) in self.basis.iter().enumerate() {
            colval[*b] = self.rhs[i].clone();
        }
        colval
    }
}

/// Column layout of the standard-form problem: per original variable, the
/// positive column and (for free variables) the negative one.
struct Layout {
    cols: Vec<(usize, Option<usize>)>,
    ncols_struct: usize,
}

impl Layout {
    fn new(lp: &LinearProgram) -> Self {
        let mut cols = Vec::with_capacity(lp.num_vars());
        let mut next = 0;
        for &nn in &lp.nonneg {
            if nn {
                cols.push((next, None));
                next += 1;
            } else {
                cols.push((next, Some(next + 1)));
                next += 2;
            }
        }
        Layout {
            cols,
            ncols_struct: next,
        }
    }

    fn row<T: Scalar>(&self, form: &LinForm) -> Res<SparseRow<T>> {
        let mut row = Vec::with_capacity(form.terms.len() + 1);
        for (v, c) in &form.terms {
            let (p, neg) = self.cols[*v];
            let c = T::from_rat(c)?;
            if let Some(q) = neg {
                row.push((q, c.neg()?));
            }
            row.push((p, c));
        }
        row.sort_by_key(|x| x.0);
        Ok(row)
    }

    fn costs<T: Scalar>(&self, form: &LinForm, ncols: usize) -> Res<Vec<T>> {
        let mut c = vec![T::zero(); ncols];
        for (v, k) in &form.terms {
            let (p, neg) = self.cols[*v];
            c[p] = T::from_rat(k)?;
            if let Some(q) = neg {
                c[q] = c[p].neg()?;
            }
        }
        Ok(c)
    }

    fn values<T: Scalar>(&self, colval: &[T]) -> Vec<Rat> {
        self.cols
            .iter()
            .map(|(p, neg)| match neg {
                Some(q) => colval[*p].to_rat() - colval[*q].to_rat(),
                None => colval[*p].to_rat(),
            })
            .collect()
    }
}

/// Phase 1: a feasible basis, or `None` if the program is infeasible.
fn feasible<T: Scalar>(lp: &LinearProgram, layout: &Layout) -> Res<Option<Tableau<T>>> {
    // Rows `a·x (- slack) = b` with b >= 0.
    let mut rows: Vec<SparseRow<T>> = Vec::new();
    let mut rhs: Vec<T> = Vec::new();
    let mut basis: Vec<Option<usize>> = Vec::new();
    let mut ncols = layout.ncols_struct;
    for con in &lp.constraints {
        let mut row = layout.row::<T>(&con.form)?;
        let mut b = T::from_rat(&con.form.constant)?.neg()?;
        if row.is_empty() {
            let ok = match con.cmp {
                Cmp::Eq => b.is_zero(),
                Cmp::Ge => !b.is_pos(),
            };
            if !ok {
                return Ok(None);
            }
            continue;
        }
        let mut slack = None;
        if con.cmp == Cmp::Ge {
            row.push((ncols, T::one().neg()?));
            slack = Some(ncols);
            ncols += 1;
        }
        // With b <= 0 the negated row has a +1 slack that can start basic.
        if b.is_neg() || (b.is_zero() && slack.is_some()) {
            for (_, v) in row.iter_mut() {
                *v = v.neg()?;
            }
            b = b.neg()?;
        }
        let basic = slack.filter(|s| entry(&row, *s).map(|v| v.is_pos()).unwrap_or(false));
        rows.push(row);
        rhs.push(b);
        basis.push(basic);
    }
    let first_art = ncols;
    let mut basis_cols = Vec::with_capacity(rows.len());
    for (i, b) in basis.iter().enumerate() {
        match b {
            Some(c) => basis_cols.push(*c),
            None => {
                rows[i].push((ncols, T::one()));
                basis_cols.push(ncols);
                ncols += 1;
            }
        }
    }
    let mut t = Tableau {
        rows,
        rhs,
        basis: basis_cols,
        ncols,
        blocked: vec![false; ncols],
        d: vec![T::zero(); ncols],
        zval: T::zero(),
        pivots: 0,
    };
    // Crash: rows with a zero right-hand side take any structural column into
    // the basis; pivoting on such a row leaves the basic solution unchanged.
    let mut count = vec![0usize; first_art];
    for row in &t.rows {
        for (c, _) in row {
            if *c < first_art {
                count[*c] += 1;
            }
        }
    }
    let mut r = 0;
    while r < t.rows.len() {
        if t.basis[r] >= first_art && t.rhs[r].is_zero() {
            let col = t.rows[r]
                .iter()
                .filter(|(c, _)| *c < first_art)
                .min_by_key(|(c, _)| (count[*c], *c))
                .map(|(c, _)| *c);
            match col {
                Some(c) => t.pivot(r, c)?,
                None => {
                    t.rows.swap_remove(r);
                    t.rhs.swap_remove(r);
                    t.basis.swap_remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }
    let mut active = vec![false; ncols];
    for b in &t.basis {
        active[*b] = true;
    }
    for c in first_art..ncols {
        t.blocked[c] = !active[c];
    }
    if t.basis.iter().any(|b| *b >= first_art) {
        let mut c1 = vec![T::zero(); ncols];
        for c in c1.iter_mut().skip(first_art) {
            *c = T::one();
        }
        t.price(&c1)?;
        let bounded = t.optimize()?;
        assert!(bounded, "phase 1 is bounded below");
        if t.zval.is_pos() {
            return Ok(None);
        }
        // Drive remaining (zero-valued) artificials out of the basis.
        let mut r = 0;
        while r < t.rows.len() {
            if t.basis[r] >= first_art {
                let col = t.rows[r]
                    .iter()
                    .find(|(c, _)| *c < first_art)
                    .map(|(c, _)| *c);
                match col {
                    Some(c) => t.pivot(r, c)?,
                    None => {
                        // Redundant constraint.
                        t.rows.swap_remove(r);
                        t.rhs.swap_remove(r);
                        t.basis.swap_remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
        for b in t.blocked.iter_mut().skip(first_art) {
            *b = true;
        }
    }
    Ok(Some(t))
}

/// Dual start for nonnegative costs `c`: every `>=` row starts with its slack
/// basic (possibly at a negative value) and every equality row pivots in a
/// zero-cost column. Returns `None` when the resulting basis is not dual
/// feasible; the caller then falls back on the two-phase method.
fn dual_start<T: Scalar>(
    lp: &LinearProgram,
    layout: &Layout,
    obj: &LinForm,
) -> Res<Option<Result<Tableau<T>, LpError>>> {
    if obj.terms.values().any(|v| v.is_negative()) {
        return Ok(None);
    }
    let mut rows: Vec<SparseRow<T>> = Vec::new();
    let mut rhs: Vec<T> = Vec::new();
    let mut basis: Vec<usize> = Vec::new();
    let mut ncols = layout.ncols_struct;
    let mut pending = Vec::new();
    for con in &lp.constraints {
        let row = layout.row::<T>(&con.form)?;
        let b = T::from_rat(&con.form.constant)?.neg()?;
        if row.is_empty() {
            let ok = match con.cmp {
                Cmp::Eq => b.is_zero(),
                Cmp::Ge => !b.is_pos(),
            };
            if !ok {
                return Ok(Some(Err(LpError::Infeasible)));
            }
            continue;
        }
        match con.cmp {
            Cmp::Ge => {
                // -a·x + s = -b
                let mut row: SparseRow<T> = row
                    .into_iter()
                    .map(|(c, v)| v.neg().map(|v| (c, v)))
                    .collect::<Res<_>>()?;
                row.push((ncols, T::one()));
                basis.push(ncols);
                ncols += 1;
                rows.push(row);
                rhs.push(b.neg()?);
            }
            Cmp::Eq => {
                pending.push(rows.len());
                basis.push(usize::MAX);
                rows.push(row);
                rhs.push(b);
            }
        }
    }
    let c = layout.costs::<T>(obj, ncols)?;
    let mut count = vec![0usize; ncols];
    for row in &rows {
        for (col, _) in row {
            count[*col] += 1;
        }
    }
    let mut t = Tableau {
        rows,
        rhs,
        basis,
        ncols,
        blocked: vec![false; ncols],
        d: c.clone(),
        zval: T::zero(),
        pivots: 0,
    };
    // Equality rows are pivoted in order; removed rows shift the later ones,
    // so walk from the back.
    for &r in pending.iter().rev() {
        let col = t.rows[r]
            .iter()
            .min_by_key(|(col, _)| (!c[*col].is_zero(), count[*col], *col))
            .map(|(col, _)| *col);
        match col {
            Some(col) => t.pivot(r, col)?,
            None if t.rhs[r].is_zero() => {
                t.rows.remove(r);
                t.rhs.remove(r);
                t.basis.remove(r);
            }
            None => return Ok(Some(Err(LpError::Infeasible))),
        }
    }
    // Perturbed costs break the ties among the many zero-cost columns; the
    // caller re-prices with the true costs and finishes with primal simplex.
    let mut cp = c.clone();
    let mut basic = vec![false; t.ncols];
    for b in &t.basis {
        basic[*b] = true;
    }
    for (j, v) in cp.iter_mut().enumerate() {
        if basic[j] {
            continue;
        }
        let k = (j as u64).wrapping_mul(2654435761) % 1021 + 1;
        *v = v.add(&T::from_rat(&Rat::new(
            BigInt::from(k),
            BigInt::from(1u64 << 16),
        ))?)?;
    }
    t.price(&cp)?;
    if t.d.iter().any(|v| v.is_neg()) {
        return Ok(None);
    }
    match t.dual_optimize()? {
        true => Ok(Some(Ok(t))),
        false => Ok(Some(Err(LpError::Infeasible))),
    }
}

/// Adds `form = 0`, which the current basic solution already satisfies,
/// keeping the basis primal feasible.
fn add_tight_row<T: Scalar>(t: &mut Tableau<T>, layout: &Layout, form: &LinForm) -> Res<()> {
    let mut row = layout.row::<T>(form)?;
    // Express the row over nonbasic columns; its right-hand side is zero at
    // the current vertex.
    let mut pos_of = vec![usize::MAX; t.ncols];
    for (i, b) in t.basis.iter().enumerate() {
        pos_of[*b] = i;
    }
    while let Some((c, f)) = row.iter().find(|(c, _)| pos_of[*c] != usize::MAX).cloned() {
        row = axpy(&row, &f, &t.rows[pos_of[c]])?;
    }
    let Some(s) = row.iter().find(|(c, _)| !t.blocked[*c]).map(|(c, _)| *c) else {
        // Implied by the current equalities.
        return Ok(());
    };
    // Give the row a placeholder basic column, then pivot it out at zero.
    let art = t.ncols;
    t.ncols += 1;
    t.blocked.push(true);
    t.d.push(T::zero());
    row.push((art, T::one()));
    t.rows.push(row);
    t.rhs.push(T::zero());
    t.basis.push(art);
    t.pivot(t.rows.len() - 1, s)
}

/// Minimizes each objective in turn, adding the equalities returned by `pin`
/// after each one and continuing from the same basis.
fn run<T: Scalar>(
    lp: &LinearProgram,
    objectives: &[LinForm],
    pin: &dyn Fn(usize, &[Rat]) -> Vec<LinForm>,
) -> Res<Result<Solution, LpError>> {
    let layout = Layout::new(lp);
    let first = objectives.first().cloned().unwrap_or_default();
    let mut t = match dual_start::<T>(lp, &layout, &first)? {
        Some(Ok(t)) => t,
        Some(Err(e)) => return Ok(Err(e)),
        None => match feasible::<T>(lp, &layout)? {
            Some(t) => t,
            None => return Ok(Err(LpError::Infeasible)),
        },
    };
    let mut values = layout.values(&t.column_values());
    for (k, obj) in objectives.iter().enumerate() {
        if k > 0 {
            for form in pin(k - 1, &values) {
                add_tight_row(&mut t, &layout, &form)?;
            }
        }
        let c = layout.costs::<T>(obj, t.ncols)?;
        t.price(&c)?;
        if !t.optimize()? {
            return Ok(Err(LpError::Unbounded));
        }
        values = layout.values(&t.column_values());
    }
    let objective = objectives
        .last()
        .map(|o| o.eval(&values))
        .unwrap_or_else(<Rat as Zero>::zero);
    Ok(Ok(Solution {
        values,
        objective,
        pivots: t.pivots,
    }))
}

/// Lexicographic minimization: objective `k+1` is minimized subject to the
/// equalities `pin(k, optimum_k)`, which must hold at the `k`-th optimum.
pub(super) fn solve_sequence(
    lp: &LinearProgram,
    objectives: &[LinForm],
    pin: &dyn Fn(usize, &[Rat]) -> Vec<LinForm>,
) -> Result<Solution, LpError> {
    run::<Hybrid>(lp, objectives, pin).expect("hybrid arithmetic does not overflow")
}

pub fn solve(lp: &LinearProgram) -> Result<Solution, LpError> {
    solve_sequence(lp, std::slice::from_ref(&lp.objective), &|_, _| Vec::new())
}
