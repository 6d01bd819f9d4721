//! Exact linear programming: problem representation, simplex solver and the
//! degree-by-degree minimization used to pick a bound.

mod form;
mod simplex;

pub use form::LinForm;

use crate::rat::{fmt_rat, Rat};
use num_traits::{One, Signed, Zero};
use std::fmt::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cmp {
    /// form = 0
    Eq,
    /// form >= 0
    Ge,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub form: LinForm,
    pub cmp: Cmp,
}

#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub names: Vec<String>,
    pub nonneg: Vec<bool>,
    pub constraints: Vec<Constraint>,
    pub objective: LinForm,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub values: Vec<Rat>,
    pub objective: Rat,
    pub pivots: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn new_var(&mut self, name: impl Into<String>, nonneg: bool) -> usize {
        self.names.push(name.into());
        self.nonneg.push(nonneg);
        self.names.len() - 1
    }

    pub fn add_eq(&mut self, form: LinForm) {
        self.push(form, Cmp::Eq);
    }

    pub fn add_ge(&mut self, form: LinForm) {
        self.push(form, Cmp::Ge);
    }

    fn push(&mut self, form: LinForm, cmp: Cmp) {
        // Trivial rows are checked eagerly by the solver; keep them so that an
        // inconsistent constant constraint still yields infeasibility.
        if form.is_constant() {
            let ok = match cmp {
                Cmp::Eq => form.constant.is_zero(),
                Cmp::Ge => !form.constant.is_negative(),
            };
            if ok {
                return;
            }
        }
        // A lone nonnegative variable `v >= 0` is implied by its bound.
        if cmp == Cmp::Ge && form.constant.is_zero() && form.terms.len() == 1 {
            let (v, c) = form.terms.iter().next().unwrap();
            if self.nonneg[*v] && c.is_positive() {
                return;
            }
        }
        self.constraints.push(Constraint { form, cmp });
    }

    pub fn solve_min(&self) -> Result<Solution, LpError> {
        if self.num_vars() == 0 {
            for c in &self.constraints {
                let ok = match c.cmp {
                    Cmp::Eq => c.form.constant.is_zero(),
                    Cmp::Ge => !c.form.constant.is_negative(),
                };
                if !ok {
                    return Err(LpError::Infeasible);
                }
            }
            return Ok(Solution {
                values: vec![],
                objective: self.objective.constant.clone(),
                pivots: 0,
            });
        }
        simplex::solve(self)
    }

    /// Text form, one constraint per line; nonnegative variables are listed in
    /// the bounds section, everything else is free.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "minimize: {}", self.form_text(&self.objective));
        let _ = writeln!(s, "subject to:");
        for (i, c) in self.constraints.iter().enumerate() {
            let op = match c.cmp {
                Cmp::Eq => "=",
                Cmp::Ge => ">=",
            };
            let mut lhs = c.form.clone();
            let rhs = -lhs.constant.clone();
            lhs.constant = Rat::zero();
            let _ = writeln!(s, "  c{i}: {} {op} {}", self.form_text(&lhs), fmt_rat(&rhs));
        }
        let _ = writeln!(s, "bounds:");
        for (i, name) in self.names.iter().enumerate() {
            if self.nonneg[i] {
                let _ = writeln!(s, "  {name} >= 0");
            } else {
                let _ = writeln!(s, "  {name} free");
            }
        }
        s
    }

    fn form_text(&self, f: &LinForm) -> String {
        let mut parts = Vec::new();
        for (v, c) in &f.terms {
            let name = &self.names[*v];
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            if mag.is_one() {
                parts.push(format!("{sign} {name}"));
            } else {
                parts.push(format!("{sign} {} {name}", fmt_rat(&mag)));
            }
        }
        if !f.constant.is_zero() || parts.is_empty() {
            let sign = if f.constant.is_negative() { "-" } else { "+" };
            parts.push(format!("{sign} {}", fmt_rat(&f.constant.abs())));
        }
        let joined = parts.join(" ");
        joined
            .strip_prefix("+ ")
            .map(str::to_string)
            .unwrap_or(joined)
    }
}

/// One pass of degree-wise minimization: which root entries to minimize with
/// which weights, and a secondary objective over the same entries that
/// breaks exact ties of the first.
#[derive(Debug, Clone, Default)]
pub struct Pass {
    pub entries: Vec<(usize, Rat)>,
    pub tiebreak: Vec<(usize, Rat)>,
}

fn weighted(root: &[LinForm], entries: &[(usize, Rat)]) -> LinForm {
    let mut obj = LinForm::zero();
    for (i, w) in entries {
        obj.add_scaled(&root[*i], w);
    }
    obj.constant = Rat::zero();
    obj
}

/// Minimizes the weighted passes in order, pinning each pass's solved root
/// values before the next. Each pass continues from the previous optimal
/// basis, which stays feasible under the pins.
pub fn iterative_minimize(
    lp: &LinearProgram,
    root: &[LinForm],
    passes: &[Pass],
) -> Result<Solution, LpError> {
    if lp.num_vars() == 0 || passes.is_empty() {
        let mut lp = lp.clone();
        lp.objective = LinForm::zero();
        return lp.solve_min();
    }
    // Flattened objectives; after each one, `pins[k]` lists the forms whose
    // optimal values get fixed.
    let mut objectives = Vec::new();
    let mut pins: Vec<Vec<LinForm>> = Vec::new();
    for pass in passes {
        let primary = weighted(root, &pass.entries);
        let entry_pins: Vec<LinForm> = pass.entries.iter().map(|(i, _)| root[*i].clone()).collect();
        if pass.tiebreak.is_empty() {
            objectives.push(primary);
            pins.push(entry_pins);
        } else {
            objectives.push(primary.clone());
            pins.push(vec![primary]);
            objectives.push(weighted(root, &pass.tiebreak));
            pins.push(entry_pins);
        }
    }
    let pin = |k: usize, values: &[Rat]| {
        pins[k]
            .iter()
            .map(|f| {
                let mut f = f.clone();
                f.constant -= f.eval(values);
                f
            })
            .filter(|f| !f.is_constant())
            .collect()
    };
    simplex::solve_sequence(lp, &objectives, &pin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{frac, rat};

    fn form(terms: &[(usize, i64)], c: i64) -> LinForm {
        let mut f = LinForm::constant(rat(c));
        for (v, k) in terms {
            f.add_term(*v, &rat(*k));
        }
        f
    }

    #[test]
    fn min_x_with_lower_bound() {
        let mut lp = LinearProgram::new();
        let x = lp.new_var("x", false);
        lp.add_ge(form(&[(x, 1)], -3));
        lp.objective = LinForm::var(x);
        let s = lp.solve_min().unwrap();
        assert_eq!(s.values[x], rat(3));
    }

    #[test]
    fn detects_infeasible() {
        let mut lp = LinearProgram::new();
        let x = lp.new_var("x", false);
        lp.add_ge(form(&[(x, 1)], -1));
        lp.add_ge(form(&[(x, -1)], 0));
        assert_eq!(lp.solve_min(), Err(LpError::Infeasible));
    }

    #[test]
    fn detects_unbounded() {
        let mut lp = LinearProgram::new();
        let x = lp.new_var("x", false);
        lp.add_ge(form(&[(x, -1)], 5));
        lp.objective = LinForm::var(x);
        assert_eq!(lp.solve_min(), Err(LpError::Unbounded));
    }

    #[test]
    fn empty_program() {
        let lp = LinearProgram::new();
        assert_eq!(lp.solve_min().unwrap().values, Vec::<Rat>::new());
    }

    #[test]
    fn fractional_optimum() {
        // min x + y s.t. 3x + 5y >= 3, x - y = 0  -> x = y = 3/8
        let mut lp = LinearProgram::new();
        let x = lp.new_var("x", true);
        let y = lp.new_var("y", true);
        lp.add_ge(form(&[(x, 3), (y, 5)], -3));
        lp.add_eq(form(&[(x, 1), (y, -1)], 0));
        lp.objective = form(&[(x, 1), (y, 1)], 0);
        let s = lp.solve_min().unwrap();
        assert_eq!(s.values, vec![frac(3, 8), frac(3, 8)]);
        assert_eq!(s.objective, frac(3, 4));
    }

    #[test]
    fn pinning_passes() {
        // root = (x, y); x + y >= 2; first minimize y, then x.
        let mut lp = LinearProgram::new();
        let x = lp.new_var("x", true);
        let y = lp.new_var("y", true);
        lp.add_ge(form(&[(x, 1), (y, 1)], -2));
        let root = vec![LinForm::var(x), LinForm::var(y)];
        let passes = vec![
            Pass {
                entries: vec![(1, rat(1))],
                tiebreak: vec![],
            },
            Pass {
                entries: vec![(0, rat(1))],
                tiebreak: vec![],
            },
        ];
        let s = iterative_minimize(&lp, &root, &passes).unwrap();
        assert_eq!(s.values, vec![rat(2), rat(0)]);
    }
}
