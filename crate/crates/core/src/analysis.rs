//! End-to-end bound inference: contexts → base functions → constraints →
//! degree-wise LP minimization → bound.

use crate::bound::Bound;
use crate::derive::{derive_program, Derivation, DeriveOptions};
use crate::frontend::Program;
use crate::logic::{infer_contexts, Contexts};
use crate::lp::{iterative_minimize, LpError, Pass, Solution};
use crate::potential::{
    gen_base_functions, gen_rewrite_functions, hints_to_rewrites, BaseFnSet, Hint, RewriteFn,
};
use crate::rat::Rat;
use num_traits::One;
use std::time::{Duration, Instant};

#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    pub degree: usize,
    pub specs_per_proc: usize,
    pub hints: Vec<Hint>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            degree: 2,
            specs_per_proc: 1,
            hints: vec![],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    #[error("internal error: objective unbounded (weights must be positive)")]
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub contexts: Contexts,
    pub basis: BaseFnSet,
    pub rewrites: Vec<RewriteFn>,
    pub derivation: Derivation,
    pub solution: Option<Solution>,
    /// `None` when the LP is infeasible: no bound of the requested degree.
    pub bound: Option<Bound>,
    pub elapsed: Duration,
}

impl Analysis {
    pub fn lp_size(&self) -> (usize, usize) {
        (
            self.derivation.lp.num_vars(),
            self.derivation.lp.constraints.len(),
        )
    }
}

/// Objective passes: one per degree from the highest down, then the constant.
/// Exact ties within a degree go to base functions over guard atoms.
pub fn degree_passes(b: &BaseFnSet) -> Vec<Pass> {
    let mut passes = Vec::new();
    for k in (1..=b.degree).rev() {
        let idx: Vec<usize> = (0..b.len()).filter(|i| b.fns[*i].degree() == k).collect();
        if idx.is_empty() {
            continue;
        }
        let entries = idx.iter().map(|&i| (i, b.weight(i))).collect();
        let tiebreak = idx
            .iter()
            .filter(|&&i| b.tiebreak(i) > 0)
            .map(|&i| (i, Rat::from_integer(b.tiebreak(i).into())))
            .collect();
        passes.push(Pass { entries, tiebreak });
    }
    passes.push(Pass {
        entries: vec![(0, Rat::one())],
        tiebreak: vec![],
    });
    passes
}

pub fn analyze(prog: &Program, opts: &AnalysisOptions) -> Result<Analysis, AnalysisError> {
    let start = Instant::now();
    let contexts = infer_contexts(prog);
    let extra: Vec<_> = opts
        .hints
        .iter()
        .flat_map(|h| h.terms.iter().flat_map(|(_, a)| a.iter().cloned()))
        .collect();
    let basis = gen_base_functions(prog, &contexts, opts.degree, &extra);
    let mut rewrites = gen_rewrite_functions(&basis);
    rewrites.extend(hints_to_rewrites(&basis, &opts.hints));
    let derivation = derive_program(
        prog,
        &contexts,
        &basis,
        &rewrites,
        &DeriveOptions {
            specs_per_proc: opts.specs_per_proc,
        },
    );
    let passes = degree_passes(&basis);
    let (solution, bound) = match iterative_minimize(&derivation.lp, &derivation.root, &passes) {
        Ok(s) => {
            let b = Bound::extract(&s.values, &derivation.root, &basis);
            (Some(s), Some(b))
        }
        Err(LpError::Infeasible) => (None, None),
        Err(LpError::Unbounded) => return Err(AnalysisError::Unbounded),
    };
    Ok(Analysis {
        contexts,
        basis,
        rewrites,
        derivation,
        solution,
        bound,
        elapsed: start.elapsed(),
    })
}
