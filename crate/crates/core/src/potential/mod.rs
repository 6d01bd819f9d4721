//! Potential functions: interval atoms, the base-function vector, the
//! substitution machinery behind assignments, and rewrite functions.

mod atom;
mod basis;
mod gen;
mod rewrite;

pub use atom::{Atom, Endpoint};
pub use basis::{BaseFn, BaseFnSet, Combo};
pub use gen::{gen_atoms, gen_base_functions};
pub use rewrite::{
    gen_rewrite_functions, hints_to_rewrites, parse_hints, Hint, HintError, RewriteFn,
};

use crate::rat::Rat;

pub fn eval_base(b: &BaseFn, env: &dyn Fn(&str) -> Rat) -> Rat {
    b.eval(env)
}

/// `Φ_Q(σ) = Σ q_i · b_i(σ)`.
pub fn eval_potential(q: &[Rat], b: &BaseFnSet, env: &dyn Fn(&str) -> Rat) -> Rat {
    b.eval_all(env).iter().zip(q).map(|(v, c)| v * c).sum()
}
