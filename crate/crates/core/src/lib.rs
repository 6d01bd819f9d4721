//! Expected-cost bound inference for probabilistic imperative programs.

pub mod analysis;
pub mod bound;
pub mod derive;
pub mod frontend;
pub mod logic;
pub mod lp;
pub mod potential;
pub mod rat;
pub mod report;
pub mod runtime;
