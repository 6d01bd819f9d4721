//! Simplex vs. brute-force vertex enumeration on random small LPs.

mod common;

use expcost::lp::{LinForm, LinearProgram};
use expcost::rat::rat;

#[test]
fn simplex_matches_vertex_enumeration() {
    for seed in [7, 8] {
        let r = common::lp_suite(200, seed);
        assert!(r.mismatches.is_empty(), "seed {seed}: {r:?}");
        assert!(
            r.feasible > 0 && r.infeasible > 0 && r.unbounded > 0,
            "seed {seed}: {r:?}"
        );
    }
}

#[test]
fn solve_is_deterministic() {
    let mut lp = LinearProgram::new();
    let x = lp.new_var("x", true);
    let y = lp.new_var("y", true);
    let mut f = LinForm::constant(rat(-4));
    f.add_term(x, &rat(1));
    f.add_term(y, &rat(1));
    lp.add_ge(f);
    lp.objective = &LinForm::var(x) + &LinForm::var(y);
    assert_eq!(lp.solve_min(), lp.solve_min());
}
