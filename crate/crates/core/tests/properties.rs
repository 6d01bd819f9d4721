//! Property tests for the module invariants, over the corpus and over
//! randomly generated inputs.

mod common;

use common::{corpus, corpus_names, env_of};
use expcost::analysis::{analyze, AnalysisOptions};
use expcost::bound::Bound;
use expcost::frontend::{dist_support, parse_expr, parse_program, print_program, Dist, Program};
use expcost::logic::{infer_contexts, LinCtx, LinExpr};
use expcost::rat::{frac, one, rat, Rat};
use expcost::runtime::{
    self, ert_cost, ert_truncated, estimate, run_observed, trial_rng, Scheduler, SimConfig, State,
};
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

const VARS: [&str; 4] = ["a", "b", "c", "d"];

// ---- frontend ----

#[test]
fn corpus_round_trips() {
    for name in corpus_names() {
        let p = corpus(&name);
        let q = parse_program(&print_program(&p)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(p, q, "{name}");
    }
}

#[test]
fn corpus_labels_are_contiguous() {
    for name in corpus_names() {
        let p = corpus(&name);
        let mut seen = BTreeSet::new();
        p.walk(&mut |c| assert!(seen.insert(c.label), "{name}: duplicate label {}", c.label));
        assert_eq!(
            seen,
            (0..p.label_count()).collect::<BTreeSet<_>>(),
            "{name}"
        );
    }
}

fn dist_strategy() -> impl Strategy<Value = Dist> {
    let prob = (0i64..=12, 1i64..=12).prop_map(|(a, b)| frac(a.min(b), b));
    prop_oneof![
        prob.clone().prop_map(Dist::Bernoulli),
        (0u64..=15, prob).prop_map(|(n, p)| Dist::Binomial(n, p)),
        (-10i64..=10, 0i64..=12).prop_map(|(a, w)| Dist::Uniform(a, a + w)),
        (0u64..=15, 0u64..=15, 0u64..=15).prop_map(|(n, k, m)| Dist::Hypergeometric(
            n,
            k.min(n),
            m.min(n)
        )),
    ]
}

proptest! {
    #[test]
    fn dist_mass_is_one(d in dist_strategy()) {
        let s = dist_support(&d);
        prop_assert_eq!(s.iter().map(|(_, p)| p.clone()).sum::<Rat>(), one());
        let (lo, hi) = d.bounds();
        prop_assert_eq!(s.first().unwrap().0, lo);
        prop_assert_eq!(s.last().unwrap().0, hi);
    }
}

// ---- logic ----

fn fact_strategy() -> impl Strategy<Value = LinExpr> {
    (prop::collection::vec(-5i64..=5, 4), -5i64..=5).prop_map(|(cs, k)| {
        let mut e = LinExpr::constant(rat(k));
        for (v, c) in VARS.iter().zip(cs) {
            e.add_term(v, &rat(c));
        }
        e
    })
}

fn ctx_strategy() -> impl Strategy<Value = Vec<LinExpr>> {
    prop::collection::vec(fact_strategy(), 0..=4)
}

/// Facts implied by `facts`: a subset, nonnegative pair sums and loosened
/// constants, chosen by `picks`.
fn consequences(facts: &[LinExpr], picks: &[(usize, usize, u8)]) -> Vec<LinExpr> {
    if facts.is_empty() {
        return vec![];
    }
    picks
        .iter()
        .map(|&(i, j, k)| {
            let (f, g) = (&facts[i % facts.len()], &facts[j % facts.len()]);
            match k % 3 {
                0 => f.clone(),
                1 => f.add(g),
                _ => f.plus_const(&rat(i64::from(k))),
            }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn entails_is_reflexive(f in ctx_strategy()) {
        let c = LinCtx::from_facts(f);
        prop_assert!(c.entails_ctx(&c));
        for g in c.ineqs() {
            prop_assert!(c.entails(g));
        }
    }

    #[test]
    fn entails_is_transitive(
        f in ctx_strategy(),
        p1 in prop::collection::vec((0usize..8, 0usize..8, 0u8..6), 0..4),
        p2 in prop::collection::vec((0usize..8, 0usize..8, 0u8..6), 0..4),
        other in ctx_strategy(),
    ) {
        let a = LinCtx::from_facts(f.clone());
        let b = LinCtx::from_facts(consequences(&f, &p1));
        let c = LinCtx::from_facts(consequences(b.ineqs(), &p2));
        prop_assert!(a.entails_ctx(&b));
        prop_assert!(b.entails_ctx(&c));
        prop_assert!(a.entails_ctx(&c));
        // Unrelated triples: whenever both premises hold, so does the conclusion.
        let o = LinCtx::from_facts(other);
        if a.entails_ctx(&o) && o.entails_ctx(&c) {
            prop_assert!(a.entails_ctx(&c));
        }
        if o.entails_ctx(&a) {
            prop_assert!(o.entails_ctx(&c));
        }
    }

    #[test]
    fn assume_is_monotone(f in ctx_strategy(), g in fact_strategy(), strict in any::<bool>()) {
        let c = LinCtx::from_facts(f);
        let text = format!("{} {} 0", lin_text(&g), if strict { ">" } else { ">=" });
        let e = parse_expr(&text).unwrap();
        let d = c.assume(&e);
        for h in c.ineqs() {
            prop_assert!(d.entails(h), "{} lost after assuming {}", lin_text(h), text);
        }
    }
}

fn lin_text(e: &LinExpr) -> String {
    let mut s = e.constant.to_string();
    for (v, c) in &e.terms {
        s.push_str(&format!(" + ({c})*{v}"));
    }
    s
}

fn random_inputs(p: &Program, rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> State {
    p.globals
        .iter()
        .map(|g| (g.clone(), rng.gen_range(lo..=hi)))
        .collect()
}

#[test]
fn inferred_contexts_hold_on_runs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for name in corpus_names() {
        let p = corpus(&name);
        let ctxs = infer_contexts(&p);
        for trial in 0..100 {
            let s0 = random_inputs(&p, &mut rng, 0, 50);
            let mut r = trial_rng(3, trial);
            let mut bad = None;
            run_observed(&p, &s0, Scheduler::Random, &mut r, &mut |l, s| {
                if bad.is_none() && !ctxs.pre[l].satisfied_by(&env_of(s)) {
                    bad = Some((l, s.clone()));
                }
            })
            .unwrap();
            assert!(
                bad.is_none(),
                "{name}: context of {:?} violated, start {s0:?}",
                bad
            );
        }
    }
}

// ---- potential ----

#[test]
fn rewrite_substitution_and_linearity() {
    for degree in [1, 2, 3] {
        let c = common::rewrite_suite(1500, degree, degree as u64);
        assert_eq!(c.violations, 0, "degree {degree}: {c:?}");
    }
}

// ---- derive & bound ----

#[test]
fn solved_annotations_are_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for name in corpus_names() {
        let p = corpus(&name);
        let a = analyze(&p, &AnalysisOptions::default()).unwrap();
        let Some(sol) = &a.solution else { continue };
        let v = &sol.values;
        let d = &a.derivation;
        assert!(!d.probifs.is_empty() || !d.loops.is_empty(), "{name}");
        for r in &d.probifs {
            for i in 0..a.basis.len() {
                let mix = &r.p * r.left[i].eval(v) + (one() - &r.p) * r.right[i].eval(v);
                assert_eq!(
                    r.pre[i].eval(v),
                    mix,
                    "{name}: probabilistic branch {} entry {i}",
                    r.label
                );
            }
        }
        for l in &d.loops {
            let head: Vec<Rat> = l.head.iter().map(|f| f.eval(v)).collect();
            let post: Vec<Rat> = l.body_post.iter().map(|f| f.eval(v)).collect();
            assert_eq!(head, post, "{name}: loop {}", l.label);
        }

        let bound = a.bound.as_ref().unwrap();
        let q: Vec<Rat> = d.root.iter().map(|f| f.eval(v)).collect();
        for _ in 0..100 {
            let s = random_inputs(&p, &mut rng, -20, 20);
            let env = env_of(&s);
            assert_eq!(
                bound.eval(&env),
                expcost::potential::eval_potential(&q, &a.basis, &env),
                "{name} at {s:?}"
            );
        }
        let again = Bound::canonical(bound.terms.clone());
        assert_eq!(&again, bound, "{name}");
        assert_eq!(Bound::canonical(again.terms.clone()), again, "{name}");
        assert!(bound.terms.iter().all(|(c, _)| !c.is_zero()), "{name}");
    }
}

// ---- runtime ----

#[test]
fn truncation_is_monotone_in_k() {
    for (name, input) in [
        ("rdwalk", "x=0,n=4"),
        ("recursive", "l=0,h=4"),
        ("ber", "x=0,n=5"),
        ("pol04", "x=3"),
    ] {
        let p = corpus(name);
        let s0 = runtime::initial_state(&p, &runtime::parse_input(input).unwrap()).unwrap();
        let mut last = Rat::zero();
        for k in 0..=40 {
            let (lo, _) = ert_cost(&p, &s0, k).unwrap();
            assert!(lo >= last, "{name}: K={k} gives {lo} < {last}");
            last = lo;
        }
        assert!(last > Rat::zero(), "{name}");
    }
}

/// A random loop-free, nondeterminism-free command over `x` and `y`.
fn loop_free(rng: &mut ChaCha8Rng, depth: u32) -> String {
    let n = rng.gen_range(1..=3);
    let mut out = String::new();
    for _ in 0..n {
        let k = rng.gen_range(if depth == 0 { 0..5 } else { 0..7 });
        let stmt = match k {
            0 => format!("x = x + {};", rng.gen_range(-3..=3)),
            1 => format!("y = x - y + {};", rng.gen_range(-2..=2)),
            2 => format!("tick({}/{});", rng.gen_range(0..=5), rng.gen_range(1..=4)),
            3 => "x = x + bernoulli(1/3);".into(),
            4 => "y = y - unif(0, 2);".into(),
            5 => format!(
                "{{ {} }} [{}/5] {{ {} }}",
                loop_free(rng, depth - 1),
                rng.gen_range(0..=5),
                loop_free(rng, depth - 1)
            ),
            _ => format!(
                "if (x > {}) {{ {} }} else {{ {} }}",
                rng.gen_range(-3..=3),
                loop_free(rng, depth - 1),
                loop_free(rng, depth - 1)
            ),
        };
        out.push_str(&stmt);
        out.push(' ');
    }
    out
}

fn loop_free_program(seed: u64) -> Program {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let src = format!("var x, y; {}", loop_free(&mut rng, 2));
    parse_program(&src).unwrap_or_else(|e| panic!("{src}: {e}"))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn constants_propagate_through_loop_free_code(
        seed in any::<u64>(), x in -10i64..=10, y in -10i64..=10, kn in 0i64..=20, kd in 1i64..=7,
    ) {
        let p = loop_free_program(seed);
        let s0: State = [("x".to_string(), x), ("y".to_string(), y)].into();
        let k = frac(kn, kd);
        let f = |s: &State| rat(s["x"] * s["x"]) + rat(s["y"].abs());
        let (base, res) = ert_truncated(&p, &s0, 1, &f).unwrap();
        prop_assert!(res.is_zero());
        let kc = k.clone();
        let (shifted, _) = ert_truncated(&p, &s0, 1, &move |s: &State| &kc + f(s)).unwrap();
        prop_assert_eq!(shifted, k + base);
    }
}

#[test]
fn simulator_agrees_with_oracle_on_loop_free_code() {
    let (mut hits, mut total) = (0, 0);
    for prog in 0..10 {
        let p = loop_free_program(1000 + prog);
        let s0: State = [("x".to_string(), 1), ("y".to_string(), 0)].into();
        let (exact, res) = ert_cost(&p, &s0, 1).unwrap();
        assert!(res.is_zero());
        let exact = expcost::rat::to_f64(&exact);
        for seed in 0..20 {
            let e = estimate(
                &p,
                &s0,
                &SimConfig {
                    trials: 400,
                    seed,
                    ..SimConfig::default()
                },
            )
            .unwrap();
            total += 1;
            if (e.mean - exact).abs() <= 4.0 * e.stderr + 1e-9 * exact.abs().max(1.0) {
                hits += 1;
            }
        }
    }
    assert!(hits * 100 >= total * 95, "{hits}/{total} within 4 stderr");
}

#[test]
fn schedulers_agree_without_nondeterminism() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for name in corpus_names() {
        let p = corpus(&name);
        if p.has_nondet() {
            continue;
        }
        for seed in 0..10 {
            let s0 = random_inputs(&p, &mut rng, 0, 20);
            let trace = |sched| {
                let mut t = Vec::new();
                let r = run_observed(&p, &s0, sched, &mut trial_rng(seed, 0), &mut |l, s| {
                    t.push((l, s.clone()))
                })
                .unwrap();
                (t, r.cost, r.state)
            };
            assert_eq!(
                trace(Scheduler::First),
                trace(Scheduler::Random),
                "{name} seed {seed}"
            );
        }
    }
}
