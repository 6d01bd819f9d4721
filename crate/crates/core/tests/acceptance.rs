//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! fails if any criterion fails.

mod common;

use common::corpus;
use expcost::analysis::AnalysisOptions;
use expcost::bound::Bound;
use expcost::frontend::{parse_program, Program};
use expcost::potential::{Atom, BaseFn};
use expcost::rat::{frac, rat, to_f64, Rat};
use expcost::report::{self, AnalysisReport};
use expcost::runtime::{self, ert_truncated, Scheduler, SimConfig, State};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Duration;

type Term<'a> = (Rat, &'a [(&'a str, &'a str)]);

fn bound(terms: &[Term]) -> Bound {
    Bound::canonical(terms.iter().map(|(c, atoms)| {
        let atoms = atoms
            .iter()
            .map(|(lo, hi)| Atom::parse(lo, hi).unwrap())
            .collect();
        (c.clone(), BaseFn::new(atoms))
    }))
}

/// Analysis reports at the default degree, computed once per program.
#[derive(Default)]
struct Cache(BTreeMap<String, AnalysisReport>);

impl Cache {
    fn get(&mut self, name: &str) -> &AnalysisReport {
        self.0.entry(name.to_string()).or_insert_with(|| {
            report::analyze_program(name, &corpus(name), &AnalysisOptions::default())
        })
    }
}

/// Compares the analysis of each named program with its expected bound and
/// time limit.
fn golden(cache: &mut Cache, want: &[(&str, Bound)], limit: Duration) -> Result<String, String> {
    let mut bad = Vec::new();
    let mut slowest = Duration::ZERO;
    for (name, b) in want {
        let r = cache.get(name);
        slowest = slowest.max(r.elapsed);
        if r.bound.as_ref() != Some(b) {
            bad.push(format!(
                "{name}: got {}, want {}",
                r.bound_text(false),
                b.to_text()
            ));
        }
        if r.elapsed >= limit {
            bad.push(format!(
                "{name}: {:.1}s exceeds {}s",
                r.elapsed.as_secs_f64(),
                limit.as_secs()
            ));
        }
    }
    if bad.is_empty() {
        Ok(format!(
            "{} programs exact, slowest {:.2}s",
            want.len(),
            slowest.as_secs_f64()
        ))
    } else {
        Err(bad.join("; "))
    }
}

fn c1_worked_example() -> Result<String, String> {
    let p = parse_program("var x; while (x >= 2) { x = x - 1 [1/3] x = x - 2; tick(1); }").unwrap();
    let r = report::analyze_program("example", &p, &AnalysisOptions::default());
    let want = bound(&[(frac(3, 5), &[("0", "x")])]);
    if r.bound.as_ref() != Some(&want) {
        return Err(format!("got {}", r.bound_text(false)));
    }
    if r.elapsed >= Duration::from_secs(5) {
        return Err(format!("{:.2}s", r.elapsed.as_secs_f64()));
    }
    Ok(format!(
        "{} in {:.3}s",
        want.to_text(),
        r.elapsed.as_secs_f64()
    ))
}

fn c2_linear(cache: &mut Cache) -> Result<String, String> {
    let want = [
        ("ber", bound(&[(rat(2), &[("x", "n")])])),
        ("linear01", bound(&[(frac(3, 5), &[("0", "x")])])),
        ("rdwalk", bound(&[(rat(2), &[("x", "n+1")])])),
        ("sprdwalk", bound(&[(rat(2), &[("x", "n")])])),
        ("miner", bound(&[(frac(15, 2), &[("0", "n")])])),
        (
            "C4B_t13",
            bound(&[(frac(5, 4), &[("0", "x")]), (rat(1), &[("0", "y")])]),
        ),
        ("prdwalk", bound(&[(frac(8, 7), &[("x", "n+4")])])),
        ("race", bound(&[(frac(2, 3), &[("h", "t+9")])])),
    ];
    golden(cache, &want, Duration::from_secs(10))
}

fn c3_polynomial(cache: &mut Cache) -> Result<String, String> {
    let want = [
        ("rdbub", bound(&[(rat(3), &[("0", "n"), ("0", "n")])])),
        (
            "pol04",
            bound(&[
                (frac(9, 2), &[("0", "x"), ("0", "x")]),
                (frac(15, 2), &[("0", "x")]),
            ]),
        ),
        (
            "trader",
            bound(&[
                (rat(5), &[("s_min", "s"), ("s_min", "s")]),
                (rat(10), &[("s_min", "s"), ("0", "s_min")]),
                (rat(5), &[("s_min", "s")]),
            ]),
        ),
    ];
    golden(cache, &want, Duration::from_secs(60))
}

fn input(text: &str) -> State {
    runtime::parse_input(text).unwrap()
}

fn c4_simulation(cache: &mut Cache) -> Result<String, String> {
    let cfg = SimConfig {
        trials: 10_000,
        ..SimConfig::default()
    };
    let b = cache
        .get("rdwalk")
        .bound
        .clone()
        .ok_or("rdwalk has no bound")?;
    let inputs: Vec<State> = [1000, 2000, 3000]
        .iter()
        .map(|n| input(&format!("x=0,n={n}")))
        .collect();
    let rows = report::compare("rdwalk", &corpus("rdwalk"), &b, &inputs, &cfg)
        .map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for r in &rows {
        let e = r.rel_error_pct().ok_or("zero bound")?;
        worst = worst.max(e);
        if e >= 1.0 {
            return Err(format!(
                "rdwalk {}: error {e:.3}%",
                runtime::format_input(&r.input)
            ));
        }
    }
    let srw = corpus("srw");
    let s0 = runtime::initial_state(&srw, &input("x=100")).unwrap();
    let est = runtime::estimate(&srw, &s0, &cfg).map_err(|e| e.to_string())?;
    let dev = 100.0 * (est.mean - 200.0).abs() / 200.0;
    if dev >= 2.0 {
        return Err(format!(
            "walk from 100: mean {:.2} ({dev:.2}% off 200)",
            est.mean
        ));
    }
    Ok(format!(
        "rdwalk worst error {worst:.3}%, walk from 100 mean {:.2} ({dev:.2}% off 200)",
        est.mean
    ))
}

fn c5_soundness(cache: &mut Cache) -> Result<String, String> {
    let cfg = SimConfig {
        trials: 2000,
        ..SimConfig::default()
    };
    let (mut progs, mut rows, mut capped) = (0, 0, 0);
    let mut bad = Vec::new();
    for name in common::corpus_names() {
        let Some(b) = cache.get(&name).bound.clone() else {
            continue;
        };
        progs += 1;
        let p: Program = corpus(&name);
        let inputs = report::random_inputs(&p, 20, 0, 50, 17);
        let res = report::check(&name, &p, &b, &inputs, &cfg, 200, &Scheduler::ALL)
            .map_err(|e| format!("{name}: {e}"))?;
        for r in &res {
            rows += 1;
            capped += r.ert.is_none() as usize;
            if !r.ok() {
                bad.push(r.to_csv());
            }
        }
    }
    if bad.is_empty() {
        Ok(format!(
            "{progs} programs, {rows} rows, 0 violations ({capped} rows past the oracle state cap)"
        ))
    } else {
        Err(format!("{} violations: {}", bad.len(), bad.join(" | ")))
    }
}

fn c6_lp_oracle() -> Result<String, String> {
    let r = common::lp_suite(200, 7);
    if r.mismatches.is_empty() {
        Ok(format!(
            "200 LPs: {} optimal, {} infeasible, {} unbounded, 0 mismatches",
            r.feasible, r.infeasible, r.unbounded
        ))
    } else {
        Err(format!("mismatching cases {:?}", r.mismatches))
    }
}

fn c7_rewrites() -> Result<String, String> {
    let c = common::rewrite_suite(10_000, 2, 42);
    if c.violations == 0 {
        Ok(format!("{} checks, 0 violations", c.checks))
    } else {
        Err(format!("{} of {} checks violated", c.violations, c.checks))
    }
}

fn c8_negative() -> Result<String, String> {
    let p =
        parse_program("var x, n; while (x <= n) { x = x + 1 [1/4] x = x - 1; tick(1); }").unwrap();
    for d in 1..=3 {
        let r = report::analyze_program(
            "rdwalk-1/4",
            &p,
            &AnalysisOptions {
                degree: d,
                ..AnalysisOptions::default()
            },
        );
        if r.bound.is_some() || r.failure.as_deref() != Some(report::no_bound_message(d).as_str()) {
            return Err(format!("degree {d}: {}", r.bound_text(false)));
        }
    }
    Ok("no bound found at degrees 1, 2, 3".into())
}

fn c9_oracle() -> Result<String, String> {
    let p = parse_program("var x; x = x - 1 [3/4] x = x + 1; tick(1);").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let f = |s: &State| rat(2 * s["x"]);
    for _ in 0..50 {
        let x = rng.gen_range(-1000..=1000);
        let (v, res) =
            ert_truncated(&p, &input(&format!("x={x}")), 200, &f).map_err(|e| e.to_string())?;
        if v != rat(2 * x) || !res.is_zero() {
            return Err(format!(
                "x={x}: got {} (residual {})",
                to_f64(&v),
                to_f64(&res)
            ));
        }
    }
    Ok("ert = 2x exactly at 50 random x".into())
}

#[test]
fn acceptance() {
    let mut cache = Cache::default();
    let criteria: Vec<(&str, Box<dyn FnOnce(&mut Cache) -> Result<String, String>>)> = vec![
        ("worked example exact", Box::new(|_| c1_worked_example())),
        ("linear golden set", Box::new(c2_linear)),
        ("polynomial golden set", Box::new(c3_polynomial)),
        ("simulation accuracy", Box::new(c4_simulation)),
        ("soundness suite", Box::new(c5_soundness)),
        ("LP oracle equivalence", Box::new(|_| c6_lp_oracle())),
        (
            "rewrite/substitution soundness",
            Box::new(|_| c7_rewrites()),
        ),
        ("negative case", Box::new(|_| c8_negative())),
        ("oracle regression", Box::new(|_| c9_oracle())),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.into_iter().enumerate() {
        let res = catch_unwind(AssertUnwindSafe(|| f(&mut cache))).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or(e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        match res {
            Ok(d) => println!("criterion {}: PASS {name}: {d}", i + 1),
            Err(d) => {
                println!("criterion {}: FAIL {name}: {d}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
