//! Executable cost semantics: a Monte-Carlo simulator and a truncated exact
//! expected-cost oracle.

mod ert;
mod fwd;
pub mod ir;
mod sim;

use crate::bound::Bound;
use crate::frontend::{Label, Program};
use crate::rat::{rat, to_f64, Rat};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

pub use ir::Ir;
pub use sim::{trial_rng, Outcome};

pub type State = BTreeMap<String, i64>;

pub const DEFAULT_STEP_LIMIT: u64 = 10_000_000;
pub const DEFAULT_STATE_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RuntimeError {
    #[error("integer overflow")]
    Overflow,
    #[error("division by zero")]
    DivisionByZero,
    #[error("oracle exceeded its state cap ({0})")]
    StateCap(usize),
    #[error("bad input '{0}': expected name=integer pairs separated by commas")]
    BadInput(String),
    #[error("unknown variable '{0}' in input")]
    UnknownVar(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheduler {
    /// Always the first branch of `if (*)`.
    #[default]
    First,
    Second,
    /// Fair coin per decision.
    Random,
}

impl Scheduler {
    pub const ALL: [Scheduler; 3] = [Scheduler::First, Scheduler::Second, Scheduler::Random];
}

impl FromStr for Scheduler {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "first" => Ok(Scheduler::First),
            "second" => Ok(Scheduler::Second),
            "random" => Ok(Scheduler::Random),
            _ => Err(format!("unknown scheduler '{s}' (first|second|random)")),
        }
    }
}

impl fmt::Display for Scheduler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheduler::First => "first",
            Scheduler::Second => "second",
            Scheduler::Random => "random",
        })
    }
}

/// Parses `x=0,n=100`. Whitespace is ignored; an empty string is the empty map.
pub fn parse_input(text: &str) -> Result<State, RuntimeError> {
    let mut st = State::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| RuntimeError::BadInput(part.into()))?;
        let v: i64 = v
            .trim()
            .parse()
            .map_err(|_| RuntimeError::BadInput(part.into()))?;
        st.insert(k.trim().to_string(), v);
    }
    Ok(st)
}

pub fn format_input(st: &State) -> String {
    st.iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// Completes `st` over the program globals (missing ones are 0) and rejects
/// names the program does not declare.
pub fn initial_state(p: &Program, st: &State) -> Result<State, RuntimeError> {
    if let Some(k) = st.keys().find(|k| !p.globals.contains(k)) {
        return Err(RuntimeError::UnknownVar(k.clone()));
    }
    Ok(p.globals
        .iter()
        .map(|g| (g.clone(), st.get(g).copied().unwrap_or(0)))
        .collect())
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub cost: Rat,
    pub state: State,
    pub steps: u64,
    pub outcome: Outcome,
}

pub fn run_once(
    p: &Program,
    s0: &State,
    sched: Scheduler,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<RunResult, RuntimeError> {
    let ir = Ir::compile(p)?;
    let r = sim::run(&ir, ir.state_of(s0), sched, rng, DEFAULT_STEP_LIMIT, None)?;
    Ok(RunResult {
        cost: ir.cost(r.units),
        state: ir.named(&r.state),
        steps: r.steps,
        outcome: r.outcome,
    })
}

/// Like [`run_once`] but reports `(label, state)` before every command.
pub fn run_observed(
    p: &Program,
    s0: &State,
    sched: Scheduler,
    rng: &mut rand_chacha::ChaCha8Rng,
    obs: &mut dyn FnMut(Label, &State),
) -> Result<RunResult, RuntimeError> {
    let ir = Ir::compile(p)?;
    let mut named = |l: Label, s: &[i64]| obs(l, &ir.named(s));
    let r = sim::run(
        &ir,
        ir.state_of(s0),
        sched,
        rng,
        DEFAULT_STEP_LIMIT,
        Some(&mut named),
    )?;
    Ok(RunResult {
        cost: ir.cost(r.units),
        state: ir.named(&r.state),
        steps: r.steps,
        outcome: r.outcome,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct SimConfig {
    pub trials: u64,
    pub seed: u64,
    pub scheduler: Scheduler,
    pub step_limit: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            trials: 10_000,
            seed: 0,
            scheduler: Scheduler::First,
            step_limit: DEFAULT_STEP_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SimEstimate {
    pub trials: u64,
    /// Runs cut off at the step limit; not part of the statistics below.
    pub censored: u64,
    /// Runs ended by `abort`; included with the cost accrued so far.
    pub aborted: u64,
    pub mean: f64,
    pub stderr: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Runs `cfg.trials` independent simulations. Trial `i` draws from its own
/// stream, so the result does not depend on how trials are scheduled.
pub fn estimate(p: &Program, s0: &State, cfg: &SimConfig) -> Result<SimEstimate, RuntimeError> {
    let ir = Ir::compile(p)?;
    let s0 = ir.state_of(s0);
    let trials = cfg.trials.max(1);
    let one_trial = |i: u64| {
        let mut rng = trial_rng(cfg.seed, i);
        sim::run(
            &ir,
            s0.clone(),
            cfg.scheduler,
            &mut rng,
            cfg.step_limit,
            None,
        )
        .map(|r| (r.units, r.outcome))
    };
    let runs: Vec<Result<(i128, Outcome), RuntimeError>> = parallel_map(trials, &one_trial);
    let mut costs = Vec::with_capacity(runs.len());
    let (mut censored, mut aborted) = (0, 0);
    for r in runs {
        let (u, o) = r?;
        match o {
            Outcome::Censored => censored += 1,
            Outcome::Aborted => {
                aborted += 1;
                costs.push(u)
            }
            _ => costs.push(u),
        }
    }
    let den = ir.tick_den as f64;
    let xs: Vec<f64> = costs.iter().map(|u| *u as f64 / den).collect();
    Ok(summarize(trials, censored, aborted, xs))
}

fn summarize(trials: u64, censored: u64, aborted: u64, mut xs: Vec<f64>) -> SimEstimate {
    let n = xs.len();
    if n == 0 {
        return SimEstimate {
            trials,
            censored,
            aborted,
            mean: f64::NAN,
            stderr: f64::NAN,
            min: f64::NAN,
            q1: f64::NAN,
            median: f64::NAN,
            q3: f64::NAN,
            max: f64::NAN,
        };
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    // One sample says nothing about the spread.
    let var = if n > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        f64::NAN
    };
    xs.sort_by(f64::total_cmp);
    let q = |t: f64| {
        let h = t * (n - 1) as f64;
        let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
        xs[lo] + (h - lo as f64) * (xs[hi] - xs[lo])
    };
    SimEstimate {
        trials,
        censored,
        aborted,
        mean,
        stderr: (var / n as f64).sqrt(),
        min: xs[0],
        q1: q(0.25),
        median: q(0.5),
        q3: q(0.75),
        max: xs[n - 1],
    }
}

#[cfg(not(target_arch = "wasm32"))]
fn parallel_map<T: Send>(n: u64, f: &(dyn Fn(u64) -> T + Sync)) -> Vec<T> {
    let workers = std::thread::available_parallelism()
        .map_or(1, |w| w.get())
        .min(n as usize)
        .max(1);
    if workers == 1 {
        return (0..n).map(f).collect();
    }
    let chunk = n.div_ceil(workers as u64);
    std::thread::scope(|sc| {
        let hs: Vec<_> = (0..workers as u64)
            .map(|w| {
                let (lo, hi) = (w * chunk, ((w + 1) * chunk).min(n));
                sc.spawn(move || (lo..hi).map(f).collect::<Vec<_>>())
            })
            .collect();
        hs.into_iter()
            .flat_map(|h| h.join().expect("simulation worker panicked"))
            .collect()
    })
}

#[cfg(target_arch = "wasm32")]
fn parallel_map<T: Send>(n: u64, f: &(dyn Fn(u64) -> T + Sync)) -> Vec<T> {
    (0..n).map(f).collect()
}

/// Exact expected cost of the program with loops unrolled `k` times and
/// calls inlined `k` deep, plus `f` on terminal states. Returns
/// `(lower, residual)`: `lower` never exceeds the true expected cost and
/// `residual` is the probability of running into the truncation.
pub fn ert_truncated(
    p: &Program,
    s0: &State,
    k: u32,
    f: &(dyn Fn(&State) -> Rat + Sync),
) -> Result<(Rat, Rat), RuntimeError> {
    ert_with_cap(p, s0, k, f, DEFAULT_STATE_CAP)
}

pub fn ert_with_cap(
    p: &Program,
    s0: &State,
    k: u32,
    f: &(dyn Fn(&State) -> Rat + Sync),
    cap: usize,
) -> Result<(Rat, Rat), RuntimeError> {
    let ir = Ir::compile(p)?;
    let g = |s: &[i64]| f(&ir.named(s));
    ert::ert(&ir, ir.state_of(s0), k, &g, cap)
}

/// The whole-program expected cost (`f = 0`).
pub fn ert_cost(p: &Program, s0: &State, k: u32) -> Result<(Rat, Rat), RuntimeError> {
    ert_truncated(p, s0, k, &|_| crate::rat::zero())
}

pub fn eval_bound(b: &Bound, s: &State) -> Rat {
    b.eval(&|v| rat(s.get(v).copied().unwrap_or(0)))
}

pub fn eval_bound_f64(b: &Bound, s: &State) -> f64 {
    to_f64(&eval_bound(b, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_program;
    use crate::rat::{frac, zero};

    fn st(s: &str) -> State {
        parse_input(s).unwrap()
    }

    fn once(src: &str, s: &str) -> RunResult {
        let p = parse_program(src).unwrap();
        run_once(&p, &st(s), Scheduler::First, &mut trial_rng(1, 0)).unwrap()
    }

    #[test]
    fn tick_costs_its_amount() {
        let r = once("var x; tick(5);", "x=3");
        assert_eq!(
            (r.cost, r.steps, r.outcome),
            (rat(5), 1, Outcome::Terminated)
        );
    }

    #[test]
    fn random_walk_from_zero_costs_nothing() {
        let r = once(
            "var x; while (x > 0) { x = x - 1 [3/4] x = x + 1; tick(1); }",
            "x=0",
        );
        assert_eq!(r.cost, zero());
    }

    #[test]
    fn deterministic_loop() {
        let r = once("var x; x = 2; while (x > 0) { x = x - 1; tick(1); }", "");
        assert_eq!(r.cost, rat(2));
        assert_eq!(r.state["x"], 0);
    }

    #[test]
    fn failed_assert_and_abort_keep_cost() {
        let r = once("var x; tick(2); assert(x > 0); tick(3);", "x=0");
        assert_eq!((r.cost, r.outcome), (rat(2), Outcome::AssertFailed));
        let r = once("var x; tick(1/2); abort; tick(3);", "");
        assert_eq!((r.cost, r.outcome), (frac(1, 2), Outcome::Aborted));
    }

    #[test]
    fn censors_divergence() {
        let p = parse_program("var x; while (true) { tick(1); }").unwrap();
        let cfg = SimConfig {
            trials: 3,
            step_limit: 1000,
            ..SimConfig::default()
        };
        let e = estimate(&p, &State::new(), &cfg).unwrap();
        assert_eq!(e.censored, 3);
        assert!(e.mean.is_nan());
    }

    #[test]
    fn runtime_errors_surface() {
        let p = parse_program("var x, y; x = x div y;").unwrap();
        assert_eq!(
            run_once(&p, &State::new(), Scheduler::First, &mut trial_rng(0, 0)).unwrap_err(),
            RuntimeError::DivisionByZero
        );
        let p = parse_program("var x; x = x * x;").unwrap();
        let e = run_once(
            &p,
            &st("x=9223372036854775807"),
            Scheduler::First,
            &mut trial_rng(0, 0),
        )
        .unwrap_err();
        assert_eq!(e, RuntimeError::Overflow);
    }

    #[test]
    fn euclidean_division() {
        let r = once("var x, y; x = 0 - 7; y = x mod 3; x = x div 2;", "");
        assert_eq!((r.state["x"], r.state["y"]), (-4, 2));
    }

    #[test]
    fn constant_cost_has_no_spread() {
        let p = parse_program("var x; tick(1);").unwrap();
        let e = estimate(
            &p,
            &State::new(),
            &SimConfig {
                trials: 100,
                ..SimConfig::default()
            },
        )
        .unwrap();
        assert_eq!((e.mean, e.stderr, e.min, e.max), (1.0, 0.0, 1.0, 1.0));
    }

    #[test]
    fn fair_coin_cost() {
        let p = parse_program("var x; tick(1) [1/2] skip;").unwrap();
        let e = estimate(
            &p,
            &State::new(),
            &SimConfig {
                trials: 10_000,
                seed: 7,
                ..SimConfig::default()
            },
        )
        .unwrap();
        assert!((e.mean - 0.5).abs() <= 3.0 * e.stderr, "{e:?}");
    }

    #[test]
    fn random_walk_mean() {
        let p =
            parse_program("var x; while (x > 0) { x = x - 1 [3/4] x = x + 1; tick(1); }").unwrap();
        let e = estimate(
            &p,
            &st("x=100"),
            &SimConfig {
                trials: 10_000,
                seed: 3,
                ..SimConfig::default()
            },
        )
        .unwrap();
        assert!((e.mean - 200.0).abs() / 200.0 < 0.02, "{e:?}");
    }

    #[test]
    fn estimates_are_reproducible() {
        let p = parse_program("var x; while (x > 0) { x = x - 1 [1/2] x = x + 1; if (*) tick(1); else tick(2); if (x > 9) x = 0; }")
            .unwrap();
        let cfg = SimConfig {
            trials: 500,
            seed: 11,
            scheduler: Scheduler::Random,
            ..SimConfig::default()
        };
        assert_eq!(
            estimate(&p, &st("x=3"), &cfg).unwrap(),
            estimate(&p, &st("x=3"), &cfg).unwrap()
        );
    }

    #[test]
    fn oracle_tick() {
        let p = parse_program("var x; tick(7/3);").unwrap();
        assert_eq!(
            ert_cost(&p, &State::new(), 0).unwrap(),
            (frac(7, 3), zero())
        );
    }

    #[test]
    fn oracle_invariant_expectation() {
        let p = parse_program("var x; x = x - 1 [3/4] x = x + 1; tick(1);").unwrap();
        let f = |s: &State| rat(2 * s["x"]);
        for x in [-5, 0, 1, 17, 40] {
            let (v, r) = ert_truncated(&p, &st(&format!("x={x}")), 0, &f).unwrap();
            assert_eq!((v, r), (rat(2 * x), zero()));
        }
    }

    #[test]
    fn oracle_truncated_walk() {
        let p =
            parse_program("var x; while (x > 0) { x = x - 1 [3/4] x = x + 1; tick(1); }").unwrap();
        let (v, r) = ert_cost(&p, &st("x=1"), 50).unwrap();
        assert!(v >= frac(19, 10) && v < rat(2), "{}", to_f64(&v));
        assert!(r > zero());
        let (w, _) = ert_cost(&p, &st("x=1"), 60).unwrap();
        assert!(w >= v);
    }

    #[test]
    fn oracle_nondeterminism_takes_max() {
        let p = parse_program("var x; if (*) { tick(1); } else { tick(3) [1/2] skip; }").unwrap();
        assert_eq!(ert_cost(&p, &State::new(), 1).unwrap().0, frac(3, 2));
    }

    #[test]
    fn oracle_truncates_recursion() {
        let p = parse_program(
            "var x; proc f { if (x > 0) { x = x - 1; tick(1); call f; } } main { call f; }",
        )
        .unwrap();
        assert_eq!(ert_cost(&p, &st("x=3"), 5).unwrap(), (rat(3), zero()));
        let (v, r) = ert_cost(&p, &st("x=10"), 5).unwrap();
        assert_eq!((v, r), (rat(5), rat(1)));
    }

    #[test]
    fn oracle_cap() {
        let p = parse_program("var x; while (x > 0) { x = x - unif(0, 2); tick(1); }").unwrap();
        assert_eq!(
            ert_with_cap(&p, &st("x=50"), 200, &|_| zero(), 100).unwrap_err(),
            RuntimeError::StateCap(100)
        );
    }

    #[test]
    fn input_parsing() {
        assert_eq!(
            st("x=0, n=100"),
            State::from([("x".into(), 0), ("n".into(), 100)])
        );
        assert!(parse_input("x").is_err());
        assert!(parse_input("x=a").is_err());
        let p = parse_program("var x, n; skip;").unwrap();
        assert_eq!(initial_state(&p, &st("n=4")).unwrap(), st("x=0,n=4"));
        assert!(initial_state(&p, &st("z=1")).is_err());
    }
}
