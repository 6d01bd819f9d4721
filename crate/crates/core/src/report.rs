//! Result records shared by the command-line tool and the web demo.

use crate::analysis::{analyze, AnalysisOptions};
use crate::bound::Bound;
use crate::frontend::{parse_program, Program};
use crate::rat::{fmt_decimal, fmt_rat, to_f64, Rat};
use crate::runtime::{
    self, estimate, eval_bound, format_input, RuntimeError, Scheduler, SimConfig, SimEstimate,
    State,
};
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::time::{Duration, Instant};

#[derive(Debug, Clone)]
pub struct AnalysisReport {
    pub program: String,
    pub degree: usize,
    pub bound: Option<Bound>,
    /// Why there is no bound; set exactly when `bound` is `None`.
    pub failure: Option<String>,
    pub lp_vars: usize,
    pub lp_constraints: usize,
    pub elapsed: Duration,
}

pub fn no_bound_message(degree: usize) -> String {
    format!("no bound found of degree ≤ {degree}")
}

impl AnalysisReport {
    pub fn failed(program: &str, degree: usize, why: String, elapsed: Duration) -> Self {
        AnalysisReport {
            program: program.into(),
            degree,
            bound: None,
            failure: Some(why),
            lp_vars: 0,
            lp_constraints: 0,
            elapsed,
        }
    }

    pub fn bound_text(&self, decimal: bool) -> String {
        match (&self.bound, &self.failure) {
            (Some(b), _) if decimal => b.to_text_decimal(),
            (Some(b), _) => b.to_text(),
            (None, Some(f)) => f.clone(),
            (None, None) => String::new(),
        }
    }

    pub fn to_text(&self, decimal: bool) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "program: {}", self.program);
        let _ = writeln!(s, "degree: {}", self.degree);
        let _ = writeln!(s, "bound: {}", self.bound_text(decimal));
        let _ = writeln!(
            s,
            "lp: {} variables, {} constraints",
            self.lp_vars, self.lp_constraints
        );
        let _ = writeln!(s, "time: {:.3}s", self.elapsed.as_secs_f64());
        s
    }

    pub fn to_json(&self) -> Value {
        json!({
            "program": self.program,
            "degree": self.degree,
            "bound": self.bound.as_ref().map(Bound::to_json),
            "bound_text": self.bound.as_ref().map(Bound::to_text),
            "failure": self.failure,
            "lp": {"variables": self.lp_vars, "constraints": self.lp_constraints},
            "seconds": self.elapsed.as_secs_f64(),
        })
    }

    pub const CSV_HEADER: &'static str = "program,degree,bound,lp_vars,lp_constraints,seconds";

    pub fn to_csv(&self, decimal: bool) -> String {
        format!(
            "{},{},{},{},{},{:.3}",
            csv_field(&self.program),
            self.degree,
            csv_field(&self.bound_text(decimal)),
            self.lp_vars,
            self.lp_constraints,
            self.elapsed.as_secs_f64()
        )
    }
}

pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Full pipeline on an already parsed program.
pub fn analyze_program(name: &str, prog: &Program, opts: &AnalysisOptions) -> AnalysisReport {
    let start = Instant::now();
    match analyze(prog, opts) {
        Ok(a) => {
            let (lp_vars, lp_constraints) = a.lp_size();
            let failure = a.bound.is_none().then(|| no_bound_message(opts.degree));
            AnalysisReport {
                program: name.into(),
                degree: opts.degree,
                bound: a.bound,
                failure,
                lp_vars,
                lp_constraints,
                elapsed: start.elapsed(),
            }
        }
        Err(e) => AnalysisReport::failed(name, opts.degree, format!("error: {e}"), start.elapsed()),
    }
}

/// Parses then analyzes; parse errors become a failure report.
pub fn analyze_source(name: &str, src: &str, opts: &AnalysisOptions) -> AnalysisReport {
    match parse_program(src) {
        Ok(p) => analyze_program(name, &p, opts),
        Err(e) => AnalysisReport::failed(name, opts.degree, format!("error: {e}"), Duration::ZERO),
    }
}

#[derive(Debug, Clone)]
pub struct CompareRow {
    pub program: String,
    pub input: State,
    pub bound: Rat,
    pub estimate: SimEstimate,
}

impl CompareRow {
    /// `|bound - mean| / bound` in percent; `None` when the bound is 0.
    pub fn rel_error_pct(&self) -> Option<f64> {
        let b = to_f64(&self.bound);
        (b > 0.0).then(|| 100.0 * (b - self.estimate.mean).abs() / b)
    }

    pub const CSV_HEADER: &'static str =
        "program,input,bound,mc_mean,mc_stderr,rel_error_pct,censored";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            csv_field(&self.program),
            csv_field(&format_input(&self.input)),
            fmt_decimal(&self.bound, 10),
            self.estimate.mean,
            self.estimate.stderr,
            self.rel_error_pct()
                .map(|e| format!("{e:.4}"))
                .unwrap_or_default(),
            self.estimate.censored
        )
    }

    pub fn to_json(&self) -> Value {
        json!({
            "program": self.program,
            "input": self.input,
            "bound": fmt_rat(&self.bound),
            "mc": self.estimate,
            "rel_error_pct": self.rel_error_pct(),
        })
    }
}

pub fn compare(
    name: &str,
    prog: &Program,
    bound: &Bound,
    inputs: &[State],
    cfg: &SimConfig,
) -> Result<Vec<CompareRow>, RuntimeError> {
    inputs
        .iter()
        .map(|inp| {
            let s0 = runtime::initial_state(prog, inp)?;
            Ok(CompareRow {
                program: name.into(),
                input: inp.clone(),
                bound: eval_bound(bound, &s0),
                estimate: estimate(prog, &s0, cfg)?,
            })
        })
        .collect()
}

/// One soundness comparison: the bound against the simulator under one
/// scheduler and against the truncated oracle.
#[derive(Debug, Clone)]
pub struct CheckRow {
    pub program: String,
    pub input: State,
    pub scheduler: Scheduler,
    pub bound: Rat,
    pub estimate: SimEstimate,
    /// `None` when the oracle hit its state cap.
    pub ert: Option<(Rat, Rat)>,
}

impl CheckRow {
    /// Bound below `mean - 3·stderr`.
    pub fn mc_violation(&self) -> bool {
        let m = self.estimate.mean - 3.0 * self.estimate.stderr;
        // Slack for float summation when the cost is deterministic.
        m.is_finite() && to_f64(&self.bound) < m - 1e-9 * m.abs()
    }

    pub fn ert_violation(&self) -> bool {
        matches!(&self.ert, Some((lo, _)) if self.bound < *lo)
    }

    pub fn ok(&self) -> bool {
        !self.mc_violation() && !self.ert_violation()
    }

    pub const CSV_HEADER: &'static str =
        "program,input,bound,mc_mean,mc_stderr,ert_lower,residual_mass,scheduler,ok";

    pub fn to_csv(&self) -> String {
        let (lo, res) = match &self.ert {
            Some((l, r)) => (fmt_decimal(l, 10), fmt_decimal(r, 6)),
            None => ("cap".into(), String::new()),
        };
        format!(
            "{},{},{},{},{},{},{},{},{}",
            csv_field(&self.program),
            csv_field(&format_input(&self.input)),
            fmt_decimal(&self.bound, 10),
            self.estimate.mean,
            self.estimate.stderr,
            lo,
            res,
            self.scheduler,
            self.ok()
        )
    }

    pub fn to_json(&self) -> Value {
        json!({
            "program": self.program,
            "input": self.input,
            "scheduler": self.scheduler.to_string(),
            "bound": fmt_rat(&self.bound),
            "mc": self.estimate,
            "ert_lower": self.ert.as_ref().map(|e| fmt_rat(&e.0)),
            "residual_mass": self.ert.as_ref().map(|e| fmt_rat(&e.1)),
            "ok": self.ok(),
        })
    }
}

/// Checks `bound` at every input under every scheduler. The oracle runs once
/// per input since it already maximizes over nondeterministic choices.
pub fn check(
    name: &str,
    prog: &Program,
    bound: &Bound,
    inputs: &[State],
    cfg: &SimConfig,
    unroll: u32,
    schedulers: &[Scheduler],
) -> Result<Vec<CheckRow>, RuntimeError> {
    let mut rows = Vec::new();
    for inp in inputs {
        let s0 = runtime::initial_state(prog, inp)?;
        let b = eval_bound(bound, &s0);
        let ert = match runtime::ert_cost(prog, &s0, unroll) {
            Ok(v) => Some(v),
            Err(RuntimeError::StateCap(_)) => None,
            Err(e) => return Err(e),
        };
        // Schedulers only draw randomness at nondeterministic choices, so
        // without any they all produce the same runs.
        let shared = if prog.has_nondet() {
            None
        } else {
            Some(estimate(prog, &s0, cfg)?)
        };
        for &sched in schedulers {
            let est = match &shared {
                Some(e) => e.clone(),
                None => estimate(
                    prog,
                    &s0,
                    &SimConfig {
                        scheduler: sched,
                        ..*cfg
                    },
                )?,
            };
            rows.push(CheckRow {
                program: name.into(),
                input: inp.clone(),
                scheduler: sched,
                bound: b.clone(),
                estimate: est,
                ert: ert.clone(),
            });
        }
    }
    Ok(rows)
}

/// `count` pseudo-random inputs with every global drawn from `[lo, hi]`.
pub fn random_inputs(prog: &Program, count: usize, lo: i64, hi: i64, seed: u64) -> Vec<State> {
    use rand::Rng;
    let mut rng = runtime::trial_rng(seed, u64::MAX);
    (0..count)
        .map(|_| {
            prog.globals
                .iter()
                .map(|g| (g.clone(), rng.gen_range(lo..=hi)))
                .collect()
        })
        .collect()
}
