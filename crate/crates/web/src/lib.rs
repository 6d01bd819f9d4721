//! Browser bindings: analyze a program, simulate it, and compare the two.
//! Every entry point takes source text and returns a JSON string; errors come
//! back as `{"error": "..."}` so the page has a single code path.

use expcost::analysis::AnalysisOptions;
use expcost::frontend::parse_program;
use expcost::report;
use expcost::runtime::{self, Scheduler, SimConfig};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn wrap(r: Result<Value, String>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

fn options(degree: u32) -> AnalysisOptions {
    AnalysisOptions {
        degree: degree.clamp(1, 4) as usize,
        ..AnalysisOptions::default()
    }
}

/// Inputs separated by `;`, each in `x=1,n=2` form.
fn parse_inputs(text: &str) -> Result<Vec<runtime::State>, String> {
    text.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| runtime::parse_input(s).map_err(|e| e.to_string()))
        .collect()
}

#[wasm_bindgen]
pub fn analyze(src: &str, degree: u32) -> String {
    wrap(Ok(
        report::analyze_source("input", src, &options(degree)).to_json()
    ))
}

#[wasm_bindgen]
pub fn simulate(src: &str, input: &str, trials: u32, seed: u32, scheduler: &str) -> String {
    wrap((|| {
        let p = parse_program(src).map_err(|e| e.to_string())?;
        let sched: Scheduler = scheduler.parse()?;
        let s0 =
            runtime::initial_state(&p, &runtime::parse_input(input).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
        let cfg = SimConfig {
            trials: trials.max(1).into(),
            seed: seed.into(),
            scheduler: sched,
            ..SimConfig::default()
        };
        let est = runtime::estimate(&p, &s0, &cfg).map_err(|e| e.to_string())?;
        Ok(json!({ "input": s0, "estimate": est }))
    })())
}

#[wasm_bindgen]
pub fn compare(src: &str, degree: u32, inputs: &str, trials: u32, seed: u32) -> String {
    wrap((|| {
        let p = parse_program(src).map_err(|e| e.to_string())?;
        let r = report::analyze_program("input", &p, &options(degree));
        let Some(b) = &r.bound else {
            return Err(r.failure.unwrap_or_default());
        };
        let inputs = parse_inputs(inputs)?;
        let cfg = SimConfig {
            trials: trials.max(1).into(),
            seed: seed.into(),
            ..SimConfig::default()
        };
        let rows = report::compare("input", &p, b, &inputs, &cfg).map_err(|e| e.to_string())?;
        Ok(json!({
            "bound": b.to_text(),
            "rows": rows.iter().map(report::CompareRow::to_json).collect::<Vec<_>>(),
        }))
    })())
}
