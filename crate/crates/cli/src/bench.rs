use crate::{options, program_name, with_timeout, Format, Global};
use anyhow::{Context, Result};
use expcost::report::{self, AnalysisReport};
use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

/// `name: bound` lines; `#` comments and blank lines ignored.
pub fn parse_golden(text: &str) -> BTreeMap<String, String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .filter_map(|l| l.split_once(':'))
        .map(|(n, b)| (n.trim().to_string(), b.trim().to_string()))
        .collect()
}

pub fn run(dir: &Path, golden: Option<&Path>, limit: Duration, g: &Global) -> Result<u8> {
    let opts = options(g)?;
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "imp"))
        .collect();
    files.sort();
    let mut reports = Vec::new();
    for f in &files {
        let name = program_name(f);
        let r = match std::fs::read_to_string(f) {
            Err(e) => {
                AnalysisReport::failed(&name, opts.degree, format!("error: {e}"), Duration::ZERO)
            }
            Ok(src) => {
                let (n, o) = (name.clone(), opts.clone());
                with_timeout(limit, move || report::analyze_source(&n, &src, &o)).unwrap_or_else(
                    || {
                        AnalysisReport::failed(
                            &name,
                            opts.degree,
                            format!("timeout after {}s", limit.as_secs()),
                            limit,
                        )
                    },
                )
            }
        };
        reports.push(r);
    }
    match g.format {
        Format::Text => print!("{}", markdown(&reports, g.decimal)),
        Format::Csv => {
            println!("{}", AnalysisReport::CSV_HEADER);
            for r in &reports {
                println!("{}", r.to_csv(g.decimal));
            }
        }
        Format::Json => {
            let v: Vec<_> = reports.iter().map(AnalysisReport::to_json).collect();
            println!("{}", serde_json::to_string_pretty(&v)?);
        }
    }
    if let Some(path) = golden {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let want = parse_golden(&text);
        let mut hits = 0;
        for (name, b) in &want {
            match reports.iter().find(|r| &r.program == name) {
                Some(r) if r.bound.as_ref().is_some_and(|got| &got.to_text() == b) => hits += 1,
                Some(r) => eprintln!(
                    "golden mismatch: {name}: expected {b}, got {}",
                    r.bound_text(false)
                ),
                None => eprintln!("golden mismatch: {name}: not in {}", dir.display()),
            }
        }
        eprintln!("golden: {hits}/{} bounds match", want.len());
    }
    Ok(0)
}

fn markdown(reports: &[AnalysisReport], decimal: bool) -> String {
    let mut s = String::from(
        "| program | bound | time (s) | lp vars | lp constraints |\n|---|---|---|---|---|\n",
    );
    for r in reports {
        s.push_str(&format!(
            "| {} | {} | {:.3} | {} | {} |\n",
            r.program,
            r.bound_text(decimal),
            r.elapsed.as_secs_f64(),
            r.lp_vars,
            r.lp_constraints
        ));
    }
    s
}
