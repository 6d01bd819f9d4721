//! Exact bounds on the linear and polynomial corpus programs.

use expcost::analysis::{analyze, AnalysisOptions};
use expcost::frontend::parse_program;
use std::path::PathBuf;

fn corpus(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(format!("{name}.imp"));
    std::fs::read_to_string(p).unwrap()
}

fn bound_of(name: &str, degree: usize) -> String {
    let prog = parse_program(&corpus(name)).unwrap();
    let a = analyze(
        &prog,
        &AnalysisOptions {
            degree,
            ..Default::default()
        },
    )
    .unwrap();
    let (v, c) = a.lp_size();
    eprintln!(
        "{name}: {} vars={v} cons={c} B={} {:?}",
        a.bound
            .as_ref()
            .map(|b| b.to_text())
            .unwrap_or("none".into()),
        a.basis.len(),
        a.elapsed
    );
    a.bound
        .map(|b| b.to_text())
        .unwrap_or_else(|| "none".into())
}

#[test]
fn linear_golden() {
    let cases = [
        ("linear01", "3/5·|[0,x]|"),
        ("ber", "2·|[x,n]|"),
        ("rdwalk", "2·|[x,n+1]|"),
        ("sprdwalk", "2·|[x,n]|"),
        ("prdwalk", "8/7·|[x,n+4]|"),
        ("race", "2/3·|[h,t+9]|"),
        ("C4B_t13", "5/4·|[0,x]| + |[0,y]|"),
    ];
    let mut bad = vec![];
    for (name, want) in cases {
        let got = bound_of(name, 2);
        if got != want {
            bad.push(format!("{name}: got {got}, want {want}"));
        }
    }
    assert!(bad.is_empty(), "{bad:#?}");
}

#[test]
fn polynomial_golden() {
    let cases = [
        ("miner", 1, "15/2·|[0,n]|"),
        ("rdbub", 2, "3·|[0,n]|^2"),
        ("pol04", 2, "9/2·|[0,x]|^2 + 15/2·|[0,x]|"),
        (
            "trader",
            2,
            "5·|[s_min,s]|^2 + 10·|[s_min,s]|·|[0,s_min]| + 5·|[s_min,s]|",
        ),
    ];
    let mut bad = vec![];
    for (name, d, want) in cases {
        let got = bound_of(name, d);
        if got != want {
            bad.push(format!("{name}: got {got}, want {want}"));
        }
    }
    assert!(bad.is_empty(), "{bad:#?}");
}
