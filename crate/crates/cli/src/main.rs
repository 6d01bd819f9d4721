use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use expcost::analysis::AnalysisOptions;
use expcost::bound::Bound;
use expcost::frontend::{parse_program, Program};
use expcost::logic::{dump_contexts, infer_contexts};
use expcost::potential::parse_hints;
use expcost::report::{self, AnalysisReport, CheckRow, CompareRow};
use expcost::runtime::{self, Scheduler, SimConfig, State};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::mpsc;
use std::time::{Duration, Instant};

mod bench;

#[derive(Parser)]
#[command(
    name = "expcost",
    version,
    about = "Polynomial bounds on the expected cost of probabilistic programs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    g: Global,
}

#[derive(Args, Clone)]
struct Global {
    /// Maximal degree of the bound.
    #[arg(long, global = true, default_value_t = 2)]
    degree: usize,
    /// Specifications per procedure (context-sensitive analysis above 1).
    #[arg(long, global = true, default_value_t = 1)]
    specs_per_proc: usize,
    /// Extra rewrite functions, one `guard => polynomial` per line.
    #[arg(long, global = true, value_name = "FILE")]
    hints: Option<PathBuf>,
    /// Print the inferred logical contexts.
    #[arg(long, global = true)]
    dump_contexts: bool,
    /// Print the generated linear program.
    #[arg(long, global = true)]
    dump_constraints: bool,
    /// Write the generated linear program to FILE.
    #[arg(long, global = true, value_name = "FILE")]
    emit_lp: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Print coefficients as decimals (6 significant digits).
    #[arg(long, global = true)]
    decimal: bool,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 10_000)]
    trials: u64,
    /// How `if (*)` is resolved in simulation; `check` uses all three unless set.
    #[arg(long, global = true)]
    scheduler: Option<SchedArg>,
    /// Loop unrolling / call inlining depth of the exact oracle.
    #[arg(long, global = true, default_value_t = 200)]
    unroll: u32,
    /// Initial state such as `x=0,n=100`; repeatable. Unlisted globals are 0.
    #[arg(long, global = true, value_name = "STATE")]
    input: Vec<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchedArg {
    First,
    Second,
    Random,
}

impl From<SchedArg> for Scheduler {
    fn from(s: SchedArg) -> Self {
        match s {
            SchedArg::First => Scheduler::First,
            SchedArg::Second => Scheduler::Second,
            SchedArg::Random => Scheduler::Random,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Derive an expected-cost bound. Exit 0: bound found, 2: none, 1: error.
    Analyze { file: PathBuf },
    /// Analyze every `.imp` file in a directory.
    Bench {
        dir: PathBuf,
        /// Expected bounds, `name: bound` per line; reports how many match.
        #[arg(long, value_name = "FILE")]
        golden: Option<PathBuf>,
        /// Per-program time limit in seconds.
        #[arg(long, default_value_t = 60)]
        timeout: u64,
    },
    /// Monte-Carlo estimate of the expected cost.
    Simulate { file: PathBuf },
    /// Compare the bound with simulation and the truncated exact oracle.
    /// Without --input, 20 random states with globals in [0,50] are used.
    Check {
        file: PathBuf,
        #[arg(long, default_value_t = 20)]
        points: usize,
    },
    /// Evaluate the bound next to Monte-Carlo means at each input.
    Compare { file: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let g = &cli.g;
    match &cli.cmd {
        Cmd::Analyze { file } => analyze_cmd(file, g),
        Cmd::Bench {
            dir,
            golden,
            timeout,
        } => bench::run(dir, golden.as_deref(), Duration::from_secs(*timeout), g),
        Cmd::Simulate { file } => simulate_cmd(file, g),
        Cmd::Check { file, points } => check_cmd(file, *points, g),
        Cmd::Compare { file } => compare_cmd(file, g),
    }
}

fn load(file: &Path) -> Result<(String, Program)> {
    let src =
        std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let prog = parse_program(&src).with_context(|| format!("in {}", file.display()))?;
    Ok((program_name(file), prog))
}

fn program_name(file: &Path) -> String {
    file.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn options(g: &Global) -> Result<AnalysisOptions> {
    let hints = match &g.hints {
        Some(f) => {
            let text =
                std::fs::read_to_string(f).with_context(|| format!("reading {}", f.display()))?;
            parse_hints(&text)?
        }
        None => vec![],
    };
    if g.degree == 0 {
        bail!("--degree must be at least 1");
    }
    Ok(AnalysisOptions {
        degree: g.degree,
        specs_per_proc: g.specs_per_proc.max(1),
        hints,
    })
}

fn sim_config(g: &Global, sched: Scheduler) -> SimConfig {
    SimConfig {
        trials: g.trials.max(1),
        seed: g.seed,
        scheduler: sched,
        ..SimConfig::default()
    }
}

fn inputs(g: &Global) -> Result<Vec<State>> {
    g.input
        .iter()
        .map(|s| runtime::parse_input(s).with_context(|| format!("--input {s}")))
        .collect()
}

fn analyze_cmd(file: &Path, g: &Global) -> Result<u8> {
    let (name, prog) = load(file)?;
    let opts = options(g)?;
    if g.dump_contexts {
        print!("{}", dump_contexts(&prog, &infer_contexts(&prog)));
    }
    let start = Instant::now();
    let a = expcost::analysis::analyze(&prog, &opts)?;
    if g.dump_constraints {
        print!(
            "{}",
            expcost::derive::dump_constraints(&a.derivation, &a.basis)
        );
    }
    if let Some(path) = &g.emit_lp {
        std::fs::write(path, a.derivation.lp.to_text())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let (lp_vars, lp_constraints) = a.lp_size();
    let failure = a
        .bound
        .is_none()
        .then(|| report::no_bound_message(opts.degree));
    let r = AnalysisReport {
        program: name,
        degree: opts.degree,
        bound: a.bound,
        failure,
        lp_vars,
        lp_constraints,
        elapsed: start.elapsed(),
    };
    match g.format {
        Format::Text => print!("{}", r.to_text(g.decimal)),
        Format::Json => println!("{}", serde_json::to_string_pretty(&r.to_json())?),
        Format::Csv => println!("{}\n{}", AnalysisReport::CSV_HEADER, r.to_csv(g.decimal)),
    }
    Ok(if r.bound.is_some() { 0 } else { 2 })
}

fn simulate_cmd(file: &Path, g: &Global) -> Result<u8> {
    let (name, prog) = load(file)?;
    let mut points = inputs(g)?;
    if points.is_empty() {
        points.push(State::new());
    }
    let sched = g.scheduler.map(Scheduler::from).unwrap_or_default();
    let cfg = sim_config(g, sched);
    if g.format == Format::Csv {
        println!(
            "program,input,scheduler,trials,censored,aborted,mean,stderr,min,q1,median,q3,max"
        );
    }
    for p in &points {
        let s0 = runtime::initial_state(&prog, p)?;
        let e = runtime::estimate(&prog, &s0, &cfg)?;
        if e.censored > 0 {
            eprintln!(
                "warning: {} of {} runs hit the step limit and were left out of the mean",
                e.censored, e.trials
            );
        }
        let inp = runtime::format_input(p);
        match g.format {
            Format::Text => println!(
                "{name} [{inp}] scheduler={sched}: mean {:.6} ± {:.6} (trials {}, censored {}, aborted {}; min {} q1 {} median {} q3 {} max {})",
                e.mean, e.stderr, e.trials, e.censored, e.aborted, e.min, e.q1, e.median, e.q3, e.max
            ),
            Format::Json => println!(
                "{}",
                serde_json::json!({"program": name, "input": p, "scheduler": sched.to_string(), "estimate": e})
            ),
            Format::Csv => println!(
                "{},{},{sched},{},{},{},{},{},{},{},{},{},{}",
                report::csv_field(&name),
                report::csv_field(&inp),
                e.trials,
                e.censored,
                e.aborted,
                e.mean,
                e.stderr,
                e.min,
                e.q1,
                e.median,
                e.q3,
                e.max
            ),
        }
    }
    Ok(0)
}

/// Runs the analysis or exits with the analyze contract's code 2.
fn bound_or_exit(name: &str, prog: &Program, g: &Global) -> Result<std::result::Result<Bound, u8>> {
    let r = report::analyze_program(name, prog, &options(g)?);
    match r.bound {
        Some(b) => Ok(Ok(b)),
        None => {
            eprintln!("{name}: {}", r.failure.unwrap_or_default());
            Ok(Err(2))
        }
    }
}

fn compare_cmd(file: &Path, g: &Global) -> Result<u8> {
    let (name, prog) = load(file)?;
    let pts = inputs(g)?;
    if pts.is_empty() {
        bail!("compare needs at least one --input");
    }
    let bound = match bound_or_exit(&name, &prog, g)? {
        Ok(b) => b,
        Err(code) => return Ok(code),
    };
    let sched = g.scheduler.map(Scheduler::from).unwrap_or_default();
    let rows = report::compare(&name, &prog, &bound, &pts, &sim_config(g, sched))?;
    let censored: u64 = rows.iter().map(|r| r.estimate.censored).sum();
    if censored > 0 {
        eprintln!("warning: {censored} runs hit the step limit and were left out of the means");
    }
    match g.format {
        Format::Json => {
            let v: Vec<_> = rows.iter().map(CompareRow::to_json).collect();
            println!(
                "{}",
                serde_json::to_string_pretty(
                    &serde_json::json!({"bound": bound.to_text(), "rows": v})
                )?
            );
        }
        // The comparison is tabular either way.
        Format::Text | Format::Csv => {
            if g.format == Format::Text {
                println!(
                    "# bound: {}",
                    if g.decimal {
                        bound.to_text_decimal()
                    } else {
                        bound.to_text()
                    }
                );
            }
            println!("{}", CompareRow::CSV_HEADER);
            for r in &rows {
                println!("{}", r.to_csv());
            }
        }
    }
    Ok(0)
}

fn check_cmd(file: &Path, points: usize, g: &Global) -> Result<u8> {
    let (name, prog) = load(file)?;
    let mut pts = inputs(g)?;
    if pts.is_empty() {
        pts = report::random_inputs(&prog, points, 0, 50, g.seed);
    }
    let bound = match bound_or_exit(&name, &prog, g)? {
        Ok(b) => b,
        Err(code) => return Ok(code),
    };
    let scheds: Vec<Scheduler> = match g.scheduler {
        Some(s) => vec![s.into()],
        None => Scheduler::ALL.to_vec(),
    };
    let rows = report::check(
        &name,
        &prog,
        &bound,
        &pts,
        &sim_config(g, Scheduler::First),
        g.unroll,
        &scheds,
    )?;
    let bad = rows.iter().filter(|r| !r.ok()).count();
    let capped = rows.iter().filter(|r| r.ert.is_none()).count();
    match g.format {
        Format::Json => {
            let v: Vec<_> = rows.iter().map(CheckRow::to_json).collect();
            println!(
                "{}",
                serde_json::to_string_pretty(
                    &serde_json::json!({"bound": bound.to_text(), "violations": bad, "rows": v})
                )?
            );
        }
        Format::Text | Format::Csv => {
            println!("{}", CheckRow::CSV_HEADER);
            for r in &rows {
                println!("{}", r.to_csv());
            }
        }
    }
    if capped > 0 {
        eprintln!("note: the oracle hit its state cap on {capped} rows; only simulation was compared there");
    }
    if bad > 0 {
        eprintln!("{bad} violation(s) of the bound");
        return Ok(3);
    }
    eprintln!(
        "{name}: bound {} holds on {} rows",
        bound.to_text(),
        rows.len()
    );
    Ok(0)
}

/// Runs `f` on a worker thread and gives up after `limit`; a timed-out
/// worker is left running detached.
pub(crate) fn with_timeout<T: Send + 'static>(
    limit: Duration,
    f: impl FnOnce() -> T + Send + 'static,
) -> Option<T> {
    let (tx, rx) = mpsc::channel();
    std::thread::Builder::new()
        .stack_size(64 << 20)
        .spawn(move || {
            let _ = tx.send(f());
        })
        .ok()?;
    rx.recv_timeout(limit).ok()
}
