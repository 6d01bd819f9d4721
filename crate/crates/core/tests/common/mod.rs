//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use expcost::frontend::{dist_support, parse_program, CmdKind, Program, SampleOp};
use expcost::logic::{infer_contexts, LinExpr};
use expcost::lp::{Cmp, LinForm, LinearProgram, LpError};
use expcost::potential::{eval_base, eval_potential, gen_base_functions, gen_rewrite_functions};
use expcost::rat::{frac, rat, Rat};
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::path::PathBuf;

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn corpus_names() -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .filter_map(|e| {
            let p = e.ok()?.path();
            (p.extension()? == "imp").then(|| p.file_stem().unwrap().to_string_lossy().into_owned())
        })
        .collect();
    names.sort();
    names
}

pub fn corpus_src(name: &str) -> String {
    std::fs::read_to_string(corpus_dir().join(format!("{name}.imp"))).unwrap()
}

pub fn corpus(name: &str) -> Program {
    parse_program(&corpus_src(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn env_of(s: &BTreeMap<String, i64>) -> impl Fn(&str) -> Rat + '_ {
    move |v| rat(s.get(v).copied().unwrap_or(0))
}

// ---- brute-force LP oracle ----

/// Solves the square system `rows · x = rhs`; `None` if singular.
pub fn gauss(mut rows: Vec<Vec<Rat>>, mut rhs: Vec<Rat>) -> Option<Vec<Rat>> {
    let n = rows.len();
    for col in 0..n {
        let p = (col..n).find(|r| !rows[*r][col].is_zero())?;
        rows.swap(col, p);
        rhs.swap(col, p);
        let inv = rows[col][col].recip();
        for k in col..n {
            rows[col][k] = &rows[col][k] * &inv;
        }
        rhs[col] = &rhs[col] * &inv;
        for r in 0..n {
            if r != col && !rows[r][col].is_zero() {
                let f = rows[r][col].clone();
                for k in col..n {
                    let d = &f * &rows[col][k];
                    rows[r][k] -= d;
                }
                let d = &f * &rhs[col];
                rhs[r] -= d;
            }
        }
    }
    Some(rhs)
}

fn combinations(
    n: usize,
    k: usize,
    start: usize,
    cur: &mut Vec<usize>,
    out: &mut dyn FnMut(&[usize]),
) {
    if cur.len() == k {
        out(cur);
        return;
    }
    for i in start..n {
        if n - i < k - cur.len() {
            break;
        }
        cur.push(i);
        combinations(n, k, i + 1, cur, out);
        cur.pop();
    }
}

/// Minimum of the objective over the vertices of `{x >= 0, rows}`, with an
/// optional cap `Σx <= cap`. `None` if there is no vertex (infeasible).
pub fn vertex_min(
    n: usize,
    cons: &[(Vec<Rat>, Rat, Cmp)],
    obj: &[Rat],
    cap: Option<&Rat>,
) -> Option<Rat> {
    // Hyperplanes a·x = b.
    let mut planes: Vec<(Vec<Rat>, Rat)> = cons
        .iter()
        .map(|(a, c, _)| (a.clone(), -c.clone()))
        .collect();
    for j in 0..n {
        let mut a = vec![Rat::zero(); n];
        a[j] = Rat::one();
        planes.push((a, Rat::zero()));
    }
    if let Some(cap) = cap {
        planes.push((vec![Rat::one(); n], cap.clone()));
    }
    let feasible = |x: &[Rat]| {
        x.iter().all(|v| !v.is_negative())
            && cons.iter().all(|(a, c, cmp)| {
                let v: Rat = a.iter().zip(x).map(|(p, q)| p * q).sum::<Rat>() + c;
                match cmp {
                    Cmp::Eq => v.is_zero(),
                    Cmp::Ge => !v.is_negative(),
                }
            })
            && cap.map_or(true, |cap| x.iter().cloned().sum::<Rat>() <= *cap)
    };
    let mut best: Option<Rat> = None;
    combinations(planes.len(), n, 0, &mut Vec::new(), &mut |idx| {
        let rows = idx.iter().map(|i| planes[*i].0.clone()).collect();
        let rhs = idx.iter().map(|i| planes[*i].1.clone()).collect();
        if let Some(x) = gauss(rows, rhs) {
            if feasible(&x) {
                let v: Rat = obj.iter().zip(&x).map(|(p, q)| p * q).sum();
                if best.as_ref().map_or(true, |b| v < *b) {
                    best = Some(v);
                }
            }
        }
    });
    best
}

#[derive(Debug, Default)]
pub struct LpSuite {
    pub feasible: usize,
    pub infeasible: usize,
    pub unbounded: usize,
    /// Case numbers where the solver and the oracle disagree.
    pub mismatches: Vec<usize>,
}

/// Random LPs with up to 6 variables, 10 constraints and coefficients in
/// `[-9, 9]`, each solved by the simplex and by vertex enumeration.
pub fn lp_suite(cases: usize, seed: u64) -> LpSuite {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Unbounded LPs are the ones whose optimum keeps dropping under a huge cap.
    let cap = Rat::from_integer(10i64.pow(12).into());
    let mut out = LpSuite::default();
    for case in 0..cases {
        let n = rng.gen_range(1..=6);
        let m = rng.gen_range(1..=10);
        let mut cons = Vec::new();
        let mut lp = LinearProgram::new();
        for j in 0..n {
            lp.new_var(format!("x{j}"), true);
        }
        for _ in 0..m {
            let a: Vec<Rat> = (0..n).map(|_| rat(rng.gen_range(-9..=9))).collect();
            let c = rat(rng.gen_range(-9..=9));
            let cmp = if rng.gen_bool(0.2) { Cmp::Eq } else { Cmp::Ge };
            let mut f = LinForm::constant(c.clone());
            for (j, v) in a.iter().enumerate() {
                f.add_term(j, v);
            }
            match cmp {
                Cmp::Eq => lp.add_eq(f),
                Cmp::Ge => lp.add_ge(f),
            }
            cons.push((a, c, cmp));
        }
        let obj: Vec<Rat> = (0..n).map(|_| rat(rng.gen_range(-9..=9))).collect();
        for (j, v) in obj.iter().enumerate() {
            lp.objective.add_term(j, v);
        }

        let got = lp.solve_min();
        let ok = match vertex_min(n, &cons, &obj, None) {
            None => {
                out.infeasible += 1;
                got == Err(LpError::Infeasible)
            }
            Some(v) => {
                let capped = vertex_min(n, &cons, &obj, Some(&cap)).unwrap();
                if capped < v {
                    out.unbounded += 1;
                    got == Err(LpError::Unbounded)
                } else {
                    out.feasible += 1;
                    match got {
                        Ok(s) => {
                            s.objective == v
                                && s.values.iter().all(|x| !x.is_negative())
                                && cons.iter().all(|(a, c, cmp)| {
                                    let r: Rat =
                                        a.iter().zip(&s.values).map(|(p, q)| p * q).sum::<Rat>()
                                            + c;
                                    match cmp {
                                        Cmp::Eq => r.is_zero(),
                                        Cmp::Ge => !r.is_negative(),
                                    }
                                })
                        }
                        Err(_) => false,
                    }
                }
            }
        };
        if !ok {
            out.mismatches.push(case);
        }
    }
    out
}

// ---- rewrite / substitution / linearity checks ----

#[derive(Debug, Default, Clone, Copy)]
pub struct SuiteCount {
    pub checks: usize,
    pub violations: usize,
}

impl SuiteCount {
    fn record(&mut self, ok: bool) {
        self.checks += 1;
        if !ok {
            self.violations += 1;
        }
    }
}

/// Every `(label, x, e)` update the program performs with a linear right-hand
/// side; a sample contributes one update per support point.
fn updates(p: &Program) -> Vec<(usize, String, LinExpr)> {
    let mut out = Vec::new();
    p.walk(&mut |c| match &c.kind {
        CmdKind::Assign(x, e) => {
            if let Some(l) = LinExpr::from_expr(e) {
                out.push((c.label, x.clone(), l));
            }
        }
        CmdKind::Sample(x, e, op, d) => {
            if let Some(l) = LinExpr::from_expr(e) {
                for (v, _) in dist_support(d) {
                    let v = if *op == SampleOp::Add { v } else { -v };
                    out.push((c.label, x.clone(), l.plus_const(&rat(v))));
                }
            }
        }
        _ => {}
    });
    out
}

fn random_state(rng: &mut ChaCha8Rng, vars: &[String]) -> BTreeMap<String, i64> {
    vars.iter()
        .map(|v| (v.clone(), rng.gen_range(-20..=20)))
        .collect()
}

/// Randomized exact checks over the base and rewrite functions generated
/// for every corpus program, round-robin until `total` checks are done:
/// rewrite functions are nonnegative where their guard holds, substitution
/// columns agree with direct evaluation after the update, and potential
/// evaluation is linear in the annotation.
pub fn rewrite_suite(total: usize, degree: usize, seed: u64) -> SuiteCount {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let progs: Vec<_> = corpus_names()
        .iter()
        .map(|n| {
            let p = corpus(n);
            let ctxs = infer_contexts(&p);
            let b = gen_base_functions(&p, &ctxs, degree, &[]);
            let rw = gen_rewrite_functions(&b);
            let ups = updates(&p);
            (p, ctxs, b, rw, ups)
        })
        .collect();
    let mut count = SuiteCount::default();
    let mut round = 0usize;
    while count.checks < total {
        let (p, ctxs, b, rw, ups) = &progs[round % progs.len()];
        round += 1;
        let s = random_state(&mut rng, &p.globals);
        let env = env_of(&s);
        let vals = b.eval_all(&env);

        // Rewrite nonnegativity.
        let f = &rw[rng.gen_range(0..rw.len())];
        if f.guard_holds(&env) {
            count.record(!f.eval(&vals).is_negative());
        }

        // Potential linearity.
        let q1: Vec<Rat> = (0..b.len()).map(|_| small_rat(&mut rng)).collect();
        let q2: Vec<Rat> = (0..b.len()).map(|_| small_rat(&mut rng)).collect();
        let (l, m) = (small_rat(&mut rng), small_rat(&mut rng));
        let mix: Vec<Rat> = q1.iter().zip(&q2).map(|(a, c)| &l * a + &m * c).collect();
        let lhs = eval_potential(&mix, b, &env);
        let rhs = &l * eval_potential(&q1, b, &env) + &m * eval_potential(&q2, b, &env);
        count.record(lhs == rhs);

        // Substitution identity under a state satisfying the update's context.
        if ups.is_empty() {
            continue;
        }
        let (label, x, e) = &ups[rng.gen_range(0..ups.len())];
        let ctx = &ctxs.pre[*label];
        let Some(s) = (0..200)
            .map(|_| random_state(&mut rng, &p.globals))
            .find(|s| ctx.satisfied_by(&env_of(s)))
        else {
            continue;
        };
        let env = env_of(&s);
        let vals = b.eval_all(&env);
        let mut s2 = s.clone();
        let new = e.eval(&env);
        assert!(new.is_integer());
        s2.insert(x.clone(), new.to_integer().try_into().unwrap());
        let env2 = env_of(&s2);
        let j = rng.gen_range(0..b.len());
        if let Some(col) = b.substitute(j, x, Some(e), ctx) {
            let direct = eval_base(&b.fns[j], &env2);
            let via: Rat = col.iter().map(|(i, c)| c * &vals[*i]).sum();
            count.record(direct == via);
        }
    }
    count
}

fn small_rat(rng: &mut ChaCha8Rng) -> Rat {
    frac(rng.gen_range(-12..=12), rng.gen_range(1..=6))
}
