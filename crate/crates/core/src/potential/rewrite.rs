use super::{BaseFnSet, Combo};
use crate::logic::{LinCtx, LinExpr};
use crate::rat::Rat;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

/// A combination of base functions that is nonnegative on every state
/// satisfying all `guard` facts (each read as `fact >= 0`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteFn {
    pub guard: Vec<LinExpr>,
    pub coeffs: Combo,
    /// Program variables the function depends on.
    pub vars: Vec<String>,
}

impl RewriteFn {
    pub fn applicable(&self, ctx: &LinCtx) -> bool {
        self.guard.iter().all(|g| ctx.entails(g))
    }

    pub fn eval(&self, basis_values: &[Rat]) -> Rat {
        self.coeffs.iter().map(|(i, c)| c * &basis_values[*i]).sum()
    }

    pub fn guard_holds(&self, env: &dyn Fn(&str) -> Rat) -> bool {
        self.guard.iter().all(|g| g.eval(env) >= Rat::zero())
    }

    pub fn is_constant_one(&self) -> bool {
        self.coeffs == vec![(0, Rat::one())]
    }
}

fn combo(terms: &[(usize, Rat)]) -> Combo {
    let mut m: BTreeMap<usize, Rat> = BTreeMap::new();
    for (i, c) in terms {
        *m.entry(*i).or_insert_with(Rat::zero) += c;
    }
    m.into_iter().filter(|(_, c)| !c.is_zero()).collect()
}

fn vars_of(b: &BaseFnSet, c: &Combo) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for (i, _) in c {
        for a in &b.fns[*i].atoms {
            for v in a.vars() {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
        }
    }
    out.sort();
    out
}

/// Rewrite functions over `b`:
/// the constant 1; for atoms `A`, `B` with `width(A) = width(B) + k`, `k > 0`:
/// `A - B - k` (guard `width(B) >= 0`), `B + k - A` and `A - B` (no guard);
/// and each of those multiplied by every base function of degree `< d`.
///
/// Dropping potential from a single coefficient is not listed here; the
/// derivation handles it with a slack per coordinate.
pub fn gen_rewrite_functions(b: &BaseFnSet) -> Vec<RewriteFn> {
    let mut linear: Vec<(Vec<LinExpr>, Vec<(Option<usize>, Rat)>)> = Vec::new();
    for (ia, a) in b.atoms.iter().enumerate() {
        for (ib, bb) in b.atoms.iter().enumerate() {
            let (wa, wb) = (a.width(), bb.width());
            if ia == ib || wa.terms != wb.terms {
                continue;
            }
            let k = &wa.constant - &wb.constant;
            if k <= Rat::zero() {
                continue;
            }
            let one = Rat::one();
            linear.push((
                vec![wb.clone()],
                vec![
                    (Some(ia), one.clone()),
                    (Some(ib), -one.clone()),
                    (None, -k.clone()),
                ],
            ));
            linear.push((
                vec![],
                vec![
                    (Some(ib), one.clone()),
                    (None, k.clone()),
                    (Some(ia), -one.clone()),
                ],
            ));
            linear.push((vec![], vec![(Some(ia), one.clone()), (Some(ib), -one)]));
        }
    }
    let mut out = vec![RewriteFn {
        guard: vec![],
        coeffs: vec![(0, Rat::one())],
        vars: vec![],
    }];
    let multipliers: Vec<usize> = (0..b.len())
        .filter(|i| b.fns[*i].degree() + 1 <= b.degree)
        .collect();
    for (guard, terms) in &linear {
        for m in &multipliers {
            let base = &b.fns[*m].atoms;
            let mut cs = Vec::new();
            let mut ok = true;
            for (t, c) in terms {
                let mut atoms: Vec<usize> = base.iter().map(|a| b.atom_index(a).unwrap()).collect();
                if let Some(t) = t {
                    atoms.push(*t);
                }
                match b.monomial(&atoms) {
                    Some(i) => cs.push((i, c.clone())),
                    None => ok = false,
                }
            }
            if !ok {
                continue;
            }
            let coeffs = combo(&cs);
            let vars = vars_of(b, &coeffs);
            out.push(RewriteFn {
                guard: guard.clone(),
                coeffs,
                vars,
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("hint line {line}: {msg}")]
pub struct HintError {
    pub line: usize,
    pub msg: String,
}

/// A user hint: a guard condition and a polynomial over atoms, given as
/// `(coefficient, atoms)` terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hint {
    pub guard: Vec<LinExpr>,
    pub terms: Vec<(Rat, Vec<super::Atom>)>,
}

/// Parses a hints file. Each non-empty line is `guard => poly`, where the
/// guard is a conjunction of linear comparisons (or `true`) and `poly` is a
/// sum of terms such as `-2`, `|[0,x]|`, `3/4*|[x,n+1]|*|[0,n]|`.
/// Lines starting with `#` are comments.
pub fn parse_hints(text: &str) -> Result<Vec<Hint>, HintError> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: &str| HintError {
            line: no + 1,
            msg: msg.to_string(),
        };
        let (g, p) = line
            .split_once("=>")
            .ok_or_else(|| err("expected `guard => terms`"))?;
        let guard_expr = crate::frontend::parse_expr(g.trim()).map_err(|e| err(&e.msg))?;
        let ctx = LinCtx::top().assume(&guard_expr);
        if ctx.is_bottom() {
            return Err(err("guard is unsatisfiable"));
        }
        let terms = parse_poly(p).map_err(|m| err(&m))?;
        out.push(Hint {
            guard: ctx.ineqs().to_vec(),
            terms,
        });
    }
    Ok(out)
}

fn parse_poly(s: &str) -> Result<Vec<(Rat, Vec<super::Atom>)>, String> {
    // Split on top-level +/- (outside |[ ]|).
    let mut terms: Vec<(bool, String)> = Vec::new();
    let mut cur = String::new();
    let mut depth = 0;
    let mut neg = false;
    for ch in s.chars() {
        match ch {
            '[' => {
                depth += 1;
                cur.push(ch)
            }
            ']' => {
                depth -= 1;
                cur.push(ch)
            }
            '+' | '-' if depth == 0 => {
                if !cur.trim().is_empty() {
                    terms.push((neg, cur.trim().to_string()));
                }
                cur.clear();
                neg = ch == '-';
            }
            _ => cur.push(ch),
        }
    }
    if !cur.trim().is_empty() {
        terms.push((neg, cur.trim().to_string()));
    }
    if terms.is_empty() {
        return Err("empty polynomial".into());
    }
    let mut out = Vec::new();
    for (neg, t) in terms {
        let mut coeff = Rat::one();
        let mut atoms = Vec::new();
        for f in t.split(['*', '·']) {
            let f = f.trim();
            if let Some(inner) = f.strip_prefix("|[").and_then(|r| r.strip_suffix("]|")) {
                let (lo, hi) = inner.split_once(',').ok_or("atom needs `lo,hi`")?;
                atoms.push(
                    super::Atom::parse(lo.trim(), hi.trim())
                        .ok_or_else(|| format!("bad atom `{f}`"))?,
                );
            } else {
                coeff *= crate::rat::parse_rat(f).ok_or_else(|| format!("bad factor `{f}`"))?;
            }
        }
        if neg {
            coeff = -coeff;
        }
        out.push((coeff, atoms));
    }
    Ok(out)
}

/// Turns hints into rewrite functions over `b`; hints mentioning products
/// outside `b` are skipped.
pub fn hints_to_rewrites(b: &BaseFnSet, hints: &[Hint]) -> Vec<RewriteFn> {
    let mut out = Vec::new();
    for h in hints {
        let mut cs = Vec::new();
        let mut ok = true;
        for (c, atoms) in &h.terms {
            let idx: Option<Vec<usize>> = atoms.iter().map(|a| b.atom_index(a)).collect();
            match idx.and_then(|idx| b.monomial(&idx)) {
                Some(i) => cs.push((i, c.clone())),
                None => ok = false,
            }
        }
        if ok {
            let coeffs = combo(&cs);
            let vars = vars_of(b, &coeffs);
            out.push(RewriteFn {
                guard: h.guard.clone(),
                coeffs,
                vars,
            });
        }
    }
    out
}
