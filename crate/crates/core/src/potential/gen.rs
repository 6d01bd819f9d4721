use super::{Atom, BaseFnSet};
use crate::frontend::{BinOp, CmdKind, Command, Expr, Program};
use crate::logic::{Contexts, LinCtx, LinExpr};
use crate::rat::Rat;
use num_traits::One;
use std::collections::BTreeSet;

fn guard_atoms(e: &Expr, out: &mut BTreeSet<Atom>) {
    let Expr::Bin(op, l, r) = e else { return };
    match op {
        BinOp::And | BinOp::Or => {
            guard_atoms(l, out);
            guard_atoms(r, out);
        }
        BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
            let (Some(l), Some(r)) = (LinExpr::from_expr(l), LinExpr::from_expr(r)) else {
                return;
            };
            // Orient as `a < b` / `a <= b`.
            let (a, b) = if matches!(op, BinOp::Lt | BinOp::Le) {
                (l, r)
            } else {
                (r, l)
            };
            let w = b.sub(&a);
            out.extend(Atom::from_width(&w));
            if matches!(op, BinOp::Le | BinOp::Ge) {
                out.extend(Atom::from_width(&w.plus_const(&Rat::one())));
            }
        }
        _ => {}
    }
}

fn guard_vars(e: &Expr, out: &mut BTreeSet<String>) {
    let mut vs = Vec::new();
    e.vars(&mut vs);
    out.extend(vs);
}

/// Labels of every node strictly inside some loop body.
fn loop_labels(c: &Command, inside: bool, out: &mut Vec<usize>) {
    if inside {
        out.push(c.label);
    }
    match &c.kind {
        CmdKind::ProbIf(_, a, b) | CmdKind::NonDet(a, b) | CmdKind::If(_, a, b) => {
            loop_labels(a, inside, out);
            loop_labels(b, inside, out);
        }
        CmdKind::Seq(cs) => cs.iter().for_each(|s| loop_labels(s, inside, out)),
        CmdKind::While(_, b) => loop_labels(b, true, out),
        _ => {}
    }
}

/// Is `|[w]|` already expressible from `atoms` under `ctx`?
fn expressible(w: &LinExpr, atoms: &BTreeSet<Atom>, ctx: &LinCtx) -> bool {
    if w.is_constant()
        || atoms.iter().any(|a| a.width() == *w)
        || ctx.entails(&w.scale(&-Rat::one()))
    {
        return true;
    }
    atoms.iter().any(|t| {
        let tw = t.width();
        tw.terms == w.terms && ctx.entails(&tw) && ctx.entails(w)
    })
}

/// Candidate atoms for a program:
/// (i) intervals read off loop and branch guards (`a <= b` also yields
/// `|[a,b+1]|`); (ii) inferred facts `±x + c >= 0` and `x - y + c >= 0` at
/// points inside loops; (iii) `|[0,x]|` for variables in guards of loops that
/// consume resources; (iv) one round of closure under the program's
/// constant increments and copies, adding `b[e/x]` when it is wider than `b`
/// (or a different interval) and not expressible.
pub fn gen_atoms(prog: &Program, ctxs: &Contexts) -> BTreeSet<Atom> {
    harvest(prog, ctxs).0
}

struct Harvest(BTreeSet<Atom>, BTreeSet<Atom>, BTreeSet<Atom>);

/// All atoms; the factor atoms, i.e. those from rules (i) and (iii) plus
/// their constant shifts (only factors are multiplied into higher-degree base
/// functions); and the guard atoms of rule (i).
fn harvest(prog: &Program, ctxs: &Contexts) -> Harvest {
    let mut atoms = BTreeSet::new();
    let mut tick_guard_vars = BTreeSet::new();
    prog.walk(&mut |c| match &c.kind {
        CmdKind::While(e, body) => {
            guard_atoms(e, &mut atoms);
            if body.contains_tick() {
                guard_vars(e, &mut tick_guard_vars);
            }
        }
        CmdKind::If(e, ..) => guard_atoms(e, &mut atoms),
        _ => {}
    });
    let guards = atoms.clone();
    let mut core = atoms.clone();
    for x in &tick_guard_vars {
        core.extend(Atom::from_width(&LinExpr::var(x)));
    }
    let mut inside = Vec::new();
    loop_labels(&prog.main, false, &mut inside);
    for body in prog.procs.values() {
        loop_labels(body, false, &mut inside);
    }
    let mut facts: Vec<&LinCtx> = Vec::new();
    for l in inside {
        facts.push(&ctxs.pre[l]);
        facts.push(&ctxs.post[l]);
    }
    facts.extend(ctxs.loop_head.values());
    for ctx in facts {
        for f in ctx.ineqs() {
            atoms.extend(Atom::from_width(f));
        }
    }
    for x in tick_guard_vars {
        atoms.extend(Atom::from_width(&LinExpr::var(&x)));
    }

    // (iv) closure.
    let base = atoms.clone();
    prog.walk(&mut |c| {
        let ctx = &ctxs.pre[c.label];
        if ctx.is_bottom() {
            return;
        }
        let (x, images): (&String, Vec<LinExpr>) = match &c.kind {
            CmdKind::Assign(x, e) => {
                let Some(le) = LinExpr::from_expr(e) else {
                    return;
                };
                let shift = le.sub(&LinExpr::var(x));
                let copy = le.terms.len() == 1
                    && le.constant == Rat::from_integer(0.into())
                    && le.terms.values().all(|c| c.is_one());
                if !(shift.is_constant() || copy) {
                    return;
                }
                (x, vec![le])
            }
            _ => return,
        };
        for a in base.iter().filter(|a| a.mentions(x)) {
            for img in &images {
                let w = a.width().substitute(x, img);
                let aw = a.width();
                // Narrower images are dominated by the atom itself.
                if w.terms == aw.terms && w.constant <= aw.constant {
                    continue;
                }
                if !expressible(&w, &atoms, ctx) {
                    atoms.extend(Atom::from_width(&w));
                }
            }
        }
    });
    // Constant shifts of the core atoms are factors too (`|[1,x]|` next to
    // `|[0,x]|`), so that products stay stable under increments.
    let shapes: Vec<LinExpr> = core.iter().map(|a| a.width()).collect();
    for a in &atoms {
        if shapes.iter().any(|w| w.terms == a.width().terms) {
            core.insert(a.clone());
        }
    }
    Harvest(atoms, core, guards)
}

/// Base functions up to `degree`; `extra` atoms (from hints) also take part
/// in products.
pub fn gen_base_functions(
    prog: &Program,
    ctxs: &Contexts,
    degree: usize,
    extra: &[Atom],
) -> BaseFnSet {
    let Harvest(atoms, mut core, guards) = harvest(prog, ctxs);
    core.extend(extra.iter().cloned());
    let core: Vec<Atom> = core.into_iter().collect();
    let mut b = BaseFnSet::with_factors(atoms, &core, degree);
    b.preferred = guards.into_iter().collect();
    b
}
