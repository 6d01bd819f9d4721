use super::ir::{sample_value, Ir, Node, NodeId};
use super::{RuntimeError, Scheduler};
use crate::frontend::Label;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Terminated,
    AssertFailed,
    Aborted,
    Censored,
}

#[derive(Debug, Clone)]
pub struct Run {
    /// Cost in units of `1/Ir::tick_den`.
    pub units: i128,
    pub state: Vec<i64>,
    pub steps: u64,
    pub outcome: Outcome,
}

enum Frame {
    Exec(NodeId),
    /// Re-test of a loop guard after one iteration.
    Loop(NodeId),
}

pub type Observer<'a> = &'a mut dyn FnMut(Label, &[i64]);

pub fn run(
    ir: &Ir,
    mut s: Vec<i64>,
    sched: Scheduler,
    rng: &mut ChaCha8Rng,
    step_limit: u64,
    mut obs: Option<Observer>,
) -> Result<Run, RuntimeError> {
    let mut stack = vec![Frame::Exec(ir.main)];
    let mut units: i128 = 0;
    let mut steps = 0u64;
    let finish = |units, s, steps, outcome| {
        Ok(Run {
            units,
            state: s,
            steps,
            outcome,
        })
    };
    while let Some(fr) = stack.pop() {
        if steps >= step_limit {
            return finish(units, s, steps, Outcome::Censored);
        }
        steps += 1;
        let id = match fr {
            Frame::Exec(id) => {
                if let Some(o) = obs.as_mut() {
                    o(ir.labels[id], &s);
                }
                id
            }
            Frame::Loop(id) => {
                let Node::While(g, body) = &ir.nodes[id] else {
                    unreachable!()
                };
                if g.holds(&s)? {
                    stack.push(Frame::Loop(id));
                    stack.push(Frame::Exec(*body));
                }
                continue;
            }
        };
        match &ir.nodes[id] {
            Node::Skip => {}
            Node::Abort => return finish(units, s, steps, Outcome::Aborted),
            Node::Assert(e) => {
                if !e.holds(&s)? {
                    return finish(units, s, steps, Outcome::AssertFailed);
                }
            }
            Node::Tick(u, _) => units = units.checked_add(*u).ok_or(RuntimeError::Overflow)?,
            Node::Assign(x, e) => s[*x] = e.eval(&s)?,
            Node::Sample(x, e, op, d) => {
                let base = e.eval(&s)?;
                s[*x] = sample_value(base, *op, d.pick(rng.gen()))?;
            }
            Node::ProbIf(p, _, a, b) => {
                stack.push(Frame::Exec(if rng.gen::<f64>() < *p { *a } else { *b }))
            }
            Node::NonDet(a, b) => {
                let left = match sched {
                    Scheduler::First => true,
                    Scheduler::Second => false,
                    Scheduler::Random => rng.gen::<bool>(),
                };
                stack.push(Frame::Exec(if left { *a } else { *b }));
            }
            Node::If(g, a, b) => stack.push(Frame::Exec(if g.holds(&s)? { *a } else { *b })),
            Node::Seq(cs) => stack.extend(cs.iter().rev().map(|c| Frame::Exec(*c))),
            Node::While(g, body) => {
                if g.holds(&s)? {
                    stack.push(Frame::Loop(id));
                    stack.push(Frame::Exec(*body));
                }
            }
            // Procedures act on globals only, so the return point is just the
            // rest of the stack.
            Node::Call(body) => stack.push(Frame::Exec(*body)),
        }
    }
    finish(units, s, steps, Outcome::Terminated)
}

/// Trial `i` of a seeded experiment uses its own ChaCha stream.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(trial);
    r
}
