//! Index-based form of a program shared by the simulator and the oracle.

use crate::frontend::{dist_support, BinOp, CmdKind, Command, Expr, Label, Program, SampleOp};
use crate::rat::{to_f64, Rat};
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use std::collections::HashMap;

use super::RuntimeError;

pub type NodeId = usize;

#[derive(Debug, Clone)]
pub enum CExpr {
    Var(usize),
    Num(i64),
    Bin(BinOp, Box<CExpr>, Box<CExpr>),
}

impl CExpr {
    pub fn eval(&self, s: &[i64]) -> Result<i64, RuntimeError> {
        Ok(match self {
            CExpr::Var(i) => s[*i],
            CExpr::Num(n) => *n,
            CExpr::Bin(op, l, r) => {
                let a = l.eval(s)?;
                // Short-circuit the connectives.
                match op {
                    BinOp::And if a == 0 => return Ok(0),
                    BinOp::Or if a != 0 => return Ok(1),
                    _ => {}
                }
                let b = r.eval(s)?;
                let ov = || RuntimeError::Overflow;
                match op {
                    BinOp::Add => a.checked_add(b).ok_or_else(ov)?,
                    BinOp::Sub => a.checked_sub(b).ok_or_else(ov)?,
                    BinOp::Mul => a.checked_mul(b).ok_or_else(ov)?,
                    BinOp::Div => {
                        if b == 0 {
                            return Err(RuntimeError::DivisionByZero);
                        }
                        a.checked_div_euclid(b).ok_or_else(ov)?
                    }
                    BinOp::Mod => {
                        if b == 0 {
                            return Err(RuntimeError::DivisionByZero);
                        }
                        a.checked_rem_euclid(b).ok_or_else(ov)?
                    }
                    BinOp::Eq => (a == b) as i64,
                    BinOp::Ne => (a != b) as i64,
                    BinOp::Gt => (a > b) as i64,
                    BinOp::Lt => (a < b) as i64,
                    BinOp::Le => (a <= b) as i64,
                    BinOp::Ge => (a >= b) as i64,
                    BinOp::And | BinOp::Or => (b != 0) as i64,
                }
            }
        })
    }

    pub fn holds(&self, s: &[i64]) -> Result<bool, RuntimeError> {
        Ok(self.eval(s)? != 0)
    }
}

#[derive(Debug, Clone)]
pub struct Sampler {
    /// Exact pmf, ascending values.
    pub support: Vec<(i64, Rat)>,
    /// Cumulative probabilities for inverse-transform sampling.
    pub cum: Vec<f64>,
}

impl Sampler {
    pub fn pick(&self, u: f64) -> i64 {
        let i = self.cum.partition_point(|c| *c <= u);
        self.support[i.min(self.support.len() - 1)].0
    }
}

#[derive(Debug, Clone)]
pub enum Node {
    Skip,
    Abort,
    Assert(CExpr),
    /// Amount in units of `1/Ir::tick_den`.
    Tick(i128, Rat),
    Assign(usize, CExpr),
    Sample(usize, CExpr, SampleOp, Sampler),
    ProbIf(f64, Rat, NodeId, NodeId),
    NonDet(NodeId, NodeId),
    If(CExpr, NodeId, NodeId),
    Seq(Vec<NodeId>),
    While(CExpr, NodeId),
    Call(NodeId),
}

#[derive(Debug, Clone)]
pub struct Ir {
    pub nodes: Vec<Node>,
    pub labels: Vec<Label>,
    pub main: NodeId,
    pub vars: Vec<String>,
    /// Common denominator of all tick amounts.
    pub tick_den: i128,
}

impl Ir {
    pub fn compile(prog: &Program) -> Result<Ir, RuntimeError> {
        let mut den = num_bigint::BigInt::one();
        prog.walk(&mut |c| {
            if let CmdKind::Tick(q) = &c.kind {
                den = den.lcm(q.denom());
            }
        });
        let tick_den = den.to_i128().ok_or(RuntimeError::Overflow)?;
        let mut ir = Ir {
            nodes: Vec::new(),
            labels: Vec::new(),
            main: 0,
            vars: prog.globals.clone(),
            tick_den,
        };
        let index: HashMap<&str, usize> = prog
            .globals
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_str(), i))
            .collect();
        // Procedure bodies get placeholder slots first so calls can refer to them.
        let mut procs = HashMap::new();
        for name in prog.procs.keys() {
            procs.insert(name.clone(), ir.push(Node::Skip, 0));
        }
        let cx = Cx {
            index: &index,
            procs: &procs,
        };
        for (name, body) in &prog.procs {
            let id = ir.lower(body, &cx)?;
            ir.nodes[procs[name]] = Node::Seq(vec![id]);
            ir.labels[procs[name]] = body.label;
        }
        ir.main = ir.lower(&prog.main, &cx)?;
        Ok(ir)
    }

    fn push(&mut self, n: Node, label: Label) -> NodeId {
        self.nodes.push(n);
        self.labels.push(label);
        self.nodes.len() - 1
    }

    fn lower(&mut self, c: &Command, cx: &Cx) -> Result<NodeId, RuntimeError> {
        let node = match &c.kind {
            CmdKind::Skip => Node::Skip,
            CmdKind::Abort => Node::Abort,
            CmdKind::Assert(e) => Node::Assert(cx.expr(e)),
            CmdKind::Tick(q) => {
                let units = (q * Rat::from_integer(self.tick_den.into())).to_integer();
                Node::Tick(units.to_i128().ok_or(RuntimeError::Overflow)?, q.clone())
            }
            CmdKind::Assign(x, e) => Node::Assign(cx.index[x.as_str()], cx.expr(e)),
            CmdKind::Sample(x, e, op, d) => {
                let support = dist_support(d);
                let mut acc = 0.0;
                let cum = support
                    .iter()
                    .map(|(_, p)| {
                        acc += to_f64(p);
                        acc
                    })
                    .collect();
                Node::Sample(
                    cx.index[x.as_str()],
                    cx.expr(e),
                    *op,
                    Sampler { support, cum },
                )
            }
            CmdKind::ProbIf(p, a, b) => {
                let (a, b) = (self.lower(a, cx)?, self.lower(b, cx)?);
                Node::ProbIf(to_f64(p), p.clone(), a, b)
            }
            CmdKind::NonDet(a, b) => Node::NonDet(self.lower(a, cx)?, self.lower(b, cx)?),
            CmdKind::If(e, a, b) => Node::If(cx.expr(e), self.lower(a, cx)?, self.lower(b, cx)?),
            CmdKind::Seq(cs) => Node::Seq(
                cs.iter()
                    .map(|c| self.lower(c, cx))
                    .collect::<Result<_, _>>()?,
            ),
            CmdKind::While(e, b) => Node::While(cx.expr(e), self.lower(b, cx)?),
            CmdKind::Call(p) => Node::Call(cx.procs[p]),
        };
        Ok(self.push(node, c.label))
    }

    pub fn state_of(&self, named: &super::State) -> Vec<i64> {
        self.vars
            .iter()
            .map(|v| named.get(v).copied().unwrap_or(0))
            .collect()
    }

    pub fn named(&self, s: &[i64]) -> super::State {
        self.vars.iter().cloned().zip(s.iter().copied()).collect()
    }

    pub fn cost(&self, units: i128) -> Rat {
        Rat::new(units.into(), self.tick_den.into())
    }
}

struct Cx<'a> {
    index: &'a HashMap<&'a str, usize>,
    procs: &'a HashMap<String, NodeId>,
}

impl Cx<'_> {
    fn expr(&self, e: &Expr) -> CExpr {
        match e {
            Expr::Var(v) => CExpr::Var(self.index[v.as_str()]),
            Expr::Num(n) => CExpr::Num(*n),
            Expr::Bin(op, l, r) => CExpr::Bin(*op, Box::new(self.expr(l)), Box::new(self.expr(r))),
        }
    }
}

/// `e op v` for a sampled value `v`.
pub fn sample_value(base: i64, op: SampleOp, v: i64) -> Result<i64, RuntimeError> {
    match op {
        SampleOp::Add => base.checked_add(v),
        SampleOp::Sub => base.checked_sub(v),
    }
    .ok_or(RuntimeError::Overflow)
}
