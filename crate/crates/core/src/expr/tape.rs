use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::node::{BinaryOp, Expr, Node, ParamRef, UnaryOp};
use super::scalar::{Jet1, Jet2, Scalar};
use crate::error::{Error, Result};

/// A point of the 2N-dimensional phase space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl PhasePoint {
    pub fn new(q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::InvalidPoint("at least one degree of freedom required".into()));
        }
        if q.len() != p.len() {
            return Err(Error::InvalidPoint(format!(
                "q has {} entries but p has {}",
                q.len(),
                p.len()
            )));
        }
        if q.iter().chain(&p).any(|v| !v.is_finite()) {
            return Err(Error::InvalidPoint("non-finite coordinate".into()));
        }
        Ok(PhasePoint { q, p })
    }

    /// Split a flat `(q, p)` vector.
    pub fn from_coords(c: &[f64]) -> Result<Self> {
        if !c.len().is_multiple_of(2) {
            return Err(Error::InvalidPoint(format!("odd coordinate count {}", c.len())));
        }
        let n = c.len() / 2;
        PhasePoint::new(c[..n].to_vec(), c[n..].to_vec())
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    /// Flat `(q_1..q_N, p_1..p_N)` vector.
    pub fn coords(&self) -> Vec<f64> {
        self.q.iter().chain(&self.p).copied().collect()
    }
}

/// Named parameter values: scalars and per-site sequences.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub scalars: BTreeMap<String, f64>,
    pub sequences: BTreeMap<String, Vec<f64>>,
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, v: f64) -> Self {
        self.scalars.insert(name.to_string(), v);
        self
    }

    pub fn with_seq(mut self, name: &str, v: Vec<f64>) -> Self {
        self.sequences.insert(name.to_string(), v);
        self
    }

    pub fn set(&mut self, name: &str, v: f64) {
        self.scalars.insert(name.to_string(), v);
    }

    pub fn scalar(&self, name: &str) -> Option<f64> {
        self.scalars.get(name).copied()
    }

    pub fn sequence(&self, name: &str) -> Option<&[f64]> {
        self.sequences.get(name).map(|v| v.as_slice())
    }

    /// Overlay `other` on top of `self`.
    pub fn merged(&self, other: &ParamSet) -> ParamSet {
        let mut out = self.clone();
        out.scalars.extend(other.scalars.iter().map(|(k, v)| (k.clone(), *v)));
        out.sequences.extend(other.sequences.iter().map(|(k, v)| (k.clone(), v.clone())));
        out
    }

    pub fn resolve(&self, r: &ParamRef) -> Result<f64> {
        match r.index {
            None => self.scalars.get(r.name.as_ref()).copied().ok_or_else(|| {
                Error::UnresolvedSymbol(r.name.to_string())
            }),
            Some(i) => self
                .sequences
                .get(r.name.as_ref())
                .and_then(|s| s.get(i))
                .copied()
                .ok_or_else(|| Error::UnresolvedSymbol(format!("{}[{}]", r.name, i + 1))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Instr {
    Const(f64),
    Q(usize),
    P(usize),
    Un(UnaryOp, usize),
    Bin(BinaryOp, usize, usize),
    PowI(usize, i32),
    PowF(usize, f64),
}

/// An expression with parameters resolved, flattened into a tape of
/// instructions. Shared subgraphs are evaluated once.
#[derive(Debug, Clone)]
pub struct Compiled {
    instrs: Vec<Instr>,
}

impl Compiled {
    pub fn new(f: &Expr, params: &ParamSet) -> Result<Self> {
        let mut c = Compiled { instrs: Vec::new() };
        let mut memo = HashMap::new();
        c.emit(f, params, &mut memo)?;
        Ok(c)
    }

    fn push(&mut self, i: Instr) -> usize {
        self.instrs.push(i);
        self.instrs.len() - 1
    }

    fn emit(
        &mut self,
        e: &Expr,
        params: &ParamSet,
        memo: &mut HashMap<*const Node, usize>,
    ) -> Result<usize> {
        if let Some(&slot) = memo.get(&e.ptr()) {
            return Ok(slot);
        }
        let slot = match e.node() {
            Node::Const(v) => self.push(Instr::Const(*v)),
            Node::Q(i) => self.push(Instr::Q(*i)),
            Node::P(i) => self.push(Instr::P(*i)),
            Node::Param(r) => {
                let v = params.resolve(r)?;
                self.push(Instr::Const(v))
            }
            Node::Symbol(s) => return Err(Error::UnresolvedSymbol(s.to_string())),
            Node::Unary(op, a) => {
                let a = self.emit(a, params, memo)?;
                self.push(Instr::Un(*op, a))
            }
            Node::Binary(BinaryOp::Pow, a, b) => {
                let a = self.emit(a, params, memo)?;
                match self.const_of(b, params) {
                    Some(c) if c.fract() == 0.0 && c.abs() < 1e9 => {
                        self.push(Instr::PowI(a, c as i32))
                    }
                    Some(c) => self.push(Instr::PowF(a, c)),
                    None => {
                        let b = self.emit(b, params, memo)?;
                        self.push(Instr::Bin(BinaryOp::Pow, a, b))
                    }
                }
            }
            Node::Binary(op, a, b) => {
                let a = self.emit(a, params, memo)?;
                let b = self.emit(b, params, memo)?;
                self.push(Instr::Bin(*op, a, b))
            }
        };
        memo.insert(e.ptr(), slot);
        Ok(slot)
    }

    /// Exponents that are constants or plain parameters are folded so that
    /// integer powers accept any base.
    fn const_of(&self, e: &Expr, params: &ParamSet) -> Option<f64> {
        match e.node() {
            Node::Const(v) => Some(*v),
            Node::Param(r) => params.resolve(r).ok(),
            Node::Unary(UnaryOp::Neg, a) => self.const_of(a, params).map(|v| -v),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.instrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instrs.is_empty()
    }

    /// Evaluate over any scalar type; derivative slots are ordered
    /// `q_1..q_N, p_1..p_N`.
    pub fn eval<S: Scalar>(&self, x: &PhasePoint) -> Result<S> {
        let n = x.n();
        let dim = 2 * n;
        let mut vals: Vec<S> = Vec::with_capacity(self.instrs.len());
        for ins in &self.instrs {
            let out = match *ins {
                Instr::Const(v) => S::constant(v, dim),
                Instr::Q(i) => {
                    if i >= n {
                        return Err(Error::CoordinateOutOfRange { index: i, n });
                    }
                    S::variable(x.q[i], i, dim)
                }
                Instr::P(i) => {
                    if i >= n {
                        return Err(Error::CoordinateOutOfRange { index: i, n });
                    }
                    S::variable(x.p[i], n + i, dim)
                }
                Instr::Un(op, a) => {
                    let v = vals[a].value();
                    let (f, d1, d2) = op.taylor(v);
                    if !f.is_finite() {
                        return Err(Error::Domain(format!("{}({v})", op.name())));
                    }
                    vals[a].chain(f, d1, d2)
                }
                Instr::Bin(op, a, b) => {
                    let (x, y) = (&vals[a], &vals[b]);
                    match op {
                        BinaryOp::Add => x.add(y),
                        BinaryOp::Sub => x.sub(y),
                        BinaryOp::Mul => x.mul(y),
                        BinaryOp::Div => {
                            let v = y.value();
                            if v == 0.0 {
                                return Err(Error::Domain("division by zero".into()));
                            }
                            x.mul(&y.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v)))
                        }
                        BinaryOp::Pow => {
                            let v = x.value();
                            if v <= 0.0 {
                                return Err(Error::Domain(format!(
                                    "non-positive base {v} with variable exponent"
                                )));
                            }
                            let l = x.chain(v.ln(), 1.0 / v, -1.0 / (v * v));
                            let e = y.mul(&l);
                            let ev = e.value().exp();
                            e.chain(ev, ev, ev)
                        }
                    }
                }
                Instr::PowI(a, k) => {
                    let v = vals[a].value();
                    if k == 0 {
                        S::constant(1.0, dim)
                    } else if v == 0.0 && k < 0 {
                        return Err(Error::Domain("zero to a negative power".into()));
                    } else {
                        let kf = k as f64;
                        vals[a].chain(
                            v.powi(k),
                            kf * v.powi(k - 1),
                            kf * (kf - 1.0) * v.powi(k - 2),
                        )
                    }
                }
                Instr::PowF(a, c) => {
                    let v = vals[a].value();
                    if v < 0.0 {
                        return Err(Error::Domain(format!("negative base {v} to power {c}")));
                    }
                    vals[a].chain(v.powf(c), c * v.powf(c - 1.0), c * (c - 1.0) * v.powf(c - 2.0))
                }
            };
            if !out.is_finite() {
                return Err(Error::Domain("non-finite intermediate value".into()));
            }
            vals.push(out);
        }
        vals.pop().ok_or_else(|| Error::Domain("empty expression".into()))
    }

    pub fn value(&self, x: &PhasePoint) -> Result<f64> {
        self.eval::<f64>(x)
    }

    pub fn jet1(&self, x: &PhasePoint) -> Result<Jet1> {
        self.eval::<Jet1>(x)
    }

    pub fn jet2(&self, x: &PhasePoint) -> Result<Jet2> {
        self.eval::<Jet2>(x)
    }
}
