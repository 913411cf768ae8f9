//! Number types the tape can be evaluated over: plain values and dense
//! first/second-order forward jets.

/// Arithmetic needed by the tape interpreter.
pub trait Scalar: Clone {
    fn constant(v: f64, dim: usize) -> Self;
    /// Independent variable occupying derivative slot `slot`.
    fn variable(v: f64, slot: usize, dim: usize) -> Self;
    fn value(&self) -> f64;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    /// Compose with a scalar function given its value and first two
    /// derivatives at `self.value()`.
    fn chain(&self, f: f64, d1: f64, d2: f64) -> Self;
    fn is_finite(&self) -> bool;
}

impl Scalar for f64 {
    fn constant(v: f64, _: usize) -> Self {
        v
    }
    fn variable(v: f64, _: usize, _: usize) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn chain(&self, f: f64, _: f64, _: f64) -> Self {
        f
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

/// Value with gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet1 {
    pub v: f64,
    pub g: Vec<f64>,
}

impl Scalar for Jet1 {
    fn constant(v: f64, dim: usize) -> Self {
        Jet1 { v, g: vec![0.0; dim] }
    }
    fn variable(v: f64, slot: usize, dim: usize) -> Self {
        let mut g = vec![0.0; dim];
        g[slot] = 1.0;
        Jet1 { v, g }
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn add(&self, o: &Self) -> Self {
        Jet1 { v: self.v + o.v, g: self.g.iter().zip(&o.g).map(|(a, b)| a + b).collect() }
    }
    fn sub(&self, o: &Self) -> Self {
        Jet1 { v: self.v - o.v, g: self.g.iter().zip(&o.g).map(|(a, b)| a - b).collect() }
    }
    fn mul(&self, o: &Self) -> Self {
        Jet1 {
            v: self.v * o.v,
            g: self.g.iter().zip(&o.g).map(|(a, b)| a * o.v + self.v * b).collect(),
        }
    }
    fn chain(&self, f: f64, d1: f64, _: f64) -> Self {
        Jet1 { v: f, g: self.g.iter().map(|a| d1 * a).collect() }
    }
    fn is_finite(&self) -> bool {
        self.v.is_finite() && self.g.iter().all(|x| x.is_finite())
    }
}

/// Value, gradient and dense row-major hessian.
///
/// Equivalent to nesting first-order duals once; stored densely because the
/// phase spaces in use are small.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
}

impl Jet2 {
    pub fn dim(&self) -> usize {
        self.g.len()
    }
}

impl Scalar for Jet2 {
    fn constant(v: f64, dim: usize) -> Self {
        Jet2 { v, g: vec![0.0; dim], h: vec![0.0; dim * dim] }
    }
    fn variable(v: f64, slot: usize, dim: usize) -> Self {
        let mut j = Jet2::constant(v, dim);
        j.g[slot] = 1.0;
        j
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn add(&self, o: &Self) -> Self {
        Jet2 {
            v: self.v + o.v,
            g: self.g.iter().zip(&o.g).map(|(a, b)| a + b).collect(),
            h: self.h.iter().zip(&o.h).map(|(a, b)| a + b).collect(),
        }
    }
    fn sub(&self, o: &Self) -> Self {
        Jet2 {
            v: self.v - o.v,
            g: self.g.iter().zip(&o.g).map(|(a, b)| a - b).collect(),
            h: self.h.iter().zip(&o.h).map(|(a, b)| a - b).collect(),
        }
    }
    fn mul(&self, o: &Self) -> Self {
        let n = self.dim();
        let mut h = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let k = i * n + j;
                h.push(
                    self.h[k] * o.v + self.v * o.h[k] + self.g[i] * o.g[j] + o.g[i] * self.g[j],
                );
            }
        }
        Jet2 {
            v: self.v * o.v,
            g: self.g.iter().zip(&o.g).map(|(a, b)| a * o.v + self.v * b).collect(),
            h,
        }
    }
    fn chain(&self, f: f64, d1: f64, d2: f64) -> Self {
        let n = self.dim();
        let mut h = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                h.push(d1 * self.h[i * n + j] + d2 * self.g[i] * self.g[j]);
            }
        }
        Jet2 { v: f, g: self.g.iter().map(|a| d1 * a).collect(), h }
    }
    fn is_finite(&self) -> bool {
        self.v.is_finite()
            && self.g.iter().all(|x| x.is_finite())
            && self.h.iter().all(|x| x.is_finite())
    }
}
