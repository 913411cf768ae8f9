//! Riemannian diagnostics: metric fields, a numeric scalar-curvature pipeline
//! and closed-form curvature formulas for conformally flat and deformed
//! coalgebra spaces.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::expr::{Compiled, Expr, ParamSet, PhasePoint};

/// Whether the stored matrix is the metric `g_ij` or its inverse `g^ij`
/// (the latter is what a kinetic Hamiltonian `g^ij p_i p_j / 2` provides).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    Metric,
    Cometric,
}

/// A symmetric matrix of coordinate functions `g_ij(q)`.
#[derive(Debug, Clone)]
pub struct MetricField {
    pub n: usize,
    pub kind: MetricKind,
    components: Vec<Vec<Expr>>,
}

/// How metric derivatives are obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Derivatives {
    Jets,
    FiniteDifference(f64),
}

impl MetricField {
    pub fn diagonal(entries: Vec<Expr>) -> Self {
        let n = entries.len();
        let mut components = vec![vec![Expr::zero(); n]; n];
        for (i, e) in entries.into_iter().enumerate() {
            components[i][i] = e;
        }
        MetricField { n, kind: MetricKind::Metric, components }
    }

    /// `f^2 dq^2` with `f2` the squared conformal factor in coordinates.
    pub fn conformal_squared(f2: Expr, n: usize) -> Self {
        MetricField::diagonal(vec![f2; n])
    }

    /// Full symmetric matrix; only the upper triangle is read.
    pub fn full(rows: Vec<Vec<Expr>>, kind: MetricKind) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::ParameterMismatch("metric matrix must be square".into()));
        }
        let mut components = rows;
        for i in 0..n {
            for j in 0..i {
                components[i][j] = components[j][i].clone();
            }
        }
        Ok(MetricField { n, kind, components })
    }

    pub fn component(&self, i: usize, j: usize) -> &Expr {
        &self.components[i][j]
    }

    fn compile(&self, params: &ParamSet) -> Result<Vec<Vec<Compiled>>> {
        self.components
            .iter()
            .map(|row| row.iter().map(|e| Compiled::new(e, params)).collect())
            .collect()
    }

    fn point(&self, q: &[f64]) -> Result<PhasePoint> {
        if q.len() != self.n {
            return Err(Error::InvalidPoint(format!("metric of dimension {} at {} coordinates", self.n, q.len())));
        }
        PhasePoint::new(q.to_vec(), vec![0.0; self.n])
    }

    /// The metric `g_ij` at `q`.
    pub fn matrix_at(&self, q: &[f64], params: &ParamSet) -> Result<DMatrix<f64>> {
        let comp = self.compile(params)?;
        self.matrix_with(&comp, q)
    }

    fn raw_with(&self, comp: &[Vec<Compiled>], q: &[f64]) -> Result<DMatrix<f64>> {
        let x = self.point(q)?;
        let n = self.n;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = comp[i][j].value(&x)?;
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Ok(m)
    }

    fn matrix_with(&self, comp: &[Vec<Compiled>], q: &[f64]) -> Result<DMatrix<f64>> {
        let raw = self.raw_with(comp, q)?;
        match self.kind {
            MetricKind::Metric => Ok(raw),
            MetricKind::Cometric => invert(raw),
        }
    }

    /// Leading principal minors all positive at `q`.
    pub fn is_positive_definite(&self, q: &[f64], params: &ParamSet) -> Result<bool> {
        let m = self.matrix_at(q, params)?;
        Ok(leading_minors_positive(&m))
    }
}

pub fn leading_minors_positive(m: &DMatrix<f64>) -> bool {
    (1..=m.nrows()).all(|k| m.view((0, 0), (k, k)).determinant() > 0.0)
}

fn invert(m: DMatrix<f64>) -> Result<DMatrix<f64>> {
    m.try_inverse().ok_or_else(|| Error::Singular("metric is not invertible".into()))
}

/// `g`, `dg[a] = d_a g` and `ddg[a][b] = d_a d_b g` at a point.
struct MetricJet {
    g: DMatrix<f64>,
    dg: Vec<DMatrix<f64>>,
    ddg: Vec<Vec<DMatrix<f64>>>,
}

fn jet_from_exprs(field: &MetricField, comp: &[Vec<Compiled>], q: &[f64]) -> Result<MetricJet> {
    let n = field.n;
    let x = field.point(q)?;
    let dim = 2 * n;
    let mut m = DMatrix::zeros(n, n);
    let mut dm = vec![DMatrix::zeros(n, n); n];
    let mut ddm = vec![vec![DMatrix::zeros(n, n); n]; n];
    for i in 0..n {
        for j in i..n {
            let jet = comp[i][j].jet2(&x)?;
            for (a, b) in [(i, j), (j, i)] {
                m[(a, b)] = jet.v;
                for k in 0..n {
                    dm[k][(a, b)] = jet.g[k];
                    for l in 0..n {
                        ddm[k][l][(a, b)] = jet.h[k * dim + l];
                    }
                }
            }
        }
    }
    match field.kind {
        MetricKind::Metric => Ok(MetricJet { g: m, dg: dm, ddg: ddm }),
        MetricKind::Cometric => {
            // g = G^-1, dg = -g dG g, ddg = -g ddG g + g dG_a g dG_b g + g dG_b g dG_a g
            let g = invert(m)?;
            let dg: Vec<_> = dm.iter().map(|d| -(&g * d * &g)).collect();
            let mut ddg = vec![vec![DMatrix::zeros(n, n); n]; n];
            for a in 0..n {
                for b in 0..n {
                    ddg[a][b] = -(&g * &ddm[a][b] * &g)
                        + &g * &dm[a] * &g * &dm[b] * &g
                        + &g * &dm[b] * &g * &dm[a] * &g;
                }
            }
            Ok(MetricJet { g, dg, ddg })
        }
    }
}

fn jet_from_differences(
    field: &MetricField,
    comp: &[Vec<Compiled>],
    q: &[f64],
    h: f64,
) -> Result<MetricJet> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::BadStep(h));
    }
    let n = field.n;
    let at = |shift: &[(usize, f64)]| {
        let mut y = q.to_vec();
        for &(k, s) in shift {
            y[k] += s;
        }
        field.matrix_with(comp, &y)
    };
    let g = at(&[])?;
    let mut dg = Vec::with_capacity(n);
    let mut ddg = vec![vec![DMatrix::zeros(n, n); n]; n];
    for a in 0..n {
        let (p, m) = (at(&[(a, h)])?, at(&[(a, -h)])?);
        dg.push((&p - &m) / (2.0 * h));
        ddg[a][a] = (&p - &g * 2.0 + &m) / (h * h);
        for b in 0..a {
            let v = (at(&[(a, h), (b, h)])? - at(&[(a, h), (b, -h)])? - at(&[(a, -h), (b, h)])?
                + at(&[(a, -h), (b, -h)])?)
                / (4.0 * h * h);
            ddg[a][b] = v.clone();
            ddg[b][a] = v;
        }
    }
    Ok(MetricJet { g, dg, ddg })
}

/// Scalar curvature at `q` by Christoffel symbols, their derivatives, the
/// Riemann tensor and its contractions. Sign convention: spheres are
/// positive.
pub fn scalar_curvature_numeric(
    field: &MetricField,
    q: &[f64],
    params: &ParamSet,
    mode: Derivatives,
) -> Result<f64> {
    let comp = field.compile(params)?;
    let jet = match mode {
        Derivatives::Jets => jet_from_exprs(field, &comp, q)?,
        Derivatives::FiniteDifference(h) => jet_from_differences(field, &comp, q, h)?,
    };
    scalar_from_jet(&jet, field.n)
}

fn scalar_from_jet(jet: &MetricJet, n: usize) -> Result<f64> {
    if !leading_minors_positive(&jet.g) {
        return Err(Error::Singular("metric is not positive-definite".into()));
    }
    let ginv = invert(jet.g.clone())?;
    let d = |a: usize, b: usize, c: usize| jet.dg[a][(b, c)];
    let dd = |m: usize, a: usize, b: usize, c: usize| jet.ddg[m][a][(b, c)];
    let dginv: Vec<DMatrix<f64>> = jet.dg.iter().map(|dg| -(&ginv * dg * &ginv)).collect();

    // gamma[i][j][k] = Gamma^i_jk, dgamma[m][i][j][k] = d_m Gamma^i_jk
    let mut gamma = vec![vec![vec![0.0; n]; n]; n];
    let mut dgamma = vec![vec![vec![vec![0.0; n]; n]; n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += ginv[(i, l)] * (d(j, l, k) + d(k, l, j) - d(l, j, k));
                }
                gamma[i][j][k] = 0.5 * s;
                for m in 0..n {
                    let mut t = 0.0;
                    for l in 0..n {
                        t += dginv[m][(i, l)] * (d(j, l, k) + d(k, l, j) - d(l, j, k))
                            + ginv[(i, l)] * (dd(m, j, l, k) + dd(m, k, l, j) - dd(m, l, j, k));
                    }
                    dgamma[m][i][j][k] = 0.5 * t;
                }
            }
        }
    }
    // Ricci_jl = R^i_jil with R^i_jkl = d_k G^i_lj - d_l G^i_kj + G^i_km G^m_lj - G^i_lm G^m_kj
    let mut scalar = 0.0;
    for j in 0..n {
        for l in 0..n {
            let mut ric = 0.0;
            for i in 0..n {
                ric += dgamma[i][i][l][j] - dgamma[l][i][i][j];
                for m in 0..n {
                    ric += gamma[i][i][m] * gamma[m][l][j] - gamma[i][l][m] * gamma[m][i][j];
                }
            }
            scalar += ginv[(j, l)] * ric;
        }
    }
    if !scalar.is_finite() {
        return Err(Error::Singular("non-finite curvature".into()));
    }
    Ok(scalar)
}

/// Value and first two derivatives of a one-variable function given as an
/// expression in `placeholder`.
pub fn derivatives_1d(f: &Expr, placeholder: &str, at: f64, params: &ParamSet) -> Result<(f64, f64, f64)> {
    let mut b = HashMap::new();
    b.insert(placeholder.to_string(), Expr::q(0));
    let c = Compiled::new(&f.substitute(&b), params)?;
    let x = PhasePoint::new(vec![at], vec![0.0])?;
    let j = c.jet2(&x)?;
    Ok((j.v, j.g[0], j.h[0]))
}

/// Scalar curvature of `f(r)^2 dq^2` at radius `r`, for `f` given in the
/// placeholder `"r"`:
/// `-(N-1) (2 f'' + (N-4) f'^2/f + 2 (N-1) f'/r) / f^3`.
pub fn scalar_curvature_conformal(f: &Expr, n: usize, r: f64, params: &ParamSet) -> Result<f64> {
    let (v, d1, d2) = derivatives_1d(f, "r", r, params)?;
    if v <= 0.0 {
        return Err(Error::Domain(format!("conformal factor {v} is not positive")));
    }
    let nf = n as f64;
    Ok(-(nf - 1.0) * (2.0 * d2 + (nf - 4.0) * d1 * d1 / v + 2.0 * (nf - 1.0) * d1 / r) / v.powi(3))
}

/// The conformal scalar-curvature expression in the form usually quoted,
/// `-(N-1) (2 f'' + 2 (N-1) f'/r + (N-2) f'^2) / f^2`. It disagrees with the
/// numeric pipeline as soon as `f` is not constant and is kept for
/// comparison only.
pub fn scalar_curvature_conformal_printed(f: &Expr, n: usize, r: f64, params: &ParamSet) -> Result<f64> {
    let (v, d1, d2) = derivatives_1d(f, "r", r, params)?;
    if v <= 0.0 {
        return Err(Error::Domain(format!("conformal factor {v} is not positive")));
    }
    let nf = n as f64;
    Ok(-(nf - 1.0) * (2.0 * d2 + 2.0 * (nf - 1.0) * d1 / r + (nf - 2.0) * d1 * d1) / (v * v))
}

fn g_derivs(g: &Expr, x: f64, params: &ParamSet) -> Result<(f64, f64, f64)> {
    let d = derivatives_1d(g, "x", x, params)?;
    if d.0 <= 0.0 {
        return Err(Error::Domain(format!("g({x}) = {} is not positive", d.0)));
    }
    Ok(d)
}

/// Gaussian curvature of the two-dimensional deformed space at `x = z q^2`,
/// with `g` given in the placeholder `"x"`.
pub fn gaussian_curvature_z(g: &Expr, z: f64, x: f64, params: &ParamSet) -> Result<f64> {
    let (v, d1, d2) = g_derivs(g, x, params)?;
    Ok(z * (d1 * x.cosh() + (d2 - v - d1 * d1 / v) * x.sinh()))
}

/// Scalar curvature of the three-dimensional deformed space at `x = z q^2`.
pub fn scalar_curvature_z3(g: &Expr, z: f64, x: f64, params: &ParamSet) -> Result<f64> {
    let (v, d1, d2) = g_derivs(g, x, params)?;
    Ok(z * (6.0 * d1 * x.cosh() + (4.0 * d2 - 5.0 * v - 5.0 * d1 * d1 / v) * x.sinh()))
}

/// Closed-form scalar curvature attached to a catalog metric.
#[derive(Debug, Clone)]
pub enum ClosedCurvature {
    /// `f(r)^2 dq^2` with `f` in the placeholder `"r"`.
    Conformal { f: Expr },
    /// Deformed space with `g` in `"x"`; known in two and three dimensions.
    Deformed { g: Expr, z: f64 },
}

impl ClosedCurvature {
    /// Scalar curvature at `q`, or `None` where no closed form is known.
    pub fn scalar_at(&self, q: &[f64], params: &ParamSet) -> Result<Option<f64>> {
        let n = q.len();
        let s: f64 = q.iter().map(|v| v * v).sum();
        match self {
            ClosedCurvature::Conformal { f } => scalar_curvature_conformal(f, n, s.sqrt(), params).map(Some),
            ClosedCurvature::Deformed { g, z } => match n {
                2 => Ok(Some(2.0 * gaussian_curvature_z(g, *z, z * s, params)?)),
                3 => Ok(Some(scalar_curvature_z3(g, *z, z * s, params)?)),
                _ => Ok(None),
            },
        }
    }
}

/// Diagonal metric of the deformed free motion with `g(z q^2)` given in
/// `"x"` and the deformation as the parameter `z`:
/// `g_ii = 2/(g sinhc(z q_i^2)) exp(z sum_{k<i} q_k^2 - z sum_{l>i} q_l^2)`.
pub fn deformed_metric(g: &Expr, n: usize) -> MetricField {
    let z = Expr::param("z");
    let x = |i: usize| Expr::q(i).square();
    let total = Expr::sum((0..n).map(x));
    let mut b = HashMap::new();
    b.insert("x".to_string(), z.clone() * total);
    let gz = g.substitute(&b);
    MetricField::diagonal(
        (0..n)
            .map(|i| {
                let before = Expr::sum((0..i).map(x));
                let after = Expr::sum((i + 1..n).map(x));
                2.0 / (gz.clone() * (z.clone() * x(i)).sinhc())
                    * (z.clone() * (before - after)).exp()
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn flat_metric_has_zero_curvature() {
        for n in 2..=4 {
            let g = MetricField::diagonal(vec![Expr::one(); n]);
            let q: Vec<f64> = (0..n).map(|i| 0.3 + 0.1 * i as f64).collect();
            let r = scalar_curvature_numeric(&g, &q, &ParamSet::new(), Derivatives::Jets).unwrap();
            assert!(r.abs() < 1e-12);
        }
    }

    #[test]
    fn round_metric_in_stereographic_chart() {
        // 4 dq^2 / (1 + k q^2)^2 has sectional curvature k
        let k = 0.3;
        for n in [2usize, 3] {
            let q2 = Expr::sum((0..n).map(|i| Expr::q(i).square()));
            let f2 = 4.0 / (1.0 + k * q2).square();
            let g = MetricField::conformal_squared(f2, n);
            let q = vec![0.35; n];
            let want = (n * (n - 1)) as f64 * k;
            let jets = scalar_curvature_numeric(&g, &q, &ParamSet::new(), Derivatives::Jets).unwrap();
            let fd = scalar_curvature_numeric(&g, &q, &ParamSet::new(), Derivatives::FiniteDifference(1e-3))
                .unwrap();
            assert!((jets - want).abs() < 1e-10, "{jets}");
            assert!((fd - want).abs() < 1e-5, "{fd}");
        }
    }

    #[test]
    fn cometric_route_agrees() {
        let k = -0.2;
        let n = 3;
        let q2 = Expr::sum((0..n).map(|i| Expr::q(i).square()));
        let f2 = 4.0 / (1.0 + k * q2.clone()).square();
        let inv = (1.0 + k * q2).square() / 4.0;
        let a = MetricField::conformal_squared(f2, n);
        let mut rows = vec![vec![Expr::zero(); n]; n];
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] = inv.clone();
        }
        let b = MetricField::full(rows, MetricKind::Cometric).unwrap();
        let q = [0.2, 0.5, 0.4];
        let ps = ParamSet::new();
        let ra = scalar_curvature_numeric(&a, &q, &ps, Derivatives::Jets).unwrap();
        let rb = scalar_curvature_numeric(&b, &q, &ps, Derivatives::Jets).unwrap();
        assert!((ra - rb).abs() < 1e-10 && (ra - 6.0 * k).abs() < 1e-10);
    }

    #[test]
    fn closed_forms_of_simple_factors() {
        let ps = ParamSet::new();
        let one = parse("1", &["r"]).unwrap();
        assert_eq!(scalar_curvature_conformal(&one, 3, 0.7, &ps).unwrap(), 0.0);
        let g1 = parse("1", &["x"]).unwrap();
        let k = gaussian_curvature_z(&g1, 0.1, 0.1, &ps).unwrap();
        assert!((k + 0.1 * 0.1f64.sinh()).abs() < 1e-15);
        let neg = parse("exp(-x)", &["x"]).unwrap();
        for x in [0.05, 0.4, 1.3] {
            assert!((gaussian_curvature_z(&neg, 0.2, x, &ps).unwrap() + 0.2).abs() < 1e-14);
            assert!((scalar_curvature_z3(&neg, 0.2, x, &ps).unwrap() + 1.2).abs() < 1e-13);
        }
        assert!(scalar_curvature_conformal(&parse("r - 1", &["r"]).unwrap(), 2, 0.5, &ps).is_err());
    }

    #[test]
    fn indefinite_metric_is_rejected() {
        let g = MetricField::diagonal(vec![Expr::one(), Expr::constant(-1.0)]);
        let ps = ParamSet::new();
        assert!(!g.is_positive_definite(&[0.1, 0.2], &ps).unwrap());
        assert!(scalar_curvature_numeric(&g, &[0.1, 0.2], &ps, Derivatives::Jets).is_err());
    }
}
