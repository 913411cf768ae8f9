//! Numerical integrability audits: involution matrices, independence ranks,
//! classification and parameter-limit convergence.

use std::fmt;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::CatalogEntry;
use crate::coalgebra::Side;
use crate::error::{Error, Result};
use crate::expr::{self, Compiled, Expr, ParamSet, PhasePoint, SampleBox};

/// Integrability classes, ordered from weakest to strongest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Class {
    #[serde(rename = "not-verified")]
    NotVerified,
    #[serde(rename = "quasi-integrable")]
    QuasiIntegrable,
    #[serde(rename = "integrable")]
    Integrable,
    #[serde(rename = "min-SI")]
    MinSi,
    #[serde(rename = "QMS")]
    Qms,
    #[serde(rename = "MS")]
    Ms,
}

impl Class {
    pub fn label(self) -> &'static str {
        match self {
            Class::NotVerified => "not-verified",
            Class::QuasiIntegrable => "quasi-integrable",
            Class::Integrable => "integrable",
            Class::MinSi => "min-SI",
            Class::Qms => "QMS",
            Class::Ms => "MS",
        }
    }

    /// Class implied by counts: `involutive` integrals in involution (besides
    /// `H`) and `total` functionally independent integrals on `n` degrees of
    /// freedom.
    pub fn from_counts(n: usize, involutive: usize, total: usize) -> Class {
        let n = n as i64;
        let (inv, tot) = (involutive as i64, total as i64);
        if n >= 2 && tot >= 2 * n - 2 && inv >= n - 1 {
            Class::Ms
        } else if n >= 3 && tot >= 2 * n - 3 && inv >= n - 1 {
            // at N = 3 this coincides with minimal superintegrability
            Class::Qms
        } else if tot >= n && inv >= n - 1 {
            Class::MinSi
        } else if inv >= n - 1 && inv > 0 {
            Class::Integrable
        } else if n >= 3 && inv == n - 2 && inv > 0 {
            Class::QuasiIntegrable
        } else {
            Class::NotVerified
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Which involutive set a function belongs to. Pairs across the left and
/// right sets are reported but not required to commute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Hamiltonian,
    Left,
    Right,
    /// Member of both sets (the top-order integral).
    Both,
    /// No set structure: must commute with everything.
    Free,
}

impl Family {
    pub fn must_commute(self, other: Family) -> bool {
        use Family::*;
        !matches!((self, other), (Left, Right) | (Right, Left))
    }
}

#[derive(Debug, Clone)]
pub struct Field {
    pub name: String,
    pub expr: Expr,
    pub family: Family,
}

impl Field {
    pub fn new(name: impl Into<String>, expr: Expr, family: Family) -> Self {
        Field { name: name.into(), expr, family }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairFailure {
    pub a: String,
    pub b: String,
    pub residual: f64,
}

/// Max normalized bracket per pair of functions; row and column 0 are `H`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvolutionMatrix {
    pub names: Vec<String>,
    pub residuals: Vec<Vec<f64>>,
    pub required: Vec<Vec<bool>>,
    pub tol: f64,
    pub failures: Vec<PairFailure>,
    pub passed: bool,
}

fn compile_all(exprs: &[&Expr], params: &ParamSet) -> Result<Vec<Compiled>> {
    exprs.iter().map(|e| Compiled::new(e, params)).collect()
}

/// Gradients of every compiled function at every point, in point order.
/// The first failing point (in sample order) is reported.
fn gradients(
    comp: &[Compiled],
    points: &[PhasePoint],
) -> Result<Vec<Vec<Vec<f64>>>> {
    let per: Vec<Result<Vec<Vec<f64>>>> = points
        .par_iter()
        .map(|x| {
            comp.iter()
                .map(|c| c.jet1(x).map(|j| j.g))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| e.at_point(&x.q, &x.p))
        })
        .collect();
    per.into_iter().collect()
}

/// Involution matrix of `H` together with `fields`.
pub fn involution_matrix(
    h: &Expr,
    fields: &[Field],
    params: &ParamSet,
    sample_box: &SampleBox,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<InvolutionMatrix> {
    if samples < 10 {
        return Err(Error::ParameterMismatch(format!("need at least 10 samples, got {samples}")));
    }
    sample_box.validate()?;
    let mut all = vec![Field::new("H", h.clone(), Family::Hamiltonian)];
    all.extend(fields.iter().cloned());
    let exprs: Vec<&Expr> = all.iter().map(|f| &f.expr).collect();
    let comp = compile_all(&exprs, params)?;
    let points = sample_box.sample(samples, seed);
    let grads = gradients(&comp, &points)?;
    let k = all.len();
    let mut residuals = vec![vec![0.0; k]; k];
    for g in &grads {
        for i in 0..k {
            for j in (i + 1)..k {
                let r = expr::normalized_residual(
                    expr::bracket_from_gradients(&g[i], &g[j]),
                    &g[i],
                    &g[j],
                );
                if r > residuals[i][j] {
                    residuals[i][j] = r;
                    residuals[j][i] = r;
                }
            }
        }
    }
    let mut required = vec![vec![false; k]; k];
    let mut failures = Vec::new();
    for i in 0..k {
        for j in (i + 1)..k {
            let req = all[i].family.must_commute(all[j].family);
            required[i][j] = req;
            required[j][i] = req;
            if req && !(residuals[i][j] <= tol) {
                failures.push(PairFailure {
                    a: all[i].name.clone(),
                    b: all[j].name.clone(),
                    residual: residuals[i][j],
                });
            }
        }
    }
    Ok(InvolutionMatrix {
        names: all.into_iter().map(|f| f.name).collect(),
        residuals,
        required,
        tol,
        passed: failures.is_empty(),
        failures,
    })
}

/// Default relative singular-value cutoff for numeric rank.
pub const RANK_CUTOFF: f64 = 1e-8;
/// Number of disjoint point clouds the samples are split into.
pub const RANK_CLOUDS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub rank: usize,
    pub per_cloud: Vec<usize>,
    pub cutoff: f64,
    /// Row-normalized gradient matrix at the first point attaining `rank`.
    pub jacobian: Vec<Vec<f64>>,
    pub singular_values: Vec<f64>,
}

fn point_rank(rows: &[Vec<f64>], cutoff: f64) -> (usize, Vec<Vec<f64>>, Vec<f64>) {
    let normed: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            let n = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n > 0.0 {
                r.iter().map(|v| v / n).collect()
            } else {
                r.clone()
            }
        })
        .collect();
    let cols = normed.first().map_or(0, |r| r.len());
    if normed.is_empty() || cols == 0 {
        return (0, normed, Vec::new());
    }
    let m = DMatrix::from_fn(normed.len(), cols, |i, j| normed[i][j]);
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let smax = sv.first().copied().unwrap_or(0.0);
    let rank = if smax > 0.0 { sv.iter().filter(|&&s| s > smax * cutoff).count() } else { 0 };
    (rank, normed, sv)
}

/// Functional-independence rank of `fields`: the largest numeric rank of
/// the (row-normalized) gradient matrix over the sampled points.
pub fn independence_rank(
    fields: &[Expr],
    params: &ParamSet,
    sample_box: &SampleBox,
    samples: usize,
    seed: u64,
) -> Result<RankReport> {
    independence_rank_with(fields, params, sample_box, samples, seed, RANK_CUTOFF)
}

pub fn independence_rank_with(
    fields: &[Expr],
    params: &ParamSet,
    sample_box: &SampleBox,
    samples: usize,
    seed: u64,
    cutoff: f64,
) -> Result<RankReport> {
    if samples < fields.len().max(1) {
        return Err(Error::ParameterMismatch(format!(
            "need at least {} samples for {} functions",
            fields.len().max(1),
            fields.len()
        )));
    }
    sample_box.validate()?;
    let exprs: Vec<&Expr> = fields.iter().collect();
    let comp = compile_all(&exprs, params)?;
    let points = sample_box.sample(samples, seed);
    let grads = gradients(&comp, &points)?;
    let mut per_cloud = vec![0; RANK_CLOUDS.min(samples)];
    let mut best: Option<(usize, Vec<Vec<f64>>, Vec<f64>)> = None;
    for (idx, g) in grads.iter().enumerate() {
        let (r, jac, sv) = point_rank(g, cutoff);
        let c = idx % per_cloud.len();
        per_cloud[c] = per_cloud[c].max(r);
        if best.as_ref().is_none_or(|b| r > b.0) {
            best = Some((r, jac, sv));
        }
    }
    let (rank, jacobian, singular_values) = best.unwrap_or((0, Vec::new(), Vec::new()));
    Ok(RankReport { rank, per_cloud, cutoff, jacobian, singular_values })
}

/// Full audit of one catalog entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub system: String,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub involution: InvolutionMatrix,
    pub rank: RankReport,
    /// Independent integrals (besides `H`) inside one involutive set.
    pub integrals_in_involution: usize,
    /// Independent integrals (besides `H`) over both sets.
    pub integrals_independent: usize,
    pub classification: Class,
    pub claimed: Class,
    pub expected: Class,
    pub notes: Vec<String>,
}

impl VerificationReport {
    /// Involution holds and the verified class reaches what the entry can
    /// be expected to show numerically.
    pub fn passed(&self) -> bool {
        self.involution.passed && self.classification >= self.expected
    }
}

/// Fields of an entry in the order used by [`classify`]: left integrals
/// (the top-order one shared with the right set), then right integrals of
/// lower order.
pub fn entry_fields(entry: &CatalogEntry) -> Vec<Field> {
    let n = entry.n;
    let mut out = Vec::new();
    for i in &entry.left {
        let fam = if i.m == n { Family::Both } else { Family::Left };
        out.push(Field::new(i.name(), i.expr.clone(), fam));
    }
    for i in &entry.right {
        if i.m < n {
            out.push(Field::new(i.name(), i.expr.clone(), Family::Right));
        }
    }
    out
}

fn rank_of(
    fields: &[&Field],
    h: &Expr,
    params: &ParamSet,
    sample_box: &SampleBox,
    samples: usize,
    seed: u64,
) -> Result<RankReport> {
    let mut exprs = vec![h.clone()];
    exprs.extend(fields.iter().map(|f| f.expr.clone()));
    independence_rank(&exprs, params, sample_box, samples.max(exprs.len()), seed)
}

/// Verify involution, count independent integrals and map the counts to a
/// class. Failures are recorded in the report.
pub fn classify(
    entry: &CatalogEntry,
    sample_box: &SampleBox,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<VerificationReport> {
    let fields = entry_fields(entry);
    let params = &entry.params;
    let involution = involution_matrix(&entry.hamiltonian, &fields, params, sample_box, samples, seed, tol)?;
    let all: Vec<&Field> = fields.iter().collect();
    let rank = rank_of(&all, &entry.hamiltonian, params, sample_box, samples, seed)?;
    let mut notes = Vec::new();

    let side_rank = |side: Side| -> Result<usize> {
        let set: Vec<&Field> = fields
            .iter()
            .filter(|f| match side {
                Side::Left => matches!(f.family, Family::Left | Family::Both),
                Side::Right => matches!(f.family, Family::Right | Family::Both),
            })
            .collect();
        if set.is_empty() {
            return Ok(0);
        }
        Ok(rank_of(&set, &entry.hamiltonian, params, sample_box, samples, seed)?.rank.saturating_sub(1))
    };
    let involutive = side_rank(Side::Left)?.max(side_rank(Side::Right)?);
    let independent = rank.rank.saturating_sub(1);

    let classification = if fields.is_empty() {
        notes.push("no integral family: only energy conservation can be tested".into());
        Class::NotVerified
    } else if !involution.passed {
        notes.push(format!("{} required pair(s) exceed tolerance", involution.failures.len()));
        Class::NotVerified
    } else {
        Class::from_counts(entry.n, involutive, independent)
    };
    if independent < fields.len() {
        notes.push(format!(
            "numeric rank shows {independent} independent integrals out of {} listed",
            fields.len()
        ));
    }
    if entry.claimed_class == Class::Ms && classification < Class::Ms {
        notes.push("maximal superintegrability needs an integral outside the coalgebra family".into());
    }
    if !entry.notes.is_empty() {
        notes.push(entry.notes.clone());
    }
    Ok(VerificationReport {
        system: entry.id.clone(),
        n: entry.n,
        samples,
        seed,
        tol,
        involution,
        rank,
        integrals_in_involution: involutive,
        integrals_independent: independent,
        classification,
        claimed: entry.claimed_class,
        expected: entry.expected_class(),
        notes,
    })
}

/// Deviations of a parameter family from its limit, per parameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub values: Vec<f64>,
    pub functions: Vec<String>,
    /// `deviations[v][f]`: max abs deviation of function `f` at value `v`.
    pub deviations: Vec<Vec<f64>>,
    pub max_deviation: Vec<f64>,
    /// Least-squares slope of `ln(deviation)` against `ln(value)`.
    pub order: Option<f64>,
    pub monotone: bool,
    pub passed: bool,
}

fn entry_functions(e: &CatalogEntry) -> Vec<(String, Expr)> {
    let mut out = vec![("H".to_string(), e.hamiltonian.clone())];
    out.extend(e.left.iter().map(|i| (i.name(), i.expr.clone())));
    out.extend(e.right.iter().map(|i| (i.name(), i.expr.clone())));
    out
}

/// Least-squares slope of `ln y` against `ln x` over positive pairs.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Compare `family(v)` with `target` for decreasing `values`, matching `H`,
/// left and right integrals by position.
pub fn limit_check(
    family: &dyn Fn(f64) -> Result<CatalogEntry>,
    target: &CatalogEntry,
    values: &[f64],
    sample_box: &SampleBox,
    samples: usize,
    seed: u64,
) -> Result<LimitReport> {
    if values.len() < 3 {
        return Err(Error::ParameterMismatch("limit check needs at least 3 values".into()));
    }
    if values.iter().any(|v| !(*v > 0.0)) || values.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::ParameterMismatch(
            "limit values must be positive and strictly decreasing".into(),
        ));
    }
    let tf = entry_functions(target);
    let tc = compile_all(&tf.iter().map(|f| &f.1).collect::<Vec<_>>(), &target.params)?;
    let points = sample_box.sample(samples, seed);
    let mut deviations = Vec::new();
    for &v in values {
        let e = family(v)?;
        let ef = entry_functions(&e);
        if ef.len() != tf.len() {
            return Err(Error::ParameterMismatch(format!(
                "family has {} functions, limit has {}",
                ef.len(),
                tf.len()
            )));
        }
        let ec = compile_all(&ef.iter().map(|f| &f.1).collect::<Vec<_>>(), &e.params)?;
        let mut dev = vec![0.0f64; tf.len()];
        for x in &points {
            for (k, (a, b)) in ec.iter().zip(&tc).enumerate() {
                let d = (a.value(x)? - b.value(x)?).abs();
                dev[k] = dev[k].max(d);
            }
        }
        deviations.push(dev);
    }
    let max_deviation: Vec<f64> = deviations.iter().map(|d| d.iter().copied().fold(0.0, f64::max)).collect();
    let all_zero = max_deviation.iter().all(|d| *d == 0.0);
    let monotone = max_deviation.windows(2).all(|w| w[1] < w[0]);
    let order = log_log_slope(values, &max_deviation);
    let passed = all_zero || (monotone && order.is_some_and(|o| o >= 0.9));
    Ok(LimitReport {
        values: values.to_vec(),
        functions: tf.into_iter().map(|f| f.0).collect(),
        deviations,
        max_deviation,
        order,
        monotone,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_from_counts() {
        assert_eq!(Class::from_counts(2, 1, 1), Class::Integrable);
        assert_eq!(Class::from_counts(3, 2, 3), Class::Qms);
        assert_eq!(Class::from_counts(4, 3, 5), Class::Qms);
        assert_eq!(Class::from_counts(4, 3, 4), Class::MinSi);
        assert_eq!(Class::from_counts(4, 3, 6), Class::Ms);
        assert_eq!(Class::from_counts(4, 3, 3), Class::Integrable);
        assert_eq!(Class::from_counts(4, 2, 3), Class::QuasiIntegrable);
        assert_eq!(Class::from_counts(3, 1, 1), Class::QuasiIntegrable);
        assert_eq!(Class::from_counts(2, 0, 0), Class::NotVerified);
        assert!(Class::Ms > Class::Qms && Class::Integrable > Class::QuasiIntegrable);
    }

    #[test]
    fn negative_control() {
        let fields = [Field::new("p1", Expr::p(0), Family::Free)];
        let m = involution_matrix(
            &Expr::q(0),
            &fields,
            &ParamSet::new(),
            &SampleBox::standard(1),
            10,
            0,
            1e-9,
        )
        .unwrap();
        assert!((m.residuals[0][1] - 1.0).abs() < 1e-15);
        assert!(!m.passed);
    }

    #[test]
    fn slope_of_power_law() {
        let x = [0.2, 0.1, 0.05];
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v * v).collect();
        assert!((log_log_slope(&x, &y).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(log_log_slope(&x, &[0.0, 0.0, 0.0]), None);
    }
}
