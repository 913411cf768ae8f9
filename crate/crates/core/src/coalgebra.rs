//! Generic Poisson-coalgebra engine.
//!
//! A [`CoalgebraSpec`] holds brackets, Casimirs, a two-site coproduct rule and
//! a one-site symplectic realization, all as [`Expr`]s over formal symbols.
//! Generators are plain symbols (`"Jm"`), two-site rules use `"Jm@L"` and
//! `"Jm@R"`, and m-site expansions use `"Jm@0"`, ..., `"Jm@{m-1}"`.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{self, Compiled, Expr, Node, ParamSet, PhasePoint, SampleBox};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CasimirKind {
    Linear,
    Nonlinear,
}

#[derive(Debug, Clone)]
pub struct Casimir {
    pub name: String,
    pub expr: Expr,
    pub kind: CasimirKind,
    /// Smallest coproduct order giving a non-trivial integral. 2 for most
    /// algebras; 3 when the second coproduct vanishes identically.
    pub first_order: usize,
}

#[derive(Debug, Clone)]
pub struct CoalgebraSpec {
    pub name: String,
    pub generators: Vec<String>,
    /// `brackets[i][j] = {X_i, X_j}` over generator symbols and parameters.
    pub brackets: Vec<Vec<Expr>>,
    pub casimirs: Vec<Casimir>,
    /// Two-site rule per generator over `X@L` / `X@R`.
    pub coproduct: Vec<Expr>,
    /// One-site realization per generator on `(q_1, p_1)`, with per-site
    /// parameters at index 0.
    pub realization: Vec<Expr>,
    /// Dimension `s` of the one-site symplectic realization.
    pub realization_dim: usize,
    /// Per-site parameter names (one value per site).
    pub site_params: Vec<String>,
    /// Shared scalar parameters such as the deformation `z`.
    pub scalar_params: Vec<String>,
}

impl CoalgebraSpec {
    pub fn index_of(&self, gen: &str) -> Result<usize> {
        self.generators
            .iter()
            .position(|g| g == gen)
            .ok_or_else(|| Error::UnknownGenerator(gen.to_string()))
    }

    pub fn nonlinear_casimirs(&self) -> impl Iterator<Item = &Casimir> {
        self.casimirs.iter().filter(|c| c.kind == CasimirKind::Nonlinear)
    }

    /// `(l, r, R)`: generators, Casimirs, nonlinear Casimirs.
    pub fn counts(&self) -> (usize, usize, usize) {
        (self.generators.len(), self.casimirs.len(), self.nonlinear_casimirs().count())
    }

    /// True when every generator has the primitive rule `X@L + X@R`.
    pub fn is_primitive(&self) -> bool {
        self.generators.iter().zip(&self.coproduct).all(|(g, rule)| {
            let params = ParamSet::new();
            // compare on a couple of symbol assignments
            [(0.3, 1.7), (-2.1, 0.9)].iter().all(|&(l, r)| {
                let mut b = HashMap::new();
                for h in &self.generators {
                    let (vl, vr) = if h == g { (l, r) } else { (l * 3.1 + 0.7, r * 1.9 - 0.2) };
                    b.insert(format!("{h}@L"), Expr::constant(vl));
                    b.insert(format!("{h}@R"), Expr::constant(vr));
                }
                let scalars: ParamSet = self
                    .scalar_params
                    .iter()
                    .fold(params.clone(), |ps, s| ps.with(s, 0.37));
                let pt = PhasePoint { q: vec![0.0], p: vec![0.0] };
                matches!(expr::evaluate(&rule.substitute(&b), &pt, &scalars), Ok(v) if (v - (l + r)).abs() < 1e-12)
            })
        })
    }

    /// Bracket table entry `{a, b}`.
    pub fn bracket(&self, a: &str, b: &str) -> Result<&Expr> {
        Ok(&self.brackets[self.index_of(a)?][self.index_of(b)?])
    }
}

/// Symbol for generator `gen` on (0-based) site `site`.
pub fn site_symbol(gen: &str, site: usize) -> Expr {
    Expr::symbol(&format!("{gen}@{site}"))
}

fn split_site(sym: &str) -> Option<(&str, usize)> {
    let (g, k) = sym.rsplit_once('@')?;
    Some((g, k.parse().ok()?))
}

/// Move site-tagged symbols `X@k` to `X@{k+by}`.
pub fn shift_site_symbols(e: &Expr, by: usize) -> Expr {
    if by == 0 {
        return e.clone();
    }
    e.map_leaves(&mut |n| match n {
        Node::Symbol(s) => split_site(s).map(|(g, k)| site_symbol(g, k + by)),
        _ => None,
    })
}

/// m-th left coproducts of every generator, over sites `0..m`.
///
/// `Delta^(m) = (Delta^(m-1) (x) id) o Delta`: the left factor of the
/// two-site rule is replaced by the previous order, the right factor lives on
/// the new last site.
pub fn left_coproducts(spec: &CoalgebraSpec, m: usize) -> Vec<Expr> {
    let mut cur: Vec<Expr> = spec.generators.iter().map(|g| site_symbol(g, 0)).collect();
    for k in 2..=m {
        let mut b = HashMap::new();
        for (g, prev) in spec.generators.iter().zip(&cur) {
            b.insert(format!("{g}@L"), prev.clone());
            b.insert(format!("{g}@R"), site_symbol(g, k - 1));
        }
        cur = spec.coproduct.iter().map(|rule| rule.substitute(&b)).collect();
    }
    cur
}

/// m-th right coproducts of every generator, over sites `0..m`.
///
/// `Delta_(m) = (id (x) Delta_(m-1)) o Delta`: the right factor is replaced by
/// the previous order shifted one site up, the left factor is site 0.
pub fn right_coproducts(spec: &CoalgebraSpec, m: usize) -> Vec<Expr> {
    let mut cur: Vec<Expr> = spec.generators.iter().map(|g| site_symbol(g, 0)).collect();
    for _ in 2..=m {
        let mut b = HashMap::new();
        for (g, prev) in spec.generators.iter().zip(&cur) {
            b.insert(format!("{g}@L"), site_symbol(g, 0));
            b.insert(format!("{g}@R"), shift_site_symbols(prev, 1));
        }
        cur = spec.coproduct.iter().map(|rule| rule.substitute(&b)).collect();
    }
    cur
}

pub fn coproduct_left(spec: &CoalgebraSpec, gen: &str, m: usize) -> Result<Expr> {
    let i = spec.index_of(gen)?;
    check_order(m)?;
    Ok(left_coproducts(spec, m).swap_remove(i))
}

pub fn coproduct_right(spec: &CoalgebraSpec, gen: &str, m: usize) -> Result<Expr> {
    let i = spec.index_of(gen)?;
    check_order(m)?;
    Ok(right_coproducts(spec, m).swap_remove(i))
}

fn check_order(m: usize) -> Result<()> {
    if m == 0 {
        Err(Error::ParameterMismatch("coproduct order must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Which end of the chain an integral is anchored to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// Number of sites and the parameters attached to them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteConfig {
    pub n: usize,
    pub site: BTreeMap<String, Vec<f64>>,
    pub scalars: BTreeMap<String, f64>,
}

impl SiteConfig {
    pub fn new(n: usize) -> Self {
        SiteConfig { n, site: BTreeMap::new(), scalars: BTreeMap::new() }
    }

    pub fn with_site(mut self, name: &str, values: Vec<f64>) -> Self {
        self.site.insert(name.to_string(), values);
        self
    }

    pub fn with_scalar(mut self, name: &str, v: f64) -> Self {
        self.scalars.insert(name.to_string(), v);
        self
    }

    pub fn params(&self) -> ParamSet {
        ParamSet { scalars: self.scalars.clone(), sequences: self.site.clone() }
    }

    pub fn validate(&self, spec: &CoalgebraSpec) -> Result<()> {
        if self.n == 0 {
            return Err(Error::ParameterMismatch("N must be positive".into()));
        }
        for name in &spec.site_params {
            match self.site.get(name) {
                Some(v) if v.len() == self.n => {}
                Some(v) => {
                    return Err(Error::ParameterMismatch(format!(
                        "`{name}` has {} entries for N = {}",
                        v.len(),
                        self.n
                    )))
                }
                None => {
                    return Err(Error::ParameterMismatch(format!(
                        "{} needs per-site parameter `{name}`",
                        spec.name
                    )))
                }
            }
        }
        for name in &spec.scalar_params {
            if !self.scalars.contains_key(name) {
                return Err(Error::ParameterMismatch(format!(
                    "{} needs scalar parameter `{name}`",
                    spec.name
                )));
            }
        }
        Ok(())
    }
}

/// One member of a Casimir-derived integral family.
#[derive(Debug, Clone)]
pub struct Integral {
    pub casimir: String,
    pub m: usize,
    pub side: Side,
    pub expr: Expr,
    /// Sites `support.0 .. support.1` (exclusive) the integral depends on.
    pub support: (usize, usize),
}

impl Integral {
    pub fn name(&self) -> String {
        match self.side {
            Side::Left => format!("{}^({})", self.casimir, self.m),
            Side::Right => format!("{}_({})", self.casimir, self.m),
        }
    }
}

/// An N-site instantiation of a coalgebra.
#[derive(Debug, Clone)]
pub struct RealizedSystem {
    pub spec: CoalgebraSpec,
    pub config: SiteConfig,
    /// Realized `Delta^(N)(X)` per generator, in spec order.
    pub generators: Vec<(String, Expr)>,
    pub hamiltonian: Option<Expr>,
    pub left: Vec<Integral>,
    pub right: Vec<Integral>,
}

impl RealizedSystem {
    pub fn n(&self) -> usize {
        self.config.n
    }

    pub fn params(&self) -> ParamSet {
        self.config.params()
    }

    pub fn generator(&self, name: &str) -> Result<&Expr> {
        self.generators
            .iter()
            .find(|(g, _)| g == name)
            .map(|(_, e)| e)
            .ok_or_else(|| Error::UnknownGenerator(name.to_string()))
    }

    /// Substitution map `X -> realized Delta^(N)(X)`.
    pub fn generator_bindings(&self) -> HashMap<String, Expr> {
        self.generators.iter().cloned().collect()
    }

    /// Fill both integral families.
    pub fn with_integrals(mut self) -> Self {
        self.left = casimir_integrals_for(&self.spec, &self.config, Side::Left);
        self.right = casimir_integrals_for(&self.spec, &self.config, Side::Right);
        self
    }
}

/// Substitution map `X@s -> D(X)` on site `s`, for sites `0..n`.
pub fn realization_bindings(spec: &CoalgebraSpec, n: usize) -> HashMap<String, Expr> {
    let mut b = HashMap::new();
    for (g, tmpl) in spec.generators.iter().zip(&spec.realization) {
        for s in 0..n {
            b.insert(format!("{g}@{s}"), tmpl.at_site(s));
        }
    }
    b
}

/// Realize all generators on the N-site phase space.
pub fn realize(spec: &CoalgebraSpec, config: &SiteConfig) -> Result<RealizedSystem> {
    config.validate(spec)?;
    let bind = realization_bindings(spec, config.n);
    let generators = spec
        .generators
        .iter()
        .zip(left_coproducts(spec, config.n))
        .map(|(g, e)| (g.clone(), e.substitute(&bind)))
        .collect();
    Ok(RealizedSystem {
        spec: spec.clone(),
        config: config.clone(),
        generators,
        hamiltonian: None,
        left: Vec::new(),
        right: Vec::new(),
    })
}

/// Realize a function of the generators on `m` consecutive sites of an
/// `n`-site chain: sites `0..m` for the left side, `n-m..n` for the right.
pub fn realize_function(
    spec: &CoalgebraSpec,
    f: &Expr,
    n: usize,
    m: usize,
    side: Side,
) -> Expr {
    let (cops, offset) = match side {
        Side::Left => (left_coproducts(spec, m), 0),
        Side::Right => (right_coproducts(spec, m), n - m),
    };
    let gen_bind: HashMap<String, Expr> = spec
        .generators
        .iter()
        .zip(cops)
        .map(|(g, e)| (g.clone(), shift_site_symbols(&e, offset)))
        .collect();
    f.substitute(&gen_bind).substitute(&realization_bindings(spec, n))
}

fn casimir_integrals_for(spec: &CoalgebraSpec, config: &SiteConfig, side: Side) -> Vec<Integral> {
    let n = config.n;
    let mut out = Vec::new();
    for c in spec.nonlinear_casimirs() {
        for m in c.first_order.max(2)..=n {
            let expr = realize_function(spec, &c.expr, n, m, side);
            let support = match side {
                Side::Left => (0, m),
                Side::Right => (n - m, n),
            };
            out.push(Integral { casimir: c.name.clone(), m, side, expr, support });
        }
    }
    out
}

/// Casimir-derived integrals `C_j^(m)` (left) or `C_j,(m)` (right) for
/// `m >= 2`. Order-1 values are site constants and are not listed.
pub fn casimir_integrals(
    spec: &CoalgebraSpec,
    config: &SiteConfig,
    side: Side,
) -> Result<Vec<Integral>> {
    config.validate(spec)?;
    Ok(casimir_integrals_for(spec, config, side))
}

/// Substitute realized generators into a Hamiltonian written over generator
/// symbols. Any other placeholder left over is an error.
pub fn build_hamiltonian(system: &RealizedSystem, h: &Expr) -> Result<Expr> {
    let out = h.substitute(&system.generator_bindings());
    if let Some(s) = out.symbols().into_iter().next() {
        return Err(Error::UnresolvedSymbol(s));
    }
    Ok(out)
}

/// Residual of one generator pair in [`check_poisson_map`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairResidual {
    pub a: String,
    pub b: String,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonMapReport {
    pub spec: String,
    pub n: usize,
    pub samples: usize,
    pub tol: f64,
    pub pairs: Vec<PairResidual>,
    pub max_residual: f64,
    pub passed: bool,
}

/// Check that realized N-th coproducts close under the canonical bracket
/// exactly as the abstract bracket table says.
///
/// Residual per pair and point: `|{DX_i, DX_j} - D{X_i, X_j}|` divided by
/// `|grad DX_i| |grad DX_j|`.
pub fn check_poisson_map(
    spec: &CoalgebraSpec,
    config: &SiteConfig,
    sample_box: &SampleBox,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<PoissonMapReport> {
    if samples == 0 {
        return Err(Error::ParameterMismatch("samples must be at least 1".into()));
    }
    let sys = realize(spec, config)?;
    let params = sys.params();
    let bind = sys.generator_bindings();
    let gens: Vec<Compiled> = sys
        .generators
        .iter()
        .map(|(_, e)| Compiled::new(e, &params))
        .collect::<Result<_>>()?;
    let l = gens.len();
    let mut rhs = Vec::new();
    for i in 0..l {
        for j in (i + 1)..l {
            rhs.push((i, j, Compiled::new(&spec.brackets[i][j].substitute(&bind), &params)?));
        }
    }
    let points = sample_box.sample(samples, seed);
    let per_point: Vec<Vec<f64>> = points
        .par_iter()
        .map(|x| -> Result<Vec<f64>> {
            let grads: Vec<Vec<f64>> = gens
                .iter()
                .map(|c| c.jet1(x).map(|j| j.g))
                .collect::<Result<_>>()
                .map_err(|e| e.at_point(&x.q, &x.p))?;
            rhs.iter()
                .map(|(i, j, c)| {
                    let lhs = expr::bracket_from_gradients(&grads[*i], &grads[*j]);
                    let want = c.value(x).map_err(|e| e.at_point(&x.q, &x.p))?;
                    Ok(expr::normalized_residual(lhs - want, &grads[*i], &grads[*j]))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let pairs: Vec<PairResidual> = rhs
        .iter()
        .enumerate()
        .map(|(k, (i, j, _))| PairResidual {
            a: spec.generators[*i].clone(),
            b: spec.generators[*j].clone(),
            max_residual: per_point.iter().map(|r| r[k]).fold(0.0, f64::max),
        })
        .collect();
    let max_residual = pairs.iter().map(|p| p.max_residual).fold(0.0, f64::max);
    Ok(PoissonMapReport {
        spec: spec.name.clone(),
        n: config.n,
        samples,
        tol,
        passed: max_residual <= tol,
        pairs,
        max_residual,
    })
}

/// Necessary condition for complete integrability with `R` nonlinear
/// Casimirs and a realization of dimension `s`: `s <= R - (R-1)/N`.
pub fn integrability_condition(s: u64, r_nonlinear: u64, n: u64) -> bool {
    // multiply through by N to stay in integers
    s * n + (r_nonlinear.saturating_sub(1)) <= r_nonlinear * n && r_nonlinear >= 1
}

/// Dimension `(l - r)/2` of a generic symplectic realization.
pub fn generic_dimension(l: u64, r: u64) -> Result<u64> {
    let d = l as i64 - r as i64;
    if d < 0 || d % 2 != 0 {
        return Err(Error::OddDimension(d));
    }
    Ok((d / 2) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counting_conditions() {
        assert!(integrability_condition(1, 1, 2));
        assert!(integrability_condition(1, 1, 17));
        assert!(!integrability_condition(2, 1, 3));
        // R = 2: s <= 2 - 1/N, so s = 1 passes and s = 2 fails
        assert!(integrability_condition(1, 2, 4));
        assert!(!integrability_condition(2, 2, 4));
        assert_eq!(generic_dimension(3, 1), Ok(1));
        assert_eq!(generic_dimension(6, 2), Ok(2));
        assert_eq!(generic_dimension(6, 1), Err(Error::OddDimension(5)));
    }

    #[test]
    fn site_symbols_shift() {
        let e = site_symbol("Jm", 0) + site_symbol("Jp", 2);
        let s = shift_site_symbols(&e, 3);
        assert_eq!(s.symbols(), vec!["Jm@3".to_string(), "Jp@5".to_string()]);
    }
}
