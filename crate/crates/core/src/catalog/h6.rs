//! Quasi-integrable systems on the two-photon coalgebra. User functions
//! take the projection `a = lambda . q` and the squared radius `s = q^2`.

use super::{check_len, compose, CatalogEntry, ARG_PROJECTION, ARG_SQUARED};
use crate::algebras::h6;
use crate::coalgebra::{realize, RealizedSystem, SiteConfig};
use crate::error::{Error, Result};
use crate::expr::{Expr, ParamSet};
use crate::geometry::{MetricField, MetricKind};
use crate::verify::Class;

fn h6_system(lambda: &[f64], n: usize) -> Result<RealizedSystem> {
    check_len("lambda", lambda, n)?;
    if lambda.contains(&0.0) {
        return Err(Error::ParameterMismatch("every lambda_i must be nonzero".into()));
    }
    realize(&h6(), &SiteConfig::new(n).with_site("lambda", lambda.to_vec()))
}

struct Gens {
    k: Expr,
    ap: Expr,
    am: Expr,
    bp: Expr,
    bm: Expr,
    m: Expr,
}

fn gens(sys: &RealizedSystem) -> Result<Gens> {
    let g = |s: &str| sys.generator(s).cloned();
    Ok(Gens { k: g("K")?, ap: g("Ap")?, am: g("Am")?, bp: g("Bp")?, bm: g("Bm")?, m: g("M")? })
}

fn on_gens(f: &Expr, g: &Gens) -> Result<Expr> {
    compose(f, &[(ARG_PROJECTION, g.am.clone()), (ARG_SQUARED, g.bm.clone())])
}

fn entry(id: &str, anchor: &'static str, n: usize, h: Expr, sys: RealizedSystem) -> CatalogEntry {
    let mut e = CatalogEntry::new(id, anchor, n, h, ParamSet::new()).with_system(sys);
    e.claimed_class = Class::QuasiIntegrable;
    e
}

/// `p^2/2 + F(lambda . q, q^2)`.
pub fn h6_natural(f: &Expr, lambda: &[f64], n: usize) -> Result<CatalogEntry> {
    let sys = h6_system(lambda, n)?;
    let g = gens(&sys)?;
    let h = g.bp.clone() / 2.0 + on_gens(f, &g)?;
    let mut e = entry("h6.natural", "natural system on the two-photon coalgebra", n, h, sys);
    e.user_functions = vec!["F"];
    Ok(e)
}

/// `p^2/2 + (q.p - lambda^2/2) F + (lambda . p) G + R`.
pub fn h6_em(f: &Expr, gf: &Expr, r: &Expr, lambda: &[f64], n: usize) -> Result<CatalogEntry> {
    let sys = h6_system(lambda, n)?;
    let g = gens(&sys)?;
    let h = g.bp.clone() / 2.0 + g.k.clone() * on_gens(f, &g)? + g.ap.clone() * on_gens(gf, &g)? + on_gens(r, &g)?;
    let mut e = entry("h6.em", "electromagnetic system on the two-photon coalgebra", n, h, sys);
    e.user_functions = vec!["F", "G", "R"];
    Ok(e)
}

/// `p^2 F + (lambda . p)^2 G + (q.p)^2 R + (q.p)(lambda . p) S`, a
/// geodesic flow whose cometric is twice the quadratic form in `p`.
pub fn h6_geodesic(f: &Expr, gf: &Expr, r: &Expr, s: &Expr, lambda: &[f64], n: usize) -> Result<CatalogEntry> {
    let sys = h6_system(lambda, n)?;
    let g = gens(&sys)?;
    let qp = g.k.clone() + g.m.clone() / 2.0;
    let (fv, gv, rv, sv) = (on_gens(f, &g)?, on_gens(gf, &g)?, on_gens(r, &g)?, on_gens(s, &g)?);
    let h = g.bp.clone() * fv.clone()
        + g.ap.square() * gv.clone()
        + qp.square() * rv.clone()
        + qp * g.ap.clone() * sv.clone();
    let params = sys.params();
    let mut e = entry("h6.geodesic", "geodesic flow on the two-photon coalgebra", n, h, sys);
    e.user_functions = vec!["F", "G", "R", "S"];

    let lam = |i: usize| Expr::site_param("lambda", i);
    let rows = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let d = if i == j { fv.clone() } else { Expr::zero() };
                    let sym = Expr::q(i) * lam(j) + lam(i) * Expr::q(j);
                    2.0 * (d + gv.clone() * lam(i) * lam(j) + rv.clone() * Expr::q(i) * Expr::q(j) + sv.clone() * sym / 2.0)
                })
                .collect()
        })
        .collect();
    let metric = MetricField::full(rows, MetricKind::Cometric)?;
    let mut definite = true;
    for x in e.sample_box.sample(20, 0) {
        if !metric.is_positive_definite(&x.q, &params)? {
            definite = false;
            break;
        }
    }
    if definite {
        e.metric = Some(metric);
    } else {
        e.notes = "the cometric is not positive definite on the sampling box; no metric attached".into();
    }
    Ok(e)
}

/// Scalar and vector potentials of the three-dimensional electromagnetic
/// system, so that `H = (p - e A)^2/2 + e psi`.
#[derive(Debug, Clone)]
pub struct H6Fields {
    pub scalar: Expr,
    pub vector: [Expr; 3],
}

pub fn h6_em_fields_3d(f: &Expr, gf: &Expr, r: &Expr, charge: f64, lambda: &[f64]) -> Result<H6Fields> {
    check_len("lambda", lambda, 3)?;
    let am = Expr::sum((0..3).map(|i| lambda[i] * Expr::q(i)));
    let bm = Expr::sum((0..3).map(|i| Expr::q(i).square()));
    let m: f64 = lambda.iter().map(|l| l * l).sum();
    let at = |e: &Expr| compose(e, &[(ARG_PROJECTION, am.clone()), (ARG_SQUARED, bm.clone())]);
    let (fv, gv, rv) = (at(f)?, at(gf)?, at(r)?);
    let vector = [0, 1, 2].map(|i| -(Expr::q(i) * fv.clone() + lambda[i] * gv.clone()) / charge);
    let scalar = rv / charge
        - m * fv.clone() / (2.0 * charge)
        - (bm * fv.square() + 2.0 * am * fv * gv.clone() + m * gv.square()) / (2.0 * charge);
    Ok(H6Fields { scalar, vector })
}
