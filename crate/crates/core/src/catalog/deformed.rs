//! Free motion and potentials on the non-standard deformation of sl(2,R).

use super::{check_len, compose, CatalogEntry, ARG_DEFORMED};
use crate::algebras::sl2z;
use crate::coalgebra::{realize, SiteConfig};
use crate::error::{Error, Result};
use crate::expr::{evaluate, Expr, ParamSet, PhasePoint};
use crate::geometry::{deformed_metric, ClosedCurvature};
use crate::verify::Class;

fn g_at_origin(g: &Expr, n: usize, user: &ParamSet) -> Result<()> {
    let f = compose(g, &[(ARG_DEFORMED, Expr::zero())])?;
    let v = evaluate(&f, &PhasePoint::new(vec![0.0; n], vec![0.0; n])?, user)?;
    if (v - 1.0).abs() > 1e-12 {
        return Err(Error::Config(format!("the metric function needs g(0) = 1, got {v}")));
    }
    Ok(())
}

/// `(1/2) g(z J-) J+ + U(z J-)` on the deformed chain, with `g` and `U` in
/// the placeholder `x`.
fn deformed(
    id: &str,
    anchor: &'static str,
    g: &Expr,
    u: Option<&Expr>,
    z: f64,
    b: &[f64],
    n: usize,
    user: &ParamSet,
) -> Result<CatalogEntry> {
    check_len("b", b, n)?;
    g_at_origin(g, n, user)?;
    let sys = realize(&sl2z(), &SiteConfig::new(n).with_site("b", b.to_vec()).with_scalar("z", z))?;
    let x = Expr::param("z") * sys.generator("Jm")?.clone();
    let gz = compose(g, &[(ARG_DEFORMED, x.clone())])?;
    let mut h = 0.5 * gz.clone() * sys.generator("Jp")?.clone();
    if let Some(u) = u {
        h = h + compose(u, &[(ARG_DEFORMED, x)])?;
    }
    let mut e = CatalogEntry::new(id, anchor, n, h, ParamSet::new().with("z", z)).with_system(sys);
    e.claimed_class = Class::Qms;
    e.guards = vec![gz];
    if b.iter().any(|v| *v != 0.0) {
        e.guards.extend((0..n).map(Expr::q));
    }
    e.metric = Some(deformed_metric(g, n));
    e.closed_curvature = Some(ClosedCurvature::Deformed { g: g.clone(), z });
    Ok(e)
}

/// Deformed free motion: geodesic flow of the metric built from `g`.
pub fn deformed_free(g: &Expr, z: f64, n: usize, user: &ParamSet) -> Result<CatalogEntry> {
    let mut e = deformed("sl2z.free", "deformed free motion", g, None, z, &vec![0.0; n], n, user)?;
    e.user_functions = vec!["g"];
    Ok(e)
}

/// Deformed free motion plus `U(z J-)` and deformed centrifugal terms.
pub fn deformed_potential(
    g: &Expr,
    u: &Expr,
    z: f64,
    b: &[f64],
    n: usize,
    user: &ParamSet,
) -> Result<CatalogEntry> {
    let mut e = deformed(
        "sl2z.potential",
        "deformed free motion with potential and centrifugal terms",
        g,
        Some(u),
        z,
        b,
        n,
        user,
    )?;
    e.user_functions = vec!["g", "U"];
    Ok(e)
}
