//! sl(2,R)-coalgebra families: Evans, electromagnetic, constant curvature,
//! conformally flat and Darboux spaces.

use serde::{Deserialize, Serialize};

use super::{check_len, compose, CatalogEntry, ARG_RADIUS, ARG_SQUARED};
use crate::algebras::sl2;
use crate::coalgebra::{realize, RealizedSystem, SiteConfig};
use crate::error::{Error, Result};
use crate::expr::build::{centrifugal, p_squared, q_dot_p, q_squared};
use crate::expr::{evaluate, Expr, ParamSet, SampleBox};
use crate::geometry::{ClosedCurvature, MetricField, MetricKind};
use crate::verify::Class;

/// Coordinate chart on a constant-curvature space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chart {
    Poincare,
    Beltrami,
}

fn sl2_system(b: &[f64], n: usize) -> Result<RealizedSystem> {
    check_len("b", b, n)?;
    realize(&sl2(), &SiteConfig::new(n).with_site("b", b.to_vec()))
}

/// `sum_i b_i / (2 q_i^2)`.
fn barriers(n: usize) -> Expr {
    centrifugal("b", n) / 2.0
}

fn radius(n: usize) -> Expr {
    q_squared(n).sqrt()
}

fn site_guards(b: &[f64], n: usize) -> Vec<Expr> {
    if b.iter().any(|v| *v != 0.0) {
        (0..n).map(Expr::q).collect()
    } else {
        Vec::new()
    }
}

fn entry(id: &str, anchor: &'static str, n: usize, h: Expr, sys: RealizedSystem, claimed: Class) -> CatalogEntry {
    let mut e = CatalogEntry::new(id, anchor, n, h, ParamSet::new()).with_system(sys);
    e.claimed_class = claimed;
    e
}

/// `p^2/2 + F(q^2) + sum b_i/(2 q_i^2)` with `F` in the placeholder `s`.
pub fn evans(f: &Expr, b: &[f64], n: usize) -> Result<CatalogEntry> {
    let sys = sl2_system(b, n)?;
    let h = p_squared(n) / 2.0 + compose(f, &[(ARG_SQUARED, q_squared(n))])? + barriers(n);
    let mut e = entry("sl2.evans", "Evans system with centrifugal barriers", n, h, sys, Class::Qms);
    e.user_functions = vec!["F"];
    e.guards = site_guards(b, n);
    Ok(e)
}

/// Flat Smorodinsky-Winternitz: Evans with `F(s) = omega^2 s / 2`.
pub fn smorodinsky_winternitz(omega: f64, b: &[f64], n: usize) -> Result<CatalogEntry> {
    let f = Expr::constant(omega * omega / 2.0) * Expr::symbol(ARG_SQUARED);
    let mut e = evans(&f, b, n)?;
    e.id = "sl2.sw".into();
    e.anchor = "flat Smorodinsky-Winternitz oscillator";
    e.claimed_class = Class::Ms;
    e.user_functions.clear();
    e.notes = "the integral completing maximal superintegrability is not part of the coalgebra family".into();
    Ok(e)
}

/// Flat generalized Kepler-Coulomb: Evans with `F(s) = -k/sqrt(s)`.
pub fn kepler_coulomb(k: f64, b: &[f64], n: usize) -> Result<CatalogEntry> {
    let f = -k / Expr::symbol(ARG_SQUARED).sqrt();
    let mut e = evans(&f, b, n)?;
    e.id = "sl2.kc".into();
    e.anchor = "flat generalized Kepler-Coulomb";
    e.claimed_class = Class::Ms;
    e.user_functions.clear();
    e.guards.push(q_squared(n));
    e.notes = "the integral completing maximal superintegrability is not part of the coalgebra family".into();
    Ok(e)
}

/// `p^2/2 - e (q.p) G(q^2) + e F(q^2) + sum b_i/(2 q_i^2)`.
pub fn em_flat(f: &Expr, g: &Expr, charge: f64, b: &[f64], n: usize) -> Result<CatalogEntry> {
    let sys = sl2_system(b, n)?;
    let s = q_squared(n);
    let h = p_squared(n) / 2.0 - charge * q_dot_p(n) * compose(g, &[(ARG_SQUARED, s.clone())])?
        + charge * compose(f, &[(ARG_SQUARED, s)])?
        + barriers(n);
    let mut e = entry("sl2.em", "electromagnetic velocity-dependent potential", n, h, sys, Class::Qms);
    e.user_functions = vec!["F", "G"];
    e.guards = site_guards(b, n);
    Ok(e)
}

/// Scalar potential, vector potential and electric field of the
/// three-dimensional electromagnetic system.
#[derive(Debug, Clone)]
pub struct EmFields {
    pub scalar: Expr,
    pub vector: [Expr; 3],
    pub electric: [Expr; 3],
}

/// `psi = F - (e/2) q^2 G^2 + sum b_i/(2 e q_i^2)`, `A = q G`,
/// `E = (e G^2 + 2 e q^2 G G' - 2 F') q + (b_i / (e q_i^3))_i`.
pub fn em_fields_3d(f: &Expr, g: &Expr, charge: f64, b: &[f64]) -> Result<EmFields> {
    check_len("b", b, 3)?;
    let s = q_squared(3);
    let at = |e: &Expr| compose(e, &[(ARG_SQUARED, s.clone())]);
    let (fv, gv) = (at(f)?, at(g)?);
    let (fp, gp) = (at(&f.derivative(ARG_SQUARED))?, at(&g.derivative(ARG_SQUARED))?);
    let scalar = fv - charge / 2.0 * s.clone() * gv.square()
        + Expr::sum((0..3).map(|i| b[i] / (2.0 * charge * Expr::q(i).square())));
    let radial = charge * gv.square() + 2.0 * charge * s * gv.clone() * gp - 2.0 * fp;
    let vector = [0, 1, 2].map(|i| Expr::q(i) * gv.clone());
    let electric = [0, 1, 2].map(|i| radial.clone() * Expr::q(i) + b[i] / (charge * Expr::q(i).powi(3)));
    Ok(EmFields { scalar, vector, electric })
}

/// Sampling box keeping `|kappa| q^2 <= 1/2`.
fn curved_box(kappa: f64, n: usize) -> Result<SampleBox> {
    let hi = if kappa == 0.0 { 1.5 } else { (0.5 / (kappa.abs() * n as f64)).sqrt().min(1.5) };
    if hi < 0.3 {
        return Err(Error::Config(format!("curvature {kappa} leaves an empty sampling box for N = {n}")));
    }
    Ok(SampleBox::uniform(n, (0.2, hi), (-1.0, 1.0)))
}

fn kinetic(chart: Chart, kappa: f64, n: usize) -> Expr {
    let s = q_squared(n);
    match chart {
        Chart::Poincare => 0.5 * (1.0 + kappa * s).square() * p_squared(n),
        Chart::Beltrami => 0.5 * (1.0 + kappa * s) * (p_squared(n) + kappa * q_dot_p(n).square()),
    }
}

fn chart_barriers(chart: Chart, kappa: f64, n: usize) -> Expr {
    let s = q_squared(n);
    match chart {
        Chart::Poincare => (1.0 + kappa * s).square() * barriers(n),
        Chart::Beltrami => (1.0 + kappa * s) * barriers(n),
    }
}

fn chart_metric(chart: Chart, kappa: f64, n: usize) -> MetricField {
    let s = q_squared(n);
    match chart {
        Chart::Poincare => MetricField::conformal_squared((1.0 + kappa * s).powi(-2), n),
        Chart::Beltrami => {
            // cometric (1 + k q^2)(delta_ij + k q_i q_j)
            let rows = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let d = if i == j { Expr::one() } else { Expr::zero() };
                            (1.0 + kappa * s.clone()) * (d + kappa * Expr::q(i) * Expr::q(j))
                        })
                        .collect()
                })
                .collect();
            MetricField::full(rows, MetricKind::Cometric).expect("square by construction")
        }
    }
}

fn curved_guards(chart: Chart, kappa: f64, b: &[f64], n: usize) -> Vec<Expr> {
    let s = q_squared(n);
    let mut g = site_guards(b, n);
    g.push(1.0 + kappa * s.clone());
    if chart == Chart::Poincare {
        g.push(1.0 - kappa * s);
    }
    g
}

fn curved_entry(
    id: &str,
    anchor: &'static str,
    h: Expr,
    kappa: f64,
    b: &[f64],
    n: usize,
    chart: Chart,
    claimed: Class,
) -> Result<CatalogEntry> {
    let sys = sl2_system(b, n)?;
    let mut e = entry(id, anchor, n, h, sys, claimed);
    e.sample_box = curved_box(kappa, n)?;
    e.guards = curved_guards(chart, kappa, b, n);
    Ok(e)
}

/// Free motion on the constant-curvature space in the given chart.
pub fn free_constant_curvature(chart: Chart, kappa: f64, n: usize) -> Result<CatalogEntry> {
    let b = vec![0.0; n];
    let mut e = curved_entry(
        "sl2.free_curved",
        "geodesic motion on constant curvature spaces",
        kinetic(chart, kappa, n),
        kappa,
        &b,
        n,
        chart,
        Class::Qms,
    )?;
    e.metric = Some(chart_metric(chart, kappa, n));
    if chart == Chart::Poincare {
        let f = (1.0 + kappa * Expr::symbol(ARG_RADIUS).square()).recip();
        e.closed_curvature = Some(ClosedCurvature::Conformal { f });
    }
    Ok(e)
}

/// Curved Evans system with central potential `U` in the placeholder `s`,
/// evaluated on the squared geodesic-radius variable of each chart.
pub fn curved_evans(u: &Expr, kappa: f64, b: &[f64], n: usize, chart: Chart) -> Result<CatalogEntry> {
    let s = q_squared(n);
    let arg = match chart {
        Chart::Poincare => 4.0 * s.clone() / (1.0 - kappa * s).square(),
        Chart::Beltrami => s,
    };
    let h = kinetic(chart, kappa, n) + compose(u, &[(ARG_SQUARED, arg)])? + chart_barriers(chart, kappa, n);
    let mut e = curved_entry("sl2.curved_evans", "curved Evans system", h, kappa, b, n, chart, Class::Qms)?;
    e.user_functions = vec!["U"];
    Ok(e)
}

/// Curved Smorodinsky-Winternitz system (Higgs oscillator plus barriers).
pub fn curved_sw(omega: f64, kappa: f64, b: &[f64], n: usize, chart: Chart) -> Result<CatalogEntry> {
    let s = q_squared(n);
    let w2 = omega * omega;
    let pot = match chart {
        Chart::Poincare => w2 * s.clone() / (2.0 * (1.0 - kappa * s).square()),
        Chart::Beltrami => 0.5 * w2 * s,
    };
    let h = kinetic(chart, kappa, n) + pot + chart_barriers(chart, kappa, n);
    let mut e = curved_entry(
        "sl2.curved_sw",
        "curved Smorodinsky-Winternitz (Higgs oscillator)",
        h,
        kappa,
        b,
        n,
        chart,
        Class::Ms,
    )?;
    e.notes = "the quadratic integral completing maximal superintegrability is cited, not listed; verified class is the coalgebra count".into();
    Ok(e)
}

/// Curved generalized Kepler-Coulomb system.
pub fn curved_kc(k: f64, kappa: f64, b: &[f64], n: usize, chart: Chart) -> Result<CatalogEntry> {
    let s = q_squared(n);
    let pot = match chart {
        Chart::Poincare => -k * (1.0 - kappa * s) / radius(n),
        Chart::Beltrami => -k / radius(n),
    };
    let h = kinetic(chart, kappa, n) + pot + chart_barriers(chart, kappa, n);
    let mut e = curved_entry(
        "sl2.curved_kc",
        "curved generalized Kepler-Coulomb",
        h,
        kappa,
        b,
        n,
        chart,
        Class::Ms,
    )?;
    e.guards.push(q_squared(n));
    e.notes = "the integral completing maximal superintegrability (quartic when all b_i are nonzero) is cited, not listed".into();
    Ok(e)
}

/// Check that a radial function is positive on sampled box points.
fn check_positive(f: &Expr, what: &str, sample_box: &SampleBox, params: &ParamSet) -> Result<()> {
    for x in sample_box.sample(20, 0) {
        let v = evaluate(f, &x, params)?;
        if v <= 0.0 {
            return Err(Error::Domain(format!("{what} = {v} is not positive on the sampling box")));
        }
    }
    Ok(())
}

/// `p^2/(2 f(|q|)^2)` for a conformal factor `f` in the placeholder `r`.
pub fn conformal_free(f: &Expr, n: usize, user: &ParamSet) -> Result<CatalogEntry> {
    let b = vec![0.0; n];
    let sys = sl2_system(&b, n)?;
    let fr = compose(f, &[(ARG_RADIUS, radius(n))])?;
    let sample_box = SampleBox::standard(n);
    check_positive(&fr, "f", &sample_box, user)?;
    let h = p_squared(n) / (2.0 * fr.square());
    let mut e = entry("sl2.conformal_free", "geodesic motion on a spherically symmetric space", n, h, sys, Class::Qms);
    e.user_functions = vec!["f"];
    e.guards = vec![fr.clone(), q_squared(n)];
    e.metric = Some(MetricField::conformal_squared(fr.square(), n));
    e.closed_curvature = Some(ClosedCurvature::Conformal { f: f.clone() });
    Ok(e)
}

/// Conformal free motion plus `U(|q|)` and barriers `f^-2 sum b_i/(2 q_i^2)`.
pub fn conformal_potential(f: &Expr, u: &Expr, b: &[f64], n: usize, user: &ParamSet) -> Result<CatalogEntry> {
    let sys = sl2_system(b, n)?;
    let r = radius(n);
    let fr = compose(f, &[(ARG_RADIUS, r.clone())])?;
    let sample_box = SampleBox::standard(n);
    check_positive(&fr, "f", &sample_box, user)?;
    let f2 = fr.square();
    let h = p_squared(n) / (2.0 * f2.clone()) + compose(u, &[(ARG_RADIUS, r)])? + barriers(n) / f2.clone();
    let mut e = entry(
        "sl2.conformal_potential",
        "spherically symmetric space with central potential",
        n,
        h,
        sys,
        Class::Qms,
    );
    e.user_functions = vec!["f", "U"];
    e.guards = site_guards(b, n);
    e.guards.push(fr);
    e.guards.push(q_squared(n));
    e.metric = Some(MetricField::conformal_squared(f2, n));
    e.closed_curvature = Some(ClosedCurvature::Conformal { f: f.clone() });
    Ok(e)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DarbouxKind {
    I,
    II,
    IIIa,
    IIIb,
    IV,
}

/// Kinetic Hamiltonian `T(J-, J+)` of a spherically symmetric space,
/// realized at `b = 0`, with the squared conformal factor `f2` given in the
/// placeholder `r`.
fn radial_space(
    id: &str,
    anchor: &'static str,
    n: usize,
    t: Expr,
    f2: Expr,
    sample_box: SampleBox,
    guards: Vec<Expr>,
    claimed: Class,
) -> Result<CatalogEntry> {
    let b = vec![0.0; n];
    let sys = sl2_system(&b, n)?;
    let mut e = entry(id, anchor, n, t, sys, claimed);
    e.sample_box = sample_box;
    e.guards = guards;
    e.metric = Some(MetricField::conformal_squared(compose(&f2, &[(ARG_RADIUS, radius(n))])?, n));
    e.closed_curvature = Some(ClosedCurvature::Conformal { f: f2.sqrt() });
    Ok(e)
}

/// Darboux spaces. `params` may set `k` (type IIIb, default 1) and `a`
/// (type IV, default 2).
pub fn darboux(kind: DarbouxKind, n: usize, params: &ParamSet) -> Result<CatalogEntry> {
    if n < 2 {
        return Err(Error::ParameterMismatch(format!("catalog systems need N >= 2, got {n}")));
    }
    let jm = q_squared(n);
    let jp = p_squared(n);
    let r = Expr::symbol(ARG_RADIUS);
    let lr = jm.sqrt().ln();
    let std_box = SampleBox::standard(n);
    let outer = |lo: f64| SampleBox::uniform(n, (lo, 1.5), (-1.0, 1.0));
    match kind {
        DarbouxKind::I => radial_space(
            "darboux.i",
            "Darboux space of type I",
            n,
            jm.clone() * jp / (2.0 * lr.clone()),
            r.ln() / r.square(),
            outer(0.8),
            vec![lr],
            Class::Qms,
        ),
        DarbouxKind::II => radial_space(
            "darboux.ii",
            "Darboux space of type II",
            n,
            jm.clone() * lr.square() * jp / (2.0 * (1.0 + lr.square())),
            (1.0 + r.ln().square()) / (r.square() * r.ln().square()),
            outer(0.9),
            vec![lr],
            Class::Qms,
        ),
        DarbouxKind::IIIa => radial_space(
            "darboux.iiia",
            "Darboux space of type III, first chart",
            n,
            jm.square() * jp / (2.0 * (1.0 + jm.sqrt())),
            (1.0 + r.clone()) / r.powi(4),
            std_box,
            vec![jm],
            Class::Ms,
        )
        .map(with_type_iii_note),
        DarbouxKind::IIIb => {
            let k = params.scalar("k").unwrap_or(1.0);
            let denom = k + jm.clone();
            let mut e = radial_space(
                "darboux.iiib",
                "Darboux space of type III, second chart",
                n,
                jp / (2.0 * denom.clone()),
                k + r.square(),
                std_box,
                vec![denom],
                Class::Ms,
            )
            .map(with_type_iii_note)?;
            e.params.set("k", k);
            Ok(e)
        }
        DarbouxKind::IV => {
            let a = params.scalar("a").unwrap_or(2.0);
            let mut e = radial_space(
                "darboux.iv",
                "Darboux space of type IV",
                n,
                jm.clone() * lr.sin().square() * jp / (2.0 * (a + lr.cos())),
                (a + r.ln().cos()) / (r.square() * r.ln().sin().square()),
                outer(0.9),
                vec![lr.sin(), a + lr.cos()],
                Class::Qms,
            )?;
            e.params.set("a", a);
            Ok(e)
        }
    }
}

fn with_type_iii_note(mut e: CatalogEntry) -> CatalogEntry {
    e.notes = "an additional integral is known for type III but is not part of the coalgebra family".into();
    e
}

/// Multifold Kepler space with kinetic term
/// `J-^(1 - 1/(2 nu)) J+ / (2 (a + b J-^(1/(2 nu))))`.
pub fn multifold_kepler(a: f64, b: f64, nu: f64, n: usize) -> Result<CatalogEntry> {
    if nu == 0.0 {
        return Err(Error::ParameterMismatch("nu must be nonzero".into()));
    }
    let jm = q_squared(n);
    let root = jm.pow(1.0 / (2.0 * nu));
    let denom = a + b * root;
    let t = jm.pow(1.0 - 1.0 / (2.0 * nu)) * p_squared(n) / (2.0 * denom.clone());
    let r = Expr::symbol(ARG_RADIUS);
    let f2 = (a + b * r.pow(1.0 / nu)) / r.pow(2.0 - 1.0 / nu);
    let mut e = radial_space(
        "sl2.multifold_kepler",
        "multifold Kepler space",
        n,
        t,
        f2,
        SampleBox::standard(n),
        vec![jm, denom],
        Class::Qms,
    )?;
    e.params = e.params.with("a", a).with("b", b).with("nu", nu);
    Ok(e)
}

/// Taub-NUT space: the multifold Kepler space with `nu = 1`, `a = 4m`,
/// `b = 1`.
pub fn taub_nut(m: f64, n: usize) -> Result<CatalogEntry> {
    let mut e = multifold_kepler(4.0 * m, 1.0, 1.0, n)?;
    e.id = "sl2.taub_nut".into();
    e.anchor = "Taub-NUT space";
    e.params.set("m", m);
    Ok(e)
}
