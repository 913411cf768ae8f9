//! Two generalizations of the coalgebra construction: a two-site system on
//! a gl(2,R) comodule of the two-photon algebra, and loop coproducts for
//! Lie-Poisson coalgebras.
//!
//! The comodule realization on each site is `B+ = q^2`, `B- = p^2`,
//! `K = -q p - lambda^2/2`, `M = lambda^2`, `A+ = lambda q`,
//! `A- = -lambda p`. Site 0 carries the comodule algebra, site 1 (and site
//! 2 in the coassociativity check) the two-photon algebra.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::CatalogEntry;
use crate::coalgebra::{CoalgebraSpec, Integral, Side, SiteConfig};
use crate::error::{Error, Result};
use crate::expr::{self, Compiled, Expr, ParamSet, PhasePoint, SampleBox};
use crate::verify::Class;

/// Images of the two-photon generators; on a comodule site `ap` and `am`
/// are unused.
#[derive(Debug, Clone)]
struct Images {
    k: Expr,
    ap: Expr,
    am: Expr,
    bp: Expr,
    bm: Expr,
    m: Expr,
}

impl Images {
    fn site(s: usize) -> Images {
        let (q, p, l) = (Expr::q(s), Expr::p(s), Expr::site_param("lambda", s));
        Images {
            k: -(q.clone() * p.clone()) - l.square() / 2.0,
            ap: l.clone() * q.clone(),
            am: -(l.clone() * p.clone()),
            bp: q.square(),
            bm: p.square(),
            m: l.square(),
        }
    }

    fn get(&self, gen: &str) -> Result<&Expr> {
        Ok(match gen {
            "K" => &self.k,
            "Ap" => &self.ap,
            "Am" => &self.am,
            "Bp" => &self.bp,
            "Bm" => &self.bm,
            "M" => &self.m,
            other => return Err(Error::UnknownGenerator(other.to_string())),
        })
    }
}

/// Coaction of the comodule generators `v` against two-photon images `a`.
fn coact(v: &Images, a: &Images, sigma: f64) -> Images {
    let den = 1.0 - sigma * a.am.clone();
    let km = v.k.clone() + v.m.clone();
    Images {
        k: a.k.clone() + v.k.clone() / den.clone() + sigma * v.m.clone() * a.am.clone() / den.clone(),
        ap: Expr::zero(),
        am: Expr::zero(),
        bp: a.bp.clone()
            + v.bp.clone() / den.square()
            + 2.0 * sigma * km.clone() * a.ap.clone() / den.clone()
            + sigma * sigma * km.square() * a.m.clone() / den.square(),
        bm: a.bm.clone() + v.bm.clone() * den.square(),
        m: a.m.clone() + v.m.clone(),
    }
}

/// Deformed two-photon coproduct compatible with [`coact`].
fn deformed_coproduct(b: &Images, c: &Images, sigma: f64) -> Images {
    let mut out = coact(b, c, sigma);
    out.am = b.am.clone() + c.am.clone() - sigma * b.am.clone() * c.am.clone();
    out.ap = c.ap.clone()
        + (b.ap.clone() + sigma * (b.k.clone() + b.m.clone()) * c.m.clone()) / (1.0 - sigma * c.am.clone());
    out
}

/// Generators of the comodule algebra.
pub const COMODULE_GENERATORS: [&str; 4] = ["K", "Bp", "Bm", "M"];

/// Two-site image `(D x D)(phi(gen))` with the realization labels as the
/// site parameter `lambda`.
pub fn coaction_map(gen: &str, sigma: f64) -> Result<Expr> {
    if !COMODULE_GENERATORS.contains(&gen) {
        return Err(Error::UnknownGenerator(gen.to_string()));
    }
    coact(&Images::site(0), &Images::site(1), sigma).get(gen).cloned()
}

/// `B- B+ - (K + M/2)^2` over comodule images.
fn gl2_casimir(x: &Images) -> Expr {
    x.bm.clone() * x.bp.clone() - (x.k.clone() + x.m.clone() / 2.0).square()
}

/// The comodule-deformed two-dimensional isotropic oscillator.
#[derive(Debug, Clone)]
pub struct ComoduleSystem {
    pub sigma: f64,
    pub lambda: [f64; 2],
    pub hamiltonian: Expr,
    /// Integral from the coaction of the gl(2,R) Casimir.
    pub casimir: Expr,
    /// The same integral with the linear-in-sigma term lacking `lambda_2`;
    /// it does not commute with the Hamiltonian for `sigma != 0`.
    pub casimir_uncorrected: Expr,
    pub sample_box: SampleBox,
}

pub fn comodule_oscillator(sigma: f64, lambda1: f64, lambda2: f64) -> Result<ComoduleSystem> {
    if (sigma * lambda2).abs() >= 0.5 {
        return Err(Error::Domain(format!(
            "|sigma lambda_2| = {} puts the pole 1 + sigma lambda_2 p_2 = 0 near the sampling box",
            (sigma * lambda2).abs()
        )));
    }
    let (q1, p1, q2, p2) = (Expr::q(0), Expr::p(0), Expr::q(1), Expr::p(1));
    let l1 = Expr::site_param("lambda", 0);
    let l2 = Expr::site_param("lambda", 1);
    let den = 1.0 + sigma * l2.clone() * p2.clone();
    let t = l1.square() - 2.0 * q1.clone() * p1.clone();
    let hamiltonian = 0.5 * (p1.square() + p2.square())
        + q2.square() / 2.0
        + q1.square() / (2.0 * den.square())
        + sigma
            * l2.clone()
            * (p1.square() * p2.clone() + q2.clone() * t.clone() / (2.0 * den.clone()))
        + sigma * sigma * l2.square() * (0.5 * p1.square() * p2.square() + t.square() / (8.0 * den.square()));

    let rot = 2.0 * (p2.clone() * q1.clone() - p1.clone() * q2.clone());
    let lin = p1.clone() * (2.0 * p1.clone() * q1.clone() - 4.0 * p2.clone() * q2.clone() - l1.square());
    let quad = l2.square()
        * p1.clone()
        * p2.clone()
        * (-2.0 * p1.clone() * q1 + 2.0 * p2.clone() * q2 + l1.square());
    let casimir_of = |x: Expr| -(x.square()) / (16.0 * den.square());
    let casimir = casimir_of(rot.clone() + sigma * l2.clone() * lin.clone() - sigma * sigma * quad.clone());
    let casimir_uncorrected = casimir_of(rot + sigma * lin - sigma * sigma * quad);
    Ok(ComoduleSystem {
        sigma,
        lambda: [lambda1, lambda2],
        hamiltonian,
        casimir,
        casimir_uncorrected,
        sample_box: SampleBox::uniform(2, (-1.0, 1.0), (-1.0, 1.0)),
    })
}

impl ComoduleSystem {
    pub fn params(&self) -> ParamSet {
        ParamSet::new().with_seq("lambda", self.lambda.to_vec())
    }

    /// `(1/2)(phi(B+) + phi(B-))` built from the coaction.
    pub fn hamiltonian_from_coaction(&self) -> Expr {
        let x = coact(&Images::site(0), &Images::site(1), self.sigma);
        0.5 * (x.bp + x.bm)
    }

    /// `-phi(C)/4` for the gl(2,R) Casimir, built from the coaction.
    pub fn casimir_from_coaction(&self) -> Expr {
        -gl2_casimir(&coact(&Images::site(0), &Images::site(1), self.sigma)) / 4.0
    }

    pub fn to_entry(&self) -> Result<CatalogEntry> {
        let mut e = CatalogEntry::new(
            "ext.comodule",
            "comodule-deformed two-site oscillator",
            2,
            self.hamiltonian.clone(),
            self.params().with("sigma", self.sigma),
        );
        e.left = vec![Integral {
            casimir: "C".into(),
            m: 2,
            side: Side::Left,
            expr: self.casimir.clone(),
            support: (0, 2),
        }];
        e.sample_box = self.sample_box.clone();
        e.claimed_class = Class::Integrable;
        e.guards = vec![1.0 + self.sigma * self.lambda[1] * Expr::p(1)];
        e.notes = "the comodule chain has no right integrals".into();
        Ok(e)
    }
}

/// `sigma = 0` forms: the isotropic oscillator and its angular momentum.
pub fn comodule_flat_limits() -> (Expr, Expr) {
    let (q1, p1, q2, p2) = (Expr::q(0), Expr::p(0), Expr::q(1), Expr::p(1));
    let h = 0.5 * (p1.square() + p2.square()) + 0.5 * (q1.square() + q2.square());
    let c = -(p2 * q1 - p1 * q2).square() / 4.0;
    (h, c)
}

/// Worst normalized residual of one relation over the sampled points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Relation {
    pub label: String,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationReport {
    pub relations: Vec<Relation>,
    pub max_residual: f64,
    pub tol: f64,
    pub passed: bool,
}

impl RelationReport {
    fn new(relations: Vec<Relation>, tol: f64) -> Self {
        let max_residual = relations.iter().map(|r| r.max_residual).fold(0.0, f64::max);
        RelationReport { relations, max_residual, tol, passed: max_residual <= tol }
    }
}

/// Max over points of `|{a, b} - c| / (|grad a| |grad b|)`, or of
/// `|a - c| / max(1, |c|)` when `b` is `None`.
fn sampled_residual(
    a: &Expr,
    b: Option<&Expr>,
    c: &Expr,
    params: &ParamSet,
    points: &[PhasePoint],
) -> Result<f64> {
    let ca = Compiled::new(a, params)?;
    let cb = b.map(|b| Compiled::new(b, params)).transpose()?;
    let cc = Compiled::new(c, params)?;
    let per: Vec<f64> = points
        .par_iter()
        .map(|x| -> Result<f64> {
            let want = cc.value(x)?;
            match &cb {
                Some(cb) => {
                    let ga = ca.jet1(x)?.g;
                    let gb = cb.jet1(x)?.g;
                    Ok(expr::normalized_residual(expr::bracket_from_gradients(&ga, &gb) - want, &ga, &gb))
                }
                None => Ok((ca.value(x)? - want).abs() / want.abs().max(1.0)),
            }
        })
        .collect::<Result<_>>()?;
    Ok(per.into_iter().fold(0.0, f64::max))
}

/// `phi({a, b}) = {phi(a), phi(b)}` for every comodule generator pair under
/// the two-site realization.
pub fn check_coaction_homomorphism(
    sigma: f64,
    lambda: [f64; 2],
    sample_box: &SampleBox,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<RelationReport> {
    let x = coact(&Images::site(0), &Images::site(1), sigma);
    let params = ParamSet::new().with_seq("lambda", lambda.to_vec());
    let points = sample_box.sample(samples, seed);
    let zero = Expr::zero();
    let table: [(&str, &str, Expr); 6] = [
        ("K", "Bp", 2.0 * x.bp.clone()),
        ("K", "Bm", -2.0 * x.bm.clone()),
        ("Bm", "Bp", 4.0 * x.k.clone() + 2.0 * x.m.clone()),
        ("M", "K", zero.clone()),
        ("M", "Bp", zero.clone()),
        ("M", "Bm", zero),
    ];
    let mut relations = Vec::new();
    for (a, b, rhs) in table {
        let r = sampled_residual(x.get(a)?, Some(x.get(b)?), &rhs, &params, &points)?;
        relations.push(Relation { label: format!("{{{a}, {b}}}"), max_residual: r });
    }
    Ok(RelationReport::new(relations, tol))
}

/// `(phi x id) phi = (id x Delta) phi` on three sites, with the deformed
/// two-photon coproduct on the right.
pub fn check_coassociativity(
    sigma: f64,
    lambda: [f64; 3],
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<RelationReport> {
    let (v, b, c) = (Images::site(0), Images::site(1), Images::site(2));
    let lhs = coact(&coact(&v, &b, sigma), &c, sigma);
    let rhs = coact(&v, &deformed_coproduct(&b, &c, sigma), sigma);
    let params = ParamSet::new().with_seq("lambda", lambda.to_vec());
    let pole = 0.4 / (sigma.abs() * lambda.iter().fold(0.0f64, |m, l| m.max(l.abs()))).max(1.0);
    let points = SampleBox::uniform(3, (-1.0, 1.0), (-pole, pole)).sample(samples, seed);
    let mut relations = Vec::new();
    for g in COMODULE_GENERATORS {
        let r = sampled_residual(lhs.get(g)?, None, rhs.get(g)?, &params, &points)?;
        relations.push(Relation { label: g.to_string(), max_residual: r });
    }
    Ok(RelationReport::new(relations, tol))
}

fn check_loop_args(spec: &CoalgebraSpec, k: usize, lambda: f64, epsilon: f64, n: usize) -> Result<()> {
    if !spec.is_primitive() {
        return Err(Error::Config(format!("loop coproducts need the primitive coproduct; `{}` is deformed", spec.name)));
    }
    if k < 2 || k > n {
        return Err(Error::ParameterMismatch(format!("loop order {k} outside 2..={n}")));
    }
    if lambda == 0.0 || lambda == epsilon {
        return Err(Error::Domain(format!("loop parameter {lambda} sits on a pole (0 or epsilon = {epsilon})")));
    }
    Ok(())
}

/// `Delta_lambda^(k)(X) = Delta^(k-1)(X)/lambda + X_k/(lambda - epsilon)`
/// for every generator, realized on `n` sites.
pub fn loop_coproduct(
    spec: &CoalgebraSpec,
    k: usize,
    lambda: f64,
    epsilon: f64,
    n: usize,
) -> Result<Vec<(String, Expr)>> {
    check_loop_args(spec, k, lambda, epsilon, n)?;
    Ok(spec
        .generators
        .iter()
        .zip(&spec.realization)
        .map(|(g, tmpl)| {
            let head = Expr::sum((0..k - 1).map(|s| tmpl.at_site(s)));
            (g.clone(), head / lambda + tmpl.at_site(k - 1) / (lambda - epsilon))
        })
        .collect())
}

/// A function of the generators evaluated on loop-coproduct images.
pub fn loop_function(
    spec: &CoalgebraSpec,
    f: &Expr,
    k: usize,
    lambda: f64,
    epsilon: f64,
    n: usize,
) -> Result<Expr> {
    let images = loop_coproduct(spec, k, lambda, epsilon, n)?;
    Ok(f.substitute(&images.into_iter().collect()))
}

/// Involution of loop-coproduct Casimirs over a grid of parameter pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopReport {
    pub spec: String,
    pub casimir: String,
    pub n: usize,
    pub epsilon: f64,
    pub grid: Vec<(f64, f64)>,
    /// Worst `{C_lambda^(i), C_mu^(k)}` over all `i <= k`.
    pub casimir_max: f64,
    /// Worst `{C_lambda^(i), X_mu^(k)}` over all `i < k` and generators.
    pub generator_max: f64,
    pub tol: f64,
    pub passed: bool,
}

#[allow(clippy::too_many_arguments)]
pub fn loop_involution_check(
    spec: &CoalgebraSpec,
    casimir: &str,
    config: &SiteConfig,
    epsilon: f64,
    lambdas: &[f64],
    mus: &[f64],
    sample_box: &SampleBox,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<LoopReport> {
    config.validate(spec)?;
    let n = config.n;
    let c = spec
        .casimirs
        .iter()
        .find(|c| c.name == casimir)
        .ok_or_else(|| Error::UnknownGenerator(casimir.to_string()))?;
    let params = config.params();
    let points = sample_box.sample(samples, seed);
    let grid: Vec<(f64, f64)> = lambdas.iter().flat_map(|&l| mus.iter().map(move |&m| (l, m))).collect();

    let compiled_at = |t: f64| -> Result<(Vec<Compiled>, Vec<Vec<Compiled>>)> {
        let mut cas = Vec::new();
        let mut gens = Vec::new();
        for k in 2..=n {
            cas.push(Compiled::new(&loop_function(spec, &c.expr, k, t, epsilon, n)?, &params)?);
            gens.push(
                loop_coproduct(spec, k, t, epsilon, n)?
                    .iter()
                    .map(|(_, e)| Compiled::new(e, &params))
                    .collect::<Result<_>>()?,
            );
        }
        Ok((cas, gens))
    };

    let per: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&(l, m)| -> Result<(f64, f64)> {
            let (cl, _) = compiled_at(l)?;
            let (cm, gm) = compiled_at(m)?;
            let (mut worst_c, mut worst_g) = (0.0f64, 0.0f64);
            for x in &points {
                let gl: Vec<Vec<f64>> = cl.iter().map(|f| f.jet1(x).map(|j| j.g)).collect::<Result<_>>()?;
                let gcm: Vec<Vec<f64>> = cm.iter().map(|f| f.jet1(x).map(|j| j.g)).collect::<Result<_>>()?;
                for i in 0..gl.len() {
                    for k in i..gcm.len() {
                        let r = expr::normalized_residual(expr::bracket_from_gradients(&gl[i], &gcm[k]), &gl[i], &gcm[k]);
                        worst_c = worst_c.max(r);
                        if k > i {
                            for g in &gm[k] {
                                let gg = g.jet1(x)?.g;
                                let r = expr::normalized_residual(expr::bracket_from_gradients(&gl[i], &gg), &gl[i], &gg);
                                worst_g = worst_g.max(r);
                            }
                        }
                    }
                }
            }
            Ok((worst_c, worst_g))
        })
        .collect::<Result<_>>()?;
    let casimir_max = per.iter().map(|p| p.0).fold(0.0, f64::max);
    let generator_max = per.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(LoopReport {
        spec: spec.name.clone(),
        casimir: casimir.to_string(),
        n,
        epsilon,
        grid,
        casimir_max,
        generator_max,
        tol,
        passed: casimir_max <= tol && generator_max <= tol,
    })
}

/// Coefficients of the bracket relations between two loop coproducts,
/// fitted by least squares over every generator pair and sample point:
/// `{X_lambda^(i), Y_mu^(k)} = f B(X_lambda^(i))` for `k > i`, and
/// `= f B(X_lambda^(k)) + g B(X_mu^(k))` for `i = k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopFit {
    pub i: usize,
    pub k: usize,
    pub lambda: f64,
    pub mu: f64,
    pub f: f64,
    pub g: Option<f64>,
    /// Largest misfit relative to the largest bracket value.
    pub residual: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn loop_relation_fit(
    spec: &CoalgebraSpec,
    config: &SiteConfig,
    i: usize,
    k: usize,
    lambda: f64,
    mu: f64,
    epsilon: f64,
    sample_box: &SampleBox,
    samples: usize,
    seed: u64,
) -> Result<LoopFit> {
    config.validate(spec)?;
    let n = config.n;
    if i > k {
        return Err(Error::ParameterMismatch(format!("need i <= k, got {i} > {k}")));
    }
    if i == k && lambda == mu {
        return Err(Error::ParameterMismatch("equal-order fit needs lambda != mu".into()));
    }
    let params = config.params();
    let li = loop_coproduct(spec, i, lambda, epsilon, n)?;
    let mk = loop_coproduct(spec, k, mu, epsilon, n)?;
    let bind = |imgs: &[(String, Expr)]| imgs.iter().cloned().collect();
    let (bl, bm) = (bind(&li), bind(&mk));
    let compile = |e: &Expr| Compiled::new(e, &params);
    let gl: Vec<Compiled> = li.iter().map(|(_, e)| compile(e)).collect::<Result<_>>()?;
    let gm: Vec<Compiled> = mk.iter().map(|(_, e)| compile(e)).collect::<Result<_>>()?;
    let l = spec.generators.len();
    let mut rhs_l = Vec::new();
    let mut rhs_m = Vec::new();
    for a in 0..l {
        for b in 0..l {
            rhs_l.push(compile(&spec.brackets[a][b].substitute(&bl))?);
            rhs_m.push(compile(&spec.brackets[a][b].substitute(&bm))?);
        }
    }
    let cols = if i == k { 2 } else { 1 };
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut ys = Vec::new();
    for x in sample_box.sample(samples, seed) {
        let ga: Vec<Vec<f64>> = gl.iter().map(|c| c.jet1(&x).map(|j| j.g)).collect::<Result<_>>()?;
        let gb: Vec<Vec<f64>> = gm.iter().map(|c| c.jet1(&x).map(|j| j.g)).collect::<Result<_>>()?;
        for a in 0..l {
            for b in 0..l {
                ys.push(expr::bracket_from_gradients(&ga[a], &gb[b]));
                let mut row = vec![rhs_l[a * l + b].value(&x)?];
                if cols == 2 {
                    row.push(rhs_m[a * l + b].value(&x)?);
                }
                rows.push(row);
            }
        }
    }
    let a = DMatrix::from_fn(rows.len(), cols, |r, c| rows[r][c]);
    let y = DVector::from_vec(ys);
    let coef = a
        .clone()
        .svd(true, true)
        .solve(&y, 1e-12)
        .map_err(|e| Error::Domain(format!("least-squares fit failed: {e}")))?;
    let misfit = (&a * &coef - &y).amax();
    let scale = y.amax().max(f64::MIN_POSITIVE);
    Ok(LoopFit {
        i,
        k,
        lambda,
        mu,
        f: coef[0],
        g: (cols == 2).then(|| coef[1]),
        residual: misfit / scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebras::sl2;
    use crate::expr::evaluate;

    #[test]
    fn printed_hamiltonian_matches_coaction() {
        let sys = comodule_oscillator(0.15, 1.3, 0.8).unwrap();
        let p = sys.params();
        for x in sys.sample_box.sample(20, 3) {
            let a = evaluate(&sys.hamiltonian, &x, &p).unwrap();
            let b = evaluate(&sys.hamiltonian_from_coaction(), &x, &p).unwrap();
            assert!((a - b).abs() < 1e-12);
            let a = evaluate(&sys.casimir, &x, &p).unwrap();
            let b = evaluate(&sys.casimir_from_coaction(), &x, &p).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn loop_coproduct_values() {
        let imgs = loop_coproduct(&sl2(), 2, 2.0, 1.0, 2).unwrap();
        let x = PhasePoint::new(vec![0.5, 0.7], vec![0.1, 0.2]).unwrap();
        let p = ParamSet::new().with_seq("b", vec![0.0, 0.0]);
        let v = evaluate(&imgs[0].1, &x, &p).unwrap();
        assert!((v - (0.25 / 2.0 + 0.49)).abs() < 1e-14);
        assert!(matches!(loop_coproduct(&sl2(), 2, 1.0, 1.0, 2), Err(Error::Domain(_))));
        assert!(matches!(loop_coproduct(&sl2(), 3, 2.0, 1.0, 2), Err(Error::ParameterMismatch(_))));
    }

    #[test]
    fn pole_is_rejected() {
        assert!(matches!(comodule_oscillator(0.6, 1.0, 1.0), Err(Error::Domain(_))));
    }
}
