//! Concrete coalgebras: sl(2,R), its non-standard deformation sl_z(2,R) and
//! the two-photon algebra h6, each with closed-form realizations and
//! integrals that serve as independent checks of the generic engine.

use std::collections::HashMap;

use crate::coalgebra::{Casimir, CasimirKind, CoalgebraSpec};
use crate::error::{Error, Result};
use crate::expr::Expr;

fn sym(s: &str) -> Expr {
    Expr::symbol(s)
}

fn l(g: &str) -> Expr {
    Expr::symbol(&format!("{g}@L"))
}

fn r(g: &str) -> Expr {
    Expr::symbol(&format!("{g}@R"))
}

/// Fill an antisymmetric table from its upper-triangular entries.
fn bracket_table(gens: &[&str], upper: &[(&str, &str, Expr)]) -> Vec<Vec<Expr>> {
    let idx: HashMap<&str, usize> = gens.iter().enumerate().map(|(i, g)| (*g, i)).collect();
    let n = gens.len();
    let mut t = vec![vec![Expr::zero(); n]; n];
    for (a, b, e) in upper {
        let (i, j) = (idx[a], idx[b]);
        t[i][j] = e.clone();
        t[j][i] = -e.clone();
    }
    t
}

fn names(gens: &[&str]) -> Vec<String> {
    gens.iter().map(|g| g.to_string()).collect()
}

fn q0() -> Expr {
    Expr::q(0)
}

fn p0() -> Expr {
    Expr::p(0)
}

/// sl(2,R) with generators `Jm`, `Jp`, `J3`, primitive coproduct and the
/// one-site realization `Jm = q^2`, `Jp = p^2 + b/q^2`, `J3 = q p`.
pub fn sl2() -> CoalgebraSpec {
    let gens = ["Jm", "Jp", "J3"];
    let brackets = bracket_table(
        &gens,
        &[
            ("Jm", "Jp", 4.0 * sym("J3")),
            ("Jm", "J3", 2.0 * sym("Jm")),
            ("Jp", "J3", -2.0 * sym("Jp")),
        ],
    );
    let b = Expr::site_param("b", 0);
    CoalgebraSpec {
        name: "sl2".into(),
        generators: names(&gens),
        brackets,
        casimirs: vec![Casimir {
            name: "C".into(),
            expr: sym("Jm") * sym("Jp") - sym("J3").square(),
            kind: CasimirKind::Nonlinear,
            first_order: 2,
        }],
        coproduct: gens.iter().map(|g| l(g) + r(g)).collect(),
        realization: vec![
            q0().square(),
            p0().square() + b / q0().square(),
            q0() * p0(),
        ],
        realization_dim: 1,
        site_params: vec!["b".into()],
        scalar_params: vec![],
    }
}

/// Non-standard deformation of sl(2,R) with parameter `z`.
///
/// `sinh(z Jm)/z` is written `Jm sinhc(z Jm)` so that `z = 0` is regular.
pub fn sl2z() -> CoalgebraSpec {
    let gens = ["Jm", "Jp", "J3"];
    let z = Expr::param("z");
    let jm = sym("Jm");
    let brackets = bracket_table(
        &gens,
        &[
            ("Jm", "Jp", 4.0 * sym("J3")),
            ("Jm", "J3", 2.0 * jm.clone() * (z.clone() * jm.clone()).sinhc()),
            ("Jp", "J3", -2.0 * sym("Jp") * (z.clone() * jm.clone()).cosh()),
        ],
    );
    let twisted = |g: &str| {
        l(g) * (z.clone() * r("Jm")).exp() + (-(z.clone() * l("Jm"))).exp() * r(g)
    };
    let b = Expr::site_param("b", 0);
    let x = q0().square();
    let sc = (z.clone() * x.clone()).sinhc();
    CoalgebraSpec {
        name: "sl2z".into(),
        generators: names(&gens),
        brackets,
        casimirs: vec![Casimir {
            name: "C".into(),
            expr: jm.clone() * (z.clone() * jm.clone()).sinhc() * sym("Jp") - sym("J3").square(),
            kind: CasimirKind::Nonlinear,
            first_order: 2,
        }],
        coproduct: vec![l("Jm") + r("Jm"), twisted("Jp"), twisted("J3")],
        realization: vec![
            x.clone(),
            sc.clone() * p0().square() + b / (x * sc.clone()),
            sc * q0() * p0(),
        ],
        realization_dim: 1,
        site_params: vec!["b".into()],
        scalar_params: vec!["z".into()],
    }
}

/// The two-photon algebra h6 with generators `K, Ap, Am, Bp, Bm, M`.
///
/// Integrals are built from the working Casimir (second Casimir divided by
/// the central `M`), whose second coproduct vanishes identically, so its
/// family starts at order 3.
pub fn h6() -> CoalgebraSpec {
    let gens = ["K", "Ap", "Am", "Bp", "Bm", "M"];
    let (k, ap, am, bp, bm, m) = (sym("K"), sym("Ap"), sym("Am"), sym("Bp"), sym("Bm"), sym("M"));
    let brackets = bracket_table(
        &gens,
        &[
            ("K", "Ap", ap.clone()),
            ("K", "Am", -am.clone()),
            ("Am", "Ap", m.clone()),
            ("K", "Bp", 2.0 * bp.clone()),
            ("K", "Bm", -2.0 * bm.clone()),
            ("Bm", "Bp", 4.0 * k.clone() + 2.0 * m.clone()),
            ("Ap", "Bm", -2.0 * am.clone()),
            ("Am", "Bp", 2.0 * ap.clone()),
        ],
    );
    let lam = Expr::site_param("lambda", 0);
    CoalgebraSpec {
        name: "h6".into(),
        generators: names(&gens),
        brackets,
        casimirs: vec![
            Casimir { name: "M".into(), expr: m, kind: CasimirKind::Linear, first_order: 1 },
            Casimir {
                name: "C".into(),
                expr: h6_working_casimir(),
                kind: CasimirKind::Nonlinear,
                first_order: 3,
            },
        ],
        coproduct: gens.iter().map(|g| l(g) + r(g)).collect(),
        realization: vec![
            q0() * p0() - lam.square() / 2.0,
            lam.clone() * p0(),
            lam.clone() * q0(),
            p0().square(),
            q0().square(),
            lam.square(),
        ],
        realization_dim: 2,
        site_params: vec!["lambda".into()],
        scalar_params: vec![],
    }
}

/// `M Bp Bm - Bp Am^2 - Bm Ap^2 - M (K + M/2)^2 + 2 Am Ap (K + M/2)`.
pub fn h6_working_casimir() -> Expr {
    let (k, ap, am, bp, bm, m) = (sym("K"), sym("Ap"), sym("Am"), sym("Bp"), sym("Bm"), sym("M"));
    let kh = k + m.clone() / 2.0;
    m.clone() * bp.clone() * bm.clone() - bp * am.square() - bm * ap.square()
        - m * kh.square()
        + 2.0 * am * ap * kh
}

/// Quartic Casimir `(M Bp - Ap^2)(M Bm - Am^2) - (M K - Am Ap + M^2/2)^2`.
/// Equals `M` times the working Casimir.
pub fn h6_quartic_casimir() -> Expr {
    let (k, ap, am, bp, bm, m) = (sym("K"), sym("Ap"), sym("Am"), sym("Bp"), sym("Bm"), sym("M"));
    (m.clone() * bp - ap.square()) * (m.clone() * bm - am.square())
        - (m.clone() * k - am * ap + m.square() / 2.0).square()
}

fn check_len(name: &str, v: &[f64], n: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::ParameterMismatch("N must be positive".into()));
    }
    if v.len() != n {
        return Err(Error::ParameterMismatch(format!("`{name}` has {} entries for N = {n}", v.len())));
    }
    Ok(())
}

fn sum_range(a: usize, b: usize, f: impl Fn(usize) -> Expr) -> Expr {
    Expr::sum((a..b).map(f))
}

/// Closed-form N-site sl(2,R) generators `(Jm, Jp, J3)` with `b[i]` as
/// per-site parameters.
pub fn sl2_generators(n: usize) -> [Expr; 3] {
    let q = Expr::q;
    let p = Expr::p;
    [
        sum_range(0, n, |i| q(i).square()),
        sum_range(0, n, |i| p(i).square() + Expr::site_param("b", i) / q(i).square()),
        sum_range(0, n, |i| q(i) * p(i)),
    ]
}

/// Two-site block `(q_i p_j - q_j p_i)^2 + b_i q_j^2/q_i^2 + b_j q_i^2/q_j^2`.
fn sl2_pair(i: usize, j: usize, b: &[f64]) -> Expr {
    let (qi, qj, pi, pj) = (Expr::q(i), Expr::q(j), Expr::p(i), Expr::p(j));
    (qi.clone() * pj.clone() - qj.clone() * pi.clone()).square()
        + b[i] * qj.square() / qi.square()
        + b[j] * qi.square() / qj.square()
}

/// Left and right integral families of sl(2,R), orders `2..=N` each.
/// The order-N members coincide.
pub fn sl2_integrals(n: usize, b: &[f64]) -> Result<(Vec<Expr>, Vec<Expr>)> {
    check_len("b", b, n)?;
    let block = |lo: usize, hi: usize| {
        let mut terms = Vec::new();
        for i in lo..hi {
            for j in (i + 1)..hi {
                terms.push(sl2_pair(i, j, b));
            }
        }
        terms.extend((lo..hi).map(|i| Expr::constant(b[i])));
        Expr::sum(terms)
    };
    let left = (2..=n).map(|m| block(0, m)).collect();
    let right = (2..=n).map(|m| block(n - m, n)).collect();
    Ok((left, right))
}

/// Closed-form N-site sl_z(2,R) generators with `b[i]` and `z` as
/// parameters.
pub fn sl2z_generators(n: usize) -> [Expr; 3] {
    let z = Expr::param("z");
    let x = |i: usize| Expr::q(i).square();
    let sc = |i: usize| (z.clone() * x(i)).sinhc();
    // exp(-z sum_{k<i} q_k^2 + z sum_{l>i} q_l^2)
    let weight = |i: usize| {
        (z.clone() * (sum_range(i + 1, n, x) - sum_range(0, i, x))).exp()
    };
    [
        sum_range(0, n, x),
        sum_range(0, n, |i| {
            (sc(i) * Expr::p(i).square() + Expr::site_param("b", i) / (x(i) * sc(i))) * weight(i)
        }),
        sum_range(0, n, |i| sc(i) * Expr::q(i) * Expr::p(i) * weight(i)),
    ]
}

/// Left and right sl_z(2,R) integral families, orders `2..=N`.
pub fn sl2z_integrals(n: usize, b: &[f64], z: f64) -> Result<(Vec<Expr>, Vec<Expr>)> {
    check_len("b", b, n)?;
    let x = |i: usize| Expr::q(i).square();
    let sc = |i: usize| (z * x(i)).sinhc();
    // sinh(z q_j^2)/sinh(z q_i^2) in a form regular at z = 0
    let ratio = |j: usize, i: usize| x(j) * sc(j) / (x(i) * sc(i));
    let pair = |i: usize, j: usize| {
        sc(i) * sc(j) * (Expr::q(i) * Expr::p(j) - Expr::q(j) * Expr::p(i)).square()
            + b[i] * ratio(j, i)
            + b[j] * ratio(i, j)
    };
    let block = |lo: usize, hi: usize| {
        let mut terms = Vec::new();
        for i in lo..hi {
            for j in (i + 1)..hi {
                let w = -2.0 * z * sum_range(lo, i, x) - z * x(i)
                    + z * x(j)
                    + 2.0 * z * sum_range(j + 1, hi, x);
                terms.push(pair(i, j) * w.exp());
            }
        }
        for i in lo..hi {
            let w = -2.0 * z * sum_range(lo, i, x) + 2.0 * z * sum_range(i + 1, hi, x);
            terms.push(b[i] * w.exp());
        }
        Expr::sum(terms)
    };
    let left = (2..=n).map(|m| block(0, m)).collect();
    let right = (2..=n).map(|m| block(n - m, n)).collect();
    Ok((left, right))
}

/// Closed-form N-site h6 generators in spec order `K, Ap, Am, Bp, Bm, M`.
pub fn h6_generators(n: usize) -> [Expr; 6] {
    let lam = |i: usize| Expr::site_param("lambda", i);
    let l2 = sum_range(0, n, |i| lam(i).square());
    [
        sum_range(0, n, |i| Expr::q(i) * Expr::p(i)) - l2.clone() / 2.0,
        sum_range(0, n, |i| lam(i) * Expr::p(i)),
        sum_range(0, n, |i| lam(i) * Expr::q(i)),
        sum_range(0, n, |i| Expr::p(i).square()),
        sum_range(0, n, |i| Expr::q(i).square()),
        l2,
    ]
}

/// h6 integrals: left orders `3..=N` and right orders `3..=N`, `2N - 5`
/// distinct functions for `N >= 3`. `warning` is set when `N < 3`.
#[derive(Debug, Clone)]
pub struct H6Integrals {
    pub left: Vec<Expr>,
    pub right: Vec<Expr>,
    pub warning: Option<String>,
}

pub fn h6_integrals(n: usize, lambda: &[f64]) -> Result<H6Integrals> {
    check_len("lambda", lambda, n)?;
    let (q, p) = (Expr::q, Expr::p);
    let triple = |i: usize, j: usize, k: usize| {
        (lambda[i] * (p(j) * q(k) - p(k) * q(j))
            + lambda[j] * (p(k) * q(i) - p(i) * q(k))
            + lambda[k] * (p(i) * q(j) - p(j) * q(i)))
        .square()
    };
    let block = |lo: usize, hi: usize| {
        let mut terms = Vec::new();
        for i in lo..hi {
            for j in (i + 1)..hi {
                for k in (j + 1)..hi {
                    terms.push(triple(i, j, k));
                }
            }
        }
        Expr::sum(terms)
    };
    let warning = (n < 3).then(|| {
        format!("h6 has no non-trivial integrals for N = {n}; the order-2 Casimir vanishes")
    });
    Ok(H6Integrals {
        left: (3..=n).map(|m| block(0, m)).collect(),
        right: (3..=n).map(|m| block(n - m, n)).collect(),
        warning,
    })
}

/// A subalgebra of h6 with its (nonlinear) Casimir, if any.
#[derive(Debug, Clone)]
pub struct Subalgebra {
    pub name: &'static str,
    pub generators: Vec<&'static str>,
    pub casimir: Option<Expr>,
}

pub fn h6_subalgebras() -> Vec<Subalgebra> {
    let (k, ap, am, bp, bm, m) = (sym("K"), sym("Ap"), sym("Am"), sym("Bp"), sym("Bm"), sym("M"));
    vec![
        Subalgebra { name: "h3", generators: vec!["Am", "Ap", "M"], casimir: None },
        Subalgebra {
            name: "h4",
            generators: vec!["K", "Am", "Ap", "M"],
            casimir: Some(m.clone() * k.clone() - am.clone() * ap.clone()),
        },
        Subalgebra {
            name: "gl2",
            generators: vec!["Bm", "Bp", "K", "M"],
            casimir: Some(bm * bp - (k + m / 2.0).square()),
        },
        Subalgebra {
            name: "h6",
            generators: vec!["K", "Ap", "Am", "Bp", "Bm", "M"],
            casimir: Some(h6_working_casimir()),
        },
    ]
}

/// Generators commuting with a fixed generator `X` and the subalgebras
/// containing `X`. Hamiltonians `H = X + F(commuting, Casimirs)` on these
/// families inherit the coalgebra integrals.
#[derive(Debug, Clone)]
pub struct GeneratorFamily {
    pub generator: String,
    pub commuting: Vec<String>,
    pub subalgebras: Vec<Subalgebra>,
}

pub fn h6_generator_families(x: &str) -> Result<GeneratorFamily> {
    let spec = h6();
    let i = spec.index_of(x)?;
    if x == "M" {
        return Err(Error::UnknownGenerator("M is central; it has no generator family".into()));
    }
    let commuting = spec
        .generators
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i && spec.brackets[i][j].as_const() == Some(0.0))
        .map(|(_, g)| g.clone())
        .collect();
    let subalgebras = h6_subalgebras()
        .into_iter()
        .filter(|s| s.generators.contains(&x))
        .collect();
    Ok(GeneratorFamily { generator: x.to_string(), commuting, subalgebras })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{evaluate, ParamSet, PhasePoint};

    #[test]
    fn subalgebra_membership() {
        let fam = h6_generator_families("K").unwrap();
        assert_eq!(fam.commuting, vec!["M".to_string()]);
        let names: Vec<_> = fam.subalgebras.iter().map(|s| s.name).collect();
        assert_eq!(names, vec!["h4", "gl2", "h6"]);
        let fam = h6_generator_families("Am").unwrap();
        assert_eq!(fam.commuting, vec!["Bm".to_string(), "M".to_string()]);
        let fam = h6_generator_families("Bp").unwrap();
        assert_eq!(fam.commuting, vec!["Ap".to_string(), "M".to_string()]);
        assert!(h6_generator_families("M").is_err());
        assert!(h6_generator_families("Q").is_err());
    }

    #[test]
    fn short_chains_have_no_h6_integrals() {
        let out = h6_integrals(2, &[1.0, 2.0]).unwrap();
        assert!(out.left.is_empty() && out.right.is_empty() && out.warning.is_some());
        assert!(h6_integrals(3, &[1.0]).is_err());
    }

    #[test]
    fn single_triple_value() {
        let out = h6_integrals(3, &[1.0, 1.0, 1.0]).unwrap();
        let x = PhasePoint::new(vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(evaluate(&out.left[0], &x, &ParamSet::new()).unwrap(), 1.0);
    }
}
