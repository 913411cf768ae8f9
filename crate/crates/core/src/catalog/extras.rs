//! Integrable chains on other coalgebras. Their symplectic realizations are
//! not part of this library, so the entries carry no integral family and are
//! mainly useful for dynamics.

use super::check_len;
use super::CatalogEntry;
use crate::error::{Error, Result};
use crate::expr::{Expr, ParamSet, SampleBox};
use crate::verify::Class;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extra {
    /// `sum_{i<j} 2 p_i p_j (1 - cos(q_i - q_j))`.
    Cg,
    /// Generalized Calogero-Gaudin with a site sequence `kappa`.
    CgGeneral,
    /// Calogero-Gaudin in Gelfand-Dyson variables with scalar `b`.
    CgGelfandDyson,
    /// Calogero-Gaudin with non-local deformed momenta, scalar `z`.
    CgDeformed,
    /// Oscillator-coalgebra chain with scalars `lambda` and `mu`.
    H4Chain,
    /// Ruijsenaars-Schneider analogue, scalar `z`; `p` plays the role of the
    /// rapidity.
    RsLike,
}

fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j)))
}

fn cg_in(mom: &[Expr], n: usize) -> Expr {
    Expr::sum(pairs(n).map(|(i, j)| 2.0 * mom[i].clone() * mom[j].clone() * (1.0 - (Expr::q(i) - Expr::q(j)).cos())))
}

/// `exp(z/2 (sum_{j>k} x_j - sum_{i<k} x_i))`.
fn chain_weight(z: f64, k: usize, n: usize, x: fn(usize) -> Expr) -> Expr {
    let after = Expr::sum(((k + 1)..n).map(x));
    let before = Expr::sum((0..k).map(x));
    (z / 2.0 * (after - before)).exp()
}

pub fn extras(kind: Extra, n: usize, params: &ParamSet) -> Result<CatalogEntry> {
    if n < 2 {
        return Err(Error::ParameterMismatch(format!("catalog systems need N >= 2, got {n}")));
    }
    let scalar = |name: &str, default: f64| params.scalar(name).unwrap_or(default);
    let p: Vec<Expr> = (0..n).map(Expr::p).collect();
    let mut used = ParamSet::new();
    let (id, anchor, h) = match kind {
        Extra::Cg => ("extra.cg", "Calogero-Gaudin system", cg_in(&p, n)),
        Extra::CgGeneral => {
            let kappa = params
                .sequence("kappa")
                .map(|s| s.to_vec())
                .unwrap_or_else(|| (0..n).map(|i| 0.1 * (i + 1) as f64).collect());
            check_len("kappa", &kappa, n)?;
            let mut terms = vec![Expr::sum(p.iter().cloned()).square()];
            for i in 0..n {
                for j in 0..n {
                    let (qi, qj) = (Expr::q(i), Expr::q(j));
                    terms.push(
                        0.5 * p[i].clone()
                            * p[j].clone()
                            * ((kappa[i] + kappa[j]) * (qi.clone() - qj.clone()).cos()
                                - (kappa[i] - kappa[j]) * (qi + qj).cos()),
                    );
                }
            }
            used = used.with_seq("kappa", kappa);
            ("extra.cg_general", "generalized Calogero-Gaudin system", Expr::sum(terms))
        }
        Extra::CgGelfandDyson => {
            let b = scalar("b", 0.5);
            used.set("b", b);
            let h = Expr::sum(pairs(n).map(|(i, j)| {
                let dq = Expr::q(i) - Expr::q(j);
                -(p[i].clone() * p[j].clone() * dq.square()) - b * (p[i].clone() - p[j].clone()) * dq
            })) + b * b * (n * n) as f64 / 4.0;
            ("extra.cg_gd", "Calogero-Gaudin system in Gelfand-Dyson variables", h)
        }
        Extra::CgDeformed => {
            let z = scalar("z", 0.1);
            used.set("z", z);
            let pi: Vec<Expr> = (0..n)
                .map(|k| p[k].clone() * (z / 2.0 * p[k].clone()).sinhc() * chain_weight(z, k, n, Expr::p))
                .collect();
            ("extra.cg_deformed", "deformed Calogero-Gaudin system", cg_in(&pi, n))
        }
        Extra::H4Chain => {
            let (lambda, mu) = (scalar("lambda", 1.0), scalar("mu", 0.5));
            used = used.with("lambda", lambda).with("mu", mu);
            let h = (lambda + mu) * Expr::sum(p.iter().cloned())
                + 2.0 * mu
                    * Expr::sum(pairs(n).map(|(i, j)| {
                        (p[i].clone() * p[j].clone()).sqrt() * (Expr::q(i) - Expr::q(j)).cosh()
                    }));
            ("extra.h4_chain", "oscillator-coalgebra chain", h)
        }
        Extra::RsLike => {
            let z = scalar("z", 0.1);
            used.set("z", z);
            let h = Expr::sum((0..n).map(|i| p[i].cosh() * chain_weight(z, i, n, Expr::q)));
            ("extra.rs_like", "Ruijsenaars-Schneider analogue", h)
        }
    };
    let mut e = CatalogEntry::new(id, anchor, n, h, used);
    e.sample_box = SampleBox::uniform(n, (-1.0, 1.0), (0.2, 1.5));
    e.claimed_class = Class::Integrable;
    e.notes = "integrals come from a realization not covered here; only dynamics is checked".into();
    if kind == Extra::H4Chain {
        e.guards = p;
    }
    Ok(e)
}
