//! Phase-space expressions: term graphs over canonical coordinates, exact
//! forward-mode derivatives and the canonical Poisson bracket.

mod node;
mod parse;
mod sample;
mod scalar;
mod tape;

pub use node::{BinaryOp, Expr, Node, ParamRef, UnaryOp};
pub use parse::parse;
pub use sample::SampleBox;
pub use scalar::{Jet1, Jet2, Scalar};
pub use tape::{Compiled, ParamSet, PhasePoint};

use crate::error::{Error, Result};

/// Derivative order requested from [`jet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    First,
    Second,
}

/// Value, gradient and (optionally) hessian of an expression at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub value: f64,
    /// Partials ordered `q_1..q_N, p_1..p_N`.
    pub gradient: Vec<f64>,
    /// Row-major `2N x 2N` matrix.
    pub hessian: Option<Vec<f64>>,
}

impl Jet {
    pub fn dim(&self) -> usize {
        self.gradient.len()
    }

    pub fn hessian_entry(&self, i: usize, j: usize) -> Option<f64> {
        self.hessian.as_ref().map(|h| h[i * self.dim() + j])
    }
}

pub fn evaluate(f: &Expr, x: &PhasePoint, params: &ParamSet) -> Result<f64> {
    Compiled::new(f, params)?.value(x)
}

pub fn jet(f: &Expr, x: &PhasePoint, params: &ParamSet, order: Order) -> Result<Jet> {
    let c = Compiled::new(f, params)?;
    Ok(match order {
        Order::First => {
            let j = c.jet1(x)?;
            Jet { value: j.v, gradient: j.g, hessian: None }
        }
        Order::Second => {
            let j = c.jet2(x)?;
            Jet { value: j.v, gradient: j.g, hessian: Some(j.h) }
        }
    })
}

/// Canonical bracket from two gradients laid out as `(q, p)`.
///
/// Summed term by term in a fixed order, so swapping the arguments flips the
/// sign exactly.
pub fn bracket_from_gradients(gf: &[f64], gg: &[f64]) -> f64 {
    let n = gf.len() / 2;
    let mut acc = 0.0;
    for i in 0..n {
        acc += gf[i] * gg[n + i] - gf[n + i] * gg[i];
    }
    acc
}

pub fn poisson_bracket(f: &Expr, g: &Expr, x: &PhasePoint, params: &ParamSet) -> Result<f64> {
    let gf = Compiled::new(f, params)?.jet1(x)?.g;
    let gg = Compiled::new(g, params)?.jet1(x)?.g;
    Ok(bracket_from_gradients(&gf, &gg))
}

/// Gradient of `{f, g}` from second-order jets of `f` and `g`.
pub fn bracket_gradient(f: &Jet2, g: &Jet2) -> Vec<f64> {
    let dim = f.dim();
    let n = dim / 2;
    (0..dim)
        .map(|k| {
            let mut acc = 0.0;
            for i in 0..n {
                let (qi, pi) = (i, n + i);
                acc += f.h[k * dim + qi] * g.g[pi] + f.g[qi] * g.h[k * dim + pi]
                    - f.h[k * dim + pi] * g.g[qi]
                    - f.g[pi] * g.h[k * dim + qi];
            }
            acc
        })
        .collect()
}

/// Scale-free bracket residual `|{f,g}| / (|grad f| |grad g| + 1e-30)`.
pub fn normalized_residual(bracket: f64, gf: &[f64], gg: &[f64]) -> f64 {
    let nf = gf.iter().map(|v| v * v).sum::<f64>().sqrt();
    let ng = gg.iter().map(|v| v * v).sum::<f64>().sqrt();
    bracket.abs() / (nf * ng + 1e-30)
}

/// Central-difference gradient of a compiled expression.
pub fn fd_gradient(c: &Compiled, x: &PhasePoint, h: f64) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        return Err(Error::BadStep(h));
    }
    let base = x.coords();
    let mut grad = Vec::with_capacity(base.len());
    for k in 0..base.len() {
        let mut plus = base.clone();
        let mut minus = base.clone();
        plus[k] += h;
        minus[k] -= h;
        let fp = c.value(&PhasePoint::from_coords(&plus)?)?;
        let fm = c.value(&PhasePoint::from_coords(&minus)?)?;
        grad.push((fp - fm) / (2.0 * h));
    }
    Ok(grad)
}

/// Independent finite-difference estimate of `{f, g}`; accurate to O(h^2).
pub fn fd_bracket_oracle(
    f: &Expr,
    g: &Expr,
    x: &PhasePoint,
    params: &ParamSet,
    h: f64,
) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::BadStep(h));
    }
    let gf = fd_gradient(&Compiled::new(f, params)?, x, h)?;
    let gg = fd_gradient(&Compiled::new(g, params)?, x, h)?;
    Ok(bracket_from_gradients(&gf, &gg))
}

/// Convenience constructors for sums that recur across the catalog.
pub mod build {
    use super::Expr;

    /// `sum_i q_i^2`
    pub fn q_squared(n: usize) -> Expr {
        Expr::sum((0..n).map(|i| Expr::q(i).square()))
    }

    /// `sum_i p_i^2`
    pub fn p_squared(n: usize) -> Expr {
        Expr::sum((0..n).map(|i| Expr::p(i).square()))
    }

    /// `sum_i q_i p_i`
    pub fn q_dot_p(n: usize) -> Expr {
        Expr::sum((0..n).map(|i| Expr::q(i) * Expr::p(i)))
    }

    /// `sum_i b_i / q_i^2` for the site parameter `name`.
    pub fn centrifugal(name: &str, n: usize) -> Expr {
        Expr::sum((0..n).map(|i| Expr::site_param(name, i) / Expr::q(i).square()))
    }

    /// `sum_i w_i x_i` with a site-parameter weight.
    pub fn weighted(name: &str, n: usize, x: impl Fn(usize) -> Expr) -> Expr {
        Expr::sum((0..n).map(|i| Expr::site_param(name, i) * x(i)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(q: &[f64], p: &[f64]) -> PhasePoint {
        PhasePoint::new(q.to_vec(), p.to_vec()).unwrap()
    }

    #[test]
    fn sinhc_matches_printed_ratio() {
        let f = (Expr::param("z") * Expr::q(0).square()).sinh()
            / (Expr::param("z") * Expr::q(0).square());
        let v = evaluate(&f, &pt(&[1.0], &[0.0]), &ParamSet::new().with("z", 0.1)).unwrap();
        assert_eq!(v, 1.0016675001984403);
        let g = (Expr::param("z") * Expr::q(0).square()).sinhc();
        let w = evaluate(&g, &pt(&[1.0], &[0.0]), &ParamSet::new().with("z", 0.1)).unwrap();
        assert!((w - 1.0016675001984403).abs() < 1e-15);
    }

    #[test]
    fn sinhc_series_and_closed_form_join_smoothly() {
        for &x in &[0.4999999, 0.5, 0.5000001, -0.5, 1e-3, 0.0] {
            let (f, d1, d2) = UnaryOp::Sinhc.taylor(x);
            if x != 0.0 {
                assert!((f - x.sinh() / x).abs() < 1e-15, "value at {x}");
            }
            let h = 1e-5;
            let fd1 = (UnaryOp::Sinhc.taylor(x + h).0 - UnaryOp::Sinhc.taylor(x - h).0) / (2.0 * h);
            let fd2 = (UnaryOp::Sinhc.taylor(x + h).1 - UnaryOp::Sinhc.taylor(x - h).1) / (2.0 * h);
            assert!((d1 - fd1).abs() < 1e-9, "d1 at {x}: {d1} vs {fd1}");
            assert!((d2 - fd2).abs() < 1e-9, "d2 at {x}: {d2} vs {fd2}");
        }
    }

    #[test]
    fn zero_point_and_unresolved() {
        let f = Expr::q(0).square() + Expr::p(0).square();
        assert_eq!(evaluate(&f, &pt(&[0.0], &[0.0]), &ParamSet::new()).unwrap(), 0.0);
        let g = Expr::symbol("s") + Expr::q(0);
        assert_eq!(
            evaluate(&g, &pt(&[1.0], &[0.0]), &ParamSet::new()),
            Err(Error::UnresolvedSymbol("s".into()))
        );
        let h = Expr::param("omega") * Expr::q(0);
        assert!(matches!(
            evaluate(&h, &pt(&[1.0], &[0.0]), &ParamSet::new()),
            Err(Error::UnresolvedSymbol(_))
        ));
    }

    #[test]
    fn jets_of_simple_products() {
        let f = Expr::q(0) * Expr::p(0);
        let j = jet(&f, &pt(&[2.0], &[3.0]), &ParamSet::new(), Order::First).unwrap();
        assert_eq!(j.value, 6.0);
        assert_eq!(j.gradient, vec![3.0, 2.0]);

        let c = jet(&Expr::constant(4.0), &pt(&[2.0, 1.0], &[3.0, 1.0]), &ParamSet::new(), Order::First)
            .unwrap();
        assert!(c.gradient.iter().all(|&g| g == 0.0));

        let sq = jet(&Expr::q(0).square(), &pt(&[0.7], &[0.1]), &ParamSet::new(), Order::Second).unwrap();
        assert_eq!(sq.hessian, Some(vec![2.0, 0.0, 0.0, 0.0]));
    }

    #[test]
    fn canonical_brackets() {
        let x = pt(&[2.0, 0.4], &[3.0, -1.0]);
        let ps = ParamSet::new();
        assert_eq!(poisson_bracket(&Expr::q(0), &Expr::p(0), &x, &ps).unwrap(), 1.0);
        assert_eq!(poisson_bracket(&Expr::q(0), &Expr::q(1), &x, &ps).unwrap(), 0.0);
        let b = poisson_bracket(&Expr::q(0).square(), &Expr::p(0).square(), &x, &ps).unwrap();
        assert_eq!(b, 24.0);
        let fd = fd_bracket_oracle(&Expr::q(0).square(), &Expr::p(0).square(), &x, &ps, 1e-4).unwrap();
        assert!((fd - 24.0).abs() < 1e-6);
    }

    #[test]
    fn fd_oracle_agrees_with_jets() {
        let x = pt(&[1.0, 2.0], &[3.0, 4.0]);
        let ps = ParamSet::new();
        let f = Expr::q(0).square() * Expr::p(1);
        let g = Expr::q(1) * Expr::p(0);
        let exact = poisson_bracket(&f, &g, &x, &ps).unwrap();
        let fd = fd_bracket_oracle(&f, &g, &x, &ps, 1e-4).unwrap();
        assert!((exact - fd).abs() < 1e-6);
        let one = fd_bracket_oracle(&Expr::q(0), &Expr::p(0), &x, &ps, 1e-4).unwrap();
        assert!((one - 1.0).abs() < 1e-8);
        assert_eq!(fd_bracket_oracle(&f, &g, &x, &ps, 0.0), Err(Error::BadStep(0.0)));
    }

    #[test]
    fn integer_powers_accept_negative_bases() {
        let f = Expr::q(0).powi(3);
        assert_eq!(evaluate(&f, &pt(&[-2.0], &[0.0]), &ParamSet::new()).unwrap(), -8.0);
        let g = Expr::q(0).pow(0.5);
        assert!(matches!(
            evaluate(&g, &pt(&[-2.0], &[0.0]), &ParamSet::new()),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            evaluate(&Expr::q(0).ln(), &pt(&[0.0], &[0.0]), &ParamSet::new()),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            evaluate(&(Expr::one() / Expr::q(0)), &pt(&[0.0], &[0.0]), &ParamSet::new()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn coordinate_index_checked() {
        let f = Expr::q(3);
        assert_eq!(
            evaluate(&f, &pt(&[1.0], &[1.0]), &ParamSet::new()),
            Err(Error::CoordinateOutOfRange { index: 3, n: 1 })
        );
    }

    #[test]
    fn builder_rewrites() {
        let x = Expr::q(0);
        assert_eq!(&x + 0.0, x);
        assert_eq!(&x * 1.0, x);
        assert_eq!((&x * 0.0).as_const(), Some(0.0));
        assert_eq!((Expr::constant(2.0) * 3.0).as_const(), Some(6.0));
    }

    #[test]
    fn substitution_composes() {
        // F(s) = omega^2 s / 2 with s -> q1^2 + q2^2
        let f = Expr::param("omega").square() * Expr::symbol("s") / 2.0;
        let s = build::q_squared(2);
        let mut b = std::collections::HashMap::new();
        b.insert("s".to_string(), s.clone());
        let g = f.substitute(&b);
        let ps = ParamSet::new().with("omega", 1.5);
        let x = pt(&[0.3, 0.8], &[0.0, 0.0]);
        let want = 1.5f64.powi(2) * (0.09 + 0.64) / 2.0;
        assert!((evaluate(&g, &x, &ps).unwrap() - want).abs() < 1e-15);

        let mut id = std::collections::HashMap::new();
        id.insert("s".to_string(), Expr::symbol("s"));
        assert_eq!(f.substitute(&id), f);
    }

    #[test]
    fn shift_moves_template_to_site() {
        let t = Expr::p(0).square() + Expr::site_param("b", 0) / Expr::q(0).square();
        let s = t.at_site(2);
        assert_eq!(s.coordinate_sites(), vec![2]);
        let x = pt(&[9.0, 9.0, 2.0], &[9.0, 9.0, 3.0]);
        let ps = ParamSet::new().with_seq("b", vec![100.0, 100.0, 4.0]);
        assert_eq!(evaluate(&s, &x, &ps).unwrap(), 10.0);
    }

    #[test]
    fn display_round_trips() {
        let f = (Expr::q(0) - Expr::site_param("b", 1)).sin() * Expr::constant(-2.5)
            + Expr::param("omega").pow(Expr::p(1))
            - (-Expr::symbol("s"));
        let text = f.to_string();
        let back = parse(&text, &["s"]).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.to_string(), text);
    }
}
