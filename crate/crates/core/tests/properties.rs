use proptest::prelude::*;

use poisson_coalgebra::algebras::{sl2, sl2z};
use poisson_coalgebra::coalgebra::{coproduct_left, coproduct_right, realization_bindings};
use poisson_coalgebra::dynamics::{implicit_midpoint_step, StepOptions};
use poisson_coalgebra::expr::{
    evaluate, parse, poisson_bracket, Compiled, Expr, ParamSet, PhasePoint, SampleBox,
};
use poisson_coalgebra::verify::{independence_rank, involution_matrix, Family, Field};

/// Random expressions in `q1, p1, q2, p2`, a parameter `a` and the
/// placeholder `s`, kept smooth on the sampling region.
fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-3.0f64..3.0).prop_map(|v| Expr::constant((v * 100.0).round() / 100.0)),
        (0usize..2).prop_map(Expr::q),
        (0usize..2).prop_map(Expr::p),
        Just(Expr::param("a")),
        Just(Expr::symbol("s")),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a / (2.0 + b.square())),
            inner.clone().prop_map(|a| a.sin()),
            inner.clone().prop_map(|a| a.tanh()),
            inner.clone().prop_map(|a| (0.1 * a).exp()),
            inner.clone().prop_map(|a| (1.0 + a.square()).sqrt()),
            inner.clone().prop_map(|a| a.powi(3)),
            inner.prop_map(|a| -a),
        ]
    })
}

fn point(v: &[f64]) -> PhasePoint {
    PhasePoint::new(vec![v[0], v[1]], vec![v[2], v[3]]).unwrap()
}

fn bind_s(e: &Expr, to: Expr) -> Expr {
    e.substitute(&[("s".to_string(), to)].into_iter().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printed_expressions_parse_back(e in arb_expr()) {
        let once = parse(&e.to_string(), &["s"]).unwrap();
        let twice = parse(&once.to_string(), &["s"]).unwrap();
        prop_assert_eq!(&once, &twice);
        let (x, ps) = (point(&[0.3, -0.7, 1.1, 0.4]), ParamSet::new().with("a", 0.6));
        let (u, v) = (evaluate(&bind_s(&e, Expr::q(0)), &x, &ps).unwrap(), evaluate(&bind_s(&once, Expr::q(0)), &x, &ps).unwrap());
        prop_assert!((u - v).abs() <= 1e-12 * (1.0 + u.abs()));
    }

    #[test]
    fn symbolic_derivative_matches_differences(e in arb_expr(), c in prop::collection::vec(-1.0f64..1.0, 5)) {
        let ps = ParamSet::new().with("a", 0.6);
        let x = point(&c);
        let at = |v: f64| evaluate(&bind_s(&e, Expr::constant(v)), &x, &ps).unwrap();
        let h = 1e-5;
        let fd = (at(c[4] + h) - at(c[4] - h)) / (2.0 * h);
        let exact = evaluate(&bind_s(&e.derivative("s"), Expr::constant(c[4])), &x, &ps).unwrap();
        let scale = 1.0 + at(c[4]).abs() + exact.abs();
        prop_assert!((fd - exact).abs() <= 1e-6 * scale, "{} vs {}", fd, exact);
    }

    #[test]
    fn bracket_is_antisymmetric(f in arb_expr(), g in arb_expr(), c in prop::collection::vec(-1.0f64..1.0, 4)) {
        let ps = ParamSet::new().with("a", 0.6);
        let (f, g) = (bind_s(&f, Expr::p(1)), bind_s(&g, Expr::q(1)));
        let x = point(&c);
        let (a, b) = (poisson_bracket(&f, &g, &x, &ps).unwrap(), poisson_bracket(&g, &f, &x, &ps).unwrap());
        prop_assert!((a + b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn normalized_residuals_ignore_scaling(k in prop_oneof![-50.0f64..-0.02, 0.02f64..50.0], f in arb_expr()) {
        let f = bind_s(&f, Expr::q(1));
        let h = Expr::p(0).square() / 2.0 + Expr::q(0).cos() + Expr::q(1) * Expr::p(1);
        let bx = SampleBox::uniform(2, (-1.0, 1.0), (-1.0, 1.0));
        let ps = ParamSet::new().with("a", 0.6);
        let one = involution_matrix(&h, &[Field::new("f", f.clone(), Family::Free)], &ps, &bx, 20, 4, 1e-9).unwrap();
        let scaled = involution_matrix(&h, &[Field::new("f", k * f, Family::Free)], &ps, &bx, 20, 4, 1e-9).unwrap();
        prop_assert!((one.residuals[0][1] - scaled.residuals[0][1]).abs() <= 1e-12);
    }

    #[test]
    fn adding_a_field_never_lowers_rank(f in arb_expr(), g in arb_expr()) {
        let ps = ParamSet::new().with("a", 0.6);
        let (f, g) = (bind_s(&f, Expr::p(0)), bind_s(&g, Expr::q(1)));
        let bx = SampleBox::uniform(2, (-1.0, 1.0), (-1.0, 1.0));
        let base = independence_rank(std::slice::from_ref(&f), &ps, &bx, 12, 5).unwrap().rank;
        let more = independence_rank(&[f, g], &ps, &bx, 12, 5).unwrap().rank;
        prop_assert!(more >= base);
    }

    #[test]
    fn seeded_samples_repeat(seed in any::<u64>()) {
        let bx = SampleBox::standard(3);
        prop_assert_eq!(bx.sample(8, seed), bx.sample(8, seed));
        prop_assert!(bx.sample(8, seed).iter().all(|x| bx.contains(x)));
    }

    #[test]
    fn midpoint_steps_reverse(c in prop::collection::vec(-1.0f64..1.0, 4), h in 1e-3f64..5e-2) {
        let ham = (Expr::p(0).square() + Expr::p(1).square()) / 2.0
            + (Expr::q(0).square() + Expr::q(1).square()) / 2.0
            + 0.1 * Expr::q(0).square() * Expr::q(1).square();
        let comp = Compiled::new(&ham, &ParamSet::new()).unwrap();
        let x = point(&c);
        let opts = StepOptions::default();
        let fwd = implicit_midpoint_step(&comp, &x, h, opts).unwrap();
        let back = implicit_midpoint_step(&comp, &fwd, -h, opts).unwrap();
        let err = x.coords().iter().zip(back.coords()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(err <= 10.0 * opts.fp_tol * (1.0 + x.coords().iter().fold(0.0f64, |m, v| m.max(v.abs()))));
    }

    #[test]
    fn left_and_right_coproducts_agree(b in prop::collection::vec(0.05f64..0.5, 3), z in -0.4f64..0.4) {
        let ps = ParamSet::new().with_seq("b", b).with("z", z);
        let bx = SampleBox::standard(3);
        for spec in [sl2(), sl2z()] {
            let bind = realization_bindings(&spec, 3);
            for g in &spec.generators {
                let l = coproduct_left(&spec, g, 3).unwrap().substitute(&bind);
                let r = coproduct_right(&spec, g, 3).unwrap().substitute(&bind);
                for x in bx.sample(5, 6) {
                    let (u, v) = (evaluate(&l, &x, &ps).unwrap(), evaluate(&r, &x, &ps).unwrap());
                    prop_assert!((u - v).abs() <= 1e-11 * (1.0 + u.abs()));
                }
            }
        }
    }
}
