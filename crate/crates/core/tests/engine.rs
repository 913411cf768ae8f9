use poisson_coalgebra::algebras::{self, h6, sl2, sl2z};
use poisson_coalgebra::coalgebra::{
    self, check_poisson_map, realize, realize_function, CoalgebraSpec, Side, SiteConfig,
};
use poisson_coalgebra::expr::{evaluate, Expr, ParamSet, PhasePoint, SampleBox};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn sl2_config(n: usize) -> SiteConfig {
    SiteConfig::new(n).with_site("b", (0..n).map(|i| 0.1 + 0.07 * i as f64).collect())
}

fn h6_config(n: usize) -> SiteConfig {
    SiteConfig::new(n).with_site("lambda", (0..n).map(|i| 0.8 + 0.3 * i as f64).collect())
}

fn agree_on_box(a: &Expr, b: &Expr, params: &ParamSet, n: usize, seed: u64) {
    for x in SampleBox::standard(n).sample(25, seed) {
        let (va, vb) = (evaluate(a, &x, params).unwrap(), evaluate(b, &x, params).unwrap());
        assert!(close(va, vb, 1e-11), "{va} vs {vb} at {x:?}");
    }
}

#[test]
fn sl2_generators_at_a_point() {
    let sys = realize(&sl2(), &SiteConfig::new(2).with_site("b", vec![0.0, 0.0])).unwrap();
    let x = PhasePoint::new(vec![1.0, 2.0], vec![3.0, 4.0]).unwrap();
    let ps = sys.params();
    let v = |g: &str| evaluate(sys.generator(g).unwrap(), &x, &ps).unwrap();
    assert_eq!((v("Jm"), v("Jp"), v("J3")), (5.0, 25.0, 11.0));
    let c2 = &sys.with_integrals().left[0];
    assert_eq!(evaluate(&c2.expr, &x, &ps).unwrap(), 4.0);
}

fn engine_matches_closed_forms(
    spec: &CoalgebraSpec,
    cfg: &SiteConfig,
    gens: &[Expr],
    left: &[Expr],
    right: &[Expr],
) {
    let sys = realize(spec, cfg).unwrap().with_integrals();
    let ps = sys.params();
    let n = cfg.n;
    for ((_, e), c) in sys.generators.iter().zip(gens) {
        agree_on_box(e, c, &ps, n, 1);
    }
    assert_eq!(sys.left.len(), left.len());
    assert_eq!(sys.right.len(), right.len());
    for (i, c) in sys.left.iter().zip(left) {
        agree_on_box(&i.expr, c, &ps, n, 2);
    }
    for (i, c) in sys.right.iter().zip(right) {
        agree_on_box(&i.expr, c, &ps, n, 3);
    }
    // the top-order left and right integrals coincide
    agree_on_box(&left[left.len() - 1], &right[right.len() - 1], &ps, n, 4);
}

#[test]
fn sl2_engine_matches_closed_forms() {
    for n in 2..=5 {
        let cfg = sl2_config(n);
        let (l, r) = algebras::sl2_integrals(n, &cfg.site["b"]).unwrap();
        engine_matches_closed_forms(&sl2(), &cfg, &algebras::sl2_generators(n), &l, &r);
    }
}

#[test]
fn sl2z_engine_matches_closed_forms() {
    for (n, z) in [(2, 0.4), (3, -0.25), (4, 0.3)] {
        let cfg = sl2_config(n).with_scalar("z", z);
        let (l, r) = algebras::sl2z_integrals(n, &cfg.site["b"], z).unwrap();
        engine_matches_closed_forms(&sl2z(), &cfg, &algebras::sl2z_generators(n), &l, &r);
    }
}

#[test]
fn h6_engine_matches_closed_forms() {
    for n in 3..=5 {
        let cfg = h6_config(n);
        let out = algebras::h6_integrals(n, &cfg.site["lambda"]).unwrap();
        engine_matches_closed_forms(&h6(), &cfg, &algebras::h6_generators(n), &out.left, &out.right);
    }
}

#[test]
fn h6_second_coproduct_of_working_casimir_vanishes() {
    let cfg = h6_config(2);
    let c2 = realize_function(&h6(), &algebras::h6_working_casimir(), 2, 2, Side::Left);
    for x in SampleBox::standard(2).sample(10, 5) {
        assert!(evaluate(&c2, &x, &cfg.params()).unwrap().abs() < 1e-12);
    }
}

#[test]
fn h6_quartic_is_central_times_working() {
    let cfg = h6_config(4);
    let quartic = realize_function(&h6(), &algebras::h6_quartic_casimir(), 4, 4, Side::Left);
    let working = realize_function(&h6(), &algebras::h6_working_casimir(), 4, 4, Side::Left);
    let m: f64 = cfg.site["lambda"].iter().map(|l| l * l).sum();
    for x in SampleBox::standard(4).sample(10, 6) {
        let a = evaluate(&quartic, &x, &cfg.params()).unwrap();
        let b = evaluate(&working, &x, &cfg.params()).unwrap();
        assert!(close(a, m * b, 1e-11));
    }
}

#[test]
fn left_and_right_full_coproducts_coincide() {
    for (spec, cfg) in [
        (sl2(), sl2_config(4)),
        (sl2z(), sl2_config(4).with_scalar("z", 0.35)),
        (h6(), h6_config(4)),
    ] {
        let bind = coalgebra::realization_bindings(&spec, 4);
        for g in &spec.generators {
            let a = coalgebra::coproduct_left(&spec, g, 4).unwrap().substitute(&bind);
            let b = coalgebra::coproduct_right(&spec, g, 4).unwrap().substitute(&bind);
            agree_on_box(&a, &b, &cfg.params(), 4, 7);
        }
    }
}

#[test]
fn realizations_are_poisson_maps() {
    let b = SampleBox::standard(3);
    for (spec, cfg) in [
        (sl2(), sl2_config(3)),
        (sl2z(), sl2_config(3).with_scalar("z", 0.35)),
        (sl2z(), sl2_config(3).with_scalar("z", 0.0)),
        (h6(), h6_config(3)),
    ] {
        let rep = check_poisson_map(&spec, &cfg, &b, 40, 11, 1e-10).unwrap();
        assert!(rep.passed, "{} max residual {}", spec.name, rep.max_residual);
        assert_eq!(rep.pairs.len(), spec.generators.len() * (spec.generators.len() - 1) / 2);
    }
}

#[test]
fn deformation_reduces_to_undeformed_at_zero() {
    let cfg = sl2_config(3);
    let a = realize(&sl2z(), &cfg.clone().with_scalar("z", 0.0)).unwrap().with_integrals();
    let b = realize(&sl2(), &cfg).unwrap().with_integrals();
    let ps = a.params();
    for ((_, x), (_, y)) in a.generators.iter().zip(&b.generators) {
        agree_on_box(x, y, &ps, 3, 8);
    }
    for (x, y) in a.left.iter().zip(&b.left).chain(a.right.iter().zip(&b.right)) {
        agree_on_box(&x.expr, &y.expr, &ps, 3, 9);
    }
}

#[test]
fn site_config_is_validated() {
    assert!(realize(&sl2(), &SiteConfig::new(3).with_site("b", vec![0.1])).is_err());
    assert!(realize(&sl2z(), &sl2_config(3)).is_err());
    assert!(realize(&h6(), &sl2_config(3)).is_err());
    assert!(coalgebra::coproduct_left(&sl2(), "Jq", 3).is_err());
}

#[test]
fn primitive_flag() {
    assert!(sl2().is_primitive());
    assert!(h6().is_primitive());
    assert!(!sl2z().is_primitive());
}

#[test]
fn hamiltonian_from_generators() {
    let sys = realize(&sl2(), &sl2_config(3)).unwrap();
    let h = Expr::symbol("Jp") / 2.0 + Expr::symbol("Jm") * 0.5;
    let built = coalgebra::build_hamiltonian(&sys, &h).unwrap();
    let direct = algebras::sl2_generators(3)[1].clone() / 2.0 + algebras::sl2_generators(3)[0].clone() * 0.5;
    agree_on_box(&built, &direct, &sys.params(), 3, 10);
    assert!(coalgebra::build_hamiltonian(&sys, &Expr::symbol("F")).is_err());
}
