//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Run with `cargo test --test acceptance`.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use poisson_coalgebra::algebras::{self, h6, sl2, sl2z};
use poisson_coalgebra::catalog::{build, catalog_ids, limit_of, Chart, EntryOptions};
use poisson_coalgebra::cli;
use poisson_coalgebra::coalgebra::{check_poisson_map, realize, CoalgebraSpec, SiteConfig};
use poisson_coalgebra::dynamics::{
    default_monitors, integrate, reversibility_error, step_halving_ratio, StepOptions,
};
use poisson_coalgebra::expr::{evaluate, parse, Compiled, Expr, ParamSet, PhasePoint, SampleBox};
use poisson_coalgebra::extensions::{
    check_coaction_homomorphism, check_coassociativity, comodule_flat_limits, comodule_oscillator,
    loop_involution_check,
};
use poisson_coalgebra::geometry::{scalar_curvature_numeric, Derivatives};
use poisson_coalgebra::verify::{
    classify, entry_fields, involution_matrix, limit_check, log_log_slope, Family, Field,
};
use poisson_coalgebra::Result;

const POINTS: usize = 100;
const LIMIT_VALUES: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Outcome { passed, detail: detail.into() }
    }
}

fn within(t: Instant, budget: Duration) -> bool {
    t.elapsed() <= budget
}

fn random_b(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(0.05..0.5)).collect()
}

fn random_lambda(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(0.5..1.5)).collect()
}

// 1. Realizations are Poisson maps.
fn poisson_maps() -> Result<Outcome> {
    let t = Instant::now();
    let mut worst = 0.0f64;
    let mut runs = 0;
    for n in 2..=4 {
        let b = random_b(n, 10 + n as u64);
        let mut cases: Vec<(CoalgebraSpec, SiteConfig)> = vec![(sl2(), SiteConfig::new(n).with_site("b", b.clone()))];
        for z in [0.05, 0.2] {
            cases.push((sl2z(), SiteConfig::new(n).with_site("b", b.clone()).with_scalar("z", z)));
        }
        cases.push((h6(), SiteConfig::new(n).with_site("lambda", random_lambda(n, 20 + n as u64))));
        for (spec, cfg) in cases {
            let r = check_poisson_map(&spec, &cfg, &SampleBox::standard(n), POINTS, 1, 1e-9)?;
            worst = worst.max(r.max_residual);
            runs += 1;
        }
    }
    let fast = within(t, Duration::from_secs(30));
    Ok(Outcome::new(worst <= 1e-9 && fast, format!("{runs} realizations, max residual {worst:.2e}")))
}

// 2. Involution of every catalog family.
fn involution() -> Result<Outcome> {
    let t = Instant::now();
    let mut worst = 0.0f64;
    let mut checked = 0;
    let mut failures = Vec::new();
    for info in catalog_ids() {
        let sizes: &[usize] = match info.id {
            "ext.comodule" => &[2],
            "sl2.evans" => &[2, 3, 4, 5],
            _ => &[2, 3, 4],
        };
        for &n in sizes {
            let e = build(info.id, &EntryOptions::new(n))?;
            let fields = entry_fields(&e);
            if fields.is_empty() {
                continue;
            }
            let m = involution_matrix(&e.hamiltonian, &fields, &e.params, &e.sample_box, POINTS, 2, 1e-9)?;
            for (i, row) in m.residuals.iter().enumerate() {
                for (j, r) in row.iter().enumerate() {
                    if m.required[i][j] {
                        worst = worst.max(*r);
                    }
                }
            }
            if !m.passed {
                failures.push(format!("{} N={n}", info.id));
            }
            checked += 1;
        }
    }
    let fast = within(t, Duration::from_secs(120));
    Ok(Outcome::new(
        failures.is_empty() && fast,
        format!("{checked} entry sizes, max required residual {worst:.2e}, failing {failures:?}"),
    ))
}

// 3. Independent integral counts.
fn counting() -> Result<Outcome> {
    let mut ranks = Vec::new();
    let mut ok = true;
    for (n, want) in [(2, 2), (3, 4), (4, 6)] {
        let e = build("sl2.evans", &EntryOptions::new(n).seq("b", random_b(n, 30 + n as u64)))?;
        let r = classify(&e, &e.sample_box, POINTS, 3, 1e-9)?;
        ok &= r.rank.rank == want;
        ranks.push(format!("evans N={n} rank {}", r.rank.rank));
    }
    let e = build("h6.geodesic", &EntryOptions::new(4))?;
    let r = classify(&e, &e.sample_box, POINTS, 3, 1e-9)?;
    ok &= r.rank.rank == 4;
    ranks.push(format!("h6.geodesic N=4 rank {} ({})", r.rank.rank, r.classification));
    Ok(Outcome::new(ok, ranks.join(", ")))
}

/// Largest difference over the points, relative to the largest magnitude
/// either function reaches there. Pointwise ratios are meaningless where a
/// polynomial integral passes near zero by cancellation.
fn max_gap(a: &Expr, b: &Expr, params: &ParamSet, points: &[PhasePoint]) -> Result<f64> {
    let (ca, cb) = (Compiled::new(a, params)?, Compiled::new(b, params)?);
    let (mut diff, mut scale) = (0.0f64, 0.0f64);
    for x in points {
        let (u, v) = (ca.value(x)?, cb.value(x)?);
        diff = diff.max((u - v).abs());
        scale = scale.max(u.abs()).max(v.abs());
    }
    Ok(if scale > 0.0 { diff / scale } else { diff })
}

// 4. Closed forms against the generic coproduct engine.
fn closed_forms() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut compare = |spec: &CoalgebraSpec, cfg: &SiteConfig, gens: &[Expr], left: &[Expr], right: &[Expr]| -> Result<()> {
        let sys = realize(spec, cfg)?.with_integrals();
        let params = sys.params();
        let points = SampleBox::standard(cfg.n).sample(POINTS, 4);
        for ((_, e), c) in sys.generators.iter().zip(gens) {
            worst = worst.max(max_gap(e, c, &params, &points)?);
        }
        if sys.left.len() != left.len() || sys.right.len() != right.len() {
            worst = f64::INFINITY;
        }
        for (i, c) in sys.left.iter().zip(left).chain(sys.right.iter().zip(right)) {
            worst = worst.max(max_gap(&i.expr, c, &params, &points)?);
        }
        Ok(())
    };
    for n in 2..=5 {
        let b = random_b(n, 40 + n as u64);
        let cfg = SiteConfig::new(n).with_site("b", b.clone());
        let (l, r) = algebras::sl2_integrals(n, &b)?;
        compare(&sl2(), &cfg, &algebras::sl2_generators(n), &l, &r)?;
        for z in [0.05, 0.2, -0.3] {
            let cfg = cfg.clone().with_scalar("z", z);
            let (l, r) = algebras::sl2z_integrals(n, &b, z)?;
            compare(&sl2z(), &cfg, &algebras::sl2z_generators(n), &l, &r)?;
        }
    }
    for n in 3..=5 {
        let lambda = random_lambda(n, 50 + n as u64);
        let cfg = SiteConfig::new(n).with_site("lambda", lambda.clone());
        let out = algebras::h6_integrals(n, &lambda)?;
        compare(&h6(), &cfg, &algebras::h6_generators(n), &out.left, &out.right)?;
    }
    Ok(Outcome::new(worst <= 1e-10, format!("max relative gap {worst:.2e}")))
}

// 5. Undeformed and flat limits.
fn limits() -> Result<Outcome> {
    let cases: [(&str, Option<Chart>); 9] = [
        ("sl2z.free", None),
        ("sl2z.potential", None),
        ("sl2.free_curved", Some(Chart::Poincare)),
        ("sl2.curved_evans", Some(Chart::Poincare)),
        ("sl2.curved_evans", Some(Chart::Beltrami)),
        ("sl2.curved_sw", Some(Chart::Poincare)),
        ("sl2.curved_sw", Some(Chart::Beltrami)),
        ("sl2.curved_kc", Some(Chart::Poincare)),
        ("sl2.curved_kc", Some(Chart::Beltrami)),
    ];
    let mut ok = true;
    let mut orders = Vec::new();
    for (id, chart) in cases {
        let mut o = EntryOptions::new(3);
        o.chart = chart;
        let lim = limit_of(id, &o)?.expect("limit is catalogued");
        let nominal = build(id, &o)?;
        let r = limit_check(&lim.family(id, &o), &lim.target, &LIMIT_VALUES, &nominal.sample_box, POINTS, 5)?;
        ok &= r.passed;
        let tag = chart.map_or(String::new(), |c| format!("/{c:?}"));
        orders.push(format!("{id}{tag} {:.2}", r.order.unwrap_or(f64::NAN)));
    }
    Ok(Outcome::new(ok, format!("orders: {}", orders.join(", "))))
}

fn numeric_curvature(id: &str, o: &EntryOptions, points: usize) -> Result<Vec<(PhasePoint, f64, Option<f64>)>> {
    let e = build(id, o)?;
    let metric = e.metric.as_ref().expect("entry has a metric");
    let mut out = Vec::new();
    for x in e.sample_box.sample(points, 6) {
        let num = scalar_curvature_numeric(metric, &x.q, &e.params, Derivatives::Jets)?;
        let closed = match &e.closed_curvature {
            Some(c) => c.scalar_at(&x.q, &e.params)?,
            None => None,
        };
        out.push((x, num, closed));
    }
    Ok(out)
}

// 6. Curvature pipeline against closed forms.
fn curvature() -> Result<Outcome> {
    let t = Instant::now();
    let kappa = 0.3;
    let z = 0.05;
    let mut ok = true;
    let mut notes = Vec::new();
    let mut track = |label: &str, worst: f64, tol: f64| {
        ok &= worst <= tol;
        notes.push(format!("{label} {worst:.1e}"));
    };

    for n in [2, 3] {
        let target = (n * (n - 1)) as f64 * kappa;
        let o = EntryOptions::new(n).param("kappa", kappa).function("f", parse("2/(1 + kappa*r^2)", &["r"])?);
        let rows = numeric_curvature("sl2.conformal_free", &o, 10)?;
        let w = rows.iter().map(|(_, v, c)| (v - target).abs().max((c.unwrap() - target).abs())).fold(0.0, f64::max);
        track(&format!("constant N={n}"), w, 1e-5);
        // the Poincare chart of the free Hamiltonian has sectional curvature 4 kappa
        let rows = numeric_curvature("sl2.free_curved", &EntryOptions::new(n).param("kappa", kappa), 10)?;
        let w = rows.iter().map(|(_, v, _)| (v - 4.0 * target).abs()).fold(0.0, f64::max);
        track(&format!("poincare N={n}"), w, 1e-5);
    }

    for sign in [1.0, -1.0] {
        let g = parse(if sign > 0.0 { "exp(x)" } else { "exp(-x)" }, &["x"])?;
        let o2 = EntryOptions::new(2).param("z", z).function("g", g.clone());
        let w = numeric_curvature("sl2z.free", &o2, 10)?
            .iter()
            .map(|(_, v, _)| (v / 2.0 - sign * z).abs())
            .fold(0.0, f64::max);
        track(&format!("K exp({sign:+})"), w, 1e-5);
        let o3 = EntryOptions::new(3).param("z", z).function("g", g);
        let w = numeric_curvature("sl2z.free", &o3, 10)?
            .iter()
            .map(|(_, v, _)| (v - sign * 6.0 * z).abs())
            .fold(0.0, f64::max);
        track(&format!("R exp({sign:+})"), w, 1e-4);
    }

    let cosh = parse("cosh(x)", &["x"])?;
    let rows = numeric_curvature("sl2z.free", &EntryOptions::new(3).param("z", z).function("g", cosh), 10)?;
    let w = rows
        .iter()
        .map(|(x, v, _)| {
            let s: f64 = x.q.iter().map(|q| q * q).sum();
            (v - 5.0 * z * (z * s).tanh()).abs()
        })
        .fold(0.0, f64::max);
    track("R = 5K cosh", w, 1e-4);

    let mut table = 0.0f64;
    let ids = ["darboux.i", "darboux.ii", "darboux.iiia", "darboux.iiib", "darboux.iv", "sl2.multifold_kepler", "sl2.taub_nut"];
    for id in ids {
        for n in [2, 3] {
            for (_, v, c) in numeric_curvature(id, &EntryOptions::new(n), 10)? {
                table = table.max((v - c.expect("closed form")).abs());
            }
        }
    }
    track("spherically symmetric table", table, 1e-4);
    let fast = within(t, Duration::from_secs(60));
    Ok(Outcome::new(ok && fast, notes.join(", ")))
}

// 7. Long integrations.
fn dynamics() -> Result<Outcome> {
    let (h, steps) = (1e-3, 10_000);
    let cases: [(&str, usize, Option<PhasePoint>); 4] = [
        ("sl2.curved_sw", 3, Some(PhasePoint::new(vec![0.5, 0.45, 0.4], vec![0.3, -0.2, 0.25])?)),
        ("darboux.iiib", 2, None),
        ("sl2z.free", 3, Some(PhasePoint::new(vec![0.5, 0.6, 0.7], vec![0.1, -0.05, 0.08])?)),
        ("ext.comodule", 2, None),
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    for (id, n, x0) in cases {
        let e = build(id, &EntryOptions::new(n))?;
        let x0 = x0.unwrap_or_else(|| e.sample_box.sample(1, 11).remove(0));
        let traj = integrate(&e, &x0, h, steps, &default_monitors(&e), StepOptions::default())?;
        let drift = traj.max_drift();
        let ratio = step_halving_ratio(&e, &x0, h, steps)?;
        let back = reversibility_error(&e, &x0, h, steps)?;
        ok &= traj.truncated.is_none() && drift <= 1e-6 && (3.5..=4.5).contains(&ratio) && back <= 1e-9;
        notes.push(format!("{id} drift {drift:.1e} ratio {ratio:.3} back {back:.1e}"));
    }
    Ok(Outcome::new(ok, notes.join("; ")))
}

// 8. Comodule oscillator and loop coproducts.
fn extensions() -> Result<Outcome> {
    let mut ok = true;
    let mut notes = Vec::new();
    let mut worst = 0.0f64;
    for sigma in [0.05, 0.1, 0.2] {
        let sys = comodule_oscillator(sigma, 1.0, 1.0)?;
        let fields = [Field::new("C", sys.casimir.clone(), Family::Left)];
        let m = involution_matrix(&sys.hamiltonian, &fields, &sys.params(), &sys.sample_box, POINTS, 8, 1e-9)?;
        worst = worst.max(m.residuals[0][1]);
        let hom = check_coaction_homomorphism(sigma, [1.0, 1.0], &sys.sample_box, 50, 8, 1e-9)?;
        let assoc = check_coassociativity(sigma, [1.0, 0.8, 1.2], 50, 8, 1e-9)?;
        ok &= hom.passed && assoc.passed;
    }
    ok &= worst <= 1e-9;
    notes.push(format!("{{H, C}} {worst:.1e}"));

    let (h0, c0) = comodule_flat_limits();
    let flat = comodule_oscillator(0.0, 1.0, 1.0)?;
    let pts = flat.sample_box.sample(POINTS, 9);
    let gap = max_gap(&flat.hamiltonian, &h0, &flat.params(), &pts)?.max(max_gap(&flat.casimir, &c0, &flat.params(), &pts)?);
    let mut devs = Vec::new();
    for sigma in LIMIT_VALUES {
        let s = comodule_oscillator(sigma, 1.0, 1.0)?;
        let mut d = 0.0f64;
        for x in &pts {
            d = d.max((evaluate(&s.hamiltonian, x, &s.params())? - evaluate(&h0, x, &s.params())?).abs());
            d = d.max((evaluate(&s.casimir, x, &s.params())? - evaluate(&c0, x, &s.params())?).abs());
        }
        devs.push(d);
    }
    let order = log_log_slope(&LIMIT_VALUES, &devs).unwrap_or(0.0);
    ok &= gap <= 1e-12 && order >= 0.9;
    notes.push(format!("sigma=0 gap {gap:.1e}, order {order:.2}"));

    let cfg = SiteConfig::new(3).with_site("b", random_b(3, 60));
    let lambdas = [-1.5, -0.5, 0.5, 2.0, 3.0];
    let mus = [-2.0, -0.7, 0.4, 1.7, 2.5];
    let r = loop_involution_check(&sl2(), "C", &cfg, 1.0, &lambdas, &mus, &SampleBox::standard(3), 50, 10, 1e-9)?;
    ok &= r.passed;
    notes.push(format!("loop casimir {:.1e} generators {:.1e}", r.casimir_max, r.generator_max));
    Ok(Outcome::new(ok, notes.join(", ")))
}

// 9. Byte-identical reports.
fn reproducibility() -> Result<Outcome> {
    let dir = tempfile::tempdir()?;
    let out = dir.path().join("run");
    let cfg = dir.path().join("config.json");
    let body = format!(
        r#"{{"system": "sl2.curved_sw", "n": 3, "params": {{"kappa": 0.2, "b": [0.1, 0.2, 0.3]}}, "limit": {{}}, "out": {:?}}}"#,
        out.display().to_string()
    );
    std::fs::write(&cfg, body)?;
    let args = ["coalg", "verify", "--config", cfg.to_str().unwrap()];
    let mut sink = Vec::new();
    let mut runs = Vec::new();
    let mut codes = Vec::new();
    for jobs in ["1", "4"] {
        let mut a = args.to_vec();
        a.extend(["--jobs", jobs]);
        codes.push(cli::run(a, &mut sink));
        runs.push(std::fs::read(out.join("report.json"))?);
    }
    // the embedded config reproduces the report
    let report: serde_json::Value = serde_json::from_slice(&runs[0]).map_err(|e| poisson_coalgebra::Error::Io(e.to_string()))?;
    std::fs::write(&cfg, serde_json::to_string(&report["config"]).unwrap())?;
    codes.push(cli::run(args, &mut sink));
    runs.push(std::fs::read(out.join("report.json"))?);
    let same = runs.windows(2).all(|w| w[0] == w[1]);
    Ok(Outcome::new(
        same && codes.iter().all(|c| *c == 0),
        format!("{} runs, {} bytes, exit codes {codes:?}", runs.len(), runs[0].len()),
    ))
}

type Criterion = fn() -> Result<Outcome>;

fn main() {
    let criteria: [(&str, Criterion); 9] = [
        ("poisson maps", poisson_maps),
        ("involution", involution),
        ("integral counting", counting),
        ("closed forms vs engine", closed_forms),
        ("limits", limits),
        ("curvature", curvature),
        ("dynamics", dynamics),
        ("extensions", extensions),
        ("reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = check().unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        if !out.passed {
            failed += 1;
        }
        println!(
            "criterion {} {:<24} {} ({:.1}s) {}",
            k + 1,
            name,
            if out.passed { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            out.detail
        );
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
