//! Scalar curvature from the Christoffel pipeline against closed forms.

use poisson_coalgebra::catalog::{build, EntryOptions};
use poisson_coalgebra::expr::parse;
use poisson_coalgebra::geometry::{scalar_curvature_numeric, Derivatives};

fn main() -> poisson_coalgebra::Result<()> {
    let cases = [
        ("darboux.iiib", EntryOptions::new(2)),
        ("sl2.taub_nut", EntryOptions::new(3)),
        ("sl2z.free", EntryOptions::new(3).param("z", 0.1).function("g", parse("exp(x)", &["x"])?)),
        ("sl2z.free", EntryOptions::new(3).param("z", 0.1).function("g", parse("cosh(x)", &["x"])?)),
    ];
    for (id, o) in cases {
        let e = build(id, &o)?;
        let metric = e.metric.as_ref().expect("catalog metric");
        println!("{id} N={}", e.n);
        for x in e.sample_box.sample(3, 1) {
            let numeric = scalar_curvature_numeric(metric, &x.q, &e.params, Derivatives::Jets)?;
            let closed = e.closed_curvature.as_ref().map(|c| c.scalar_at(&x.q, &e.params)).transpose()?.flatten();
            println!("  q = {:.3?}: numeric {numeric:.8}, closed {closed:.8?}", x.q);
        }
    }
    Ok(())
}
