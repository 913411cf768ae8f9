//! Curved and deformed systems converge to their flat, undeformed
//! counterparts with first-order rate.

use poisson_coalgebra::catalog::{build, limit_of, Chart, EntryOptions};
use poisson_coalgebra::verify::limit_check;

fn main() -> poisson_coalgebra::Result<()> {
    let values = [0.2, 0.1, 0.05, 0.025];
    for (id, chart) in [("sl2.curved_kc", Chart::Poincare), ("sl2.curved_sw", Chart::Beltrami), ("sl2z.free", Chart::Poincare)] {
        let o = EntryOptions::new(3).chart(chart);
        let Some(lim) = limit_of(id, &o)? else { continue };
        let nominal = build(id, &o)?;
        let r = limit_check(&lim.family(id, &o), &lim.target, &values, &nominal.sample_box, 100, 5)?;
        println!("{id} ({} -> 0) onto {}:", lim.parameter, lim.target.id);
        for (v, d) in r.values.iter().zip(&r.max_deviation) {
            println!("  {v:<6} max deviation {d:.3e}");
        }
        println!("  order {:.3}, passed {}", r.order.unwrap_or(f64::NAN), r.passed);
    }
    Ok(())
}
