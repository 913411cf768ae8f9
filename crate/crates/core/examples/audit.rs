//! Audit a system: involution of the integrals, numeric rank and the
//! resulting superintegrability class.

use poisson_coalgebra::catalog::{build, EntryOptions};
use poisson_coalgebra::expr::parse;
use poisson_coalgebra::verify::classify;

fn main() -> poisson_coalgebra::Result<()> {
    for n in 2..=5 {
        let opts = EntryOptions::new(n).function("F", parse("omega^2*s/2 + 0.1*s^2", &["s"])?);
        let e = build("sl2.evans", &opts)?;
        let r = classify(&e, &e.sample_box, 100, 7, 1e-9)?;
        println!(
            "Evans N={n}: rank {} -> {} ({} independent integrals, {} in involution)",
            r.rank.rank, r.classification, r.integrals_independent, r.integrals_in_involution
        );
    }

    let e = build("h6.geodesic", &EntryOptions::new(4))?;
    let r = classify(&e, &e.sample_box, 100, 7, 1e-9)?;
    println!("two-photon geodesic flow N=4: {}", r.classification);
    for note in r.notes {
        println!("  note: {note}");
    }
    Ok(())
}
