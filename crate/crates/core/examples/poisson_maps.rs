//! Realized coproducts close under the canonical bracket exactly as the
//! abstract bracket table says.

use poisson_coalgebra::algebras::{h6, sl2, sl2z};
use poisson_coalgebra::coalgebra::{check_poisson_map, SiteConfig};
use poisson_coalgebra::expr::SampleBox;

fn main() -> poisson_coalgebra::Result<()> {
    let n = 4;
    let b = vec![0.1, 0.2, 0.3, 0.4];
    let cases = [
        (sl2(), SiteConfig::new(n).with_site("b", b.clone())),
        (sl2z(), SiteConfig::new(n).with_site("b", b).with_scalar("z", 0.2)),
        (h6(), SiteConfig::new(n).with_site("lambda", vec![1.0, 0.8, 1.3, 0.6])),
    ];
    for (spec, cfg) in cases {
        let r = check_poisson_map(&spec, &cfg, &SampleBox::standard(n), 100, 1, 1e-9)?;
        println!("{:<6} {} pairs, max residual {:.2e}, passed {}", r.spec, r.pairs.len(), r.max_residual, r.passed);
    }
    Ok(())
}
