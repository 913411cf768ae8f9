//! Loop coproducts: spectral-parameter families of Casimir images that
//! commute for every pair of parameters.

use poisson_coalgebra::algebras::sl2;
use poisson_coalgebra::coalgebra::SiteConfig;
use poisson_coalgebra::expr::SampleBox;
use poisson_coalgebra::extensions::{loop_involution_check, loop_relation_fit};

fn main() -> poisson_coalgebra::Result<()> {
    let cfg = SiteConfig::new(3).with_site("b", vec![0.1, 0.2, 0.3]);
    let bx = SampleBox::standard(3);
    let grid = [-1.5, -0.5, 0.5, 2.0, 3.0];
    let r = loop_involution_check(&sl2(), "C", &cfg, 1.0, &grid, &grid, &bx, 50, 1, 1e-9)?;
    println!("{} (lambda, mu) pairs: casimir residual {:.1e}, passed {}", r.grid.len(), r.casimir_max, r.passed);

    for (i, k) in [(2, 3), (3, 3)] {
        let fit = loop_relation_fit(&sl2(), &cfg, i, k, 2.0, 3.0, 1.0, &bx, 40, 1)?;
        println!("i={i} k={k}: f = {:.6}, g = {:?}, misfit {:.1e}", fit.f, fit.g, fit.residual);
    }
    Ok(())
}
