//! Build a Hamiltonian from realized generators by hand and check that the
//! Casimir integrals still commute with it.

use poisson_coalgebra::algebras::sl2;
use poisson_coalgebra::coalgebra::{build_hamiltonian, realize, SiteConfig};
use poisson_coalgebra::expr::{parse, SampleBox};
use poisson_coalgebra::verify::{involution_matrix, Family, Field};

fn main() -> poisson_coalgebra::Result<()> {
    let n = 3;
    let sys = realize(&sl2(), &SiteConfig::new(n).with_site("b", vec![0.1, 0.15, 0.2]))?.with_integrals();
    // any smooth function of the generators works
    let h = build_hamiltonian(&sys, &parse("Jp/2 + sin(Jm) + 0.1*J3^2", &["Jm", "Jp", "J3"])?)?;

    let fields: Vec<Field> = sys
        .left
        .iter()
        .map(|i| Field::new(i.name(), i.expr.clone(), Family::Left))
        .chain(sys.right.iter().filter(|i| i.m < n).map(|i| Field::new(i.name(), i.expr.clone(), Family::Right)))
        .collect();
    let m = involution_matrix(&h, &fields, &sys.params(), &SampleBox::standard(n), 100, 3, 1e-9)?;
    for (i, name) in m.names.iter().enumerate().skip(1) {
        println!("{{H, {name}}} = {:.2e}", m.residuals[0][i]);
    }
    println!("involution {}", if m.passed { "holds" } else { "fails" });
    Ok(())
}
