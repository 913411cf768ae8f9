//! Two-site oscillator deformed through a comodule coaction.

use poisson_coalgebra::expr::poisson_bracket;
use poisson_coalgebra::extensions::{check_coaction_homomorphism, check_coassociativity, comodule_oscillator};

fn main() -> poisson_coalgebra::Result<()> {
    for sigma in [0.0, 0.1, 0.2] {
        let s = comodule_oscillator(sigma, 1.0, 0.8)?;
        let params = s.params();
        let worst = s
            .sample_box
            .sample(50, 2)
            .iter()
            .map(|x| poisson_bracket(&s.hamiltonian, &s.casimir, x, &params).map(f64::abs))
            .collect::<poisson_coalgebra::Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let hom = check_coaction_homomorphism(sigma, s.lambda, &s.sample_box, 50, 2, 1e-9)?;
        let assoc = check_coassociativity(sigma, [1.0, 0.8, 1.1], 50, 2, 1e-9)?;
        println!(
            "sigma {sigma}: max |{{H, C}}| {worst:.1e}, homomorphism {:.1e}, coassociativity {:.1e}",
            hom.max_residual, assoc.max_residual
        );
    }
    let s = comodule_oscillator(0.1, 1.0, 0.8)?;
    println!("H = {}\nC = {}", s.hamiltonian, s.casimir);
    Ok(())
}
