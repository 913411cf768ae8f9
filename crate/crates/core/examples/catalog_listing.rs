//! Every catalog id with its claimed class, and what one entry contains.

use poisson_coalgebra::catalog::{build, catalog_ids, EntryOptions};

fn main() -> poisson_coalgebra::Result<()> {
    for info in catalog_ids() {
        println!("{:<26} {:<18} {}", info.id, info.claimed.label(), info.anchor);
    }

    let e = build("sl2.evans", &EntryOptions::new(3))?;
    println!("\n{} with N = {}", e.id, e.n);
    println!("H = {}", e.hamiltonian);
    for (name, expr) in e.integrals() {
        println!("{name} = {expr}");
    }
    Ok(())
}
