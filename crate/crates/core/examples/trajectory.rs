//! Integrate the curved oscillator with the implicit midpoint rule, watch
//! every integral and write the trajectory as CSV to stdout.

use poisson_coalgebra::catalog::{build, EntryOptions};
use poisson_coalgebra::dynamics::{default_monitors, integrate, reversibility_error, step_halving_ratio, StepOptions};
use poisson_coalgebra::expr::PhasePoint;

fn main() -> poisson_coalgebra::Result<()> {
    let e = build("sl2.curved_sw", &EntryOptions::new(3))?;
    let x0 = PhasePoint::new(vec![0.5, 0.45, 0.4], vec![0.3, -0.2, 0.25])?;
    let traj = integrate(&e, &x0, 1e-2, 500, &default_monitors(&e), StepOptions::default())?;
    for m in &traj.monitors {
        eprintln!("drift {:<6} {:.2e}", m.name, m.drift);
    }
    eprintln!("step-halving ratio {:.3}", step_halving_ratio(&e, &x0, 1e-2, 500)?);
    eprintln!("reversibility {:.2e}", reversibility_error(&e, &x0, 1e-2, 500)?);
    traj.write_csv(std::io::stdout().lock())
}
