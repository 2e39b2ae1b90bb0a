//! Diagnostics: energy records along a run, the integrated energy identity
//! and a power-law fit of a decaying norm.

use flowmap_mhd::diagnostics::{energy_identity_residual, fit_decay, record_lagrangian, DecayKind, RecordOptions};
use flowmap_mhd::evolve::{LagrangianStepper, StepControl};
use flowmap_mhd::initial::generate_taylor_green;
use flowmap_mhd::kinematics::Physics;
use flowmap_mhd::spectral::Grid;

fn main() -> flowmap_mhd::Result<()> {
    let grid = Grid::periodic_2pi(32)?;
    let physics = Physics::viscous(0.05, 20.0);
    let mut state = generate_taylor_green(0.05, &grid)?.into_state(physics);
    let mut stepper = LagrangianStepper::new(&grid, physics, StepControl::new(0.01))?;
    let opts = RecordOptions {
        eulerian: false,
        damped: false,
    };
    let mut records = vec![record_lagrangian(&state, &state.geometry()?, opts)];
    for _ in 0..1000 {
        stepper.step(&mut state)?;
        records.push(record_lagrangian(&state, &state.geometry()?, opts));
    }
    println!("energy identity residual = {:.2e}", energy_identity_residual(&records)?);
    for label in ["E20", "E21"] {
        let fit = fit_decay(&records, label, DecayKind::Power, [2.0, 10.0])?;
        println!(
            "{label:<5} slope {:+.3} ± {:.3}  r² {:.4}",
            fit.exponent_or_rate, fit.stderr, fit.r_squared
        );
    }
    Ok(())
}
