//! Nonlinear Lagrangian evolution in the viscous and the damped regime,
//! with the energy budget and constraint residuals after each stretch.

use flowmap_mhd::evolve::{LagrangianStepper, StepControl};
use flowmap_mhd::initial::generate_taylor_green;
use flowmap_mhd::kinematics::Physics;
use flowmap_mhd::spectral::Grid;

fn main() -> flowmap_mhd::Result<()> {
    let grid = Grid::periodic_2pi(32)?;
    for physics in [Physics::viscous(0.05, 20.0), Physics::damped(1.0, 20.0)] {
        println!("ν = {}, κ = {}, m = {}", physics.nu, physics.kappa, physics.m);
        let mut state = generate_taylor_green(0.05, &grid)?.into_state(physics);
        let mut stepper = LagrangianStepper::new(&grid, physics, StepControl::new(5e-3))?;
        println!("  t = 0.00  energy {:.6}", state.mechanical_energy());
        for _ in 0..4 {
            let mut report = None;
            for _ in 0..100 {
                report = Some(stepper.step(&mut state)?);
            }
            let r = report.expect("at least one step");
            println!(
                "  t = {:.2}  energy {:.6}  div_A {:.1e}  det drift {:.1e}",
                state.t,
                state.mechanical_energy(),
                r.div_a_residual,
                r.det_drift
            );
        }
    }
    Ok(())
}
