//! Lagrangian pressure: the variable-coefficient Poisson problem solved by
//! fixed-point iteration around the flat Laplacian.

use flowmap_mhd::initial::generate_taylor_green;
use flowmap_mhd::kinematics::Geometry;
use flowmap_mhd::pressure::{pressure_residual, solve_lagrangian_pressure, EllipticOptions};
use flowmap_mhd::spectral::Grid;

fn main() -> flowmap_mhd::Result<()> {
    let grid = Grid::periodic_2pi(64)?;
    let m = 20.0;
    for eps in [0.01, 0.05, 0.1] {
        let data = generate_taylor_green(eps, &grid)?;
        let g = Geometry::build(&data.eta0)?;
        let (q, report) =
            solve_lagrangian_pressure(&g, &data.eta0, &data.u0, m, &EllipticOptions::default(), None)?;
        println!(
            "ε = {eps:<5} iterations {:>2}  contraction {:.3}  residual {:.2e}  ‖q‖₀ {:.4}",
            report.iterations,
            report.contraction,
            pressure_residual(&g, &data.eta0, &data.u0, m, &q),
            q.l2_norm()
        );
    }
    Ok(())
}
