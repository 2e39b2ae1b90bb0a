//! Initial data: Taylor–Green and random odevity-symmetric families
//! constrained to `det ∇ζ⁰ = 1`, `div_A u⁰ = 0`, and their validation.

use flowmap_mhd::initial::{generate_random_symmetric, generate_taylor_green, validate};
use flowmap_mhd::spectral::Grid;

fn main() -> flowmap_mhd::Result<()> {
    let grid = Grid::periodic_2pi(64)?;
    let m = 20.0;
    let tg = generate_taylor_green(0.05, &grid)?;
    let random = generate_random_symmetric(0.02, 7, 4, &grid)?;
    for (name, d) in [("taylor-green", tg), ("random", random)] {
        let r = validate(&d.eta0, &d.u0, m);
        println!("{name}");
        println!("  det residual   {:.2e}", r.det_residual);
        println!("  div_A residual {:.2e}", r.div_a_residual);
        println!("  odevity        {:.2e}", r.odevity_residual);
        println!("  E20, E21       {:.4e}, {:.4e}", r.e20, r.e21);
        println!("  mu             {:.3e}", r.mu);
    }
    Ok(())
}
