//! Flow-map geometry: `A = (∇ζ)^{-T}`, label-frame operators, odevity and
//! inversion of the flow map.

use flowmap_mhd::initial::generate_taylor_green;
use flowmap_mhd::kinematics::{invert_flow_map, inversion_self_consistency, odevity_residual, Geometry};
use flowmap_mhd::spectral::Grid;

fn main() -> flowmap_mhd::Result<()> {
    let grid = Grid::periodic_2pi(64)?;
    let data = generate_taylor_green(0.05, &grid)?;
    let g = Geometry::build(&data.eta0)?;

    println!("det ∇ζ in [{:.15}, {:.15}]", g.min_jacobian(), g.max_jacobian());
    println!("max |Ã|            = {:.4}", g.a_tilde_max());
    println!("‖A ∇ζᵀ − I‖        = {:.2e}", g.inverse_residual());
    println!("‖div_A u⁰‖₀        = {:.2e}", g.div_a(&data.u0).l2_norm());
    println!("odevity of η⁰, u⁰  = {:.2e}, {:.2e}", odevity_residual(&data.eta0), odevity_residual(&data.u0));

    let inverse = invert_flow_map(&data.eta0)?;
    println!("Newton residual    = {:.2e}", inverse.worst_residual());
    println!("ζ∘ζ⁻¹ − id         = {:.2e}", inversion_self_consistency(&data.eta0, &inverse));
    Ok(())
}
