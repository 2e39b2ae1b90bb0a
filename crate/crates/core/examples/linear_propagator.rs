//! Exact linear evolution: the per-mode propagator in the under-, critically
//! and over-damped regimes, and gradient correctors for linearized data.

use flowmap_mhd::initial::generate_taylor_green;
use flowmap_mhd::kinematics::{Geometry, Physics};
use flowmap_mhd::linear::{compute_correctors, evolve_linear_field, propagator};
use flowmap_mhd::spectral::Grid;

fn main() -> flowmap_mhd::Result<()> {
    let omega = 2.0;
    for (label, d) in [("under", 1.0), ("critical", 2.0 * omega), ("over", 10.0)] {
        let p = propagator(d, omega, 1.0);
        println!("{label:<8} d = {d:<4} P(1) = [[{:+.6}, {:+.6}], [{:+.6}, {:+.6}]]", p[0][0], p[0][1], p[1][0], p[1][1]);
    }

    let grid = Grid::periodic_2pi(64)?;
    let data = generate_taylor_green(0.05, &grid)?;
    let g0 = Geometry::build(&data.eta0)?;
    let c = compute_correctors(&data.eta0, &data.u0, &g0)?;
    let eta0 = &data.eta0 + &c.eta_r;
    let u0 = &data.u0 + &c.u_r;
    println!("‖div(η⁰ + ηʳ)‖₀ = {:.2e}", eta0.divergence().l2_norm());
    println!("‖div(u⁰ + uʳ)‖₀ = {:.2e}", u0.divergence().l2_norm());

    let physics = Physics::viscous(0.05, 20.0);
    for t in [0.0, 1.0, 5.0] {
        let (eta, u) = evolve_linear_field(&eta0, &u0, &physics, t)?;
        println!("t = {t:<3}  ‖u‖₀ = {:.6}  ‖m∂₂η‖₀ = {:.6}", u.l2_norm(), eta.d2().scaled(physics.m).l2_norm());
    }
    Ok(())
}
