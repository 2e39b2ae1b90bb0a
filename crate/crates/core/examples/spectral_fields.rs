//! Spectral fields: derivatives, the Leray projection, Sobolev norms and
//! dealiased products on the 2π torus.

use flowmap_mhd::spectral::{Grid, SpectralField, VectorField};

fn main() -> flowmap_mhd::Result<()> {
    let grid = Grid::periodic_2pi(32)?;
    let f = SpectralField::from_fn(&grid, |y1, y2| (2.0 * y1).sin() * y2.cos());

    // ∂₁f = 2 cos 2y₁ cos y₂ exactly
    let exact = SpectralField::from_fn(&grid, |y1, y2| 2.0 * (2.0 * y1).cos() * y2.cos());
    println!("‖∂₁f − exact‖₀      = {:.2e}", (&f.d1() - &exact).l2_norm());
    println!("‖f‖₀, ‖f‖₂          = {:.6}, {:.6}", f.l2_norm(), f.sobolev_norm(2));

    // a gradient plus a perpendicular gradient: Leray keeps only the latter
    let g = SpectralField::from_fn(&grid, |y1, y2| y1.cos() + (y1 + 2.0 * y2).sin());
    let mixed = &g.gradient() + &f.perp_gradient();
    let p = mixed.leray_project();
    println!("‖div Pv‖₀            = {:.2e}", p.divergence().l2_norm());
    println!("‖Pv − ∇⊥f‖₀          = {:.2e}", (&p - &f.perp_gradient()).l2_norm());

    // 2/3-rule product of two band-limited fields
    let prod = f.dealias_product(&f)?;
    println!("mean of f²           = {:.6} (exact 0.25)", prod.mean());

    let v = VectorField::from_fn(&grid, |y1, _| y1.sin(), |_, y2| y2.sin());
    println!("curl of a gradient   = {:.2e}", v.curl().l2_norm());
    Ok(())
}
