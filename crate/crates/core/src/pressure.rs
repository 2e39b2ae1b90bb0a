//! Variable-coefficient elliptic solves in label coordinates: the
//! Lagrangian pressure and the `div_A`-free projection.
//!
//! Both problems have the form `Δ_A φ = g` and are solved by the Picard
//! iteration `φ ← Δ^{-1}(g − (Δ_A − Δ)φ)`, which contracts at a rate of
//! order `max|Ã|` in the small-deformation regime.

use crate::error::{Error, Result};
use crate::kinematics::Geometry;
use crate::spectral::{SpectralField, VectorField};

/// Outcome of an elliptic fixed-point solve.
#[derive(Clone, Debug, PartialEq)]
pub struct EllipticSolveReport {
    /// Number of `Δ^{-1}` applications.
    pub iterations: usize,
    /// Final relative residual `‖Δ_A φ − g‖₀ / ‖g‖₀`.
    pub final_residual: f64,
    pub converged: bool,
    /// Last observed ratio of successive residuals.
    pub contraction: f64,
    /// Set when `max|Ã| > 0.5`, where contraction is no longer expected.
    pub weak_contraction_warning: bool,
}

impl EllipticSolveReport {
    fn trivial() -> Self {
        Self {
            iterations: 0,
            final_residual: 0.0,
            converged: true,
            contraction: 0.0,
            weak_contraction_warning: false,
        }
    }
}

/// Tolerance, iteration cap and divergence detection window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EllipticOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Consecutive residual increases treated as divergence.
    pub growth_window: usize,
    /// Also stop once the absolute residual `‖Δ_A φ − g‖₀` is below this.
    pub abs_tol: f64,
}

impl Default for EllipticOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
            growth_window: 5,
            abs_tol: 0.0,
        }
    }
}

impl EllipticOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

/// Solve `Δ_A φ = g` (zero-mean `φ`) by preconditioned Picard iteration,
/// starting from `guess` when given.
pub fn solve_lap_a(
    geometry: &Geometry,
    g: &SpectralField,
    guess: Option<&SpectralField>,
    opts: &EllipticOptions,
) -> Result<(SpectralField, EllipticSolveReport)> {
    let mut g = g.clone();
    g.set_mean(0.0);
    let gnorm = g.l2_norm();
    if gnorm == 0.0 {
        return Ok((SpectralField::zeros(geometry.grid()), EllipticSolveReport::trivial()));
    }
    let warn = geometry.a_tilde_max() > 0.5;
    if geometry.is_flat() {
        let phi = g.invert_laplacian_unchecked(0.0);
        let report = EllipticSolveReport {
            iterations: 1,
            final_residual: 0.0,
            converged: true,
            contraction: 0.0,
            weak_contraction_warning: warn,
        };
        return Ok((phi, report));
    }
    let mut phi = match guess {
        Some(q) => {
            let mut q = q.clone();
            q.set_mean(0.0);
            q
        }
        None => g.invert_laplacian_unchecked(0.0),
    };
    let mut iterations = usize::from(guess.is_none());
    let mut prev = f64::INFINITY;
    let mut growth = 0;
    let mut contraction = 0.0;
    loop {
        let mut rhs = &g - &geometry.lap_a_minus_lap(&phi);
        rhs.set_mean(0.0);
        let residual = (&phi.laplacian() - &rhs).l2_norm() / gnorm;
        let done = residual <= opts.tol || residual * gnorm <= opts.abs_tol;
        if prev.is_finite() && prev > 0.0 {
            contraction = residual / prev;
        }
        let report = EllipticSolveReport {
            iterations,
            final_residual: residual,
            converged: done,
            contraction,
            weak_contraction_warning: warn,
        };
        if done {
            return Ok((phi, report));
        }
        if residual > prev {
            growth += 1;
            if growth >= opts.growth_window {
                return Err(Error::EllipticDivergence(report));
            }
        } else {
            growth = 0;
        }
        if iterations >= opts.max_iter || !residual.is_finite() {
            return Err(Error::EllipticNonConvergence(report));
        }
        prev = residual;
        phi = rhs.invert_laplacian_unchecked(0.0);
        iterations += 1;
    }
}

/// Source of the pressure equation with the `q`-dependent part removed:
/// `2 det ∇u + m² div_A ∂₂²η`.
pub fn pressure_source(geometry: &Geometry, eta: &VectorField, u: &VectorField, m: f64) -> SpectralField {
    let grid = geometry.grid();
    let d = [u[0].d1(), u[0].d2(), u[1].d1(), u[1].d2()];
    let p = crate::spectral::transform::inverse_many(
        grid,
        &[d[0].coeffs(), d[1].coeffs(), d[2].coeffs(), d[3].coeffs()],
    );
    let det: Vec<f64> = (0..grid.len())
        .map(|i| 2.0 * (p[0][i] * p[3][i] - p[2][i] * p[1][i]))
        .collect();
    let mut f = SpectralField::from_physical(grid, &det)
        .expect("grid-sized array")
        .dealiased();
    if m != 0.0 {
        let tension = eta.derivative(crate::spectral::Axis::Y2, 2);
        f += &geometry.div_a(&tension).scaled(m * m);
    }
    f
}

/// Lagrangian pressure `q` with `Δ_A q = 2 det ∇u + m² div_A ∂₂²η`,
/// equivalently `Δq = f(q)` with
/// `f(q) = 2 det ∇u − (div_Ã ∇_A q + div ∇_Ã q) + m² div_A ∂₂²η`.
pub fn solve_lagrangian_pressure(
    geometry: &Geometry,
    eta: &VectorField,
    u: &VectorField,
    m: f64,
    opts: &EllipticOptions,
    guess: Option<&SpectralField>,
) -> Result<(SpectralField, EllipticSolveReport)> {
    let eta_zero = eta[0].is_zero() && eta[1].is_zero();
    let u_zero = u[0].is_zero() && u[1].is_zero();
    if u_zero && (eta_zero || m == 0.0) {
        return Ok((SpectralField::zeros(geometry.grid()), EllipticSolveReport::trivial()));
    }
    let source = pressure_source(geometry, eta, u, m);
    solve_lap_a(geometry, &source, guess, opts)
}

/// Residual `‖Δq − f(q)‖₀ / ‖f(q)‖₀` of a pressure candidate, assembled
/// from scratch.
pub fn pressure_residual(geometry: &Geometry, eta: &VectorField, u: &VectorField, m: f64, q: &SpectralField) -> f64 {
    let mut f = &pressure_source(geometry, eta, u, m) - &geometry.lap_a_minus_lap(q);
    f.set_mean(0.0);
    let norm = f.l2_norm();
    let r = (&q.laplacian() - &f).l2_norm();
    if norm == 0.0 {
        r
    } else {
        r / norm
    }
}

/// Project `u*` onto `div_A`-free fields: solve `Δ_A φ = div_A u*` and
/// return `u* − ∇_A φ` together with `φ`.
pub fn project_div_a_free(
    geometry: &Geometry,
    u_star: &VectorField,
    opts: &EllipticOptions,
) -> Result<(VectorField, SpectralField, EllipticSolveReport)> {
    let div = geometry.div_a(u_star);
    let (phi, report) = solve_lap_a(geometry, &div, None, opts)?;
    if phi.is_zero() {
        return Ok((u_star.clone(), phi, report));
    }
    let u = u_star - &geometry.grad_a(&phi);
    Ok((u, phi, report))
}
