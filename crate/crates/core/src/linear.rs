//! Closed-form solutions of the linear pressureless problems and the
//! gradient correctors that make linearized initial data divergence-free.
//!
//! Per Fourier mode each component obeys
//!
//! ```text
//! η̂' = û,   û' = −d û − ω² η̂,   ω = m k₂,
//! ```
//!
//! with `d = ν|k|²` (viscous) or `d = κ` (damped). The propagator is built
//! from the fundamental solution `S` of `S'' + dS' + ω²S = 0`, `S(0) = 0`,
//! `S'(0) = 1`:
//!
//! ```text
//! [η̂(t)]   [S' + dS   S ] [η̂(0)]
//! [û(t)] = [ −ω²S     S'] [û(0)]
//! ```

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kinematics::{Geometry, Physics};
use crate::spectral::{SpectralField, VectorField};

/// 2×2 real propagator acting on `(η̂, û)`.
pub type Propagator = [[f64; 2]; 2];

/// Exact propagator over time `t` for damping `d ≥ 0` and frequency `ω`.
///
/// With `s = ω² − d²/4` the power series of `sin(√s t)/√s` and
/// `cos(√s t)` is used whenever `|s| t² ≤ 1`, so the map is smooth across
/// the critical manifold `d = 2|ω|`.
pub fn propagator(d: f64, omega: f64, t: f64) -> Propagator {
    let w2 = omega * omega;
    let s = w2 - 0.25 * d * d;
    if (s * t * t).abs() <= 1.0 {
        // c0 = e^{-dt/2} cos(√s t), g0 = e^{-dt/2} sin(√s t)/√s as entire series in s t²
        let z = -s * t * t;
        let (mut c, mut g) = (0.0, 0.0);
        let (mut tc, mut tg) = (1.0, 1.0);
        for k in 0..24 {
            c += tc;
            g += tg;
            let kf = k as f64;
            tc *= z / ((2.0 * kf + 1.0) * (2.0 * kf + 2.0));
            tg *= z / ((2.0 * kf + 2.0) * (2.0 * kf + 3.0));
        }
        let decay = (-0.5 * d * t).exp();
        from_cos_sin(d, w2, decay * c, decay * g * t)
    } else if s > 0.0 {
        let w = s.sqrt();
        let decay = (-0.5 * d * t).exp();
        from_cos_sin(d, w2, decay * (w * t).cos(), decay * (w * t).sin() / w)
    } else {
        // real roots λ₁ = −d/2 + r (slow, written without cancellation), λ₂ = −d/2 − r
        let r = (-s).sqrt();
        let l1 = -w2 / (0.5 * d + r);
        let l2 = -0.5 * d - r;
        let e1 = (l1 * t).exp();
        let e2 = (l2 * t).exp();
        let inv = 1.0 / (2.0 * r);
        let sv = -e1 * (-2.0 * r * t).exp_m1() * inv;
        let sp = (l1 * e1 - l2 * e2) * inv;
        let cv = (-l2 * e1 + l1 * e2) * inv;
        [[cv, sv], [-w2 * sv, sp]]
    }
}

/// Propagator from `c0 = e^{-dt/2}cos(√s t)` and `g0 = e^{-dt/2}sin(√s t)/√s`.
fn from_cos_sin(d: f64, w2: f64, c0: f64, g0: f64) -> Propagator {
    [[c0 + 0.5 * d * g0, g0], [-w2 * g0, c0 - 0.5 * d * g0]]
}

/// Apply a propagator to one `(η̂, û)` coefficient pair.
#[inline]
pub fn apply(p: &Propagator, eta: Complex64, u: Complex64) -> (Complex64, Complex64) {
    (eta * p[0][0] + u * p[0][1], eta * p[1][0] + u * p[1][1])
}

/// Damping coefficient of wavevector `k`: `ν|k|² + κ`.
pub fn damping(physics: &Physics, k: [f64; 2]) -> f64 {
    physics.nu * (k[0] * k[0] + k[1] * k[1]) + physics.kappa
}

/// A single Fourier mode of the linear problem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearModeState {
    pub k: [f64; 2],
    pub eta_hat: [Complex64; 2],
    pub u_hat: [Complex64; 2],
    pub physics: Physics,
}

/// Evolve one mode exactly over time `t ≥ 0`.
pub fn evolve_mode_exact(mode: &LinearModeState, t: f64) -> LinearModeState {
    let p = propagator(damping(&mode.physics, mode.k), mode.physics.m * mode.k[1], t);
    let mut out = *mode;
    for c in 0..2 {
        let (e, u) = apply(&p, mode.eta_hat[c], mode.u_hat[c]);
        out.eta_hat[c] = e;
        out.u_hat[c] = u;
    }
    out
}

/// Divergence tolerance for [`evolve_linear_field`] inputs, relative to
/// the `H¹` norm of the field.
pub const DIVERGENCE_TOL: f64 = 1e-10;

fn check_solenoidal(name: &str, f: &VectorField) -> Result<()> {
    let div = f.divergence().l2_norm();
    let scale = f.sobolev_norm(1);
    if div > DIVERGENCE_TOL * scale.max(f64::MIN_POSITIVE) && div > 0.0 {
        return Err(Error::Precondition(format!(
            "{name} is not divergence-free (‖div‖₀ = {div:e}); add the gradient correctors from compute_correctors first"
        )));
    }
    Ok(())
}

/// Exact linear evolution of whole fields over time `t`.
pub fn evolve_linear_field(
    eta0: &VectorField,
    u0: &VectorField,
    physics: &Physics,
    t: f64,
) -> Result<(VectorField, VectorField)> {
    eta0.grid().same_as(u0.grid())?;
    check_solenoidal("eta0", eta0)?;
    check_solenoidal("u0", u0)?;
    Ok(evolve_linear_unchecked(eta0, u0, physics, t))
}

/// [`evolve_linear_field`] without the divergence precondition.
pub fn evolve_linear_unchecked(
    eta0: &VectorField,
    u0: &VectorField,
    physics: &Physics,
    t: f64,
) -> (VectorField, VectorField) {
    let grid = eta0.grid();
    let n = grid.n();
    let mut e = [eta0[0].coeffs().to_vec(), eta0[1].coeffs().to_vec()];
    let mut u = [u0[0].coeffs().to_vec(), u0[1].coeffs().to_vec()];
    for i1 in 0..n {
        let k1 = grid.wavenumber(i1);
        for i2 in 0..n {
            let k2 = grid.wavenumber(i2);
            let p = propagator(damping(physics, [k1, k2]), physics.m * k2, t);
            let idx = i1 * n + i2;
            for c in 0..2 {
                let (a, b) = apply(&p, e[c][idx], u[c][idx]);
                e[c][idx] = a;
                u[c][idx] = b;
            }
        }
    }
    let [e1, e2] = e;
    let [u1, u2] = u;
    (
        VectorField::new(
            SpectralField::from_coeffs_unchecked(grid, e1),
            SpectralField::from_coeffs_unchecked(grid, e2),
        ),
        VectorField::new(
            SpectralField::from_coeffs_unchecked(grid, u1),
            SpectralField::from_coeffs_unchecked(grid, u2),
        ),
    )
}

/// Gradient correctors and their gauge pressures.
#[derive(Clone, Debug)]
pub struct Correctors {
    /// `η^r = ∇Δ^{-1}(−div η⁰)`.
    pub eta_r: VectorField,
    /// `u^r = ∇Δ^{-1}(div_Ã⁰ u⁰)`.
    pub u_r: VectorField,
    /// `Q₁ = div η^r`, the pressure of the Stokes problem for `η^r`.
    pub q1: SpectralField,
    /// `Q₂ = div u^r`.
    pub q2: SpectralField,
}

/// Tolerance on the mean of `div_Ã⁰ u⁰`, relative to `1 + ‖u⁰‖₁`.
pub const CORRECTOR_MEAN_TOL: f64 = 1e-12;

/// Zero-mean gradient fields with `div(η⁰ + η^r) = 0` and
/// `div u^r = div_Ã⁰ u⁰`; on the torus these solve the corrector Stokes
/// problems exactly.
pub fn compute_correctors(eta0: &VectorField, u0: &VectorField, geometry0: &Geometry) -> Result<Correctors> {
    eta0.grid().same_as(u0.grid())?;
    let div_eta = eta0.divergence();
    let psi1 = (-&div_eta).invert_laplacian_unchecked(0.0);
    let eta_r = psi1.gradient();
    let source = geometry0.div_a_tilde(u0);
    let mean = source.mean();
    if mean.abs() > CORRECTOR_MEAN_TOL * (1.0 + u0.sobolev_norm(1)) {
        return Err(Error::Precondition(format!(
            "div_Ã u⁰ has mean {mean:e} but needs zero; det ∇ζ⁰ = 1 is not resolved on this grid (max drift {:e}), refine n or narrow the data band",
            geometry0.jacobian_drift()
        )));
    }
    let psi2 = source.invert_laplacian_unchecked(0.0);
    let u_r = psi2.gradient();
    let q1 = eta_r.divergence();
    let q2 = u_r.divergence();
    Ok(Correctors { eta_r, u_r, q1, q2 })
}
