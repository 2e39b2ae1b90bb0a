//! Admissible initial data: the Taylor–Green family, random band-limited
//! symmetric data, constraint enforcement, and validation.
//!
//! Every generator returns zero-mean, odevity-symmetric `(η⁰, u⁰)` with
//! `det(I + ∇η⁰) = 1` and `div_A⁰ u⁰ = 0` imposed by fixed-point
//! iterations on gradient corrections.

use std::f64::consts::PI;
use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{damped_energy_norm, energy_functional};
use crate::error::{Error, Result};
use crate::kinematics::{enforce_unit_jacobian, odevity_project, odevity_residual, FlowMapState, Geometry, Physics};
use crate::spectral::{Grid, SpectralField, VectorField};

/// Which initial data to build.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum InitialDataSpec {
    /// `η⁰ ≈ ε(sin y₁ cos y₂, −cos y₁ sin y₂)`, `u⁰ ≈ (sin y₁ cos y₂, −cos y₁ sin y₂)`.
    TaylorGreen { epsilon: f64 },
    /// Random band-limited symmetric data with `max|η̄| = max|ū| = 1`
    /// before scaling `η̄` by `ε`.
    RandomSymmetric { epsilon: f64, seed: u64, band: i64 },
    /// A checkpoint written by `gen-ic` or a run.
    FromFile { path: PathBuf },
}

/// Initial displacement and velocity.
#[derive(Clone, Debug)]
pub struct InitialData {
    pub eta0: VectorField,
    pub u0: VectorField,
}

impl InitialData {
    pub fn into_state(self, physics: Physics) -> FlowMapState {
        FlowMapState {
            eta: self.eta0,
            u: self.u0,
            t: 0.0,
            physics,
        }
    }
}

/// Residual target of the constraint iterations, relative to `1 + ‖·‖₁`.
const CONSTRAINT_TOL: f64 = 1e-14;

/// `(sin y₁ cos y₂, −cos y₁ sin y₂)`.
pub fn taylor_green_field(grid: &Grid) -> VectorField {
    VectorField::from_fn(
        grid,
        |y1, y2| y1.sin() * y2.cos(),
        |y1, y2| -y1.cos() * y2.sin(),
    )
}

/// Correct `u` by a flat gradient `∇ψ` so that `div_A u = 0`, iterating
/// `ψ ← ψ − Δ^{-1} div_A(u + ∇ψ)`.
pub fn enforce_div_a_free(u: &VectorField, geometry: &Geometry) -> Result<VectorField> {
    const MAX_ITER: usize = 200;
    let tol = CONSTRAINT_TOL * (1.0 + u.sobolev_norm(1));
    let mut psi = SpectralField::zeros(u.grid());
    let mut current = u.clone();
    let mut prev = f64::INFINITY;
    let mut ratio = 0.0;
    let mut growth = 0;
    for _ in 0..MAX_ITER {
        let mut r = geometry.div_a(&current);
        r.set_mean(0.0);
        let res = r.l2_norm();
        if prev.is_finite() && prev > 0.0 {
            ratio = res / prev;
        }
        if res <= tol || (res <= 100.0 * tol && res >= prev) {
            return Ok(current);
        }
        if res >= prev {
            growth += 1;
            if growth >= 3 {
                return Err(Error::Amplitude { ratio });
            }
        } else {
            growth = 0;
        }
        prev = prev.min(res);
        psi -= &r.invert_laplacian_unchecked(0.0);
        current = u + &psi.gradient();
    }
    Err(Error::Amplitude { ratio })
}

/// Impose both constraints on `(ε η̄, ū)`.
fn constrain(eta_bar: &VectorField, u_bar: &VectorField, epsilon: f64) -> Result<InitialData> {
    let base = eta_bar.scaled(epsilon);
    let tol = CONSTRAINT_TOL * (1.0 + base.sobolev_norm(1));
    let (mut eta0, _) = enforce_unit_jacobian(&base, tol)?;
    eta0 = odevity_project(&eta0);
    eta0.zero_mean();
    let geometry = Geometry::build(&eta0).map_err(|e| match e {
        Error::GeometryDegenerate { .. } => Error::Amplitude { ratio: f64::INFINITY },
        other => other,
    })?;
    let mut u0 = enforce_div_a_free(u_bar, &geometry)?;
    u0 = odevity_project(&u0);
    u0.zero_mean();
    Ok(InitialData { eta0, u0 })
}

/// Taylor–Green family on the `2π` torus.
pub fn generate_taylor_green(epsilon: f64, grid: &Grid) -> Result<InitialData> {
    if (grid.period() - 2.0 * PI).abs() > 1e-12 {
        return Err(Error::Precondition(format!(
            "the Taylor-Green family needs period 2π, got {}",
            grid.period()
        )));
    }
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::Precondition(format!("epsilon = {epsilon} must be nonnegative")));
    }
    let tg = taylor_green_field(grid);
    constrain(&tg, &tg, epsilon)
}

/// Random odevity-symmetric data with modes `|m₁|, |m₂| ≤ band`,
/// deterministic in `seed`.
pub fn generate_random_symmetric(epsilon: f64, seed: u64, band: i64, grid: &Grid) -> Result<InitialData> {
    if band < 0 || band > grid.n() as i64 / 3 {
        return Err(Error::Precondition(format!(
            "band = {band} must lie in [0, {}]",
            grid.n() / 3
        )));
    }
    if band == 0 {
        return Ok(InitialData {
            eta0: VectorField::zeros(grid),
            u0: VectorField::zeros(grid),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || {
        let v = VectorField::new(
            SpectralField::random_band_limited(grid, band, &mut rng),
            SpectralField::random_band_limited(grid, band, &mut rng),
        );
        let mut v = odevity_project(&v.leray_project());
        v.zero_mean();
        let peak = v.max_magnitude();
        if peak > 0.0 {
            v.scaled(1.0 / peak)
        } else {
            v
        }
    };
    let eta_bar = draw();
    let u_bar = draw();
    constrain(&eta_bar, &u_bar, epsilon)
}

/// Build initial data from a spec.
pub fn generate(spec: &InitialDataSpec, grid: &Grid) -> Result<InitialData> {
    match spec {
        InitialDataSpec::TaylorGreen { epsilon } => generate_taylor_green(*epsilon, grid),
        InitialDataSpec::RandomSymmetric { epsilon, seed, band } => {
            generate_random_symmetric(*epsilon, *seed, *band, grid)
        }
        InitialDataSpec::FromFile { path } => {
            let state = crate::checkpoint::load(path)?;
            state.grid().same_as(grid)?;
            Ok(InitialData {
                eta0: state.eta,
                u0: state.u,
            })
        }
    }
}

/// Verifiable hypotheses and size measures of initial data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// `max |det(I + ∇η⁰) − 1|`.
    #[serde(deserialize_with = "null_as_inf")]
    pub det_residual: f64,
    /// `‖div_A⁰ u⁰‖₀`.
    #[serde(deserialize_with = "null_as_inf")]
    pub div_a_residual: f64,
    /// `max(‖η⁰ − Sη⁰‖₀, ‖u⁰ − Su⁰‖₀)`.
    pub odevity_residual: f64,
    /// Largest absolute component mean of `η⁰` and `u⁰`.
    pub mean_residual: f64,
    /// `𝔈_{2,0}` at `t = 0`.
    pub e20: f64,
    /// `𝔈_{2,1}` at `t = 0`.
    pub e21: f64,
    /// `‖(η⁰, u⁰, m∂₂η⁰)‖₃`.
    pub norm3: f64,
    /// `‖(η⁰, u⁰, m∂₂η⁰)‖₄`.
    pub norm4: f64,
    /// `(‖(η⁰,u⁰)‖₄² + ‖mη⁰‖²_{5,2})^{1/2}`.
    pub damped_norm: f64,
    /// Field-strength margin `m / max{(𝔈₂₀e^{𝔈₂₁})^{1/4}, 𝔈₂₀e^{𝔈₂₁}}`
    /// with unit constants; `+∞` for zero data (serialized as null).
    #[serde(deserialize_with = "null_as_inf")]
    pub mu: f64,
}

/// JSON writes non-finite floats as `null`; read them back as `+∞`.
fn null_as_inf<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

/// Report on initial data; never fails.
pub fn validate(eta0: &VectorField, u0: &VectorField, m: f64) -> ValidationReport {
    let (det_residual, div_a_residual) = match Geometry::build(eta0) {
        Ok(g) => (g.jacobian_drift(), g.div_a(u0).l2_norm()),
        Err(_) => (f64::INFINITY, f64::INFINITY),
    };
    let state = FlowMapState {
        eta: eta0.clone(),
        u: u0.clone(),
        t: 0.0,
        physics: Physics::viscous(0.0, m),
    };
    let e20 = energy_functional(&state, 2, 0);
    let e21 = energy_functional(&state, 2, 1);
    let mb = eta0.d2().scaled(m);
    let triple = |s: u32| (eta0.sobolev_norm_sq(s) + u0.sobolev_norm_sq(s) + mb.sobolev_norm_sq(s)).sqrt();
    let size = e20 * e21.exp();
    let mu = if size > 0.0 {
        m / size.powf(0.25).max(size)
    } else {
        f64::INFINITY
    };
    let means = eta0.mean().into_iter().chain(u0.mean());
    ValidationReport {
        det_residual,
        div_a_residual,
        odevity_residual: odevity_residual(eta0).max(odevity_residual(u0)),
        mean_residual: means.fold(0.0_f64, |a, v| a.max(v.abs())),
        e20,
        e21,
        norm3: triple(3),
        norm4: triple(4),
        damped_norm: damped_energy_norm(eta0, u0, m).sqrt(),
        mu,
    }
}
