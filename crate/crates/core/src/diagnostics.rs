//! Energy functionals, conservation residuals, decay fits, linear-error
//! metrics and field-strength sweeps.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::EulerianState;
use crate::kinematics::{odevity_residual, FlowMapState, Geometry};
use crate::spectral::{sobolev_weight, VectorField};

/// Timestamped norms and residuals of one state.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub t: f64,
    pub norms: BTreeMap<String, f64>,
    pub residuals: BTreeMap<String, f64>,
}

impl EnergyRecord {
    pub fn new(t: f64) -> Self {
        Self {
            t,
            ..Self::default()
        }
    }

    pub fn norm(&self, label: &str) -> Option<f64> {
        self.norms.get(label).copied()
    }

    pub fn residual(&self, label: &str) -> Option<f64> {
        self.residuals.get(label).copied()
    }

    /// Value under `label` from either map.
    pub fn get(&self, label: &str) -> Option<f64> {
        self.norm(label).or_else(|| self.residual(label))
    }

    pub fn set_norm(&mut self, label: &str, v: f64) {
        self.norms.insert(label.to_string(), v);
    }

    pub fn set_residual(&mut self, label: &str, v: f64) {
        self.residuals.insert(label.to_string(), v);
    }
}

/// `𝔈_{n,i} = ‖∂₂^i(∇η, u, m∂₂η)‖²_{n−i}`, evaluated per Fourier mode.
pub fn energy_functional(state: &FlowMapState, n: u32, i: u32) -> f64 {
    assert!(i <= n && n <= 4, "energy functional needs i <= n <= 4");
    let grid = state.grid();
    let size = grid.n();
    let ks = grid.wavenumbers();
    let m2 = state.physics.m * state.physics.m;
    let mut total = 0.0;
    for i1 in 0..size {
        let k1 = ks[i1];
        for i2 in 0..size {
            let k2 = ks[i2];
            let idx = i1 * size + i2;
            let eta_sq = state.eta[0].coeffs()[idx].norm_sqr() + state.eta[1].coeffs()[idx].norm_sqr();
            let u_sq = state.u[0].coeffs()[idx].norm_sqr() + state.u[1].coeffs()[idx].norm_sqr();
            let amp = (k1 * k1 + k2 * k2) * eta_sq + u_sq + m2 * k2 * k2 * eta_sq;
            total += sobolev_weight(k1, k2, n - i) * k2.powi(2 * i as i32) * amp;
        }
    }
    total * grid.area()
}

/// `‖(η, u)‖₄² + ‖mη‖²_{5,2}`.
pub fn damped_energy_norm(eta: &VectorField, u: &VectorField, m: f64) -> f64 {
    eta.sobolev_norm_sq(4) + u.sobolev_norm_sq(4) + m * m * eta.aniso_norm_sq(4)
}

/// Sum of `‖∂^α f‖₀²` over `|α| ≤ s` computed from label-frame fields whose
/// Eulerian derivatives are `∂_{x_j} = A_jk ∂_k` (exact when `det ∇ζ = 1`).
fn eulerian_sobolev_sq(geometry: &Geometry, f: &VectorField, s: u32) -> f64 {
    let mut total = f.sobolev_norm_sq(0);
    let mut layer: Vec<(usize, VectorField)> = vec![(0, f.clone())];
    for _ in 0..s {
        // multi-indices kept non-decreasing in the axis so each α appears once
        let mut next = Vec::new();
        for (min_axis, g) in &layer {
            let [a1, a2] = geometry.grad_a(&g[0]).into_components();
            let [b1, b2] = geometry.grad_a(&g[1]).into_components();
            let d = [VectorField::new(a1, b1), VectorField::new(a2, b2)];
            for (axis, dg) in d.into_iter().enumerate() {
                if axis >= *min_axis {
                    total += dg.sobolev_norm_sq(0);
                    next.push((axis, dg));
                }
            }
        }
        layer = next;
    }
    total
}

/// Which labels [`record_lagrangian`] computes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct RecordOptions {
    /// Eulerian norms of `v` and `b` via label-frame derivatives.
    pub eulerian: bool,
    /// Higher norms used by the damped suites (`damped_energy`, `eta_H4`).
    pub damped: bool,
}

/// Standard record of a Lagrangian state.
///
/// Norms: `kinetic` `‖u‖₀²`, `magnetic` `‖m∂₂η‖₀²`, `dissipation`
/// (`2ν‖∇_A u‖₀² + 2κ‖u‖₀²`, the energy-identity integrand), `u_H1`,
/// `u_H2`, `b_H2` (`‖m∂₂η‖₂`), `eta_H3`, `eta_d2_H1`, `m_d2eta_H2`, `E20`,
/// `E21`; optionally `v_H1_eulerian`, `v_H2_eulerian`, `b_H2_eulerian`,
/// `damped_energy`. Residuals: `det_drift`, `div_a`, `odevity`.
pub fn record_lagrangian(state: &FlowMapState, geometry: &Geometry, opts: RecordOptions) -> EnergyRecord {
    let mut r = EnergyRecord::new(state.t);
    let p = state.physics;
    let b = state.magnetic_perturbation();
    let kinetic = state.u.sobolev_norm_sq(0);
    r.set_norm("kinetic", kinetic);
    r.set_norm("magnetic", b.sobolev_norm_sq(0));
    let mut dissipation = 2.0 * p.kappa * kinetic;
    if p.nu != 0.0 {
        let g = [geometry.grad_a(&state.u[0]), geometry.grad_a(&state.u[1])];
        dissipation += 2.0 * p.nu * (g[0].sobolev_norm_sq(0) + g[1].sobolev_norm_sq(0));
    }
    r.set_norm("dissipation", dissipation);
    r.set_norm("u_H1", state.u.sobolev_norm(1));
    r.set_norm("u_H2", state.u.sobolev_norm(2));
    r.set_norm("b_H2", b.sobolev_norm(2));
    r.set_norm("eta_H3", state.eta.sobolev_norm(3));
    r.set_norm("eta_d2_H1", state.eta.d2().sobolev_norm(1));
    r.set_norm("m_d2eta_H2", b.sobolev_norm(2));
    r.set_norm("E20", energy_functional(state, 2, 0));
    r.set_norm("E21", energy_functional(state, 2, 1));
    if opts.eulerian {
        r.set_norm("v_H1_eulerian", eulerian_sobolev_sq(geometry, &state.u, 1).sqrt());
        r.set_norm("v_H2_eulerian", eulerian_sobolev_sq(geometry, &state.u, 2).sqrt());
        r.set_norm("b_H2_eulerian", eulerian_sobolev_sq(geometry, &b, 2).sqrt());
    }
    if opts.damped {
        r.set_norm("damped_energy", damped_energy_norm(&state.eta, &state.u, p.m));
        r.set_norm("eta_H4", state.eta.sobolev_norm(4));
    }
    r.set_residual("det_drift", geometry.jacobian_drift());
    r.set_residual("div_a", geometry.div_a(&state.u).l2_norm());
    r.set_residual(
        "odevity",
        odevity_residual(&state.eta).max(odevity_residual(&state.u)),
    );
    r
}

/// Standard record of an Eulerian state: `kinetic`, `magnetic`, `v_H1`,
/// `v_H2`, `b_H2`; residuals `div_v`, `div_b`.
pub fn record_eulerian(state: &EulerianState) -> EnergyRecord {
    let mut r = EnergyRecord::new(state.t);
    r.set_norm("kinetic", state.v.sobolev_norm_sq(0));
    r.set_norm("magnetic", state.b.sobolev_norm_sq(0));
    r.set_norm("v_H1", state.v.sobolev_norm(1));
    r.set_norm("v_H2", state.v.sobolev_norm(2));
    r.set_norm("b_H2", state.b.sobolev_norm(2));
    r.set_residual("div_v", state.v.divergence().l2_norm());
    r.set_residual("div_b", state.b.divergence().l2_norm());
    r
}

/// `∫ y dt` by composite Simpson on possibly nonuniform samples. An odd
/// number of intervals closes with the last interval integrated exactly for
/// the quadratic through the final three samples.
pub fn integrate_simpson(ts: &[f64], ys: &[f64]) -> Result<f64> {
    if ts.len() != ys.len() {
        return Err(Error::Precondition("time and value series differ in length".into()));
    }
    if ts.len() < 3 {
        return Err(Error::InsufficientSamples {
            needed: 3,
            have: ts.len(),
        });
    }
    let intervals = ts.len() - 1;
    let paired = intervals - intervals % 2;
    let mut total = 0.0;
    let mut i = 0;
    while i < paired {
        let (h0, h1) = (ts[i + 1] - ts[i], ts[i + 2] - ts[i + 1]);
        let hs = h0 + h1;
        total += hs / 6.0
            * (ys[i] * (2.0 - h1 / h0) + ys[i + 1] * hs * hs / (h0 * h1) + ys[i + 2] * (2.0 - h0 / h1));
        i += 2;
    }
    if intervals % 2 == 1 {
        let k = ts.len() - 3;
        let (h0, h1) = (ts[k + 1] - ts[k], ts[k + 2] - ts[k + 1]);
        // ∫ over [t_{k+1}, t_{k+2}] of the interpolating quadratic
        let w0 = -h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
        let w1 = h1 * (3.0 * h0 + h1) / (6.0 * h0);
        let w2 = h1 * (3.0 * h0 + 2.0 * h1) / (6.0 * (h0 + h1));
        total += w0 * ys[k] + w1 * ys[k + 1] + w2 * ys[k + 2];
    }
    Ok(total)
}

/// Values of `label` across `records`.
pub fn series(records: &[EnergyRecord], label: &str) -> Result<Vec<f64>> {
    records
        .iter()
        .map(|r| {
            r.get(label)
                .ok_or_else(|| Error::Precondition(format!("record at t = {} lacks `{label}`", r.t)))
        })
        .collect()
}

/// `|kinetic(T) + magnetic(T) + ∫₀ᵀ dissipation − I₀| / I₀` with
/// `I₀ = kinetic(0) + magnetic(0)`.
pub fn energy_identity_residual(records: &[EnergyRecord]) -> Result<f64> {
    if records.len() < 3 {
        return Err(Error::InsufficientSamples {
            needed: 3,
            have: records.len(),
        });
    }
    let ts: Vec<f64> = records.iter().map(|r| r.t).collect();
    let kin = series(records, "kinetic")?;
    let mag = series(records, "magnetic")?;
    let dis = series(records, "dissipation")?;
    let i0 = kin[0] + mag[0];
    let last = records.len() - 1;
    let lhs = kin[last] + mag[last] + integrate_simpson(&ts, &dis)?;
    if i0 == 0.0 {
        return Ok(lhs.abs());
    }
    Ok((lhs - i0).abs() / i0)
}

/// Form of a decay law.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayKind {
    /// `N ∝ ⟨t⟩^p`, `⟨t⟩ = 1 + t`; reports the exponent `p`.
    Power,
    /// `N ∝ e^{−r t}`; reports the rate `r`.
    Exponential,
}

/// Least-squares decay fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub kind: DecayKind,
    pub exponent_or_rate: f64,
    pub stderr: f64,
    pub window: [f64; 2],
    pub r_squared: f64,
    pub samples: usize,
}

/// Minimum samples inside a fit window.
pub const MIN_FIT_SAMPLES: usize = 8;

/// Ordinary least squares `y = a + b x`: returns `(b, a, stderr(b), r²)`.
fn linear_regression(xs: &[f64], ys: &[f64]) -> (f64, f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - intercept - slope * x;
            e * e
        })
        .sum();
    let stderr = if xs.len() > 2 {
        (ssr / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    let r2 = if syy > 0.0 { 1.0 - ssr / syy } else { 1.0 };
    (slope, intercept, stderr, r2)
}

/// Fit raw samples `(t, N)` inside `window`.
pub fn fit_decay_samples(ts: &[f64], ns: &[f64], kind: DecayKind, window: [f64; 2]) -> Result<DecayFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut offenders = Vec::new();
    for (&t, &v) in ts.iter().zip(ns) {
        if t < window[0] || t > window[1] {
            continue;
        }
        if !(v > 0.0) {
            offenders.push(t);
            continue;
        }
        xs.push(match kind {
            DecayKind::Power => (1.0 + t).ln(),
            DecayKind::Exponential => t,
        });
        ys.push(v.ln());
    }
    if !offenders.is_empty() {
        return Err(Error::Domain { offenders });
    }
    if xs.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_FIT_SAMPLES,
            have: xs.len(),
        });
    }
    let (slope, _, stderr, r_squared) = linear_regression(&xs, &ys);
    Ok(DecayFit {
        kind,
        exponent_or_rate: match kind {
            DecayKind::Power => slope,
            DecayKind::Exponential => -slope,
        },
        stderr,
        window,
        r_squared,
        samples: xs.len(),
    })
}

/// Fit the series of `quantity` inside `window`.
pub fn fit_decay(records: &[EnergyRecord], quantity: &str, kind: DecayKind, window: [f64; 2]) -> Result<DecayFit> {
    let ts: Vec<f64> = records.iter().map(|r| r.t).collect();
    let ns = series(records, quantity)?;
    fit_decay_samples(&ts, &ns, kind, window)
}

/// Default fit window: the last 60% of `[0, t_end]`.
pub fn default_window(t_end: f64) -> [f64; 2] {
    [0.4 * t_end, t_end]
}

/// Per-time error quantities between a nonlinear state and its linear
/// counterpart: `eta_d_H3_sq` `‖η^d‖₃²`, `ud_md2etad_H2_sq`
/// `‖(u^d, m∂₂η^d)‖₂²`, `weighted_ud_H2_sq` `⟨t⟩‖(u^d, m∂₂η^d)‖₂²`,
/// `damped_error` `‖(η^d, u^d)‖₄² + ‖mη^d‖²_{5,2}`.
pub fn linear_error_record(run: &FlowMapState, linear: &FlowMapState) -> Result<EnergyRecord> {
    run.grid().same_as(linear.grid())?;
    if (run.t - linear.t).abs() > 1e-9 * run.t.abs().max(1.0) {
        return Err(Error::Precondition(format!(
            "misaligned times {} and {}",
            run.t, linear.t
        )));
    }
    let m = run.physics.m;
    let ed = &run.eta - &linear.eta;
    let ud = &run.u - &linear.u;
    let bd = ed.d2().scaled(m);
    let mut r = EnergyRecord::new(run.t);
    let h2 = ud.sobolev_norm_sq(2) + bd.sobolev_norm_sq(2);
    r.set_norm("eta_d_H3_sq", ed.sobolev_norm_sq(3));
    r.set_norm("ud_md2etad_H2_sq", h2);
    r.set_norm("weighted_ud_H2_sq", (1.0 + run.t) * h2);
    r.set_norm("damped_error", damped_energy_norm(&ed, &ud, m));
    Ok(r)
}

/// Error records over aligned trajectories.
pub fn linear_error_metrics(run: &[FlowMapState], linear: &[FlowMapState]) -> Result<Vec<EnergyRecord>> {
    if run.len() != linear.len() {
        return Err(Error::Precondition(format!(
            "trajectories have {} and {} states",
            run.len(),
            linear.len()
        )));
    }
    run.iter().zip(linear).map(|(a, b)| linear_error_record(a, b)).collect()
}

/// Summary scalars of a linear-error series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearErrorSummary {
    /// `sup_t ‖η^d‖₃² + ∫₀ᵀ ‖(u^d, m∂₂η^d)‖₂²`.
    pub viscous: f64,
    /// `sup_t ⟨t⟩‖(u^d, m∂₂η^d)‖₂²`.
    pub weighted: f64,
    /// `sup_t (‖(η^d, u^d)‖₄² + ‖mη^d‖²_{5,2})`.
    pub damped: f64,
}

pub fn summarize_linear_error(records: &[EnergyRecord]) -> Result<LinearErrorSummary> {
    let ts: Vec<f64> = records.iter().map(|r| r.t).collect();
    let sup = |label: &str| -> Result<f64> { Ok(series(records, label)?.into_iter().fold(0.0, f64::max)) };
    let integral = integrate_simpson(&ts, &series(records, "ud_md2etad_H2_sq")?)?;
    Ok(LinearErrorSummary {
        viscous: sup("eta_d_H3_sq")? + integral,
        weighted: sup("weighted_ud_H2_sq")?,
        damped: sup("damped_error")?,
    })
}

/// Log-log regression of `D` against `m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: Vec<(f64, f64)>,
}

pub fn msweep_slope(points: &[(f64, f64)]) -> Result<SweepResult> {
    if points.len() < 3 {
        return Err(Error::InsufficientSamples {
            needed: 3,
            have: points.len(),
        });
    }
    for w in points.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(Error::Precondition("m values must be strictly increasing".into()));
        }
    }
    let offenders: Vec<f64> = points.iter().filter(|p| !(p.1 > 0.0) || !(p.0 > 0.0)).map(|p| p.0).collect();
    if !offenders.is_empty() {
        return Err(Error::Domain { offenders });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (slope, intercept, stderr, r_squared) = linear_regression(&xs, &ys);
    Ok(SweepResult {
        slope,
        stderr,
        intercept,
        r_squared,
        points: points.to_vec(),
    })
}
