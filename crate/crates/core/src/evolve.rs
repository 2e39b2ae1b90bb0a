//! Time integration of the Lagrangian (viscous and damped) and Eulerian
//! systems, and particle tracking along an Eulerian run.
//!
//! Both formulations are semilinear: a stiff constant-coefficient part that
//! couples each Fourier mode of a displacement-like variable to a velocity
//! (the Alfvén spring `m²∂₂²` plus viscosity or damping) and is propagated
//! exactly, and a nonlinear remainder advanced explicitly.
//!
//! In the Lagrangian system only the per-mode solenoidal part of `η` feels
//! the spring in the exact propagator. The gradient part of `m²∂₂²η` is
//! left in the explicit remainder, where it cancels against the matching
//! component of `∇_A q` to leading order. Putting the whole spring in the
//! propagator would leave that cancellation to the explicit stages and
//! bring back a step restriction of order `1/(m k_max)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kinematics::{
    enforce_unit_jacobian, odevity_project, FlowMapState, Geometry, Physics,
};
use crate::linear::{damping, propagator, Propagator};
use crate::pressure::{project_div_a_free, solve_lagrangian_pressure, EllipticOptions};
use crate::spectral::transform::{forward_many, inverse_many};
use crate::spectral::{Axis, Grid, OffGridEvaluator, SpectralField, VectorField};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Time-stepping scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Integrating-factor (Lawson) fourth-order Runge–Kutta.
    EtdRk4,
    /// Second-order backward differentiation with the linear part implicit,
    /// bootstrapped with one `EtdRk4` step.
    ImexBdf2,
}

/// Step size and per-step options.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepControl {
    pub dt: f64,
    pub scheme: Scheme,
    /// Truncate the state to the 2/3 band after every step.
    pub dealias: bool,
    /// Project the state onto odevity-symmetric fields after every step.
    pub odevity_project: bool,
    /// Re-impose `det ∇ζ = 1` after every step by a gradient correction
    /// of `η`.
    pub volume_project: bool,
    pub elliptic: EllipticOptions,
}

impl StepControl {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            scheme: Scheme::EtdRk4,
            dealias: true,
            odevity_project: false,
            volume_project: false,
            elliptic: EllipticOptions::default(),
        }
    }
}

/// Advective step bound `h / max(1, max|u|)` of the Lagrangian scheme.
pub fn lagrangian_stability_bound(u: &VectorField) -> f64 {
    u.grid().spacing() / u.max_magnitude().max(1.0)
}

/// Default step `0.25 h / max(1, max|u|)`.
pub fn default_dt(u: &VectorField) -> f64 {
    0.25 * lagrangian_stability_bound(u)
}

/// Diagnostics of one step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepReport {
    /// Total pressure fixed-point iterations over all stages.
    pub pressure_iterations: usize,
    /// Fixed-point iterations of the final `div_A` projection.
    pub projection_iterations: usize,
    /// `‖div_A u‖₀` after the step.
    pub div_a_residual: f64,
    /// `max |det ∇ζ − 1|` after the step.
    pub det_drift: f64,
    /// `‖∇_A u‖₀²` after the step (viscous dissipation integrand).
    pub grad_a_u_sq: f64,
}

/// Four coefficient arrays: `(η₁, η₂, u₁, u₂)` or `(b₁, b₂, v₁, v₂)`.
type Coeffs = [Vec<Complex64>; 4];

fn zeros_like(w: &Coeffs) -> Coeffs {
    let n = w[0].len();
    [vec![ZERO; n], vec![ZERO; n], vec![ZERO; n], vec![ZERO; n]]
}

/// `a + s·b`.
fn axpy(a: &Coeffs, s: f64, b: &Coeffs) -> Coeffs {
    let mut out = a.clone();
    for (o, bb) in out.iter_mut().zip(b) {
        for (x, y) in o.iter_mut().zip(bb) {
            *x += y * s;
        }
    }
    out
}

fn add_scaled_in_place(a: &mut Coeffs, s: f64, b: &Coeffs) {
    for (o, bb) in a.iter_mut().zip(b) {
        for (x, y) in o.iter_mut().zip(bb) {
            *x += y * s;
        }
    }
}

/// Per-mode exact propagators for one step size.
#[derive(Clone, Debug)]
struct PropagatorTable {
    h: f64,
    /// Spring-coupled propagator `Φ(h; d, m k₂)` per mode.
    wave: Vec<Propagator>,
    /// Spring-free propagator `Φ(h; d, 0)` per mode.
    free: Vec<Propagator>,
}

impl PropagatorTable {
    fn new(grid: &Grid, physics: &Physics, h: f64) -> Self {
        let n = grid.n();
        let mut wave = Vec::with_capacity(grid.len());
        let mut free = Vec::with_capacity(grid.len());
        for i1 in 0..n {
            let k1 = grid.wavenumber(i1);
            for i2 in 0..n {
                let k2 = grid.wavenumber(i2);
                let d = damping(physics, [k1, k2]);
                wave.push(propagator(d, physics.m * k2, h));
                free.push(propagator(d, 0.0, h));
            }
        }
        Self { h, wave, free }
    }
}

/// Semilinear system `w' = L w + N(w)` with `L` diagonal in Fourier modes.
trait Semilinear {
    fn grid(&self) -> &Grid;
    /// `exp(hL) w`.
    fn propagate(&mut self, h: f64, w: &Coeffs) -> Coeffs;
    /// Solve `(a I − L) x = rhs`.
    fn implicit_solve(&self, a: f64, rhs: &Coeffs) -> Coeffs;
    /// `N(w)`.
    fn nonlinear(&mut self, w: &Coeffs) -> Result<Coeffs>;
}

/// One integrating-factor RK4 step of size `h`.
fn lawson_rk4<S: Semilinear>(sys: &mut S, w: &Coeffs, h: f64) -> Result<Coeffs> {
    let k1 = sys.nonlinear(w)?;
    let s2 = sys.propagate(0.5 * h, &axpy(w, 0.5 * h, &k1));
    let k2 = sys.nonlinear(&s2)?;
    let ew = sys.propagate(0.5 * h, w);
    let s3 = axpy(&ew, 0.5 * h, &k2);
    let k3 = sys.nonlinear(&s3)?;
    let s4 = sys.propagate(0.5 * h, &axpy(&ew, h, &k3));
    let k4 = sys.nonlinear(&s4)?;
    // w⁺ = Φ(h)(w + h/6 k1) + h/3 Φ(h/2)(k2 + k3) + h/6 k4
    let mut out = sys.propagate(h, &axpy(w, h / 6.0, &k1));
    let mid = sys.propagate(0.5 * h, &axpy(&k2, 1.0, &k3));
    add_scaled_in_place(&mut out, h / 3.0, &mid);
    add_scaled_in_place(&mut out, h / 6.0, &k4);
    Ok(out)
}

/// History for the BDF2 scheme.
#[derive(Clone, Debug)]
struct Bdf2History {
    prev: Coeffs,
    prev_n: Coeffs,
}

/// One IMEX-BDF2 step given the previous state and its nonlinear term.
fn imex_bdf2<S: Semilinear>(sys: &mut S, w: &Coeffs, hist: &Bdf2History, h: f64) -> Result<(Coeffs, Coeffs)> {
    let nw = sys.nonlinear(w)?;
    // (3w⁺ − 4w + w⁻)/(2h) = L w⁺ + 2N(w) − N(w⁻)
    let mut rhs = zeros_like(w);
    for s in 0..4 {
        for i in 0..w[s].len() {
            rhs[s][i] = (w[s][i] * 4.0 - hist.prev[s][i]) / (2.0 * h) + nw[s][i] * 2.0 - hist.prev_n[s][i];
        }
    }
    Ok((sys.implicit_solve(1.5 / h, &rhs), nw))
}

fn solve_2x2(a: f64, d: f64, w2: f64, x: Complex64, y: Complex64) -> (Complex64, Complex64) {
    // (aI − L) with L = [[0, 1], [−ω², −d]]: [[a, −1], [ω², a + d]]
    let det = a * (a + d) + w2;
    ((x * (a + d) + y) / det, (y * a - x * w2) / det)
}

/// The Lagrangian semilinear system in coefficient space.
struct LagrangianSystem {
    grid: Grid,
    physics: Physics,
    tables: Vec<PropagatorTable>,
    opts: EllipticOptions,
    q_guess: Option<SpectralField>,
    pressure_iterations: usize,
}

impl LagrangianSystem {
    fn new(grid: &Grid, physics: Physics, opts: EllipticOptions) -> Self {
        Self {
            grid: grid.clone(),
            physics,
            tables: Vec::new(),
            opts,
            q_guess: None,
            pressure_iterations: 0,
        }
    }

    fn table(&mut self, h: f64) -> &PropagatorTable {
        if let Some(pos) = self.tables.iter().position(|t| t.h == h) {
            return &self.tables[pos];
        }
        if self.tables.len() >= 6 {
            self.tables.remove(0);
        }
        self.tables.push(PropagatorTable::new(&self.grid, &self.physics, h));
        self.tables.last().expect("just pushed")
    }

    fn fields(&self, w: &Coeffs) -> (VectorField, VectorField) {
        let f = |v: &Vec<Complex64>| SpectralField::from_coeffs_unchecked(&self.grid, v.clone());
        (
            VectorField::new(f(&w[0]), f(&w[1])),
            VectorField::new(f(&w[2]), f(&w[3])),
        )
    }
}

fn pack(eta: &VectorField, u: &VectorField) -> Coeffs {
    [
        eta[0].coeffs().to_vec(),
        eta[1].coeffs().to_vec(),
        u[0].coeffs().to_vec(),
        u[1].coeffs().to_vec(),
    ]
}

impl Semilinear for LagrangianSystem {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn propagate(&mut self, h: f64, w: &Coeffs) -> Coeffs {
        let grid = self.grid.clone();
        let n = grid.n();
        let table = self.table(h);
        let mut out = zeros_like(w);
        for i1 in 0..n {
            let k1 = grid.wavenumber(i1);
            for i2 in 0..n {
                let k2 = grid.wavenumber(i2);
                let idx = i1 * n + i2;
                let kk = k1 * k1 + k2 * k2;
                let (pw, pf) = (&table.wave[idx], &table.free[idx]);
                if kk == 0.0 {
                    for c in 0..2 {
                        let (e, u) = crate::linear::apply(pf, w[c][idx], w[c + 2][idx]);
                        out[c][idx] = e;
                        out[c + 2][idx] = u;
                    }
                    continue;
                }
                // split into solenoidal and gradient parts per mode
                let ke = (w[0][idx] * k1 + w[1][idx] * k2) / kk;
                let ku = (w[2][idx] * k1 + w[3][idx] * k2) / kk;
                let eg = [ke * k1, ke * k2];
                let ug = [ku * k1, ku * k2];
                for c in 0..2 {
                    let (es, us) = crate::linear::apply(pw, w[c][idx] - eg[c], w[c + 2][idx] - ug[c]);
                    let (eg2, ug2) = crate::linear::apply(pf, eg[c], ug[c]);
                    out[c][idx] = es + eg2;
                    out[c + 2][idx] = us + ug2;
                }
            }
        }
        out
    }

    fn implicit_solve(&self, a: f64, rhs: &Coeffs) -> Coeffs {
        let n = self.grid.n();
        let mut out = zeros_like(rhs);
        for i1 in 0..n {
            let k1 = self.grid.wavenumber(i1);
            for i2 in 0..n {
                let k2 = self.grid.wavenumber(i2);
                let idx = i1 * n + i2;
                let kk = k1 * k1 + k2 * k2;
                let d = damping(&self.physics, [k1, k2]);
                let w2 = (self.physics.m * k2).powi(2);
                if kk == 0.0 {
                    for c in 0..2 {
                        let (e, u) = solve_2x2(a, d, 0.0, rhs[c][idx], rhs[c + 2][idx]);
                        out[c][idx] = e;
                        out[c + 2][idx] = u;
                    }
                    continue;
                }
                let ke = (rhs[0][idx] * k1 + rhs[1][idx] * k2) / kk;
                let ku = (rhs[2][idx] * k1 + rhs[3][idx] * k2) / kk;
                let eg = [ke * k1, ke * k2];
                let ug = [ku * k1, ku * k2];
                for c in 0..2 {
                    let (es, us) = solve_2x2(a, d, w2, rhs[c][idx] - eg[c], rhs[c + 2][idx] - ug[c]);
                    let (eg2, ug2) = solve_2x2(a, d, 0.0, eg[c], ug[c]);
                    out[c][idx] = es + eg2;
                    out[c + 2][idx] = us + ug2;
                }
            }
        }
        out
    }

    fn nonlinear(&mut self, w: &Coeffs) -> Result<Coeffs> {
        let (eta, u) = self.fields(w);
        let geometry = Geometry::build(&eta)?;
        let m = self.physics.m;
        let (q, report) = solve_lagrangian_pressure(&geometry, &eta, &u, m, &self.opts, self.q_guess.as_ref())?;
        self.pressure_iterations += report.iterations;
        let mut nu_term = geometry.grad_a(&q).scaled(-1.0);
        if m != 0.0 {
            let tension = eta.gradient_part().derivative(Axis::Y2, 2).scaled(m * m);
            nu_term += &tension;
        }
        if self.physics.nu != 0.0 && !geometry.is_flat() {
            let visc = VectorField::new(geometry.lap_a_minus_lap(&u[0]), geometry.lap_a_minus_lap(&u[1]));
            nu_term += &visc.scaled(self.physics.nu);
        }
        self.q_guess = Some(q);
        let zero = vec![ZERO; self.grid.len()];
        let [a, b] = nu_term.into_components();
        Ok([zero.clone(), zero, a.into_coeffs(), b.into_coeffs()])
    }
}

/// Stateful Lagrangian stepper. Reuses propagator tables, warm-starts the
/// pressure iteration, and keeps the BDF2 history.
pub struct LagrangianStepper {
    system: LagrangianSystem,
    ctl: StepControl,
    history: Option<Bdf2History>,
    last: StepReport,
}

/// Absolute `‖div_A u‖₀` below which the post-step projection stops.
const PROJECTION_ABS_TOL: f64 = 1e-13;

impl LagrangianStepper {
    pub fn new(grid: &Grid, physics: Physics, ctl: StepControl) -> Result<Self> {
        if !(ctl.dt > 0.0 && ctl.dt.is_finite()) {
            return Err(Error::Precondition(format!("dt = {} must be positive", ctl.dt)));
        }
        Ok(Self {
            system: LagrangianSystem::new(grid, physics, ctl.elliptic),
            ctl,
            history: None,
            last: StepReport::default(),
        })
    }

    pub fn control(&self) -> &StepControl {
        &self.ctl
    }

    pub fn last_report(&self) -> &StepReport {
        &self.last
    }

    /// Advance `state` by one step in place.
    pub fn step(&mut self, state: &mut FlowMapState) -> Result<StepReport> {
        let h = self.ctl.dt;
        let bound = lagrangian_stability_bound(&state.u);
        if h > bound {
            return Err(Error::Stability { dt: h, bound });
        }
        self.system.pressure_iterations = 0;
        let w = pack(&state.eta, &state.u);
        let next = match (self.ctl.scheme, &self.history) {
            (Scheme::ImexBdf2, Some(hist)) => {
                let hist = hist.clone();
                let (next, nw) = imex_bdf2(&mut self.system, &w, &hist, h)?;
                self.history = Some(Bdf2History { prev: w, prev_n: nw });
                next
            }
            (Scheme::ImexBdf2, None) => {
                let nw = self.system.nonlinear(&w)?;
                let next = lawson_rk4(&mut self.system, &w, h)?;
                self.history = Some(Bdf2History { prev: w, prev_n: nw });
                next
            }
            (Scheme::EtdRk4, _) => lawson_rk4(&mut self.system, &w, h)?,
        };
        let (mut eta, mut u) = self.system.fields(&next);
        if self.ctl.dealias {
            eta.dealias();
            u.dealias();
        }
        eta.zero_mean();
        u.zero_mean();
        if self.ctl.volume_project {
            let tol = 1e-13 * (1.0 + eta.sobolev_norm(1));
            eta = enforce_unit_jacobian(&eta, tol)?.0;
        }
        if self.ctl.odevity_project {
            eta = odevity_project(&eta);
            u = odevity_project(&u);
        }
        let geometry = Geometry::build(&eta)?;
        let proj_opts = EllipticOptions {
            abs_tol: self.ctl.elliptic.abs_tol.max(PROJECTION_ABS_TOL),
            ..self.ctl.elliptic
        };
        let (mut u_proj, _, proj) = project_div_a_free(&geometry, &u, &proj_opts)?;
        u_proj.zero_mean();
        u = u_proj;
        let grad_u = [geometry.grad_a(&u[0]), geometry.grad_a(&u[1])];
        let report = StepReport {
            pressure_iterations: self.system.pressure_iterations,
            projection_iterations: proj.iterations,
            div_a_residual: geometry.div_a(&u).l2_norm(),
            det_drift: geometry.jacobian_drift(),
            grad_a_u_sq: grad_u[0].sobolev_norm_sq(0) + grad_u[1].sobolev_norm_sq(0),
        };
        state.eta = eta;
        state.u = u;
        state.t += h;
        self.last = report;
        Ok(report)
    }
}

/// One viscous Lagrangian step (`κ` is ignored).
pub fn step_lagrangian_viscous(state: &FlowMapState, ctl: &StepControl) -> Result<FlowMapState> {
    let mut physics = state.physics;
    physics.kappa = 0.0;
    let mut s = state.clone();
    s.physics = physics;
    LagrangianStepper::new(state.grid(), physics, *ctl)?.step(&mut s)?;
    s.physics = state.physics;
    Ok(s)
}

/// One damped inviscid Lagrangian step (`ν` is ignored).
pub fn step_lagrangian_damped(state: &FlowMapState, ctl: &StepControl) -> Result<FlowMapState> {
    let mut physics = state.physics;
    physics.nu = 0.0;
    let mut s = state.clone();
    s.physics = physics;
    LagrangianStepper::new(state.grid(), physics, *ctl)?.step(&mut s)?;
    s.physics = state.physics;
    Ok(s)
}

/// Apply only the exact linear part of the Lagrangian scheme over `h`
/// (negative `h` runs it backwards).
pub fn lagrangian_linear_flow(state: &FlowMapState, h: f64) -> FlowMapState {
    let mut sys = LagrangianSystem::new(state.grid(), state.physics, EllipticOptions::default());
    let w = sys.propagate(h, &pack(&state.eta, &state.u));
    let (eta, u) = sys.fields(&w);
    FlowMapState {
        eta,
        u,
        t: state.t + h,
        physics: state.physics,
    }
}

/// Eulerian state: velocity `v` and magnetic perturbation `b = M − m e₂`.
#[derive(Clone, Debug)]
pub struct EulerianState {
    pub v: VectorField,
    pub b: VectorField,
    pub t: f64,
    pub physics: Physics,
}

impl EulerianState {
    pub fn grid(&self) -> &Grid {
        self.v.grid()
    }

    /// Leray-project both fields and drop their means.
    pub fn project(&mut self) {
        self.v = self.v.leray_project();
        self.b = self.b.leray_project();
        self.v.zero_mean();
        self.b.zero_mean();
    }

    /// Push a Lagrangian state forward to Eulerian variables:
    /// `v = u∘ζ^{-1}`, `b = (m∂₂η)∘ζ^{-1}`.
    pub fn from_lagrangian(state: &FlowMapState) -> Result<Self> {
        let inverse = crate::kinematics::invert_flow_map(&state.eta)?;
        let b_lag = state.magnetic_perturbation();
        let mut out = Self {
            v: inverse.pull_back_vector(&state.u).dealiased(),
            b: inverse.pull_back_vector(&b_lag).dealiased(),
            t: state.t,
            physics: state.physics,
        };
        out.project();
        Ok(out)
    }
}

struct EulerianSystem {
    grid: Grid,
    physics: Physics,
    tables: Vec<PropagatorTable>,
}

impl EulerianSystem {
    fn table(&mut self, h: f64) -> &PropagatorTable {
        if let Some(pos) = self.tables.iter().position(|t| t.h == h) {
            return &self.tables[pos];
        }
        if self.tables.len() >= 6 {
            self.tables.remove(0);
        }
        self.tables.push(PropagatorTable::new(&self.grid, &self.physics, h));
        self.tables.last().expect("just pushed")
    }
}

impl Semilinear for EulerianSystem {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn propagate(&mut self, h: f64, w: &Coeffs) -> Coeffs {
        let grid = self.grid.clone();
        let m = self.physics.m;
        let n = grid.n();
        let table = self.table(h);
        let mut out = zeros_like(w);
        for i1 in 0..n {
            for i2 in 0..n {
                let idx = i1 * n + i2;
                let omega = m * grid.wavenumber(i2);
                let p = &table.wave[idx];
                // b = iω x with (x, v) following the (η, u) propagator
                let (c, s, sp) = (p[0][0], p[0][1], p[1][1]);
                let ios = Complex64::new(0.0, omega * s);
                for comp in 0..2 {
                    let (b, v) = (w[comp][idx], w[comp + 2][idx]);
                    out[comp][idx] = b * c + v * ios;
                    out[comp + 2][idx] = b * ios + v * sp;
                }
            }
        }
        out
    }

    fn implicit_solve(&self, a: f64, rhs: &Coeffs) -> Coeffs {
        let n = self.grid.n();
        let m = self.physics.m;
        let mut out = zeros_like(rhs);
        for i1 in 0..n {
            let k1 = self.grid.wavenumber(i1);
            for i2 in 0..n {
                let k2 = self.grid.wavenumber(i2);
                let idx = i1 * n + i2;
                let d = damping(&self.physics, [k1, k2]);
                let io = Complex64::new(0.0, m * k2);
                // [[a, −iω], [−iω, a + d]] (b, v) = rhs
                let det = a * (a + d) - io * io;
                for c in 0..2 {
                    let (x, y) = (rhs[c][idx], rhs[c + 2][idx]);
                    out[c][idx] = (x * (a + d) + io * y) / det;
                    out[c + 2][idx] = (io * x + y * a) / det;
                }
            }
        }
        out
    }

    fn nonlinear(&mut self, w: &Coeffs) -> Result<Coeffs> {
        let g = &self.grid;
        let p = inverse_many(g, &[&w[0], &w[1], &w[2], &w[3]]);
        let (b1, b2, v1, v2) = (&p[0], &p[1], &p[2], &p[3]);
        let len = g.len();
        let mut t11 = vec![0.0; len];
        let mut t12 = vec![0.0; len];
        let mut t22 = vec![0.0; len];
        let mut a = vec![0.0; len];
        for i in 0..len {
            t11[i] = v1[i] * v1[i] - b1[i] * b1[i];
            t12[i] = v1[i] * v2[i] - b1[i] * b2[i];
            t22[i] = v2[i] * v2[i] - b2[i] * b2[i];
            a[i] = v1[i] * b2[i] - b1[i] * v2[i];
        }
        let c = forward_many(g, &[&t11, &t12, &t22, &a]);
        let f = |v: &Vec<Complex64>| SpectralField::from_coeffs_unchecked(g, v.clone()).dealiased();
        let (t11, t12, t22, a) = (f(&c[0]), f(&c[1]), f(&c[2]), f(&c[3]));
        // N_v = −P ∂_j(v_i v_j − b_i b_j), N_b = (∂₂a, −∂₁a)
        let nv = VectorField::new(-(t11.d1() + t12.d2()), -(t12.d1() + t22.d2())).leray_project();
        let nb = VectorField::new(a.d2(), -a.d1());
        let [nb1, nb2] = nb.into_components();
        let [nv1, nv2] = nv.into_components();
        Ok([nb1.into_coeffs(), nb2.into_coeffs(), nv1.into_coeffs(), nv2.into_coeffs()])
    }
}

/// Stateful Eulerian stepper.
pub struct EulerianStepper {
    system: EulerianSystem,
    ctl: StepControl,
    history: Option<Bdf2History>,
}

impl EulerianStepper {
    pub fn new(grid: &Grid, physics: Physics, ctl: StepControl) -> Result<Self> {
        if !(ctl.dt > 0.0 && ctl.dt.is_finite()) {
            return Err(Error::Precondition(format!("dt = {} must be positive", ctl.dt)));
        }
        Ok(Self {
            system: EulerianSystem {
                grid: grid.clone(),
                physics,
                tables: Vec::new(),
            },
            ctl,
            history: None,
        })
    }

    /// Advance one step in place. Fails when `max|v| dt / h > 1`.
    pub fn step(&mut self, state: &mut EulerianState) -> Result<()> {
        let h = self.ctl.dt;
        let spacing = state.grid().spacing();
        let cfl = state.v.max_magnitude() * h / spacing;
        if cfl > 1.0 {
            return Err(Error::Stability {
                dt: h,
                bound: h / cfl,
            });
        }
        let w = pack(&state.b, &state.v);
        let next = match (self.ctl.scheme, &self.history) {
            (Scheme::ImexBdf2, Some(hist)) => {
                let hist = hist.clone();
                let (next, nw) = imex_bdf2(&mut self.system, &w, &hist, h)?;
                self.history = Some(Bdf2History { prev: w, prev_n: nw });
                next
            }
            (Scheme::ImexBdf2, None) => {
                let nw = self.system.nonlinear(&w)?;
                let next = lawson_rk4(&mut self.system, &w, h)?;
                self.history = Some(Bdf2History { prev: w, prev_n: nw });
                next
            }
            (Scheme::EtdRk4, _) => lawson_rk4(&mut self.system, &w, h)?,
        };
        let g = self.system.grid().clone();
        let f = |v: &Vec<Complex64>| SpectralField::from_coeffs_unchecked(&g, v.clone());
        state.b = VectorField::new(f(&next[0]), f(&next[1]));
        state.v = VectorField::new(f(&next[2]), f(&next[3]));
        if self.ctl.dealias {
            state.b.dealias();
            state.v.dealias();
        }
        state.project();
        if self.ctl.odevity_project {
            state.v = odevity_project(&state.v);
            state.b = odevity_project(&state.b);
        }
        state.t += h;
        Ok(())
    }
}

/// One Eulerian step.
pub fn step_eulerian(state: &EulerianState, ctl: &StepControl) -> Result<EulerianState> {
    let mut s = state.clone();
    EulerianStepper::new(state.grid(), state.physics, *ctl)?.step(&mut s)?;
    Ok(s)
}

/// Tracks particle positions `ζ(y, t)` for every label grid point along a
/// stream of Eulerian states.
///
/// States must be pushed at a fixed spacing `Δ`; each particle step uses
/// three consecutive states (start, midpoint, end) for one RK4 step of size
/// `2Δ`.
pub struct FlowMapTracker {
    grid: Grid,
    positions: Vec<[f64; 2]>,
    pending: Vec<EulerianState>,
    t: f64,
}

impl FlowMapTracker {
    /// Start with `ζ(y, t₀) = y + η₀(y)`.
    pub fn new(eta0: &VectorField, start: EulerianState) -> Self {
        let grid = eta0.grid().clone();
        let n = grid.n();
        let [e1, e2] = eta0.to_physical();
        let mut positions = Vec::with_capacity(grid.len());
        for j1 in 0..n {
            for j2 in 0..n {
                let y = grid.point(j1, j2);
                let p = j1 * n + j2;
                positions.push([y[0] + e1[p], y[1] + e2[p]]);
            }
        }
        let t = start.t;
        Self {
            grid,
            positions,
            pending: vec![start],
            t,
        }
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    /// Feed the next state; advances particles whenever a full RK4 step is
    /// available. Returns true when the particles moved.
    pub fn push(&mut self, state: EulerianState) -> bool {
        self.pending.push(state);
        if self.pending.len() < 3 {
            return false;
        }
        let end = self.pending.pop().expect("three states");
        let mid = self.pending.pop().expect("three states");
        let start = self.pending.pop().expect("three states");
        let h = end.t - start.t;
        let e0 = OffGridEvaluator::new(&[&start.v[0], &start.v[1]]);
        let em = OffGridEvaluator::new(&[&mid.v[0], &mid.v[1]]);
        let e1 = OffGridEvaluator::new(&[&end.v[0], &end.v[1]]);
        for x in self.positions.iter_mut() {
            let k1 = e0.eval(*x);
            let k2 = em.eval([x[0] + 0.5 * h * k1[0], x[1] + 0.5 * h * k1[1]]);
            let k3 = em.eval([x[0] + 0.5 * h * k2[0], x[1] + 0.5 * h * k2[1]]);
            let k4 = e1.eval([x[0] + h * k3[0], x[1] + h * k3[1]]);
            x[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
            x[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
        }
        self.t = end.t;
        self.pending.push(end);
        true
    }

    /// Displacement `η = ζ − y` on the label grid.
    pub fn displacement(&self) -> VectorField {
        let n = self.grid.n();
        let mut a = Vec::with_capacity(self.grid.len());
        let mut b = Vec::with_capacity(self.grid.len());
        for (p, x) in self.positions.iter().enumerate() {
            let y = self.grid.point(p / n, p % n);
            a.push(x[0] - y[0]);
            b.push(x[1] - y[1]);
        }
        VectorField::from_physical(&self.grid, &a, &b).expect("grid-sized arrays")
    }

    /// Frozen-in residual `‖b(ζ(y)) − m∂₂η(y)‖₀ / max(‖b‖₀, m‖∂₂η‖₀)` against
    /// the Eulerian state at the tracker's current time.
    pub fn frozen_in_residual(&self, state: &EulerianState) -> f64 {
        let eval = OffGridEvaluator::new(&[&state.b[0], &state.b[1]]);
        let lag_b = self.displacement().d2().scaled(state.physics.m);
        let [l1, l2] = lag_b.to_physical();
        let mut diff1 = Vec::with_capacity(self.grid.len());
        let mut diff2 = Vec::with_capacity(self.grid.len());
        for (p, x) in self.positions.iter().enumerate() {
            let b = eval.eval(*x);
            diff1.push(b[0] - l1[p]);
            diff2.push(b[1] - l2[p]);
        }
        let diff = VectorField::from_physical(&self.grid, &diff1, &diff2).expect("grid-sized arrays");
        let scale = state.b.l2_norm().max(lag_b.l2_norm());
        if scale == 0.0 {
            diff.l2_norm()
        } else {
            diff.l2_norm() / scale
        }
    }
}

/// Integrate particle paths through a timeline of equally spaced Eulerian
/// states (odd length), starting from `ζ = y + η₀`. Returns `η` after each
/// particle step.
pub fn integrate_flow_map(eta0: &VectorField, timeline: &[EulerianState]) -> Result<Vec<(f64, VectorField)>> {
    let first = timeline
        .first()
        .ok_or_else(|| Error::Precondition("empty timeline".into()))?;
    if timeline.len() >= 3 {
        let h = timeline[1].t - timeline[0].t;
        for w in timeline.windows(2) {
            if ((w[1].t - w[0].t) - h).abs() > 1e-9 * h.abs().max(1.0) {
                return Err(Error::Precondition("timeline spacing is not uniform".into()));
            }
        }
    }
    let mut tracker = FlowMapTracker::new(eta0, first.clone());
    let mut out = vec![(first.t, tracker.displacement())];
    for s in &timeline[1..] {
        if tracker.push(s.clone()) {
            out.push((tracker.time(), tracker.displacement()));
        }
    }
    Ok(out)
}
