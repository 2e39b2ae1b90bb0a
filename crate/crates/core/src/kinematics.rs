//! Flow-map geometry in label coordinates.
//!
//! For a displacement `η` the flow map is `ζ = y + η`. [`Geometry`] holds
//! `∇ζ`, its determinant `J` and `A = (∇ζ)^{-T}` pointwise on the grid, and
//! applies the label-frame operators
//!
//! ```text
//! ∇_A f   = (A_1k ∂_k f, A_2k ∂_k f)
//! div_A X = A_lk ∂_k X_l
//! Δ_A f   = div_A ∇_A f
//! curl_A X = A_1k ∂_k X_2 − A_2k ∂_k X_1
//! ```
//!
//! with every pointwise product truncated by the 2/3 rule.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::transform::{forward_real, forward_real_pair, inverse_many};
use crate::spectral::{Grid, OffGridEvaluator, SpectralField, VectorField};

/// Smallest Jacobian accepted by [`Geometry::build`].
pub const MIN_JACOBIAN: f64 = 0.25;

/// Physical parameters of a Lagrangian or Eulerian run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Physics {
    /// Kinematic viscosity `ν`.
    pub nu: f64,
    /// Linear damping `κ`.
    pub kappa: f64,
    /// Field-strength parameter `m`.
    pub m: f64,
}

impl Physics {
    pub fn viscous(nu: f64, m: f64) -> Self {
        Self { nu, kappa: 0.0, m }
    }

    pub fn damped(kappa: f64, m: f64) -> Self {
        Self { nu: 0.0, kappa, m }
    }
}

/// Full Lagrangian state: displacement, label-frame velocity, time.
#[derive(Clone, Debug)]
pub struct FlowMapState {
    pub eta: VectorField,
    pub u: VectorField,
    pub t: f64,
    pub physics: Physics,
}

impl FlowMapState {
    pub fn new(eta: VectorField, u: VectorField, physics: Physics) -> Result<Self> {
        eta.grid().same_as(u.grid())?;
        Ok(Self {
            eta,
            u,
            t: 0.0,
            physics,
        })
    }

    pub fn zeros(grid: &Grid, physics: Physics) -> Self {
        Self {
            eta: VectorField::zeros(grid),
            u: VectorField::zeros(grid),
            t: 0.0,
            physics,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.eta.grid()
    }

    pub fn geometry(&self) -> Result<Geometry> {
        Geometry::build(&self.eta)
    }

    /// Lagrangian magnetic field `B = m(∂₂η + e₂)`.
    pub fn magnetic_field(&self) -> VectorField {
        magnetic_field(&self.eta, self.physics.m)
    }

    /// Perturbation part `m ∂₂η` of the Lagrangian magnetic field.
    pub fn magnetic_perturbation(&self) -> VectorField {
        self.eta.d2().scaled(self.physics.m)
    }

    /// Mechanical energy `‖u‖₀² + ‖m∂₂η‖₀²`.
    pub fn mechanical_energy(&self) -> f64 {
        self.u.sobolev_norm_sq(0) + self.magnetic_perturbation().sobolev_norm_sq(0)
    }
}

/// `B = m(∂₂η + e₂)`.
pub fn magnetic_field(eta: &VectorField, m: f64) -> VectorField {
    let mut b = eta.d2().scaled(m);
    let mean = b[1].mean();
    b[1].set_mean(mean + m);
    b
}

type Matrix = [[Vec<f64>; 2]; 2];

/// Operators available through [`lagrangian_op`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LagrangianOp {
    GradA,
    DivA,
    LapA,
    CurlA,
}

/// A scalar or 2-vector field, for rank-checked operator dispatch.
#[derive(Clone, Debug)]
pub enum Field {
    Scalar(SpectralField),
    Vector(VectorField),
}

/// Pointwise snapshot of the flow-map geometry.
#[derive(Clone, Debug)]
pub struct Geometry {
    grid: Grid,
    grad_zeta: Matrix,
    a: Matrix,
    a_tilde: Matrix,
    jacobian: Vec<f64>,
    min_j: (f64, (usize, usize)),
    max_j: f64,
    flat: bool,
}

impl Geometry {
    /// Assemble `∇ζ`, `J` and `A = (∇ζ)^{-T}` from a displacement.
    pub fn build(eta: &VectorField) -> Result<Self> {
        let grid = eta.grid().clone();
        let n = grid.n();
        let len = grid.len();
        let flat = eta[0].is_zero() && eta[1].is_zero();
        let grads = [eta[0].d1(), eta[0].d2(), eta[1].d1(), eta[1].d2()];
        let phys = inverse_many(
            &grid,
            &[
                grads[0].coeffs(),
                grads[1].coeffs(),
                grads[2].coeffs(),
                grads[3].coeffs(),
            ],
        );
        let mut f = [
            [vec![0.0; len], vec![0.0; len]],
            [vec![0.0; len], vec![0.0; len]],
        ];
        let mut a = f.clone();
        let mut a_tilde = f.clone();
        let mut jacobian = vec![0.0; len];
        let mut min_j = (f64::INFINITY, (0, 0));
        let mut max_j = f64::NEG_INFINITY;
        for p in 0..len {
            let f11 = 1.0 + phys[0][p];
            let f12 = phys[1][p];
            let f21 = phys[2][p];
            let f22 = 1.0 + phys[3][p];
            let j = f11 * f22 - f12 * f21;
            f[0][0][p] = f11;
            f[0][1][p] = f12;
            f[1][0][p] = f21;
            f[1][1][p] = f22;
            jacobian[p] = j;
            if j < min_j.0 {
                min_j = (j, (p / n, p % n));
            }
            max_j = max_j.max(j);
            let inv = 1.0 / j;
            a[0][0][p] = f22 * inv;
            a[0][1][p] = -f21 * inv;
            a[1][0][p] = -f12 * inv;
            a[1][1][p] = f11 * inv;
            a_tilde[0][0][p] = a[0][0][p] - 1.0;
            a_tilde[0][1][p] = a[0][1][p];
            a_tilde[1][0][p] = a[1][0][p];
            a_tilde[1][1][p] = a[1][1][p] - 1.0;
        }
        if !(min_j.0 > MIN_JACOBIAN) {
            return Err(Error::GeometryDegenerate {
                min_det: min_j.0,
                location: min_j.1,
            });
        }
        Ok(Self {
            grid,
            grad_zeta: f,
            a,
            a_tilde,
            jacobian,
            min_j,
            max_j,
            flat,
        })
    }

    /// Identity geometry (`η = 0`).
    pub fn identity(grid: &Grid) -> Self {
        Self::build(&VectorField::zeros(grid)).expect("identity geometry is nondegenerate")
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// True when built from `η ≡ 0`.
    pub fn is_flat(&self) -> bool {
        self.flat
    }

    /// `∂_j ζ_i` at every grid point.
    pub fn grad_zeta(&self, i: usize, j: usize) -> &[f64] {
        &self.grad_zeta[i][j]
    }

    /// `A_ij` at every grid point.
    pub fn a(&self, i: usize, j: usize) -> &[f64] {
        &self.a[i][j]
    }

    /// `Ã_ij = A_ij − δ_ij` at every grid point.
    pub fn a_tilde(&self, i: usize, j: usize) -> &[f64] {
        &self.a_tilde[i][j]
    }

    pub fn jacobian(&self) -> &[f64] {
        &self.jacobian
    }

    pub fn min_jacobian(&self) -> f64 {
        self.min_j.0
    }

    pub fn max_jacobian(&self) -> f64 {
        self.max_j
    }

    /// `max |J − 1|` over the grid.
    pub fn jacobian_drift(&self) -> f64 {
        self.jacobian.iter().fold(0.0_f64, |m, j| m.max((j - 1.0).abs()))
    }

    /// `max_ij |Ã_ij|` over the grid.
    pub fn a_tilde_max(&self) -> f64 {
        let mut m: f64 = 0.0;
        for row in &self.a_tilde {
            for c in row {
                m = c.iter().fold(m, |acc, v| acc.max(v.abs()));
            }
        }
        m
    }

    /// `max |Aᵀ∇ζ − I|` over the grid.
    pub fn inverse_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for p in 0..self.grid.len() {
            for i in 0..2 {
                for j in 0..2 {
                    // (Aᵀ F)_ij = Σ_k A_ki F_kj
                    let v = self.a[0][i][p] * self.grad_zeta[0][j][p]
                        + self.a[1][i][p] * self.grad_zeta[1][j][p];
                    let target = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((v - target).abs());
                }
            }
        }
        worst
    }

    fn matrix(&self, tilde: bool) -> &Matrix {
        if tilde {
            &self.a_tilde
        } else {
            &self.a
        }
    }

    fn to_spectral(&self, values: &[f64]) -> SpectralField {
        SpectralField::from_coeffs_unchecked(&self.grid, forward_real(&self.grid, values)).dealiased()
    }

    fn to_spectral_pair(&self, a: &[f64], b: &[f64]) -> VectorField {
        let (ca, cb) = forward_real_pair(&self.grid, a, b);
        VectorField::new(
            SpectralField::from_coeffs_unchecked(&self.grid, ca).dealiased(),
            SpectralField::from_coeffs_unchecked(&self.grid, cb).dealiased(),
        )
    }

    /// `(M_1k ∂_k f, M_2k ∂_k f)` on the grid for `M = A` or `Ã`.
    fn grad_phys(&self, f: &SpectralField, tilde: bool) -> [Vec<f64>; 2] {
        let (g1, g2) = (f.d1(), f.d2());
        let mut d = inverse_many(&self.grid, &[g1.coeffs(), g2.coeffs()]);
        let d2 = d.pop().expect("two");
        let d1 = d.pop().expect("two");
        let m = self.matrix(tilde);
        let len = self.grid.len();
        let mut o1 = vec![0.0; len];
        let mut o2 = vec![0.0; len];
        for p in 0..len {
            o1[p] = m[0][0][p] * d1[p] + m[0][1][p] * d2[p];
            o2[p] = m[1][0][p] * d1[p] + m[1][1][p] * d2[p];
        }
        [o1, o2]
    }

    /// `∂_k X_l` on the grid, indexed `[l][k]`.
    fn vector_gradient_phys(&self, x: &VectorField) -> [[Vec<f64>; 2]; 2] {
        let d = [x[0].d1(), x[0].d2(), x[1].d1(), x[1].d2()];
        let mut p = inverse_many(
            &self.grid,
            &[d[0].coeffs(), d[1].coeffs(), d[2].coeffs(), d[3].coeffs()],
        )
        .into_iter();
        let mut next = || p.next().expect("four");
        let (a, b, c, e) = (next(), next(), next(), next());
        [[a, b], [c, e]]
    }

    fn div_phys(&self, x: &VectorField, tilde: bool) -> Vec<f64> {
        let d = self.vector_gradient_phys(x);
        let m = self.matrix(tilde);
        (0..self.grid.len())
            .map(|p| {
                m[0][0][p] * d[0][0][p]
                    + m[0][1][p] * d[0][1][p]
                    + m[1][0][p] * d[1][0][p]
                    + m[1][1][p] * d[1][1][p]
            })
            .collect()
    }

    pub fn grad_a(&self, f: &SpectralField) -> VectorField {
        if self.flat {
            return f.gradient();
        }
        let [a, b] = self.grad_phys(f, false);
        self.to_spectral_pair(&a, &b)
    }

    /// `∇_Ã f = ∇_A f − ∇f`.
    pub fn grad_a_tilde(&self, f: &SpectralField) -> VectorField {
        if self.flat {
            return VectorField::zeros(&self.grid);
        }
        let [a, b] = self.grad_phys(f, true);
        self.to_spectral_pair(&a, &b)
    }

    pub fn div_a(&self, x: &VectorField) -> SpectralField {
        if self.flat {
            return x.divergence();
        }
        self.to_spectral(&self.div_phys(x, false))
    }

    /// `div_Ã X = div_A X − div X`.
    pub fn div_a_tilde(&self, x: &VectorField) -> SpectralField {
        if self.flat {
            return SpectralField::zeros(&self.grid);
        }
        self.to_spectral(&self.div_phys(x, true))
    }

    pub fn lap_a(&self, f: &SpectralField) -> SpectralField {
        self.div_a(&self.grad_a(f))
    }

    pub fn lap_a_vector(&self, x: &VectorField) -> VectorField {
        VectorField::new(self.lap_a(&x[0]), self.lap_a(&x[1]))
    }

    /// `Δ_A f − Δf = div_Ã ∇_A f + div ∇_Ã f`.
    pub fn lap_a_minus_lap(&self, f: &SpectralField) -> SpectralField {
        if self.flat {
            return SpectralField::zeros(&self.grid);
        }
        let grid = &self.grid;
        let n = grid.n();
        let len = grid.len();
        let ks = grid.odd_wavenumbers();
        let mask = grid.retained_mask();
        let conj = grid.conjugate_table();
        let c = f.coeffs();
        // (∂₁f, ∂₂f) packed as one complex array
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        for i1 in 0..n {
            for i2 in 0..n {
                let idx = i1 * n + i2;
                let (k1, k2, z) = (ks[i1], ks[i2], c[idx]);
                buf[idx] = Complex64::new(-k1 * z.im - k2 * z.re, k1 * z.re - k2 * z.im);
            }
        }
        grid.fft2_inverse(&mut buf);
        let a = &self.a;
        for (p, z) in buf.iter_mut().enumerate() {
            let (d1, d2) = (z.re, z.im);
            *z = Complex64::new(
                a[0][0][p] * d1 + a[0][1][p] * d2,
                a[1][0][p] * d1 + a[1][1][p] * d2,
            );
        }
        grid.fft2_forward(&mut buf);
        // unpack Ĝ = (∇_A f)^, dealiased, then form ∂_k G_j and Ĝ − ∇̂f
        let scale = 0.5 / len as f64;
        let mut pair1 = vec![Complex64::new(0.0, 0.0); len];
        let mut pair2 = vec![Complex64::new(0.0, 0.0); len];
        let mut out = vec![Complex64::new(0.0, 0.0); len];
        for i1 in 0..n {
            for i2 in 0..n {
                let idx = i1 * n + i2;
                if !mask[idx] {
                    continue;
                }
                let (z, w) = (buf[idx], buf[conj[idx]]);
                let g1 = Complex64::new((z.re + w.re) * scale, (z.im - w.im) * scale);
                let g2 = Complex64::new((z.im + w.im) * scale, (w.re - z.re) * scale);
                let (k1, k2) = (ks[i1], ks[i2]);
                pair1[idx] = Complex64::new(-k1 * g1.im - k2 * g1.re, k1 * g1.re - k2 * g1.im);
                pair2[idx] = Complex64::new(-k1 * g2.im - k2 * g2.re, k1 * g2.re - k2 * g2.im);
                // div(Ĝ − ∇̂f) = i k·Ĝ + (k1² + k2²) f̂
                let ik_g = Complex64::new(-(k1 * g1.im + k2 * g2.im), k1 * g1.re + k2 * g2.re);
                out[idx] = ik_g + c[idx] * (k1 * k1 + k2 * k2);
            }
        }
        grid.fft2_inverse(&mut pair1);
        grid.fft2_inverse(&mut pair2);
        let at = &self.a_tilde;
        let mut div = Vec::with_capacity(len);
        for p in 0..len {
            let (g1, g2) = (pair1[p], pair2[p]);
            div.push(Complex64::new(
                at[0][0][p] * g1.re + at[0][1][p] * g1.im + at[1][0][p] * g2.re + at[1][1][p] * g2.im,
                0.0,
            ));
        }
        grid.fft2_forward(&mut div);
        let scale = 1.0 / len as f64;
        for (idx, o) in out.iter_mut().enumerate() {
            if mask[idx] {
                let (z, w) = (div[idx], div[conj[idx]]);
                *o += Complex64::new(0.5 * (z.re + w.re) * scale, 0.5 * (z.im - w.im) * scale);
            } else {
                *o = Complex64::new(0.0, 0.0);
            }
        }
        SpectralField::from_coeffs_unchecked(grid, out)
    }

    pub fn curl_a(&self, x: &VectorField) -> SpectralField {
        if self.flat {
            return x.curl();
        }
        let d = self.vector_gradient_phys(x);
        let m = &self.a;
        let c: Vec<f64> = (0..self.grid.len())
            .map(|p| {
                m[0][0][p] * d[1][0][p] + m[0][1][p] * d[1][1][p]
                    - m[1][0][p] * d[0][0][p]
                    - m[1][1][p] * d[0][1][p]
            })
            .collect();
        self.to_spectral(&c)
    }
}

/// Rank-checked dispatch over the label-frame operators.
pub fn lagrangian_op(kind: LagrangianOp, geometry: &Geometry, f: &Field) -> Result<Field> {
    match (kind, f) {
        (LagrangianOp::GradA, Field::Scalar(s)) => Ok(Field::Vector(geometry.grad_a(s))),
        (LagrangianOp::DivA, Field::Vector(v)) => Ok(Field::Scalar(geometry.div_a(v))),
        (LagrangianOp::CurlA, Field::Vector(v)) => Ok(Field::Scalar(geometry.curl_a(v))),
        (LagrangianOp::LapA, Field::Scalar(s)) => Ok(Field::Scalar(geometry.lap_a(s))),
        (LagrangianOp::LapA, Field::Vector(v)) => Ok(Field::Vector(geometry.lap_a_vector(v))),
        (kind, Field::Scalar(_)) => Err(Error::RankMismatch(format!(
            "{kind:?} expects a vector field, got a scalar"
        ))),
        (kind, Field::Vector(_)) => Err(Error::RankMismatch(format!(
            "{kind:?} expects a scalar field, got a vector"
        ))),
    }
}

/// Odevity reflection `S(f)(y₁, y₂) = (f₁(y₁, −y₂), −f₂(y₁, −y₂))`.
pub fn odevity_reflect(f: &VectorField) -> VectorField {
    let grid = f.grid();
    let n = grid.n();
    let reflect = |c: &SpectralField, sign: f64| {
        let src = c.coeffs();
        let mut out = vec![Complex64::new(0.0, 0.0); src.len()];
        for i1 in 0..n {
            for i2 in 0..n {
                out[i1 * n + i2] = src[i1 * n + (n - i2) % n] * sign;
            }
        }
        SpectralField::from_coeffs_unchecked(grid, out)
    };
    VectorField::new(reflect(&f[0], 1.0), reflect(&f[1], -1.0))
}

/// Symmetric part `(f + Sf) / 2`.
pub fn odevity_project(f: &VectorField) -> VectorField {
    (f + &odevity_reflect(f)).scaled(0.5)
}

/// `‖f − Sf‖₀`.
pub fn odevity_residual(f: &VectorField) -> f64 {
    (f - &odevity_reflect(f)).l2_norm()
}

/// Newton tolerance and iteration cap for [`invert_flow_map`].
pub const INVERSION_TOL: f64 = 1e-10;
pub const INVERSION_MAX_ITER: usize = 50;

/// Labels `y*(x)` with `ζ(y*) = x` for every Eulerian grid point `x`.
#[derive(Clone, Debug)]
pub struct InverseFlowMap {
    grid: Grid,
    labels: Vec<[f64; 2]>,
    worst_residual: f64,
}

impl InverseFlowMap {
    pub fn labels(&self) -> &[[f64; 2]] {
        &self.labels
    }

    pub fn worst_residual(&self) -> f64 {
        self.worst_residual
    }

    /// Inverse displacement `ξ(x) = ζ^{-1}(x) − x` on the Eulerian grid.
    pub fn displacement(&self) -> VectorField {
        let n = self.grid.n();
        let mut a = Vec::with_capacity(self.grid.len());
        let mut b = Vec::with_capacity(self.grid.len());
        for (p, y) in self.labels.iter().enumerate() {
            let x = self.grid.point(p / n, p % n);
            a.push(y[0] - x[0]);
            b.push(y[1] - x[1]);
        }
        VectorField::from_physical(&self.grid, &a, &b).expect("grid-sized arrays")
    }

    /// Eulerian values `f(ζ^{-1}(x))` of label-frame scalars on the grid.
    pub fn pull_back(&self, fields: &[&SpectralField]) -> Vec<SpectralField> {
        let eval = OffGridEvaluator::new(fields);
        let mut values = vec![Vec::with_capacity(self.grid.len()); fields.len()];
        for y in &self.labels {
            for (k, v) in eval.eval(*y).into_iter().enumerate() {
                values[k].push(v);
            }
        }
        values
            .iter()
            .map(|v| SpectralField::from_physical(&self.grid, v).expect("grid-sized arrays"))
            .collect()
    }

    /// Eulerian version of a label-frame vector field.
    pub fn pull_back_vector(&self, f: &VectorField) -> VectorField {
        let mut out = self.pull_back(&[&f[0], &f[1]]).into_iter();
        VectorField::new(out.next().expect("two"), out.next().expect("two"))
    }
}

/// Solve `y + η(y) = x` at every grid point by Newton iteration with direct
/// Fourier evaluation of `η` and `∇η`.
pub fn invert_flow_map(eta: &VectorField) -> Result<InverseFlowMap> {
    let grid = eta.grid().clone();
    let n = grid.n();
    let eval = OffGridEvaluator::new(&[&eta[0], &eta[1]]);
    let mut labels = Vec::with_capacity(grid.len());
    let mut worst: f64 = 0.0;
    for j1 in 0..n {
        for j2 in 0..n {
            let x = grid.point(j1, j2);
            let e0 = eval.eval(x);
            let mut y = [x[0] - e0[0], x[1] - e0[1]];
            let mut converged = false;
            let mut res = f64::INFINITY;
            for _ in 0..INVERSION_MAX_ITER {
                let v = eval.eval_with_gradient(y);
                let r = [y[0] + v[0][0] - x[0], y[1] + v[1][0] - x[1]];
                res = r[0].hypot(r[1]);
                if res < INVERSION_TOL {
                    converged = true;
                    break;
                }
                let (f11, f12) = (1.0 + v[0][1], v[0][2]);
                let (f21, f22) = (v[1][1], 1.0 + v[1][2]);
                let det = f11 * f22 - f12 * f21;
                if det.abs() < 1e-300 {
                    break;
                }
                y[0] -= (f22 * r[0] - f12 * r[1]) / det;
                y[1] -= (-f21 * r[0] + f11 * r[1]) / det;
            }
            if !converged {
                return Err(Error::Inversion {
                    worst_residual: res,
                    iterations: INVERSION_MAX_ITER,
                });
            }
            worst = worst.max(res);
            labels.push(y);
        }
    }
    Ok(InverseFlowMap {
        grid,
        labels,
        worst_residual: worst,
    })
}

/// Forward composition `max_x |ζ(ζ^{-1}(x)) − x|`, independent of the
/// Newton residual bookkeeping.
pub fn inversion_self_consistency(eta: &VectorField, inverse: &InverseFlowMap) -> f64 {
    let grid = eta.grid();
    let n = grid.n();
    let eval = OffGridEvaluator::new(&[&eta[0], &eta[1]]);
    let mut worst: f64 = 0.0;
    for (p, y) in inverse.labels().iter().enumerate() {
        let x = grid.point(p / n, p % n);
        let v = eval.eval(*y);
        worst = worst.max((y[0] + v[0] - x[0]).hypot(y[1] + v[1] - x[1]));
    }
    worst
}

/// Outcome of [`enforce_unit_jacobian`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacobianReport {
    pub iterations: usize,
    /// Final `‖div η + det ∇η‖₀` (dealiased Sarrus residual).
    pub residual: f64,
    /// Last ratio of successive residuals.
    pub ratio: f64,
}

/// Sarrus residual `div η + ∂₁η₁∂₂η₂ − ∂₁η₂∂₂η₁`, which vanishes exactly
/// when `det(I + ∇η) = 1`.
pub fn sarrus_residual(eta: &VectorField) -> SpectralField {
    let grid = eta.grid();
    let d = [eta[0].d1(), eta[0].d2(), eta[1].d1(), eta[1].d2()];
    let p = inverse_many(grid, &[d[0].coeffs(), d[1].coeffs(), d[2].coeffs(), d[3].coeffs()]);
    let q: Vec<f64> = (0..grid.len())
        .map(|i| p[0][i] * p[3][i] - p[2][i] * p[1][i])
        .collect();
    let q = SpectralField::from_coeffs_unchecked(grid, forward_real(grid, &q)).dealiased();
    &d[0] + &d[3] + q
}

/// Replace `η` by `η + ∇φ` with `det(I + ∇(η + ∇φ)) = 1`, solving
/// `Δφ = −div η − det ∇(η + ∇φ)` by fixed-point iteration.
///
/// Iterates until the residual falls below `tol` or stops decreasing once
/// it is below `100·tol`; fails with [`Error::Amplitude`] if the iteration
/// does not contract.
pub fn enforce_unit_jacobian(eta: &VectorField, tol: f64) -> Result<(VectorField, JacobianReport)> {
    const MAX_ITER: usize = 200;
    let mut phi = SpectralField::zeros(eta.grid());
    let mut current = eta.clone();
    let mut prev = f64::INFINITY;
    let mut ratio = 0.0;
    let mut growth = 0;
    for iterations in 0..MAX_ITER {
        let r = sarrus_residual(&current);
        let res = r.l2_norm();
        if prev.is_finite() && prev > 0.0 {
            ratio = res / prev;
        }
        let report = JacobianReport {
            iterations,
            residual: res,
            ratio,
        };
        if res <= tol || (res <= 100.0 * tol && res >= prev) {
            return Ok((current, report));
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
        phi -= &r.invert_laplacian_unchecked(0.0);
        current = eta + &phi.gradient();
    }
    Err(Error::Amplitude { ratio })
}
