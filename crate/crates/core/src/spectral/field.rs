use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use rand::Rng;

use super::transform::{forward_many, forward_real, inverse_many, inverse_real};
use super::Grid;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Coordinate axis of the label torus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Y1,
    Y2,
}

/// Fourier coefficients of a real periodic scalar field.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: vec![ZERO; grid.len()],
        }
    }

    pub fn from_coeffs(grid: &Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "coefficient array has {} entries, grid needs {}",
                coeffs.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            coeffs,
        })
    }

    pub(crate) fn from_coeffs_unchecked(grid: &Grid, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.len());
        Self {
            grid: grid.clone(),
            coeffs,
        }
    }

    /// Transform grid values (row-major, `y1` as row) to coefficients.
    /// No truncation is applied.
    pub fn from_physical(grid: &Grid, values: &[f64]) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "value array has {} entries, grid needs {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self::from_coeffs_unchecked(grid, forward_real(grid, values)))
    }

    /// Sample `f(y1, y2)` on the grid and transform.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for j1 in 0..n {
            for j2 in 0..n {
                let [y1, y2] = grid.point(j1, j2);
                values.push(f(y1, y2));
            }
        }
        Self::from_coeffs_unchecked(grid, forward_real(grid, &values))
    }

    /// Constant field.
    pub fn constant(grid: &Grid, value: f64) -> Self {
        let mut f = Self::zeros(grid);
        f.coeffs[0] = Complex64::new(value, 0.0);
        f
    }

    /// Random real field with modes `|m1|, |m2| <= band`, unit-order
    /// amplitudes decaying like `1 / (1 + |m|²)`, and zero mean.
    pub fn random_band_limited<R: Rng + ?Sized>(grid: &Grid, band: i64, rng: &mut R) -> Self {
        let mut f = Self::zeros(grid);
        for m1 in -band..=band {
            for m2 in 0..=band {
                if m2 == 0 && m1 <= 0 {
                    continue;
                }
                let decay = 1.0 / (1.0 + (m1 * m1 + m2 * m2) as f64);
                let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * decay;
                f.set_mode(m1, m2, c);
            }
        }
        f
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of mode `(m1, m2)`.
    pub fn mode(&self, m1: i64, m2: i64) -> Complex64 {
        let n = self.grid.n();
        self.coeffs[self.grid.index_of(m1) * n + self.grid.index_of(m2)]
    }

    /// Set mode `(m1, m2)` and its conjugate partner.
    pub fn set_mode(&mut self, m1: i64, m2: i64, c: Complex64) {
        let n = self.grid.n();
        let idx = self.grid.index_of(m1) * n + self.grid.index_of(m2);
        let cidx = self.grid.conjugate_index(idx);
        if idx == cidx {
            self.coeffs[idx] = Complex64::new(c.re, 0.0);
        } else {
            self.coeffs[idx] = c;
            self.coeffs[cidx] = c.conj();
        }
    }

    pub fn to_physical(&self) -> Vec<f64> {
        inverse_real(&self.grid, &self.coeffs)
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self::from_coeffs_unchecked(&self.grid, self.coeffs.iter().map(|c| c * a).collect())
    }

    /// Apply a real multiplier per mode: `c_k <- w(k1, k2) c_k`.
    pub fn map_modes(&self, w: impl Fn(f64, f64) -> f64) -> Self {
        let n = self.grid.n();
        let ks = self.grid.wavenumbers();
        let mut out = Vec::with_capacity(self.coeffs.len());
        for (chunk, &k1) in self.coeffs.chunks_exact(n).zip(ks) {
            out.extend(chunk.iter().zip(ks).map(|(&c, &k2)| c * w(k1, k2)));
        }
        Self::from_coeffs_unchecked(&self.grid, out)
    }

    /// `∂^order / ∂y_axis^order`, exact coefficient-wise. Odd orders drop
    /// the Nyquist mode of that axis.
    pub fn derivative(&self, axis: Axis, order: u32) -> Self {
        if order == 0 {
            return self.clone();
        }
        let n = self.grid.n();
        let ks = if order % 2 == 1 {
            self.grid.odd_wavenumbers()
        } else {
            self.grid.wavenumbers()
        };
        let mult: Vec<f64> = ks.iter().map(|k| k.powi(order as i32)).collect();
        // i^order as a rotation
        let rot = |c: Complex64, w: f64| match order % 4 {
            0 => c * w,
            1 => Complex64::new(-c.im * w, c.re * w),
            2 => c * -w,
            _ => Complex64::new(c.im * w, -c.re * w),
        };
        let mut out = Vec::with_capacity(self.coeffs.len());
        match axis {
            Axis::Y1 => {
                for (row, chunk) in self.coeffs.chunks_exact(n).enumerate() {
                    let w = mult[row];
                    out.extend(chunk.iter().map(|&c| rot(c, w)));
                }
            }
            Axis::Y2 => {
                for chunk in self.coeffs.chunks_exact(n) {
                    out.extend(chunk.iter().zip(&mult).map(|(&c, &w)| rot(c, w)));
                }
            }
        }
        Self::from_coeffs_unchecked(&self.grid, out)
    }

    pub fn d1(&self) -> Self {
        self.derivative(Axis::Y1, 1)
    }

    pub fn d2(&self) -> Self {
        self.derivative(Axis::Y2, 1)
    }

    pub fn gradient(&self) -> VectorField {
        VectorField::new(self.d1(), self.d2())
    }

    /// `∇^⊥ψ = (-∂₂ψ, ∂₁ψ)`.
    pub fn perp_gradient(&self) -> VectorField {
        VectorField::new(-self.d2(), self.d1())
    }

    pub fn laplacian(&self) -> Self {
        self.map_modes(|k1, k2| -(k1 * k1 + k2 * k2))
    }

    /// Zero every mode above the 2/3 cutoff in either axis.
    pub fn dealias(&mut self) {
        for (c, &keep) in self.coeffs.iter_mut().zip(self.grid.retained_mask()) {
            if !keep {
                *c = ZERO;
            }
        }
    }

    pub fn dealiased(mut self) -> Self {
        self.dealias();
        self
    }

    /// Largest magnitude of any coefficient outside the 2/3 band.
    pub fn max_outside_band(&self) -> f64 {
        let n = self.grid.n();
        let mut worst: f64 = 0.0;
        for i1 in 0..n {
            for i2 in 0..n {
                if !self.grid.is_retained(i1, i2) {
                    worst = worst.max(self.coeffs[i1 * n + i2].norm());
                }
            }
        }
        worst
    }

    /// Pointwise product with 2/3-rule truncation.
    pub fn dealias_product(&self, other: &SpectralField) -> Result<SpectralField> {
        self.grid.same_as(&other.grid)?;
        let phys = inverse_many(&self.grid, &[&self.coeffs, &other.coeffs]);
        let prod: Vec<f64> = phys[0].iter().zip(&phys[1]).map(|(a, b)| a * b).collect();
        Ok(Self::from_coeffs_unchecked(&self.grid, forward_real(&self.grid, &prod)).dealiased())
    }

    /// `L²` inner product `∫ f g` via Parseval.
    pub fn inner(&self, other: &SpectralField) -> f64 {
        let s: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum();
        s * self.grid.area()
    }

    fn weighted_sum(&self, weight: impl Fn(f64, f64) -> f64) -> f64 {
        let n = self.grid.n();
        let ks = self.grid.wavenumbers();
        let mut s = 0.0;
        for i1 in 0..n {
            for i2 in 0..n {
                let c = self.coeffs[i1 * n + i2];
                s += weight(ks[i1], ks[i2]) * c.norm_sqr();
            }
        }
        s * self.grid.area()
    }

    /// `‖∇^s f‖₀² = Σ_{|α|=s} ‖∂^α f‖₀²`.
    pub fn seminorm_sq(&self, s: u32) -> f64 {
        self.weighted_sum(|k1, k2| seminorm_weight(k1, k2, s))
    }

    pub fn seminorm(&self, s: u32) -> f64 {
        self.seminorm_sq(s).sqrt()
    }

    /// `‖f‖_s² = Σ_{|α|<=s} ‖∂^α f‖₀²`.
    pub fn sobolev_norm_sq(&self, s: u32) -> f64 {
        self.weighted_sum(|k1, k2| sobolev_weight(k1, k2, s))
    }

    pub fn sobolev_norm(&self, s: u32) -> f64 {
        self.sobolev_norm_sq(s).sqrt()
    }

    /// `‖f‖_{i+1,2}² = ‖f‖_i² + ‖∇^i ∂₂ f‖₀²`.
    pub fn aniso_norm_sq(&self, i: u32) -> f64 {
        self.weighted_sum(|k1, k2| sobolev_weight(k1, k2, i) + seminorm_weight(k1, k2, i) * k2 * k2)
    }

    pub fn l2_norm(&self) -> f64 {
        self.sobolev_norm(0)
    }

    /// Solve `Δu = f` with the mean of `u` set to `mean`.
    pub fn invert_laplacian(&self, mean: f64) -> Result<SpectralField> {
        let f0 = self.coeffs[0].norm() * self.grid.period();
        if f0 > 1e-10 * self.l2_norm() {
            return Err(Error::Solvability {
                mean: self.coeffs[0].re,
            });
        }
        Ok(self.invert_laplacian_unchecked(mean))
    }

    /// `Δ^{-1}` on the nonzero modes, ignoring whatever sits in the mean.
    pub(crate) fn invert_laplacian_unchecked(&self, mean: f64) -> SpectralField {
        let mut out = self.map_modes(|k1, k2| {
            let k2sum = k1 * k1 + k2 * k2;
            if k2sum == 0.0 {
                0.0
            } else {
                -1.0 / k2sum
            }
        });
        out.coeffs[0] = Complex64::new(mean, 0.0);
        out
    }

    /// Largest absolute grid value.
    pub fn max_abs(&self) -> f64 {
        self.to_physical().iter().fold(0.0_f64, |a, v| a.max(v.abs()))
    }

    pub fn set_mean(&mut self, mean: f64) {
        self.coeffs[0] = Complex64::new(mean, 0.0);
    }
}

/// Weight of `|k|` multi-index sum `Σ_{j=0}^{s} k1^{2j} k2^{2(s-j)}`.
pub fn seminorm_weight(k1: f64, k2: f64, s: u32) -> f64 {
    let (a, b) = (k1 * k1, k2 * k2);
    (0..=s).map(|j| a.powi(j as i32) * b.powi((s - j) as i32)).sum()
}

pub fn sobolev_weight(k1: f64, k2: f64, s: u32) -> f64 {
    (0..=s).map(|i| seminorm_weight(k1, k2, i)).sum()
}

macro_rules! impl_binop {
    ($ty:ty, $trait:ident, $method:ident, $op:tt) => {
        impl $trait<&$ty> for &$ty {
            type Output = $ty;
            fn $method(self, rhs: &$ty) -> $ty {
                debug_assert!(self.grid == rhs.grid);
                let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a $op b).collect();
                <$ty>::from_coeffs_unchecked(&self.grid, coeffs)
            }
        }
        impl $trait<$ty> for $ty {
            type Output = $ty;
            fn $method(self, rhs: $ty) -> $ty {
                &self $op &rhs
            }
        }
        impl $trait<&$ty> for $ty {
            type Output = $ty;
            fn $method(self, rhs: &$ty) -> $ty {
                &self $op rhs
            }
        }
    };
}

impl_binop!(SpectralField, Add, add, +);
impl_binop!(SpectralField, Sub, sub, -);

impl AddAssign<&SpectralField> for SpectralField {
    fn add_assign(&mut self, rhs: &SpectralField) {
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl SubAssign<&SpectralField> for SpectralField {
    fn sub_assign(&mut self, rhs: &SpectralField) {
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, a: f64) -> SpectralField {
        self.scaled(a)
    }
}

impl Mul<f64> for SpectralField {
    type Output = SpectralField;
    fn mul(self, a: f64) -> SpectralField {
        self.scaled(a)
    }
}

impl Neg for SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scaled(-1.0)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scaled(-1.0)
    }
}

/// Two-component real vector field in coefficient space.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    comps: [SpectralField; 2],
}

impl VectorField {
    pub fn new(f1: SpectralField, f2: SpectralField) -> Self {
        debug_assert!(f1.grid == f2.grid);
        Self { comps: [f1, f2] }
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::new(SpectralField::zeros(grid), SpectralField::zeros(grid))
    }

    pub fn from_fn(grid: &Grid, f1: impl Fn(f64, f64) -> f64, f2: impl Fn(f64, f64) -> f64) -> Self {
        Self::new(SpectralField::from_fn(grid, f1), SpectralField::from_fn(grid, f2))
    }

    pub fn grid(&self) -> &Grid {
        self.comps[0].grid()
    }

    pub fn components(&self) -> &[SpectralField; 2] {
        &self.comps
    }

    pub fn into_components(self) -> [SpectralField; 2] {
        self.comps
    }

    pub fn map(&self, f: impl Fn(&SpectralField) -> SpectralField) -> Self {
        Self::new(f(&self.comps[0]), f(&self.comps[1]))
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|c| c.scaled(a))
    }

    pub fn derivative(&self, axis: Axis, order: u32) -> Self {
        self.map(|c| c.derivative(axis, order))
    }

    pub fn d1(&self) -> Self {
        self.derivative(Axis::Y1, 1)
    }

    pub fn d2(&self) -> Self {
        self.derivative(Axis::Y2, 1)
    }

    pub fn divergence(&self) -> SpectralField {
        self.comps[0].d1() + self.comps[1].d2()
    }

    /// Scalar curl `∂₁f₂ − ∂₂f₁`.
    pub fn curl(&self) -> SpectralField {
        self.comps[1].d1() - self.comps[0].d2()
    }

    pub fn laplacian(&self) -> Self {
        self.map(|c| c.laplacian())
    }

    pub fn dealias(&mut self) {
        self.comps[0].dealias();
        self.comps[1].dealias();
    }

    pub fn dealiased(mut self) -> Self {
        self.dealias();
        self
    }

    /// Leray projection `û ← û − k (k·û)/|k|²`; the mean mode is untouched.
    pub fn leray_project(&self) -> Self {
        let grid = self.grid();
        let n = grid.n();
        let mut a = self.comps[0].coeffs().to_vec();
        let mut b = self.comps[1].coeffs().to_vec();
        for i1 in 0..n {
            let k1 = grid.wavenumber(i1);
            for i2 in 0..n {
                let k2 = grid.wavenumber(i2);
                let kk = k1 * k1 + k2 * k2;
                if kk == 0.0 {
                    continue;
                }
                let idx = i1 * n + i2;
                let kdotu = (a[idx] * k1 + b[idx] * k2) / kk;
                a[idx] -= kdotu * k1;
                b[idx] -= kdotu * k2;
            }
        }
        Self::new(
            SpectralField::from_coeffs_unchecked(grid, a),
            SpectralField::from_coeffs_unchecked(grid, b),
        )
    }

    /// Gradient part `∇Δ^{-1} div f`, the complement of the Leray projection.
    pub fn gradient_part(&self) -> Self {
        self - &self.leray_project()
    }

    pub fn inner(&self, other: &VectorField) -> f64 {
        self.comps[0].inner(&other.comps[0]) + self.comps[1].inner(&other.comps[1])
    }

    pub fn sobolev_norm_sq(&self, s: u32) -> f64 {
        self.comps[0].sobolev_norm_sq(s) + self.comps[1].sobolev_norm_sq(s)
    }

    pub fn sobolev_norm(&self, s: u32) -> f64 {
        self.sobolev_norm_sq(s).sqrt()
    }

    pub fn seminorm_sq(&self, s: u32) -> f64 {
        self.comps[0].seminorm_sq(s) + self.comps[1].seminorm_sq(s)
    }

    pub fn aniso_norm_sq(&self, i: u32) -> f64 {
        self.comps[0].aniso_norm_sq(i) + self.comps[1].aniso_norm_sq(i)
    }

    pub fn l2_norm(&self) -> f64 {
        self.sobolev_norm(0)
    }

    pub fn mean(&self) -> [f64; 2] {
        [self.comps[0].mean(), self.comps[1].mean()]
    }

    pub fn zero_mean(&mut self) {
        self.comps[0].set_mean(0.0);
        self.comps[1].set_mean(0.0);
    }

    pub fn to_physical(&self) -> [Vec<f64>; 2] {
        let mut v = inverse_many(self.grid(), &[self.comps[0].coeffs(), self.comps[1].coeffs()]);
        let b = v.pop().expect("two components");
        let a = v.pop().expect("two components");
        [a, b]
    }

    pub fn from_physical(grid: &Grid, a: &[f64], b: &[f64]) -> Result<Self> {
        if a.len() != grid.len() || b.len() != grid.len() {
            return Err(Error::InvalidGrid("component length does not match grid".into()));
        }
        let mut c = forward_many(grid, &[a, b]);
        let cb = c.pop().expect("two components");
        let ca = c.pop().expect("two components");
        Ok(Self::new(
            SpectralField::from_coeffs_unchecked(grid, ca),
            SpectralField::from_coeffs_unchecked(grid, cb),
        ))
    }

    /// Largest pointwise Euclidean length.
    pub fn max_magnitude(&self) -> f64 {
        let [a, b] = self.to_physical();
        a.iter()
            .zip(&b)
            .fold(0.0_f64, |m, (x, y)| m.max((x * x + y * y).sqrt()))
    }
}

impl Index<usize> for VectorField {
    type Output = SpectralField;
    fn index(&self, i: usize) -> &SpectralField {
        &self.comps[i]
    }
}

impl IndexMut<usize> for VectorField {
    fn index_mut(&mut self, i: usize) -> &mut SpectralField {
        &mut self.comps[i]
    }
}

impl Add<&VectorField> for &VectorField {
    type Output = VectorField;
    fn add(self, rhs: &VectorField) -> VectorField {
        VectorField::new(&self.comps[0] + &rhs.comps[0], &self.comps[1] + &rhs.comps[1])
    }
}

impl Add for VectorField {
    type Output = VectorField;
    fn add(self, rhs: VectorField) -> VectorField {
        &self + &rhs
    }
}

impl Sub<&VectorField> for &VectorField {
    type Output = VectorField;
    fn sub(self, rhs: &VectorField) -> VectorField {
        VectorField::new(&self.comps[0] - &rhs.comps[0], &self.comps[1] - &rhs.comps[1])
    }
}

impl Sub for VectorField {
    type Output = VectorField;
    fn sub(self, rhs: VectorField) -> VectorField {
        &self - &rhs
    }
}

impl Mul<f64> for &VectorField {
    type Output = VectorField;
    fn mul(self, a: f64) -> VectorField {
        self.scaled(a)
    }
}

impl Mul<f64> for VectorField {
    type Output = VectorField;
    fn mul(self, a: f64) -> VectorField {
        self.scaled(a)
    }
}

impl Neg for VectorField {
    type Output = VectorField;
    fn neg(self) -> VectorField {
        self.scaled(-1.0)
    }
}

impl AddAssign<&VectorField> for VectorField {
    fn add_assign(&mut self, rhs: &VectorField) {
        self.comps[0] += &rhs.comps[0];
        self.comps[1] += &rhs.comps[1];
    }
}

impl SubAssign<&VectorField> for VectorField {
    fn sub_assign(&mut self, rhs: &VectorField) {
        self.comps[0] -= &rhs.comps[0];
        self.comps[1] -= &rhs.comps[1];
    }
}
