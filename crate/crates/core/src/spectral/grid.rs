use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Square periodic grid with `n` points per axis and period `L`.
///
/// Spectral arrays are stored row-major with the `y1` index as the row,
/// so coefficient `(i1, i2)` lives at `i1 * n + i2`. Mode numbers follow
/// the FFT convention: index `i` carries mode `i` for `i < n/2` and
/// `i - n` otherwise.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridData>,
}

struct GridData {
    n: usize,
    period: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    modes: Vec<i64>,
    wavenumbers: Vec<f64>,
    /// Wavenumbers with the Nyquist entry zeroed (odd derivatives).
    odd_wavenumbers: Vec<f64>,
    cutoff: i64,
    conj: Vec<usize>,
    retained: Vec<bool>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.inner.n)
            .field("period", &self.inner.period)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.n == other.inner.n && self.inner.period == other.inner.period)
    }
}

impl Grid {
    pub fn new(n: usize, period: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n = {n} must be a power of two and at least 8"
            )));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidGrid(format!("period {period} must be positive")));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let modes: Vec<i64> = (0..n)
            .map(|i| if i < n / 2 { i as i64 } else { i as i64 - n as i64 })
            .collect();
        let wavenumbers: Vec<f64> = modes.iter().map(|&m| 2.0 * PI * m as f64 / period).collect();
        let cutoff = ((n - 1) / 3) as i64;
        let odd_wavenumbers: Vec<f64> = wavenumbers
            .iter()
            .enumerate()
            .map(|(i, &k)| if i == n / 2 { 0.0 } else { k })
            .collect();
        let mut conj = Vec::with_capacity(n * n);
        let mut retained = Vec::with_capacity(n * n);
        for i1 in 0..n {
            for i2 in 0..n {
                conj.push(((n - i1) % n) * n + (n - i2) % n);
                retained.push(modes[i1].abs() <= cutoff && modes[i2].abs() <= cutoff);
            }
        }
        Ok(Self {
            inner: Arc::new(GridData {
                n,
                period,
                forward,
                inverse,
                modes,
                wavenumbers,
                odd_wavenumbers,
                cutoff,
                conj,
                retained,
            }),
        })
    }

    /// Grid on the `2π`-periodic torus.
    pub fn periodic_2pi(n: usize) -> Result<Self> {
        Self::new(n, 2.0 * PI)
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    pub fn period(&self) -> f64 {
        self.inner.period
    }

    /// Grid spacing `h = L / n`.
    pub fn spacing(&self) -> f64 {
        self.inner.period / self.inner.n as f64
    }

    /// Number of points (and coefficients), `n²`.
    pub fn len(&self) -> usize {
        self.inner.n * self.inner.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Area of the periodic cell.
    pub fn area(&self) -> f64 {
        self.inner.period * self.inner.period
    }

    /// Integer mode number of array index `i`.
    pub fn mode(&self, i: usize) -> i64 {
        self.inner.modes[i]
    }

    /// Wavenumber `2π m / L` of array index `i`.
    pub fn wavenumber(&self, i: usize) -> f64 {
        self.inner.wavenumbers[i]
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.inner.wavenumbers
    }

    /// Array index of mode number `m`.
    pub fn index_of(&self, m: i64) -> usize {
        m.rem_euclid(self.inner.n as i64) as usize
    }

    /// Largest retained mode number under the 2/3 rule.
    pub fn dealias_cutoff(&self) -> i64 {
        self.inner.cutoff
    }

    pub fn is_retained(&self, i1: usize, i2: usize) -> bool {
        self.inner.retained[i1 * self.inner.n + i2]
    }

    /// Per flat index: whether the mode survives the 2/3 rule.
    pub fn retained_mask(&self) -> &[bool] {
        &self.inner.retained
    }

    /// Flat index of the Hermitian partner `(-m1, -m2)`.
    pub fn conjugate_index(&self, idx: usize) -> usize {
        self.inner.conj[idx]
    }

    pub(crate) fn conjugate_table(&self) -> &[usize] {
        &self.inner.conj
    }

    /// Wavenumbers with the Nyquist entry zeroed, the multiplier of a
    /// first derivative.
    pub fn odd_wavenumbers(&self) -> &[f64] {
        &self.inner.odd_wavenumbers
    }

    /// Physical coordinates of grid point `(j1, j2)`.
    pub fn point(&self, j1: usize, j2: usize) -> [f64; 2] {
        let h = self.spacing();
        [j1 as f64 * h, j2 as f64 * h]
    }

    pub fn same_as(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                n_a: self.n(),
                period_a: self.period(),
                n_b: other.n(),
                period_b: other.period(),
            })
        }
    }

    /// Unnormalized forward 2D DFT in place.
    pub(crate) fn fft2_forward(&self, buf: &mut [Complex64]) {
        self.fft2(buf, &self.inner.forward);
    }

    /// Unnormalized inverse 2D DFT in place.
    pub(crate) fn fft2_inverse(&self, buf: &mut [Complex64]) {
        self.fft2(buf, &self.inner.inverse);
    }

    fn fft2(&self, buf: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.inner.n;
        debug_assert_eq!(buf.len(), n * n);
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(buf, &mut scratch);
        transpose(buf, n);
        plan.process_with_scratch(buf, &mut scratch);
        transpose(buf, n);
    }
}

fn transpose(buf: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}
