//! Periodic 2D spectral arithmetic on a square torus: transforms,
//! derivatives, dealiased products, Sobolev norms, the inverse Laplacian,
//! Leray projection, and pointwise evaluation away from the grid.

mod field;
mod grid;
pub mod transform;

pub use field::{seminorm_weight, sobolev_weight, Axis, SpectralField, VectorField};
pub use grid::Grid;

use num_complex::Complex64;

/// Evaluates a fixed set of fields at arbitrary points by direct Fourier
/// summation. Exact for the represented trigonometric polynomial; Nyquist
/// modes are ignored.
#[derive(Clone, Debug)]
pub struct OffGridEvaluator {
    grid: Grid,
    band: i64,
    /// Per field, coefficients on `m1 in [-band, band]`, `m2 in [0, band]`,
    /// stored `[m1 + band][m2]`, with the `m2 > 0` half doubled.
    tables: Vec<Vec<Complex64>>,
}

impl OffGridEvaluator {
    pub fn new(fields: &[&SpectralField]) -> Self {
        let grid = fields
            .first()
            .map(|f| f.grid().clone())
            .expect("at least one field");
        let n = grid.n() as i64;
        let mut band = 0;
        for f in fields {
            for m1 in -(n / 2 - 1)..n / 2 {
                for m2 in 0..n / 2 {
                    if f.mode(m1, m2).norm_sqr() > 0.0 {
                        band = band.max(m1.abs()).max(m2);
                    }
                }
            }
        }
        let width = (2 * band + 1) as usize;
        let tables = fields
            .iter()
            .map(|f| {
                let mut t = Vec::with_capacity(width * (band as usize + 1));
                for m1 in -band..=band {
                    for m2 in 0..=band {
                        let w = if m2 == 0 { 1.0 } else { 2.0 };
                        t.push(f.mode(m1, m2) * w);
                    }
                }
                t
            })
            .collect();
        Self { grid, band, tables }
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    fn phases(&self, x: f64) -> Vec<Complex64> {
        let k0 = 2.0 * std::f64::consts::PI / self.grid.period();
        (-self.band..=self.band)
            .map(|m| Complex64::from_polar(1.0, k0 * m as f64 * x))
            .collect()
    }

    /// Values of every field at `x`.
    pub fn eval(&self, x: [f64; 2]) -> Vec<f64> {
        let e1 = self.phases(x[0]);
        let e2 = self.phases(x[1]);
        let b = self.band as usize;
        let cols = b + 1;
        self.tables
            .iter()
            .map(|t| {
                let mut acc = 0.0;
                for m2 in 0..=b {
                    let mut s = Complex64::new(0.0, 0.0);
                    for (i1, e) in e1.iter().enumerate() {
                        s += t[i1 * cols + m2] * e;
                    }
                    acc += (s * e2[b + m2]).re;
                }
                acc
            })
            .collect()
    }

    /// Values and gradients `[f, ∂₁f, ∂₂f]` of every field at `x`.
    pub fn eval_with_gradient(&self, x: [f64; 2]) -> Vec<[f64; 3]> {
        let e1 = self.phases(x[0]);
        let e2 = self.phases(x[1]);
        let b = self.band as usize;
        let cols = b + 1;
        let k0 = 2.0 * std::f64::consts::PI / self.grid.period();
        let ik1: Vec<Complex64> = (-self.band..=self.band)
            .map(|m| Complex64::new(0.0, k0 * m as f64))
            .collect();
        self.tables
            .iter()
            .map(|t| {
                let mut out = [0.0; 3];
                for m2 in 0..=b {
                    let mut s = Complex64::new(0.0, 0.0);
                    let mut s1 = Complex64::new(0.0, 0.0);
                    for (i1, e) in e1.iter().enumerate() {
                        let c = t[i1 * cols + m2] * e;
                        s += c;
                        s1 += c * ik1[i1];
                    }
                    let ph = e2[b + m2];
                    let ik2 = Complex64::new(0.0, k0 * m2 as f64);
                    out[0] += (s * ph).re;
                    out[1] += (s1 * ph).re;
                    out[2] += (s * ph * ik2).re;
                }
                out
            })
            .collect()
    }
}
