//! Real-field transforms between grid values and normalized Fourier
//! coefficients. Two real fields share one complex FFT whenever possible.
//!
//! Coefficients are normalized so that `f(y) = Σ_k c_k e^{i k·y}`; the
//! forward transform symmetrizes its output so that `c_{-k} = conj(c_k)`
//! holds bit for bit.

use num_complex::Complex64;

use super::Grid;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Forward transform of one real field.
pub fn forward_real(grid: &Grid, values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    grid.fft2_forward(&mut buf);
    let scale = 1.0 / grid.len() as f64;
    let conj = grid.conjugate_table();
    let mut out = vec![ZERO; grid.len()];
    for (idx, o) in out.iter_mut().enumerate() {
        let z = buf[idx];
        let w = buf[conj[idx]];
        *o = Complex64::new(0.5 * (z.re + w.re) * scale, 0.5 * (z.im - w.im) * scale);
    }
    out
}

/// Forward transform of two real fields with a single complex FFT.
pub fn forward_real_pair(grid: &Grid, a: &[f64], b: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut buf: Vec<Complex64> = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| Complex64::new(x, y))
        .collect();
    grid.fft2_forward(&mut buf);
    let scale = 0.5 / grid.len() as f64;
    let conj = grid.conjugate_table();
    let mut ca = vec![ZERO; grid.len()];
    let mut cb = vec![ZERO; grid.len()];
    for idx in 0..grid.len() {
        let z = buf[idx];
        let w = buf[conj[idx]];
        // a_k = (z + conj w) / 2, b_k = (z - conj w) / (2i)
        ca[idx] = Complex64::new((z.re + w.re) * scale, (z.im - w.im) * scale);
        cb[idx] = Complex64::new((z.im + w.im) * scale, (w.re - z.re) * scale);
    }
    (ca, cb)
}

/// Inverse transform of one Hermitian coefficient array to grid values.
pub fn inverse_real(grid: &Grid, coeffs: &[Complex64]) -> Vec<f64> {
    let mut buf = coeffs.to_vec();
    grid.fft2_inverse(&mut buf);
    buf.into_iter().map(|z| z.re).collect()
}

/// Inverse transform of two Hermitian coefficient arrays with one FFT.
pub fn inverse_real_pair(grid: &Grid, a: &[Complex64], b: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    let mut buf: Vec<Complex64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| Complex64::new(x.re - y.im, x.im + y.re))
        .collect();
    grid.fft2_inverse(&mut buf);
    let mut va = Vec::with_capacity(buf.len());
    let mut vb = Vec::with_capacity(buf.len());
    for z in buf {
        va.push(z.re);
        vb.push(z.im);
    }
    (va, vb)
}

/// Inverse transforms of many coefficient arrays, pairing them up.
pub fn inverse_many(grid: &Grid, coeffs: &[&[Complex64]]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(coeffs.len());
    let mut chunks = coeffs.chunks(2);
    for chunk in &mut chunks {
        if chunk.len() == 2 {
            let (a, b) = inverse_real_pair(grid, chunk[0], chunk[1]);
            out.push(a);
            out.push(b);
        } else {
            out.push(inverse_real(grid, chunk[0]));
        }
    }
    out
}

/// Forward transforms of many real arrays, pairing them up.
pub fn forward_many(grid: &Grid, values: &[&[f64]]) -> Vec<Vec<Complex64>> {
    let mut out = Vec::with_capacity(values.len());
    for chunk in values.chunks(2) {
        if chunk.len() == 2 {
            let (a, b) = forward_real_pair(grid, chunk[0], chunk[1]);
            out.push(a);
            out.push(b);
        } else {
            out.push(forward_real(grid, chunk[0]));
        }
    }
    out
}
