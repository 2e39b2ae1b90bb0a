//! Binary checkpoints of Lagrangian states.
//!
//! Little-endian layout:
//!
//! ```text
//! "MHD2"            4 bytes
//! version           u32 (= 1)
//! n                 u32
//! L, t, nu, kappa, m  f64 each
//! η₁, η₂, u₁, u₂     n·(n/2+1) complex each, (re, im) as f64,
//!                   row-major over (j₁ in 0..n, j₂ in 0..=n/2)
//! ```
//!
//! Only the non-redundant half of each Hermitian spectrum is stored; the
//! rest is reconstructed on load after checking that the stored half is
//! self-consistent.

use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kinematics::{FlowMapState, Physics};
use crate::spectral::{Grid, SpectralField, VectorField};

pub const MAGIC: &[u8; 4] = b"MHD2";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 5 * 8;

/// Serialize a state to bytes.
pub fn encode(state: &FlowMapState) -> Vec<u8> {
    let grid = state.grid();
    let n = grid.n();
    let half = n / 2 + 1;
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * n * half * 16);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u32).to_le_bytes());
    for v in [
        grid.period(),
        state.t,
        state.physics.nu,
        state.physics.kappa,
        state.physics.m,
    ] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for f in [&state.eta[0], &state.eta[1], &state.u[0], &state.u[1]] {
        let c = f.coeffs();
        for j1 in 0..n {
            for j2 in 0..half {
                let z = c[j1 * n + j2];
                out.extend_from_slice(&z.re.to_le_bytes());
                out.extend_from_slice(&z.im.to_le_bytes());
            }
        }
    }
    out
}

fn read_u32(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().expect("4 bytes"))
}

fn read_f64(b: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(b[at..at + 8].try_into().expect("8 bytes"))
}

/// Parse a state from bytes.
pub fn decode(bytes: &[u8]) -> Result<FlowMapState> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!("file too short for header ({} bytes)", bytes.len())));
    }
    if &bytes[0..4] != MAGIC {
        return Err(Error::Format(format!("bad magic {:?}", &bytes[0..4])));
    }
    let version = read_u32(bytes, 4);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}, expected {VERSION}")));
    }
    let n = read_u32(bytes, 8) as usize;
    let period = read_f64(bytes, 12);
    let t = read_f64(bytes, 20);
    let physics = Physics {
        nu: read_f64(bytes, 28),
        kappa: read_f64(bytes, 36),
        m: read_f64(bytes, 44),
    };
    let grid = Grid::new(n, period).map_err(|e| Error::Format(format!("bad grid in header: {e}")))?;
    let half = n / 2 + 1;
    let expected = HEADER_LEN + 4 * n * half * 16;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "payload length mismatch: header says n = {n} ({expected} bytes), file has {}",
            bytes.len()
        )));
    }
    let mut at = HEADER_LEN;
    let mut fields = Vec::with_capacity(4);
    for _ in 0..4 {
        let mut c = vec![Complex64::new(0.0, 0.0); n * n];
        for j1 in 0..n {
            for j2 in 0..half {
                c[j1 * n + j2] = Complex64::new(read_f64(bytes, at), read_f64(bytes, at + 8));
                at += 16;
            }
        }
        // self-conjugate rows j₂ = 0 and j₂ = n/2 must already be Hermitian
        for j2 in [0, n / 2] {
            for j1 in 0..n {
                let a = c[j1 * n + j2];
                let b = c[((n - j1) % n) * n + j2];
                if a != b.conj() {
                    return Err(Error::Format(format!(
                        "coefficients are not Hermitian at mode ({j1}, {j2})"
                    )));
                }
            }
        }
        for j1 in 0..n {
            for j2 in half..n {
                c[j1 * n + j2] = c[((n - j1) % n) * n + (n - j2)].conj();
            }
        }
        fields.push(SpectralField::from_coeffs(&grid, c)?);
    }
    let mut it = fields.into_iter();
    let mut next = || it.next().expect("four fields");
    let eta = VectorField::new(next(), next());
    let u = VectorField::new(next(), next());
    Ok(FlowMapState { eta, u, t, physics })
}

pub fn save(path: impl AsRef<Path>, state: &FlowMapState) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode(state)).map_err(|e| Error::io(path, e))
}

pub fn load(path: impl AsRef<Path>) -> Result<FlowMapState> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}
