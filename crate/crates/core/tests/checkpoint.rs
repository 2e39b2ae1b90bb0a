use flowmap_mhd::checkpoint::{decode, encode, load, save, MAGIC};
use flowmap_mhd::initial::generate_random_symmetric;
use flowmap_mhd::kinematics::{FlowMapState, Physics};
use flowmap_mhd::spectral::Grid;
use flowmap_mhd::Error;
use proptest::prelude::*;

fn state(seed: u64, n: usize) -> FlowMapState {
    let grid = Grid::new(n, 3.0).unwrap();
    let d = generate_random_symmetric(0.05, seed, 2, &grid).unwrap();
    FlowMapState {
        eta: d.eta0,
        u: d.u0,
        t: 1.25,
        physics: Physics { nu: 0.05, kappa: 0.0, m: 12.0 },
    }
}

#[test]
fn round_trip_is_bit_exact() {
    let s = state(1, 16);
    let back = decode(&encode(&s)).unwrap();
    assert_eq!(back.eta, s.eta);
    assert_eq!(back.u, s.u);
    assert_eq!(back.t.to_bits(), s.t.to_bits());
    assert_eq!(back.physics, s.physics);
    assert_eq!(back.grid(), s.grid());
}

#[test]
fn file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.mhd2");
    let s = state(2, 8);
    save(&path, &s).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(&bytes[..4], MAGIC);
    // header plus four half spectra
    assert_eq!(bytes.len(), 52 + 4 * 8 * 5 * 16);
    assert_eq!(load(&path).unwrap().u, s.u);
    assert!(matches!(load(dir.path().join("missing")), Err(Error::Io { .. })));
}

#[test]
fn corrupt_files_are_rejected() {
    let bytes = encode(&state(3, 8));
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(matches!(decode(&bad), Err(Error::Format(_))));
    let mut bad = bytes.clone();
    bad[4] = 9;
    assert!(matches!(decode(&bad), Err(Error::Format(_))));
    assert!(matches!(decode(&bytes[..bytes.len() - 1]), Err(Error::Format(_))));
    assert!(matches!(decode(&bytes[..10]), Err(Error::Format(_))));
    // break Hermitian symmetry at mode (1, 0)
    let mut bad = bytes.clone();
    let at = 52 + (8 / 2 + 1) * 16;
    bad[at..at + 8].copy_from_slice(&123.0f64.to_le_bytes());
    assert!(matches!(decode(&bad), Err(Error::Format(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn encoding_is_deterministic_and_invertible(seed in any::<u64>()) {
        let s = state(seed, 16);
        let a = encode(&s);
        prop_assert_eq!(&a, &encode(&s));
        prop_assert_eq!(encode(&decode(&a).unwrap()), a);
    }
}
