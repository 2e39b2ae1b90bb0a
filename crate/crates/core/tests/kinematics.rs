use std::f64::consts::PI;

use flowmap_mhd::initial::{generate_taylor_green, taylor_green_field};
use flowmap_mhd::kinematics::{
    enforce_unit_jacobian, invert_flow_map, inversion_self_consistency, lagrangian_op, magnetic_field,
    odevity_project, odevity_residual, Field, Geometry, LagrangianOp,
};
use flowmap_mhd::spectral::{Grid, OffGridEvaluator, SpectralField, VectorField};
use flowmap_mhd::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_vector(grid: &Grid, band: i64, amp: f64, seed: u64) -> VectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = VectorField::new(
        SpectralField::random_band_limited(grid, band, &mut rng),
        SpectralField::random_band_limited(grid, band, &mut rng),
    );
    v.scaled(amp / v.max_magnitude())
}

fn random_scalar(grid: &Grid, band: i64, seed: u64) -> SpectralField {
    SpectralField::random_band_limited(grid, band, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

#[test]
fn zero_displacement_is_flat() {
    let grid = Grid::periodic_2pi(16).unwrap();
    let g = Geometry::build(&VectorField::zeros(&grid)).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            let target = if i == j { 1.0 } else { 0.0 };
            assert!(g.a(i, j).iter().all(|&v| v == target));
        }
    }
    assert!(g.jacobian().iter().all(|&j| j == 1.0));
    let f = random_scalar(&grid, 5, 1);
    let u = random_vector(&grid, 5, 1.0, 2);
    assert!((&g.grad_a(&f) - &f.gradient()).l2_norm() < 1e-13);
    assert!((&g.div_a(&u) - &u.divergence()).l2_norm() < 1e-13);
    assert!((&g.lap_a(&f) - &f.laplacian()).l2_norm() < 1e-13);
    assert!((&g.curl_a(&u) - &u.curl()).l2_norm() < 1e-13);
}

#[test]
fn shear_displacement_has_closed_form_geometry() {
    let grid = Grid::periodic_2pi(32).unwrap();
    let a = 0.3;
    let eta = VectorField::new(
        SpectralField::from_fn(&grid, |_, y2| a * y2.sin()),
        SpectralField::zeros(&grid),
    );
    let g = Geometry::build(&eta).unwrap();
    let n = grid.n();
    for p in 0..grid.len() {
        let y2 = grid.point(p / n, p % n)[1];
        let c = a * y2.cos();
        assert!((g.grad_zeta(0, 1)[p] - c).abs() < 1e-13);
        assert!((g.grad_zeta(0, 0)[p] - 1.0).abs() < 1e-13);
        assert!((g.jacobian()[p] - 1.0).abs() < 1e-13);
        assert!((g.a(1, 0)[p] + c).abs() < 1e-13);
        assert!(g.a(0, 1)[p].abs() < 1e-13);
        assert!((g.a(0, 0)[p] - 1.0).abs() < 1e-13);
    }
}

#[test]
fn cofactor_matrix_inverts_the_deformation_gradient() {
    let grid = Grid::periodic_2pi(32).unwrap();
    for seed in 0..5 {
        let eta = random_vector(&grid, 6, 0.05, seed);
        let g = Geometry::build(&eta).unwrap();
        // independent oracle: multiply the stored matrices by hand
        let mut worst: f64 = 0.0;
        for p in 0..grid.len() {
            for i in 0..2 {
                for j in 0..2 {
                    let v: f64 = (0..2).map(|k| g.a(k, i)[p] * g.grad_zeta(k, j)[p]).sum();
                    worst = worst.max((v - if i == j { 1.0 } else { 0.0 }).abs());
                }
            }
        }
        assert!(worst < 1e-12);
        assert!(g.inverse_residual() < 1e-12);
    }
}

fn piola_residual(eta: &VectorField) -> f64 {
    let grid = eta.grid();
    let g = Geometry::build(eta).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        let c: Vec<Vec<f64>> = (0..2)
            .map(|k| (0..grid.len()).map(|p| g.jacobian()[p] * g.a(i, k)[p]).collect())
            .collect();
        let row = VectorField::from_physical(grid, &c[0], &c[1]).unwrap();
        worst = worst.max(row.divergence().l2_norm());
    }
    worst
}

#[test]
fn piola_identity_holds_for_unit_jacobian_data() {
    let grid = Grid::periodic_2pi(64).unwrap();
    let data = generate_taylor_green(0.05, &grid).unwrap();
    let g = Geometry::build(&data.eta0).unwrap();
    assert!(g.jacobian_drift() < 1e-12);
    assert!(piola_residual(&data.eta0) < 1e-10);
}

#[test]
fn div_a_of_perpendicular_gradient_vanishes_when_flat() {
    let grid = Grid::periodic_2pi(32).unwrap();
    let g = Geometry::identity(&grid);
    let psi = random_scalar(&grid, 8, 4);
    assert!(g.div_a(&psi.perp_gradient()).l2_norm() < 1e-12);
}

#[test]
fn magnetic_field_cases() {
    let grid = Grid::periodic_2pi(16).unwrap();
    let b = magnetic_field(&VectorField::zeros(&grid), 3.0);
    assert!(max_abs(&b[0].to_physical()) == 0.0);
    assert!(b[1].to_physical().iter().all(|&v| (v - 3.0).abs() < 1e-14));

    let eta = VectorField::new(SpectralField::from_fn(&grid, |_, y2| y2.sin()), SpectralField::zeros(&grid));
    let b = magnetic_field(&eta, 1.0);
    let expect = VectorField::from_fn(&grid, |_, y2| y2.cos(), |_, _| 1.0);
    assert!((&b - &expect).l2_norm() < 1e-13);
}

#[test]
fn frozen_in_field_is_div_a_free() {
    let grid = Grid::periodic_2pi(64).unwrap();
    let data = generate_taylor_green(0.05, &grid).unwrap();
    let g = Geometry::build(&data.eta0).unwrap();
    let b = magnetic_field(&data.eta0, 20.0);
    assert!(g.div_a(&b).l2_norm() < 1e-10 * b.l2_norm());
}

#[test]
fn odevity_cases() {
    let grid = Grid::periodic_2pi(32).unwrap();
    let r = odevity_residual(&taylor_green_field(&grid));
    assert!(r < 1e-14, "{r}");
    let s = SpectralField::from_fn(&grid, |_, y2| y2.sin());
    let f = VectorField::new(s.clone(), SpectralField::zeros(&grid));
    assert!(odevity_project(&f).l2_norm() < 1e-15);
    assert!((odevity_residual(&f) - 2.0 * s.l2_norm()).abs() < 1e-12);
}

#[test]
fn inversion_of_identity_is_zero() {
    let grid = Grid::periodic_2pi(16).unwrap();
    let inv = invert_flow_map(&VectorField::zeros(&grid)).unwrap();
    assert_eq!(inv.displacement().l2_norm(), 0.0);
}

#[test]
fn inversion_is_self_consistent_and_round_trips() {
    let grid = Grid::periodic_2pi(64).unwrap();
    let eta = random_vector(&grid, 4, 0.05, 9);
    let inv = invert_flow_map(&eta).unwrap();
    assert!(inversion_self_consistency(&eta, &inv) < 1e-10);

    // pull a label field back to Eulerian points, then evaluate it at ζ(y)
    let f = random_scalar(&grid, 4, 10);
    let g = inv.pull_back(&[&f]).pop().unwrap();
    let eval_g = OffGridEvaluator::new(&[&g]);
    let eval_eta = OffGridEvaluator::new(&[&eta[0], &eta[1]]);
    let fv = f.to_physical();
    let n = grid.n();
    let mut worst: f64 = 0.0;
    for p in 0..grid.len() {
        let y = grid.point(p / n, p % n);
        let e = eval_eta.eval(y);
        let x = [(y[0] + e[0]).rem_euclid(2.0 * PI), (y[1] + e[1]).rem_euclid(2.0 * PI)];
        worst = worst.max((eval_g.eval(x)[0] - fv[p]).abs());
    }
    assert!(worst < 1e-8, "round trip error {worst}");
}

#[test]
fn operator_dispatch_checks_rank() {
    let grid = Grid::periodic_2pi(16).unwrap();
    let g = Geometry::identity(&grid);
    let s = Field::Scalar(random_scalar(&grid, 3, 1));
    let v = Field::Vector(random_vector(&grid, 3, 1.0, 2));
    assert!(matches!(lagrangian_op(LagrangianOp::DivA, &g, &s), Err(Error::RankMismatch(_))));
    assert!(matches!(lagrangian_op(LagrangianOp::GradA, &g, &v), Err(Error::RankMismatch(_))));
    assert!(matches!(lagrangian_op(LagrangianOp::CurlA, &g, &s), Err(Error::RankMismatch(_))));
    assert!(matches!(lagrangian_op(LagrangianOp::LapA, &g, &v), Ok(Field::Vector(_))));
}

#[test]
fn unit_jacobian_enforcement_converges() {
    let grid = Grid::periodic_2pi(64).unwrap();
    let eta = random_vector(&grid, 4, 0.05, 3);
    let (fixed, report) = enforce_unit_jacobian(&eta, 1e-13).unwrap();
    assert!(report.residual <= 1e-11);
    let g = Geometry::build(&fixed).unwrap();
    assert!(g.jacobian_drift() < 1e-11);
    // only a gradient was added
    assert!((&fixed - &eta).curl().l2_norm() < 1e-12);
}

#[test]
fn large_displacement_is_degenerate() {
    let grid = Grid::periodic_2pi(16).unwrap();
    let eta = VectorField::new(SpectralField::from_fn(&grid, |y1, _| 2.0 * y1.sin()), SpectralField::zeros(&grid));
    assert!(matches!(Geometry::build(&eta), Err(Error::GeometryDegenerate { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn piola_identity_holds_identically(seed in any::<u64>(), amp in 0.0f64..0.1) {
        let grid = Grid::periodic_2pi(32).unwrap();
        let eta = random_vector(&grid, 5, amp, seed);
        prop_assert!(piola_residual(&eta) < 1e-10);
    }

    #[test]
    fn odevity_projection_is_idempotent(seed in any::<u64>()) {
        let grid = Grid::periodic_2pi(16).unwrap();
        let f = random_vector(&grid, 5, 1.0, seed);
        let p = odevity_project(&f);
        prop_assert!(odevity_residual(&p) < 1e-13);
        prop_assert!((&odevity_project(&p) - &p).l2_norm() < 1e-14);
    }

    #[test]
    fn lagrangian_gradient_satisfies_chain_rule(seed in any::<u64>()) {
        // ∇_A f · ∂_j ζ = ∂_j f pointwise
        let grid = Grid::periodic_2pi(64).unwrap();
        let eta = random_vector(&grid, 4, 0.05, seed);
        let f = random_scalar(&grid, 4, seed ^ 1);
        let g = Geometry::build(&eta).unwrap();
        let ga = g.grad_a(&f).to_physical();
        let (d1, d2) = (f.d1().to_physical(), f.d2().to_physical());
        let mut worst: f64 = 0.0;
        for p in 0..grid.len() {
            let c1 = ga[0][p] * g.grad_zeta(0, 0)[p] + ga[1][p] * g.grad_zeta(1, 0)[p];
            let c2 = ga[0][p] * g.grad_zeta(0, 1)[p] + ga[1][p] * g.grad_zeta(1, 1)[p];
            worst = worst.max((c1 - d1[p]).abs()).max((c2 - d2[p]).abs());
        }
        // grad_a is dealiased, so the identity holds up to the truncated tail
        prop_assert!(worst < 1e-6, "{worst}");
    }
}
