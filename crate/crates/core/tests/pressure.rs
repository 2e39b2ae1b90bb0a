use flowmap_mhd::initial::generate_taylor_green;
use flowmap_mhd::kinematics::Geometry;
use flowmap_mhd::pressure::{
    pressure_residual, pressure_source, project_div_a_free, solve_lagrangian_pressure, solve_lap_a, EllipticOptions,
};
use flowmap_mhd::spectral::{Grid, SpectralField, VectorField};
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

#[test]
fn flat_geometry_reduces_to_poisson() {
    let grid = Grid::periodic_2pi(32).unwrap();
    let g = Geometry::identity(&grid);
    let f = random_scalar(&grid, 6, 1);
    let (phi, report) = solve_lap_a(&g, &f, None, &EllipticOptions::default()).unwrap();
    assert!(report.converged);
    assert!((&phi.laplacian() - &f).l2_norm() < 1e-12 * f.l2_norm());
}

#[test]
fn zero_source_gives_zero() {
    let grid = Grid::periodic_2pi(16).unwrap();
    let eta = random_vector(&grid, 3, 0.05, 2);
    let g = Geometry::build(&eta).unwrap();
    let (phi, report) = solve_lap_a(&g, &SpectralField::zeros(&grid), None, &EllipticOptions::default()).unwrap();
    assert!(phi.is_zero());
    assert_eq!(report.iterations, 0);
}

#[test]
fn solution_satisfies_the_variable_coefficient_equation() {
    // oracle: apply Δ_A directly to the returned φ
    let grid = Grid::periodic_2pi(32).unwrap();
    for seed in 0..4 {
        let eta = random_vector(&grid, 4, 0.05, seed);
        let g = Geometry::build(&eta).unwrap();
        let mut f = random_scalar(&grid, 6, seed + 50);
        f.set_mean(0.0);
        let (phi, report) = solve_lap_a(&g, &f, None, &EllipticOptions::with_tol(1e-12)).unwrap();
        assert!(report.converged);
        assert!(report.contraction < 1.0);
        let mut r = &g.lap_a(&phi) - &f;
        r.set_mean(0.0);
        assert!(r.l2_norm() < 1e-9 * f.l2_norm(), "{}", r.l2_norm());
    }
}

#[test]
fn warm_start_needs_fewer_iterations() {
    let grid = Grid::periodic_2pi(32).unwrap();
    let eta = random_vector(&grid, 4, 0.1, 7);
    let g = Geometry::build(&eta).unwrap();
    let mut f = random_scalar(&grid, 6, 8);
    f.set_mean(0.0);
    let opts = EllipticOptions::default();
    let (phi, cold) = solve_lap_a(&g, &f, None, &opts).unwrap();
    let (_, warm) = solve_lap_a(&g, &f, Some(&phi), &opts).unwrap();
    assert!(warm.iterations < cold.iterations);
}

#[test]
fn iteration_cap_is_reported() {
    let grid = Grid::periodic_2pi(32).unwrap();
    let eta = random_vector(&grid, 4, 0.1, 3);
    let g = Geometry::build(&eta).unwrap();
    let mut f = random_scalar(&grid, 6, 4);
    f.set_mean(0.0);
    let opts = EllipticOptions {
        max_iter: 2,
        tol: 1e-15,
        ..EllipticOptions::default()
    };
    match solve_lap_a(&g, &f, None, &opts) {
        Err(Error::EllipticNonConvergence(r)) => assert!(!r.converged && r.iterations == 2),
        other => panic!("expected non-convergence, got {other:?}"),
    }
}

#[test]
fn pressure_vanishes_for_rest_state() {
    let grid = Grid::periodic_2pi(16).unwrap();
    let g = Geometry::identity(&grid);
    let z = VectorField::zeros(&grid);
    let (q, _) = solve_lagrangian_pressure(&g, &z, &z, 10.0, &EllipticOptions::default(), None).unwrap();
    assert!(q.is_zero());
}

#[test]
fn flat_pressure_matches_navier_stokes_source() {
    // η = 0: Δq = 2 det ∇u = −tr((∇u)²) for div-free u
    let grid = Grid::periodic_2pi(32).unwrap();
    let g = Geometry::identity(&grid);
    let u = random_scalar(&grid, 5, 11).perp_gradient();
    let z = VectorField::zeros(&grid);
    let (q, _) = solve_lagrangian_pressure(&g, &z, &u, 5.0, &EllipticOptions::default(), None).unwrap();
    let d = [u[0].d1(), u[0].d2(), u[1].d1(), u[1].d2()].map(|f| f.to_physical());
    let tr: Vec<f64> = (0..grid.len())
        .map(|p| -(d[0][p] * d[0][p] + 2.0 * d[1][p] * d[2][p] + d[3][p] * d[3][p]))
        .collect();
    let oracle = SpectralField::from_physical(&grid, &tr).unwrap().dealiased();
    assert!((&q.laplacian() - &oracle).l2_norm() < 1e-11 * oracle.l2_norm());
}

#[test]
fn pressure_residual_is_small_on_generated_data() {
    let grid = Grid::periodic_2pi(32).unwrap();
    let data = generate_taylor_green(0.05, &grid).unwrap();
    let g = Geometry::build(&data.eta0).unwrap();
    let opts = EllipticOptions::default();
    let (q, report) = solve_lagrangian_pressure(&g, &data.eta0, &data.u0, 20.0, &opts, None).unwrap();
    assert!(report.converged);
    assert!(pressure_residual(&g, &data.eta0, &data.u0, 20.0, &q) < 1e-9);
    let src = pressure_source(&g, &data.eta0, &data.u0, 20.0);
    assert!(src.l2_norm() > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn projection_is_div_a_free_and_idempotent(seed in any::<u64>(), amp in 0.0f64..0.1) {
        let grid = Grid::periodic_2pi(32).unwrap();
        let eta = random_vector(&grid, 4, amp, seed);
        let g = Geometry::build(&eta).unwrap();
        let u = random_vector(&grid, 6, 1.0, seed ^ 7);
        let opts = EllipticOptions::with_tol(1e-12);
        let (p, _, _) = project_div_a_free(&g, &u, &opts).unwrap();
        prop_assert!(g.div_a(&p).l2_norm() < 1e-9 * u.l2_norm());
        let (pp, _, _) = project_div_a_free(&g, &p, &opts).unwrap();
        prop_assert!((&pp - &p).l2_norm() < 1e-9 * u.l2_norm());
    }
}
