//! Acceptance suite: one line per criterion, nonzero exit on any failure.
//!
//! The long-running criteria drive the same code paths as the `mhd2d`
//! subcommands on the configs shipped in `configs/`.

mod common;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use flowmap_mhd::experiment::{run_scenario, Scenario, SimConfig, Summary};
use flowmap_mhd::initial::{generate_random_symmetric, InitialDataSpec};
use flowmap_mhd::kinematics::{Geometry, Physics};
use flowmap_mhd::linear::{compute_correctors, damping, evolve_mode_exact, LinearModeState};
use flowmap_mhd::spectral::Grid;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), String>;

fn config(name: &str) -> Result<SimConfig, String> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    SimConfig::load(&path).map_err(|e| e.to_string())
}

fn scenario(kind: Scenario, cfg: &SimConfig) -> Result<Summary, String> {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    run_scenario(kind, cfg, threads)
        .map(|o| o.summary)
        .map_err(|e| e.to_string())
}

fn metric(s: &Summary, name: &str) -> Result<f64, String> {
    s.metric(name).ok_or_else(|| format!("summary lacks metric {name}"))
}

fn gate_line(s: &Summary, names: &[&str]) -> Result<(bool, String), String> {
    let mut ok = true;
    let mut parts = Vec::new();
    for name in names {
        let g = s.gate(name).ok_or_else(|| format!("summary lacks gate {name}"))?;
        ok &= g.passed;
        parts.push(format!("{name}={:.4} ({})", g.value, g.condition));
    }
    Ok((ok, parts.join(", ")))
}

/// Mode state packed as `[η₁, η₂, u₁, u₂]` real and imaginary parts.
fn pack(s: &LinearModeState) -> [f64; 8] {
    let z = [s.eta_hat[0], s.eta_hat[1], s.u_hat[0], s.u_hat[1]];
    let mut out = [0.0; 8];
    for (i, c) in z.iter().enumerate() {
        out[2 * i] = c.re;
        out[2 * i + 1] = c.im;
    }
    out
}

fn mode_error(mode: &LinearModeState, t: f64) -> f64 {
    let d = damping(&mode.physics, mode.k);
    let w2 = (mode.physics.m * mode.k[1]).powi(2);
    let oracle = common::dopri45(
        |_, y: &[f64; 8]| {
            let mut f = [0.0; 8];
            for i in 0..4 {
                f[i] = y[i + 4];
                f[i + 4] = -d * y[i + 4] - w2 * y[i];
            }
            f
        },
        pack(mode),
        t,
        1e-13,
        1e-300,
    );
    let got = pack(&evolve_mode_exact(mode, t));
    // energy-weighted norm so that displacement and velocity weigh alike
    let w = w2.sqrt().max(1.0);
    let norm = |v: &[f64; 8]| -> f64 {
        (0..8)
            .map(|i| if i < 4 { w * w * v[i] * v[i] } else { v[i] * v[i] })
            .sum::<f64>()
            .sqrt()
    };
    let diff: [f64; 8] = std::array::from_fn(|i| got[i] - oracle[i]);
    norm(&diff) / norm(&oracle).max(f64::MIN_POSITIVE)
}

fn linear_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut worst: f64 = 0.0;
    let mut critical = 0;
    for i in 0..200 {
        let mut k = [0.0; 2];
        while k[1] == 0.0 {
            k = [rng.gen_range(-6..=6) as f64, rng.gen_range(-6..=6) as f64];
        }
        let m = rng.gen_range(1.0..20.0);
        let k2 = k[0] * k[0] + k[1] * k[1];
        let physics = if i < 20 {
            // ν|k|² = 2m|k₂|(1 + δ): the discriminant nearly vanishes
            critical += 1;
            let delta = rng.gen_range(-1.0..1.0) * 10f64.powf(-rng.gen_range(4.0..14.0));
            Physics::viscous(2.0 * m * k[1].abs() * (1.0 + delta) / k2, m)
        } else if rng.gen_bool(0.5) {
            Physics::viscous(rng.gen_range(1e-3..0.5), m)
        } else {
            Physics::damped(rng.gen_range(0.1..5.0), m)
        };
        let mut c = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let mode = LinearModeState {
            k,
            eta_hat: [c(), c()],
            u_hat: [c(), c()],
            physics,
        };
        let t = rng.gen_range(0.0..1.0);
        worst = worst.max(mode_error(&mode, t));
    }
    Ok((worst < 1e-9, format!("200 samples ({critical} near-critical), worst relative error {worst:.2e} < 1e-9")))
}

struct EnergyRuns {
    coarse: Summary,
    fine: Summary,
}

fn energy_runs() -> Result<EnergyRuns, String> {
    let cfg = config("energy.toml")?;
    let coarse = scenario(Scenario::Run, &cfg)?;
    let mut half = cfg.clone();
    half.stepping.dt = cfg.stepping.dt.map(|dt| dt / 2.0);
    half.stepping.record_every *= 2;
    let fine = scenario(Scenario::Run, &half)?;
    Ok(EnergyRuns { coarse, fine })
}

fn energy_identity(runs: &EnergyRuns) -> Outcome {
    let a = metric(&runs.coarse, "energy_identity")?;
    let b = metric(&runs.fine, "energy_identity")?;
    let ratio = a / b;
    Ok((
        a < 1e-4 && ratio >= 8.0,
        format!("residual {a:.2e} < 1e-4, halving dt reduces it {ratio:.2}x (need 8x)"),
    ))
}

fn constraint_drift(runs: &EnergyRuns) -> Outcome {
    let s = &runs.coarse;
    let det = metric(s, "max_det_drift")?;
    let div = metric(s, "max_div_a")?;
    let odd = metric(s, "max_odevity")?;
    let projected = s.config.stepping.odevity_project;
    Ok((
        det < 1e-6 && div < 1e-9 && odd < 1e-9 && !projected,
        format!("det drift {det:.2e} < 1e-6, div_A u {div:.2e} < 1e-9, odevity {odd:.2e} < 1e-9 (projection off)"),
    ))
}

fn viscous_decay(decay: &Summary) -> Outcome {
    gate_line(
        decay,
        &[
            "slope_v_H1",
            "slope_v_H2",
            "slope_b_H2",
            "weighted_v_H1",
            "weighted_v_H2",
            "weighted_b_H2",
            "velocity_faster",
        ],
    )
}

fn sweep(name: &str) -> Outcome {
    let s = scenario(Scenario::Msweep, &config(name)?)?;
    let gate = s.gates.first().ok_or("sweep produced no gate")?;
    let r2 = s.sweep.as_ref().map_or(f64::NAN, |r| r.r_squared);
    Ok((
        gate.passed,
        format!("{} = {:.3} ({}), r² {r2:.4}", gate.name, gate.value, gate.condition),
    ))
}

fn damped_decay() -> Outcome {
    let cfg = config("decay_damped.toml")?;
    let base = scenario(Scenario::Decay, &cfg)?;
    let mut strong = cfg.clone();
    strong.physics.m = 2.0 * cfg.physics.m;
    strong.data = match cfg.data {
        InitialDataSpec::TaylorGreen { .. } => InitialDataSpec::TaylorGreen {
            epsilon: 1.0 / strong.physics.m,
        },
        other => return Err(format!("fixed-energy doubling needs Taylor-Green data, got {other:?}")),
    };
    let doubled = scenario(Scenario::Decay, &strong)?;
    let rate = |s: &Summary| s.gate("damped_rate").map(|g| g.value).ok_or("missing damped_rate");
    let (r1, r2) = (rate(&base)?, rate(&doubled)?);
    let spread = (r2 - r1).abs() / r1.abs();
    let (ok1, line1) = gate_line(&base, &["damped_rate", "damped_r_squared"])?;
    let (ok2, _) = gate_line(&doubled, &["damped_rate", "damped_r_squared"])?;
    Ok((
        ok1 && ok2 && spread <= 0.3,
        format!(
            "m={}: {line1}; m={}: rate {r2:.4}; relative spread {spread:.3} <= 0.3",
            cfg.physics.m, strong.physics.m
        ),
    ))
}

fn cross_validation() -> Outcome {
    let s = scenario(Scenario::Compare, &config("compare.toml")?)?;
    let fine = metric(&s, "velocity_rel_diff")?;
    let coarse = metric(&s, "coarse_velocity_rel_diff")?;
    let frozen = metric(&s, "frozen_in")?;
    Ok((
        fine < 1e-3 && fine < coarse && frozen < 1e-3,
        format!("‖v‖₀ gap {fine:.2e} < 1e-3 (coarse {coarse:.2e}), frozen-in {frozen:.2e} < 1e-3"),
    ))
}

fn corrector_exactness() -> Outcome {
    let grid = Grid::periodic_2pi(64).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let eps = rng.gen_range(0.0..0.1);
        let data = generate_random_symmetric(eps, rng.gen(), 4, &grid).map_err(|e| e.to_string())?;
        let g0 = Geometry::build(&data.eta0).map_err(|e| e.to_string())?;
        let c = compute_correctors(&data.eta0, &data.u0, &g0).map_err(|e| e.to_string())?;
        let r1 = (&data.eta0 + &c.eta_r).divergence().l2_norm();
        let r2 = (&c.u_r.divergence() - &g0.div_a_tilde(&data.u0)).l2_norm();
        worst = worst.max(r1).max(r2);
    }
    Ok((worst < 1e-12, format!("50 inputs, worst residual {worst:.2e} < 1e-12")))
}

fn stability(decay: &Summary) -> Outcome {
    gate_line(decay, &["stability_ratio"])
}

fn main() -> ExitCode {
    let started = Instant::now();
    let mut failures = 0;
    let mut report = |id: usize, name: &str, outcome: Outcome| {
        let (tag, detail) = match outcome {
            Ok((true, d)) => ("PASS", d),
            Ok((false, d)) => ("FAIL", d),
            Err(e) => ("FAIL", format!("error: {e}")),
        };
        if tag == "FAIL" {
            failures += 1;
        }
        println!("{tag} {id:>2} {name:<26} {detail}");
    };

    report(1, "linear exactness", linear_exactness());
    match energy_runs() {
        Ok(runs) => {
            report(2, "energy identity", energy_identity(&runs));
            report(3, "constraint drift", constraint_drift(&runs));
        }
        Err(e) => {
            report(2, "energy identity", Err(e.clone()));
            report(3, "constraint drift", Err(e));
        }
    }
    let decay = config("decay_viscous.toml").and_then(|c| scenario(Scenario::Decay, &c));
    report(4, "viscous decay", decay.as_ref().map_err(Clone::clone).and_then(viscous_decay));
    report(5, "m-convergence viscous", sweep("msweep_viscous.toml"));
    report(6, "damped decay", damped_decay());
    report(7, "m-convergence damped", sweep("msweep_damped.toml"));
    report(8, "cross-validation", cross_validation());
    report(9, "corrector exactness", corrector_exactness());
    report(10, "stability", decay.as_ref().map_err(Clone::clone).and_then(stability));

    println!(
        "{} of 10 criteria passed ({:.0} s)",
        10 - failures,
        started.elapsed().as_secs_f64()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
