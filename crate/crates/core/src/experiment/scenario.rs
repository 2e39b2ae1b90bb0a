//! The six subcommands as library functions.

use std::path::Path;
use std::time::Instant;

use crate::checkpoint;
use crate::diagnostics::{
    default_window, energy_identity_residual, fit_decay, linear_error_record, msweep_slope, record_lagrangian,
    series, summarize_linear_error, DecayKind, EnergyRecord, RecordOptions,
};
use crate::error::{Error, Result};
use crate::evolve::{default_dt, EulerianState, EulerianStepper, FlowMapTracker, LagrangianStepper};
use crate::initial::{generate, validate, InitialData, InitialDataSpec};
use crate::kinematics::{odevity_residual, FlowMapState, Geometry};
use crate::linear::{compute_correctors, evolve_linear_field};
use crate::spectral::VectorField;

use super::config::{SimConfig, SweepScaling};
use super::output::{write_csv, Gate, NamedFit, Summary};

/// Subcommand selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    Run,
    Decay,
    Msweep,
    Compare,
    Linear,
    GenIc,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Run => "run",
            Scenario::Decay => "decay",
            Scenario::Msweep => "msweep",
            Scenario::Compare => "compare",
            Scenario::Linear => "linear",
            Scenario::GenIc => "gen-ic",
        }
    }
}

/// Everything a subcommand produces.
#[derive(Clone, Debug)]
pub struct ScenarioOutput {
    pub summary: Summary,
    /// Named time series, written as `<name>.csv`.
    pub series: Vec<(String, Vec<EnergyRecord>)>,
    /// Named states, written as `<name>.mhd2`.
    pub checkpoints: Vec<(String, FlowMapState)>,
}

impl ScenarioOutput {
    fn new(summary: Summary) -> Self {
        Self {
            summary,
            series: Vec::new(),
            checkpoints: Vec::new(),
        }
    }

    pub fn series(&self, name: &str) -> Option<&[EnergyRecord]> {
        self.series.iter().find(|(n, _)| n == name).map(|(_, s)| s.as_slice())
    }

    /// Write `summary.json`, the CSV files and the checkpoints into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, records) in &self.series {
            write_csv(dir.join(format!("{name}.csv")), records)?;
        }
        for (name, state) in &self.checkpoints {
            checkpoint::save(dir.join(format!("{name}.mhd2")), state)?;
        }
        self.summary.write(dir.join("summary.json"))
    }

    fn finish(mut self, started: Instant) -> Self {
        let mut labels: Vec<String> = self.summary.metrics.keys().cloned().collect();
        labels.extend(self.summary.gates.iter().map(|g| g.name.clone()));
        labels.extend(self.summary.fits.iter().map(|f| f.quantity.clone()));
        for (_, records) in &self.series {
            if let Some(first) = records.first() {
                labels.extend(first.norms.keys().cloned());
                labels.extend(first.residuals.keys().cloned());
            }
        }
        self.summary.trace(labels);
        self.summary.wall_time_s = started.elapsed().as_secs_f64();
        self
    }
}

/// Run one subcommand.
pub fn run_scenario(kind: Scenario, cfg: &SimConfig, threads: usize) -> Result<ScenarioOutput> {
    match kind {
        Scenario::Run => run(cfg),
        Scenario::Decay => decay(cfg),
        Scenario::Msweep => msweep(cfg, threads),
        Scenario::Compare => compare(cfg),
        Scenario::Linear => linear(cfg),
        Scenario::GenIc => gen_ic(cfg),
    }
}

/// Initial data of a config on its own grid.
pub fn initial_data(cfg: &SimConfig) -> Result<InitialData> {
    let grid = cfg.grid()?;
    generate(&cfg.data, &grid).map_err(|e| e.context("building initial data"))
}

/// Largest step `≤ requested` that divides `t_end` into a whole number of
/// steps (rounded up to a multiple of `multiple`).
pub fn effective_dt(requested: f64, t_end: f64, multiple: usize) -> (f64, usize) {
    let raw = (t_end / requested - 1e-9).ceil().max(1.0) as usize;
    let steps = raw.div_ceil(multiple) * multiple;
    (t_end / steps as f64, steps)
}

/// The configured step, or the velocity CFL step capped at `alfven_cfl / m`.
pub fn requested_dt(cfg: &SimConfig, u0: &VectorField) -> f64 {
    cfg.stepping.dt.unwrap_or_else(|| {
        let alfven = cfg.stepping.alfven_cfl / cfg.physics.m.max(f64::MIN_POSITIVE);
        default_dt(u0).min(alfven)
    })
}

/// A simulated trajectory with per-step constraint maxima.
#[derive(Clone, Debug)]
pub struct Trajectory {
    /// Full records every `record_every` steps, plus the first and last.
    pub records: Vec<EnergyRecord>,
    /// `kinetic`, `magnetic`, `dissipation` after every step.
    pub energy: Vec<EnergyRecord>,
    pub initial_state: FlowMapState,
    pub final_state: FlowMapState,
    pub dt: f64,
    pub steps: usize,
    pub max_det_drift: f64,
    pub max_div_a: f64,
    pub max_odevity: f64,
    pub max_pressure_iterations: usize,
}

fn energy_sample(state: &FlowMapState, grad_a_u_sq: f64) -> EnergyRecord {
    let p = state.physics;
    let kinetic = state.u.sobolev_norm_sq(0);
    let mut r = EnergyRecord::new(state.t);
    r.set_norm("kinetic", kinetic);
    r.set_norm("magnetic", state.magnetic_perturbation().sobolev_norm_sq(0));
    r.set_norm("dissipation", 2.0 * p.nu * grad_a_u_sq + 2.0 * p.kappa * kinetic);
    r
}

fn grad_a_sq(geometry: &Geometry, u: &VectorField) -> f64 {
    geometry.grad_a(&u[0]).sobolev_norm_sq(0) + geometry.grad_a(&u[1]).sobolev_norm_sq(0)
}

/// Integrate the Lagrangian system from `data` to `t_end`, calling `visit`
/// on every recorded state.
pub fn simulate(
    cfg: &SimConfig,
    data: InitialData,
    dt: Option<f64>,
    opts: RecordOptions,
    mut visit: impl FnMut(&FlowMapState) -> Result<()>,
) -> Result<Trajectory> {
    let physics = cfg.physics();
    let requested = dt.unwrap_or_else(|| requested_dt(cfg, &data.u0));
    let (dt, steps) = effective_dt(requested, cfg.stepping.t_end, 1);
    let mut state = data.into_state(physics);
    let grid = state.grid().clone();
    let geometry = state.geometry().map_err(|e| e.context("initial geometry"))?;
    let mut records = vec![record_lagrangian(&state, &geometry, opts)];
    let mut energy = vec![energy_sample(&state, grad_a_sq(&geometry, &state.u))];
    visit(&state)?;
    let initial_state = state.clone();
    let mut stepper = LagrangianStepper::new(&grid, physics, cfg.step_control(dt))?;
    let mut traj_max = (0.0_f64, 0.0_f64, odevity_residual(&state.eta).max(odevity_residual(&state.u)), 0);
    for k in 1..=steps {
        let report = stepper
            .step(&mut state)
            .map_err(|e| e.context(format!("step {k} of {steps} from t = {:.6}", state.t)))?;
        if k == steps {
            // land exactly on t_end
            state.t = cfg.stepping.t_end;
        }
        traj_max.0 = traj_max.0.max(report.det_drift);
        traj_max.1 = traj_max.1.max(report.div_a_residual);
        traj_max.2 = traj_max.2.max(odevity_residual(&state.eta).max(odevity_residual(&state.u)));
        traj_max.3 = traj_max.3.max(report.pressure_iterations);
        energy.push(energy_sample(&state, report.grad_a_u_sq));
        if k % cfg.stepping.record_every == 0 || k == steps {
            let geometry = state.geometry()?;
            records.push(record_lagrangian(&state, &geometry, opts));
            visit(&state)?;
        }
    }
    Ok(Trajectory {
        records,
        energy,
        initial_state,
        final_state: state,
        dt,
        steps,
        max_det_drift: traj_max.0,
        max_div_a: traj_max.1,
        max_odevity: traj_max.2,
        max_pressure_iterations: traj_max.3,
    })
}

fn trajectory_metrics(summary: &mut Summary, traj: &Trajectory) -> Result<()> {
    let m = &mut summary.metrics;
    m.insert("energy_identity".into(), energy_identity_residual(&traj.energy)?);
    m.insert("max_det_drift".into(), traj.max_det_drift);
    m.insert("max_div_a".into(), traj.max_div_a);
    m.insert("max_odevity".into(), traj.max_odevity);
    m.insert("max_pressure_iterations".into(), traj.max_pressure_iterations as f64);
    m.insert("dt".into(), traj.dt);
    m.insert("steps".into(), traj.steps as f64);
    Ok(())
}

fn record_options(cfg: &SimConfig) -> RecordOptions {
    RecordOptions {
        eulerian: false,
        damped: cfg.is_damped(),
    }
}

/// `run`: one trajectory with its records and energy series.
pub fn run(cfg: &SimConfig) -> Result<ScenarioOutput> {
    let started = Instant::now();
    run_with_data(cfg, initial_data(cfg)?, started)
}

/// `run` from explicit initial data.
pub fn run_with_data(cfg: &SimConfig, data: InitialData, started: Instant) -> Result<ScenarioOutput> {
    let mut summary = Summary::new(Scenario::Run.name(), cfg);
    summary.validation = Some(validate(&data.eta0, &data.u0, cfg.physics.m));
    let traj = simulate(cfg, data, None, record_options(cfg), |_| Ok(()))?;
    trajectory_metrics(&mut summary, &traj)?;
    let mut out = ScenarioOutput::new(summary);
    out.checkpoints.push(("final".into(), traj.final_state));
    out.series.push(("records".into(), traj.records));
    out.series.push(("energy".into(), traj.energy));
    Ok(out.finish(started))
}

fn weighted_growth(records: &[EnergyRecord], label: &str, power: f64, early_end: f64) -> Result<f64> {
    let values = series(records, label)?;
    let weighted: Vec<(f64, f64)> = records
        .iter()
        .zip(values)
        .map(|(r, v)| (r.t, (1.0 + r.t).powf(power) * v))
        .collect();
    let early = weighted
        .iter()
        .filter(|(t, _)| *t <= early_end)
        .fold(0.0_f64, |a, (_, v)| a.max(*v));
    let last = weighted.last().map(|(_, v)| *v).unwrap_or(0.0);
    Ok(if early > 0.0 { last / early } else { f64::INFINITY })
}

/// `decay`: a long run with decay fits gated against target exponents.
pub fn decay(cfg: &SimConfig) -> Result<ScenarioOutput> {
    let started = Instant::now();
    let data = initial_data(cfg)?;
    let mut summary = Summary::new(Scenario::Decay.name(), cfg);
    summary.validation = Some(validate(&data.eta0, &data.u0, cfg.physics.m));
    let damped = cfg.is_damped();
    let opts = RecordOptions {
        eulerian: !damped,
        damped,
    };
    let traj = simulate(cfg, data, None, opts, |_| Ok(()))?;
    trajectory_metrics(&mut summary, &traj)?;
    let dc = &cfg.decay;
    let window = dc.window.unwrap_or_else(|| default_window(cfg.stepping.t_end));
    let recs = &traj.records;
    if damped {
        let fit = fit_decay(recs, "damped_energy", DecayKind::Exponential, window)?;
        summary.gates.push(Gate::above("damped_rate", fit.exponent_or_rate, 0.0));
        summary.gates.push(Gate::at_least("damped_r_squared", fit.r_squared, dc.min_r_squared));
        summary.fits.push(NamedFit {
            quantity: "damped_energy".into(),
            fit,
        });
    } else {
        let labels = ["v_H1_eulerian", "v_H2_eulerian", "b_H2_eulerian"];
        let gate_names = ["slope_v_H1", "slope_v_H2", "slope_b_H2"];
        let mut slopes = [0.0; 3];
        for i in 0..3 {
            let fit = fit_decay(recs, labels[i], DecayKind::Power, window)?;
            slopes[i] = fit.exponent_or_rate;
            summary
                .gates
                .push(Gate::at_most(gate_names[i], slopes[i], dc.targets[i] + dc.tolerance));
            summary.fits.push(NamedFit {
                quantity: labels[i].into(),
                fit,
            });
        }
        for (label, name, power) in [
            ("v_H1_eulerian", "weighted_v_H1", 1.5),
            ("v_H2_eulerian", "weighted_v_H2", 1.0),
            ("b_H2_eulerian", "weighted_b_H2", 0.5),
        ] {
            let ratio = weighted_growth(recs, label, power, dc.early_end)?;
            summary.gates.push(Gate::at_most(name, ratio, dc.weighted_growth));
        }
        summary
            .gates
            .push(Gate::at_most("velocity_faster", slopes[1] - slopes[2], -dc.velocity_margin));
        let e20 = series(recs, "E20")?;
        let reference = recs
            .iter()
            .zip(&e20)
            .filter(|(r, _)| r.t <= dc.stability_ref_end)
            .fold(0.0_f64, |a, (_, v)| a.max(*v));
        let peak = e20.iter().fold(0.0_f64, |a, v| a.max(*v));
        let ratio = if reference > 0.0 { peak / reference } else { f64::INFINITY };
        summary.gates.push(Gate::at_most("stability_ratio", ratio, dc.stability_ratio));
    }
    let mut out = ScenarioOutput::new(summary);
    out.checkpoints.push(("final".into(), traj.final_state));
    out.series.push(("records".into(), traj.records));
    out.series.push(("energy".into(), traj.energy));
    Ok(out.finish(started))
}

/// Error series of one sweep member against its linearization.
#[derive(Clone, Debug)]
pub struct SweepMember {
    pub m: f64,
    pub dt: f64,
    /// `D(m)`: the viscous or damped error measure.
    pub error: f64,
    pub records: Vec<EnergyRecord>,
}

fn member_config(cfg: &SimConfig, m: f64) -> Result<SimConfig> {
    let mut c = cfg.clone();
    c.physics.m = m;
    if cfg.msweep.scaling == SweepScaling::FixedEnergy {
        match &mut c.data {
            InitialDataSpec::TaylorGreen { epsilon } | InitialDataSpec::RandomSymmetric { epsilon, .. } => {
                *epsilon = 1.0 / m;
            }
            InitialDataSpec::FromFile { .. } => {
                return Err(Error::config(
                    "msweep.scaling",
                    "fixed_energy needs a generated data family, not from_file",
                ))
            }
        }
    }
    Ok(c)
}

/// Run one member of an `m`-sweep: the nonlinear trajectory and the exact
/// linear solution from corrector-adjusted data, compared at every record.
pub fn sweep_member(cfg: &SimConfig, m: f64) -> Result<SweepMember> {
    let mc = member_config(cfg, m)?;
    let data = initial_data(&mc)?;
    let geometry0 = Geometry::build(&data.eta0)?;
    let corr = compute_correctors(&data.eta0, &data.u0, &geometry0)?;
    let lin_eta0 = &data.eta0 + &corr.eta_r;
    let lin_u0 = &data.u0 + &corr.u_r;
    let physics = mc.physics();
    let dt = requested_dt(&mc, &data.u0);
    let mut records = Vec::new();
    simulate(&mc, data, Some(dt), RecordOptions::default(), |state| {
        let (eta, u) = evolve_linear_field(&lin_eta0, &lin_u0, &physics, state.t)?;
        let linear = FlowMapState {
            eta,
            u,
            t: state.t,
            physics,
        };
        records.push(linear_error_record(state, &linear)?);
        Ok(())
    })
    .map_err(|e| e.context(format!("sweep member m = {m}")))?;
    let summary = summarize_linear_error(&records)?;
    let error = if cfg.is_damped() {
        summary.damped
    } else {
        summary.viscous
    };
    Ok(SweepMember {
        m,
        dt,
        error,
        records,
    })
}

/// `msweep`: error against the linearization for each `m`, and the
/// log-log slope of the error in `m`.
pub fn msweep(cfg: &SimConfig, threads: usize) -> Result<ScenarioOutput> {
    let started = Instant::now();
    let ms = &cfg.msweep.m_values;
    let threads = threads.clamp(1, ms.len());
    let mut results: Vec<Option<Result<SweepMember>>> = (0..ms.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let chunks: Vec<Vec<usize>> = (0..threads)
            .map(|w| (w..ms.len()).step_by(threads).collect())
            .collect();
        let handles: Vec<_> = chunks
            .into_iter()
            .map(|idx| {
                scope.spawn(move || {
                    idx.into_iter()
                        .map(|i| (i, sweep_member(cfg, ms[i])))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("sweep worker panicked") {
                results[i] = Some(r);
            }
        }
    });
    let members = results
        .into_iter()
        .map(|r| r.expect("every member ran"))
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<(f64, f64)> = members.iter().map(|s| (s.m, s.error)).collect();
    let sweep = msweep_slope(&points)?;
    let damped = cfg.is_damped();
    let (name, default_slope) = if damped {
        ("sweep_slope_damped", -2.0 + 0.3)
    } else {
        ("sweep_slope_viscous", -1.0 + 0.3)
    };
    let mut summary = Summary::new(Scenario::Msweep.name(), cfg);
    summary
        .gates
        .push(Gate::at_most(name, sweep.slope, cfg.msweep.max_slope.unwrap_or(default_slope)));
    let error_label = if damped { "damped_error" } else { "viscous_error" };
    let mut aggregate = Vec::new();
    for s in &members {
        summary.metrics.insert(format!("{error_label}_m{}", s.m), s.error);
        summary.metrics.insert(format!("dt_m{}", s.m), s.dt);
        let mut r = EnergyRecord::new(s.m);
        r.set_norm(error_label, s.error);
        aggregate.push(r);
    }
    summary.sweep = Some(sweep);
    let mut out = ScenarioOutput::new(summary);
    for s in members {
        out.series.push((format!("msweep_m{}", s.m), s.records));
    }
    // the aggregate reuses the CSV layout with `m` in the time column
    out.series.push(("msweep".into(), aggregate));
    Ok(out.finish(started))
}

/// Outcome of one Lagrangian/Eulerian comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub n: usize,
    pub dt: f64,
    /// `|‖v‖₀ − ‖u‖₀| / ‖u‖₀` at `t_end`.
    pub velocity_rel_diff: f64,
    /// `‖v − u∘ζ^{-1}‖₀ / ‖u‖₀` at `t_end`.
    pub velocity_field_rel_diff: f64,
    /// Frozen-in residual of the tracked particles at `t_end`.
    pub frozen_in: f64,
    /// `‖η_tracked − η‖₀ / ‖η‖₀` at `t_end`.
    pub flow_map_rel_diff: f64,
}

/// Run the Lagrangian solver, the Eulerian solver and the particle tracker
/// from matched data on an `n`-point grid with step `dt`.
pub fn compare_at(cfg: &SimConfig, n: usize, dt: f64) -> Result<Comparison> {
    let mut c = cfg.clone();
    c.grid.n = n;
    let data = initial_data(&c)?;
    let (dt, steps) = effective_dt(dt, c.stepping.t_end, 2);
    let start = data.clone().into_state(c.physics());
    let lag = simulate(&c, data, Some(dt), RecordOptions::default(), |_| Ok(()))?;
    let mut euler = EulerianState::from_lagrangian(&start).map_err(|e| e.context("pushing data forward"))?;
    let mut stepper = EulerianStepper::new(euler.grid(), c.physics(), c.step_control(dt))?;
    let mut tracker = FlowMapTracker::new(&start.eta, euler.clone());
    for k in 1..=steps {
        stepper
            .step(&mut euler)
            .map_err(|e| e.context(format!("Eulerian step {k} of {steps}")))?;
        if k == steps {
            euler.t = c.stepping.t_end;
        }
        tracker.push(euler.clone());
    }
    let fin = &lag.final_state;
    let u_norm = fin.u.l2_norm();
    let rel = |x: f64| if u_norm > 0.0 { x / u_norm } else { x };
    let pushed = EulerianState::from_lagrangian(fin).map_err(|e| e.context("pushing the final state forward"))?;
    let eta_norm = fin.eta.l2_norm();
    let tracked = tracker.displacement();
    let eta_diff = (&tracked - &fin.eta).l2_norm();
    Ok(Comparison {
        n,
        dt,
        velocity_rel_diff: rel((euler.v.l2_norm() - u_norm).abs()),
        velocity_field_rel_diff: rel((&euler.v - &pushed.v).l2_norm()),
        frozen_in: tracker.frozen_in_residual(&euler),
        flow_map_rel_diff: if eta_norm > 0.0 { eta_diff / eta_norm } else { eta_diff },
    })
}

/// `compare`: Lagrangian vs Eulerian vs tracked flow map.
pub fn compare(cfg: &SimConfig) -> Result<ScenarioOutput> {
    let started = Instant::now();
    let grid = cfg.grid()?;
    let data = generate(&cfg.data, &grid)?;
    let dt = requested_dt(cfg, &data.u0);
    let mut summary = Summary::new(Scenario::Compare.name(), cfg);
    summary.validation = Some(validate(&data.eta0, &data.u0, cfg.physics.m));
    let fine = compare_at(cfg, cfg.grid.n, dt)?;
    let m = &mut summary.metrics;
    m.insert("velocity_rel_diff".into(), fine.velocity_rel_diff);
    m.insert("velocity_field_rel_diff".into(), fine.velocity_field_rel_diff);
    m.insert("frozen_in".into(), fine.frozen_in);
    m.insert("flow_map_rel_diff".into(), fine.flow_map_rel_diff);
    m.insert("dt".into(), fine.dt);
    if cfg.compare.refine {
        let coarse = compare_at(cfg, cfg.grid.n / 2, 2.0 * dt)?;
        m.insert("coarse_velocity_rel_diff".into(), coarse.velocity_rel_diff);
        m.insert("coarse_velocity_field_rel_diff".into(), coarse.velocity_field_rel_diff);
        m.insert("coarse_frozen_in".into(), coarse.frozen_in);
        m.insert("coarse_dt".into(), coarse.dt);
    }
    Ok(ScenarioOutput::new(summary).finish(started))
}

/// Exact linear trajectory of corrector-adjusted data at the record times
/// of the config.
pub fn linear_trajectory(cfg: &SimConfig, data: &InitialData) -> Result<Vec<EnergyRecord>> {
    let grid = data.eta0.grid().clone();
    let geometry0 = Geometry::build(&data.eta0)?;
    let corr = compute_correctors(&data.eta0, &data.u0, &geometry0)?;
    let eta0 = &data.eta0 + &corr.eta_r;
    let u0 = &data.u0 + &corr.u_r;
    let physics = cfg.physics();
    let requested = cfg.stepping.dt.unwrap_or_else(|| default_dt(&data.u0));
    let (dt, steps) = effective_dt(requested, cfg.stepping.t_end, 1);
    let flat = Geometry::identity(&grid);
    let opts = RecordOptions {
        eulerian: false,
        damped: true,
    };
    let mut records = Vec::new();
    for k in 0..=steps {
        if k % cfg.stepping.record_every != 0 && k != steps {
            continue;
        }
        let t = if k == steps { cfg.stepping.t_end } else { k as f64 * dt };
        let (eta, u) = evolve_linear_field(&eta0, &u0, &physics, t)?;
        let mut r = record_lagrangian(
            &FlowMapState {
                eta: eta.clone(),
                u: u.clone(),
                t,
                physics,
            },
            &flat,
            opts,
        );
        r.residuals.remove("det_drift");
        r.residuals.remove("div_a");
        r.set_residual("div_eta", eta.divergence().l2_norm());
        r.set_residual("div_u", u.divergence().l2_norm());
        records.push(r);
    }
    Ok(records)
}

/// `linear`: the exact linear trajectory.
pub fn linear(cfg: &SimConfig) -> Result<ScenarioOutput> {
    let started = Instant::now();
    let data = initial_data(cfg)?;
    let records = linear_trajectory(cfg, &data)?;
    let mut summary = Summary::new(Scenario::Linear.name(), cfg);
    summary.validation = Some(validate(&data.eta0, &data.u0, cfg.physics.m));
    let max_of = |label: &str| -> Result<f64> { Ok(series(&records, label)?.into_iter().fold(0.0, f64::max)) };
    summary
        .metrics
        .insert("max_div".into(), max_of("div_eta")?.max(max_of("div_u")?));
    summary
        .metrics
        .insert("energy_identity".into(), energy_identity_residual(&records)?);
    let mut out = ScenarioOutput::new(summary);
    out.series.push(("linear".into(), records));
    Ok(out.finish(started))
}

/// `gen-ic`: build, validate and checkpoint initial data.
pub fn gen_ic(cfg: &SimConfig) -> Result<ScenarioOutput> {
    let started = Instant::now();
    let data = initial_data(cfg)?;
    let report = validate(&data.eta0, &data.u0, cfg.physics.m);
    let mut summary = Summary::new(Scenario::GenIc.name(), cfg);
    summary.metrics.insert("max_det_drift".into(), report.det_residual);
    summary.metrics.insert("max_div_a".into(), report.div_a_residual);
    summary.metrics.insert("max_odevity".into(), report.odevity_residual);
    summary.validation = Some(report);
    let mut out = ScenarioOutput::new(summary);
    out.checkpoints.push(("initial".into(), data.into_state(cfg.physics())));
    Ok(out.finish(started))
}

