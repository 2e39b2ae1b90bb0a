//! TOML experiment configuration.
//!
//! ```toml
//! [grid]
//! n = 64
//! period = 6.283185307179586   # optional, default 2π
//!
//! [physics]
//! nu = 0.05
//! kappa = 0.0
//! m = 20.0
//!
//! [data]
//! family = "taylor_green"      # or "random_symmetric", "from_file"
//! epsilon = 0.05
//!
//! [stepping]
//! dt = 1e-3                    # optional, default 0.25 h / max(1, max|u⁰|)
//! scheme = "etd_rk4"           # or "imex_bdf2"
//! t_end = 5.0
//! record_every = 1
//! ```
//!
//! Optional sections `[decay]`, `[msweep]` and `[compare]` configure the
//! corresponding subcommands; their thresholds default to the values the
//! test suite gates on.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{Scheme, StepControl};
use crate::initial::InitialDataSpec;
use crate::kinematics::Physics;
use crate::pressure::EllipticOptions;
use crate::spectral::Grid;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    #[serde(default = "two_pi")]
    pub period: f64,
}

fn two_pi() -> f64 {
    2.0 * PI
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    #[serde(default)]
    pub nu: f64,
    #[serde(default)]
    pub kappa: f64,
    pub m: f64,
}

impl From<PhysicsConfig> for Physics {
    fn from(p: PhysicsConfig) -> Self {
        Physics {
            nu: p.nu,
            kappa: p.kappa,
            m: p.m,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteppingConfig {
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    pub t_end: f64,
    #[serde(default = "one")]
    pub record_every: usize,
    /// Project onto odevity-symmetric fields after every step.
    #[serde(default)]
    pub odevity_project: bool,
    /// Re-impose `det ∇ζ = 1` after every step. Off by default so that
    /// the drift stays observable.
    #[serde(default)]
    pub volume_project: bool,
    #[serde(default = "default_elliptic_tol")]
    pub elliptic_tol: f64,
    /// Without an explicit `dt`, the step is capped at `alfven_cfl / m`.
    #[serde(default = "half")]
    pub alfven_cfl: f64,
}

fn default_scheme() -> Scheme {
    Scheme::EtdRk4
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

fn default_elliptic_tol() -> f64 {
    EllipticOptions::default().tol
}

/// Gates of the `decay` subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayConfig {
    /// Fit window; defaults to the last 60% of the run.
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    /// Slack added to every target exponent.
    #[serde(default = "quarter")]
    pub tolerance: f64,
    /// Power-law targets of `‖v‖_{H¹}`, `‖v‖_{H²}`, `‖b‖_{H²}`.
    #[serde(default = "default_targets")]
    pub targets: [f64; 3],
    /// End of the early interval whose maxima bound the weighted norms.
    #[serde(default = "twenty")]
    pub early_end: f64,
    /// Allowed ratio of a weighted norm at `t_end` to its early maximum.
    #[serde(default = "two")]
    pub weighted_growth: f64,
    /// Required gap between the `‖b‖_{H²}` and `‖v‖_{H²}` exponents.
    #[serde(default = "quarter")]
    pub velocity_margin: f64,
    /// `E20(t) ≤ stability_ratio · sup_{τ ≤ stability_ref_end} E20(τ)`.
    #[serde(default = "default_stability_ratio")]
    pub stability_ratio: f64,
    #[serde(default = "one_f")]
    pub stability_ref_end: f64,
    /// Damped runs: minimum `r²` of the exponential fit.
    #[serde(default = "default_min_r2")]
    pub min_r_squared: f64,
}

fn quarter() -> f64 {
    0.25
}

fn default_targets() -> [f64; 3] {
    [-1.5, -1.0, -0.5]
}

fn twenty() -> f64 {
    20.0
}

fn two() -> f64 {
    2.0
}

fn one_f() -> f64 {
    1.0
}

fn default_stability_ratio() -> f64 {
    1.05
}

fn default_min_r2() -> f64 {
    0.98
}

impl Default for DecayConfig {
    fn default() -> Self {
        Self {
            window: None,
            tolerance: quarter(),
            targets: default_targets(),
            early_end: twenty(),
            weighted_growth: two(),
            velocity_margin: quarter(),
            stability_ratio: default_stability_ratio(),
            stability_ref_end: one_f(),
            min_r_squared: default_min_r2(),
        }
    }
}

/// How initial data scale with `m` in a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepScaling {
    /// `ε = 1/m`: `m∂₂η⁰` and the initial energy stay fixed.
    FixedEnergy,
    /// `ε` from `[data]` for every member.
    FixedData,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MsweepConfig {
    #[serde(default = "default_m_values")]
    pub m_values: Vec<f64>,
    #[serde(default = "default_scaling")]
    pub scaling: SweepScaling,
    /// Gate on the log-log slope; defaults to `-1 + 0.3` (viscous) or
    /// `-2 + 0.3` (damped).
    #[serde(default)]
    pub max_slope: Option<f64>,
}

fn default_m_values() -> Vec<f64> {
    vec![16.0, 32.0, 64.0, 128.0]
}

fn default_scaling() -> SweepScaling {
    SweepScaling::FixedEnergy
}

fn half() -> f64 {
    0.5
}

impl Default for MsweepConfig {
    fn default() -> Self {
        Self {
            m_values: default_m_values(),
            scaling: default_scaling(),
            max_slope: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    /// Also run at `(n / 2, 2 dt)` to check that the solver gap shrinks.
    #[serde(default = "yes")]
    pub refine: bool,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            refine: true,
        }
    }
}

/// A complete experiment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub grid: GridConfig,
    pub physics: PhysicsConfig,
    pub data: InitialDataSpec,
    pub stepping: SteppingConfig,
    #[serde(default)]
    pub decay: DecayConfig,
    #[serde(default)]
    pub msweep: MsweepConfig,
    #[serde(default)]
    pub compare: CompareConfig,
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let field = e
                .span()
                .map(|s| locate(text, s.start))
                .unwrap_or_else(|| "<document>".into());
            Error::config(field, e.message())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Check the invariants serde cannot express.
    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if g.n < 8 || !g.n.is_power_of_two() {
            return Err(Error::config("grid.n", format!("{} must be a power of two ≥ 8", g.n)));
        }
        if !(g.period > 0.0 && g.period.is_finite()) {
            return Err(Error::config("grid.period", format!("{} must be positive", g.period)));
        }
        let p = &self.physics;
        for (name, v) in [("physics.nu", p.nu), ("physics.kappa", p.kappa), ("physics.m", p.m)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(name, format!("{v} must be finite and nonnegative")));
            }
        }
        if (p.nu > 0.0) == (p.kappa > 0.0) {
            return Err(Error::config(
                "physics",
                "exactly one of nu (viscous) or kappa (damped) must be positive",
            ));
        }
        match &self.data {
            InitialDataSpec::TaylorGreen { epsilon } | InitialDataSpec::RandomSymmetric { epsilon, .. } => {
                if !(*epsilon >= 0.0 && epsilon.is_finite()) {
                    return Err(Error::config("data.epsilon", format!("{epsilon} must be nonnegative")));
                }
            }
            InitialDataSpec::FromFile { .. } => {}
        }
        if let InitialDataSpec::RandomSymmetric { band, .. } = &self.data {
            if *band < 0 || *band > (g.n / 3) as i64 {
                return Err(Error::config("data.band", format!("{band} must lie in [0, {}]", g.n / 3)));
            }
        }
        let s = &self.stepping;
        if !(s.t_end > 0.0 && s.t_end.is_finite()) {
            return Err(Error::config("stepping.t_end", format!("{} must be positive", s.t_end)));
        }
        if s.record_every < 1 {
            return Err(Error::config("stepping.record_every", "must be at least 1"));
        }
        if let Some(dt) = s.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::config("stepping.dt", format!("{dt} must be positive")));
            }
        }
        if !(s.elliptic_tol > 0.0) {
            return Err(Error::config("stepping.elliptic_tol", "must be positive"));
        }
        if let Some([a, b]) = self.decay.window {
            if !(a < b) {
                return Err(Error::config("decay.window", format!("[{a}, {b}] is empty")));
            }
        }
        let ms = &self.msweep.m_values;
        if ms.len() < 3 {
            return Err(Error::config("msweep.m_values", "need at least three values"));
        }
        if ms.windows(2).any(|w| !(w[1] > w[0])) || !(ms[0] > 0.0) {
            return Err(Error::config("msweep.m_values", "must be positive and strictly increasing"));
        }
        if !(self.stepping.alfven_cfl > 0.0) {
            return Err(Error::config("stepping.alfven_cfl", "must be positive"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.n, self.grid.period)
    }

    pub fn physics(&self) -> Physics {
        self.physics.into()
    }

    pub fn is_damped(&self) -> bool {
        self.physics.kappa > 0.0
    }

    /// Step control for a given step size.
    pub fn step_control(&self, dt: f64) -> StepControl {
        let mut ctl = StepControl::new(dt);
        ctl.scheme = self.stepping.scheme;
        ctl.odevity_project = self.stepping.odevity_project;
        ctl.volume_project = self.stepping.volume_project;
        ctl.elliptic = EllipticOptions::with_tol(self.stepping.elliptic_tol);
        ctl
    }

    /// Replace the data seed (random families only).
    pub fn with_seed(mut self, seed: u64) -> Self {
        if let InitialDataSpec::RandomSymmetric { seed: s, .. } = &mut self.data {
            *s = seed;
        }
        self
    }
}

/// Dotted path of the TOML key enclosing byte offset `at`.
fn locate(text: &str, at: usize) -> String {
    let mut section = String::new();
    let mut key = String::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        if offset > at {
            break;
        }
        let trimmed = line.trim();
        if trimmed.starts_with('[') {
            section = trimmed.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            key.clear();
        } else if let Some((k, _)) = trimmed.split_once('=') {
            key = k.trim().to_string();
        }
        offset += line.len();
    }
    match (section.is_empty(), key.is_empty()) {
        (true, true) => "<document>".into(),
        (false, true) => section,
        (true, false) => key,
        (false, false) => format!("{section}.{key}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[grid]
n = 32

[physics]
nu = 0.05
m = 20.0

[data]
family = "taylor_green"
epsilon = 0.05

[stepping]
t_end = 1.0
"#;

    #[test]
    fn parses_minimal_config_with_defaults() {
        let cfg = SimConfig::from_toml(BASE).unwrap();
        assert_eq!(cfg.grid.n, 32);
        assert_eq!(cfg.grid.period, 2.0 * PI);
        assert_eq!(cfg.stepping.record_every, 1);
        assert_eq!(cfg.stepping.dt, None);
        assert_eq!(cfg.data, InitialDataSpec::TaylorGreen { epsilon: 0.05 });
        assert_eq!(cfg.decay, DecayConfig::default());
        assert_eq!(cfg.msweep.m_values, vec![16.0, 32.0, 64.0, 128.0]);
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = SimConfig::from_toml(BASE).unwrap();
        let again = SimConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
    }

    fn field_of(text: &str) -> String {
        match SimConfig::from_toml(text) {
            Err(Error::Config { field, .. }) => field,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_both_or_neither_dissipation() {
        assert_eq!(field_of(&BASE.replace("nu = 0.05", "nu = 0.05\nkappa = 1.0")), "physics");
        assert_eq!(field_of(&BASE.replace("nu = 0.05", "")), "physics");
    }

    #[test]
    fn reports_the_offending_field() {
        assert_eq!(field_of(&BASE.replace("n = 32", "n = 30")), "grid.n");
        assert_eq!(field_of(&BASE.replace("t_end = 1.0", "t_end = -1.0")), "stepping.t_end");
        assert_eq!(field_of(&BASE.replace("t_end = 1.0", "t_end = 1.0\nrecord_every = 0")), "stepping.record_every");
        assert_eq!(field_of(&BASE.replace("n = 32", "n = \"big\"")), "grid.n");
        assert_eq!(field_of(&BASE.replace("m = 20.0", "m = 20.0\nlambda = 1")), "physics.lambda");
    }

    #[test]
    fn seed_override_touches_only_random_data() {
        let cfg = SimConfig::from_toml(BASE).unwrap().with_seed(9);
        assert_eq!(cfg.data, InitialDataSpec::TaylorGreen { epsilon: 0.05 });
        let text = BASE.replace(
            "family = \"taylor_green\"\nepsilon = 0.05",
            "family = \"random_symmetric\"\nepsilon = 0.05\nseed = 1\nband = 3",
        );
        let cfg = SimConfig::from_toml(&text).unwrap().with_seed(9);
        assert_eq!(
            cfg.data,
            InitialDataSpec::RandomSymmetric {
                epsilon: 0.05,
                seed: 9,
                band: 3
            }
        );
    }
}
