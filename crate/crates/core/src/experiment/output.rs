//! Time-series CSV and JSON run summaries.
//!
//! CSV columns are `t`, then norms sorted by label, then residuals sorted
//! by label. Floats are written in Rust's shortest round-trip decimal form,
//! so parsing a file back reproduces every value bit for bit.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::SimConfig;
use crate::diagnostics::{DecayFit, EnergyRecord, SweepResult};
use crate::error::{Error, Result};
use crate::initial::ValidationReport;

/// Version of the summary layout; bump on incompatible changes.
pub const SUMMARY_VERSION: u32 = 1;

/// The JSON schema the summaries follow.
pub const SUMMARY_SCHEMA: &str = include_str!("../../schema/summary.schema.json");

/// Header row for a set of records.
pub fn csv_header(records: &[EnergyRecord]) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    if let Some(first) = records.first() {
        cols.extend(first.norms.keys().cloned());
        cols.extend(first.residuals.keys().cloned());
    }
    cols
}

/// Shortest round-trip decimal, switching to exponent form for very large
/// or small magnitudes.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

/// Render records as CSV text. Records must share their labels.
pub fn records_to_csv(records: &[EnergyRecord]) -> Result<String> {
    let header = csv_header(records);
    let mut out = header.join(",");
    out.push('\n');
    for r in records {
        let labels_match = r.norms.keys().eq(records[0].norms.keys())
            && r.residuals.keys().eq(records[0].residuals.keys());
        if !labels_match {
            return Err(Error::Precondition(format!(
                "record at t = {} has different labels from the first record",
                r.t
            )));
        }
        let mut row = vec![format_float(r.t)];
        row.extend(r.norms.values().map(|&v| format_float(v)));
        row.extend(r.residuals.values().map(|&v| format_float(v)));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn write_csv(path: impl AsRef<Path>, records: &[EnergyRecord]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, records_to_csv(records)?).map_err(|e| Error::io(path, e))
}

/// Parsed CSV: header and rows of values.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

pub fn parse_csv(text: &str) -> Result<CsvTable> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Format("empty CSV".into()))?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|e| Error::Format(format!("row {}: bad number {v:?}: {e}", i + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != header.len() {
            return Err(Error::Format(format!(
                "row {} has {} values, header has {}",
                i + 1,
                row.len(),
                header.len()
            )));
        }
        rows.push(row);
    }
    Ok(CsvTable { header, rows })
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<CsvTable> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
}

/// JSON writes non-finite floats as `null`; read them back as `+∞`.
fn null_as_inf<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

fn null_map_as_inf<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<String, f64>, D::Error> {
    let raw = BTreeMap::<String, Option<f64>>::deserialize(d)?;
    Ok(raw.into_iter().map(|(k, v)| (k, v.unwrap_or(f64::INFINITY))).collect())
}

/// One pass/fail check of a gated subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub name: String,
    #[serde(deserialize_with = "null_as_inf")]
    pub value: f64,
    /// Human-readable form of the condition, e.g. `"<= -1.25"`.
    pub condition: String,
    pub passed: bool,
}

impl Gate {
    pub fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            condition: format!("<= {bound}"),
            passed: value <= bound,
        }
    }

    pub fn at_least(name: &str, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            condition: format!(">= {bound}"),
            passed: value >= bound,
        }
    }

    pub fn above(name: &str, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            condition: format!("> {bound}"),
            passed: value > bound,
        }
    }
}

/// A decay fit together with the quantity it was applied to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedFit {
    pub quantity: String,
    pub fit: DecayFit,
}

/// JSON summary written by every subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub scenario: String,
    pub config: SimConfig,
    pub validation: Option<ValidationReport>,
    pub fits: Vec<NamedFit>,
    pub sweep: Option<SweepResult>,
    /// Scalar outcomes (maximum constraint drifts, energy residual, ...).
    #[serde(deserialize_with = "null_map_as_inf")]
    pub metrics: BTreeMap<String, f64>,
    pub gates: Vec<Gate>,
    /// For each emitted quantity, the property of the equations it tests.
    pub traceability: BTreeMap<String, String>,
    pub wall_time_s: f64,
}

impl Summary {
    pub fn new(scenario: &str, config: &SimConfig) -> Self {
        Self {
            schema_version: SUMMARY_VERSION,
            scenario: scenario.into(),
            config: config.clone(),
            validation: None,
            fits: Vec::new(),
            sweep: None,
            metrics: BTreeMap::new(),
            gates: Vec::new(),
            traceability: BTreeMap::new(),
            wall_time_s: 0.0,
        }
    }

    /// True when every gate passed (vacuously for ungated runs).
    pub fn passed(&self) -> bool {
        self.gates.iter().all(|g| g.passed)
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).copied()
    }

    pub fn gate(&self, name: &str) -> Option<&Gate> {
        self.gates.iter().find(|g| g.name == name)
    }

    /// Attach the traceability entry of every label present in the summary.
    pub(crate) fn trace(&mut self, labels: impl IntoIterator<Item = String>) {
        for label in labels {
            if let Some(text) = traceability(&label) {
                self.traceability.insert(label, text.into());
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }
}

/// Property tested by an emitted quantity.
pub fn traceability(label: &str) -> Option<&'static str> {
    let text = match label {
        "kinetic" | "magnetic" | "dissipation" | "energy_identity" => {
            "basic energy identity: ‖u‖₀² + ‖m∂₂η‖₀² + 2ν∫‖∇_A u‖₀² + 2κ∫‖u‖₀² = I₀"
        }
        "det_drift" | "max_det_drift" => "incompressibility of the flow map: det ∇ζ = 1",
        "div_a" | "max_div_a" => "Lagrangian incompressibility: div_A u = 0",
        "odevity" | "max_odevity" => "odevity symmetry is preserved by the flow",
        "E20" | "E21" | "stability_ratio" => {
            "global stability: the energy functionals stay bounded by their initial size in a strong field"
        }
        "u_H1" | "u_H2" | "b_H2" | "eta_H3" | "eta_d2_H1" | "m_d2eta_H2" => {
            "algebraic decay of u, ∂₂η and m∂₂η in label coordinates"
        }
        "v_H1_eulerian" | "v_H2_eulerian" | "b_H2_eulerian" | "weighted_v_H1" | "weighted_v_H2"
        | "weighted_b_H2" => "Eulerian algebraic decay of v and b with weights ⟨t⟩^{3/2}, ⟨t⟩, ⟨t⟩^{1/2}",
        "velocity_faster" => "the velocity decays faster than the perturbed magnetic field",
        "damped_energy" | "eta_H4" | "damped_rate" => {
            "exponential decay of the damped inviscid system at a rate independent of m"
        }
        "eta_d_H3_sq" | "ud_md2etad_H2_sq" | "weighted_ud_H2_sq" | "viscous_error" | "sweep_slope_viscous" => {
            "convergence to the linear pressureless solution as m grows, error ≤ C/m"
        }
        "damped_error" | "sweep_slope_damped" => {
            "convergence of the damped system to its linearization, error ≤ C/m²"
        }
        "velocity_rel_diff" | "velocity_field_rel_diff" | "coarse_velocity_rel_diff" => {
            "Lagrangian and Eulerian formulations describe the same flow"
        }
        "frozen_in" | "flow_map_rel_diff" => "frozen-in law: B(ζ(y,t),t) = m∂₂ζ(y,t)",
        _ => return None,
    };
    Some(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(t: f64, a: f64) -> EnergyRecord {
        let mut r = EnergyRecord::new(t);
        r.set_norm("u_H2", a);
        r.set_norm("kinetic", a * a);
        r.set_residual("div_a", 1e-17 * a);
        r
    }

    #[test]
    fn empty_record_list_gives_header_only() {
        assert_eq!(records_to_csv(&[]).unwrap(), "t\n");
    }

    #[test]
    fn column_order_is_t_norms_residuals() {
        let csv = records_to_csv(&[record(0.0, 1.0)]).unwrap();
        assert_eq!(csv.lines().next().unwrap(), "t,kinetic,u_H2,div_a");
    }

    #[test]
    fn csv_round_trips_exactly() {
        let recs: Vec<_> = (0..20)
            .map(|i| record(0.1 * i as f64, (1.0 + i as f64).sqrt() / 3.0))
            .collect();
        let table = parse_csv(&records_to_csv(&recs).unwrap()).unwrap();
        for (row, r) in table.rows.iter().zip(&recs) {
            assert_eq!(row[0].to_bits(), r.t.to_bits());
            assert_eq!(row[1].to_bits(), r.norms["kinetic"].to_bits());
            assert_eq!(row[2].to_bits(), r.norms["u_H2"].to_bits());
            assert_eq!(row[3].to_bits(), r.residuals["div_a"].to_bits());
        }
    }

    #[test]
    fn float_format_round_trips_at_all_scales() {
        for x in [0.0, -0.0, 1e-300, 3.5e-17, 1.0 / 3.0, 12345.678, 2.5e20, f64::MAX, f64::MIN_POSITIVE] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(format_float(1e-17), "1e-17");
        assert_eq!(format_float(0.25), "0.25");
        assert_eq!(format_float(f64::INFINITY), "inf");
    }

    #[test]
    fn mismatched_labels_are_rejected() {
        let mut other = record(1.0, 1.0);
        other.set_norm("extra", 1.0);
        assert!(records_to_csv(&[record(0.0, 1.0), other]).is_err());
    }

    #[test]
    fn gates_compare_as_labelled() {
        assert!(Gate::at_most("x", -1.3, -1.25).passed);
        assert!(!Gate::at_most("x", -1.2, -1.25).passed);
        assert!(Gate::above("r", 0.1, 0.0).passed);
        assert!(!Gate::above("r", 0.0, 0.0).passed);
    }
}
