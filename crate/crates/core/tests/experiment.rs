use std::path::Path;
use std::process::Command;

use flowmap_mhd::experiment::output::SUMMARY_SCHEMA;
use flowmap_mhd::experiment::{
    format_float, parse_csv, records_to_csv, run_scenario, Scenario, SimConfig, Summary,
};
use flowmap_mhd::Error;
use proptest::prelude::*;

const SMALL: &str = r#"
[grid]
n = 32

[physics]
nu = 0.05
m = 8.0

[data]
family = "random_symmetric"
epsilon = 0.03
seed = 11
band = 2

[stepping]
dt = 0.01
t_end = 0.05
"#;

fn small() -> SimConfig {
    SimConfig::from_toml(SMALL).unwrap()
}

fn config_field(text: &str) -> String {
    match SimConfig::from_toml(text) {
        Err(Error::Config { field, .. }) => field,
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn defaults_are_filled_in() {
    let cfg = small();
    assert!((cfg.grid.period - 2.0 * std::f64::consts::PI).abs() < 1e-15);
    assert_eq!(cfg.stepping.record_every, 1);
    assert!(!cfg.stepping.volume_project);
    assert_eq!(cfg.stepping.alfven_cfl, 0.5);
    assert_eq!(cfg.msweep.m_values, vec![16.0, 32.0, 64.0, 128.0]);
    assert_eq!(SimConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
}

#[test]
fn invalid_configs_name_the_offending_field() {
    assert_eq!(config_field(&SMALL.replace("n = 32", "n = 24")), "grid.n");
    assert_eq!(config_field(&SMALL.replace("nu = 0.05", "nu = 0.05\nkappa = 1.0")), "physics");
    assert_eq!(config_field(&SMALL.replace("nu = 0.05", "nu = 0.0")), "physics");
    assert_eq!(config_field(&SMALL.replace("dt = 0.01", "dt = -0.01")), "stepping.dt");
    assert_eq!(config_field(&SMALL.replace("band = 2", "band = 11")), "data.band");
    assert_eq!(config_field(&SMALL.replace("t_end = 0.05", "t_end = 0.05\nbogus = 1")), "stepping.bogus");
    let sweep = format!("{SMALL}\n[msweep]\nm_values = [8.0, 4.0, 16.0]\n");
    assert_eq!(config_field(&sweep), "msweep.m_values");
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            SimConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            count += 1;
        }
    }
    assert!(count >= 6);
}

#[test]
fn summaries_follow_the_schema() {
    let schema: serde_json::Value = serde_json::from_str(SUMMARY_SCHEMA).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).unwrap();
    let cfg = small();
    for kind in [Scenario::Run, Scenario::Linear, Scenario::GenIc] {
        let out = run_scenario(kind, &cfg, 1).unwrap();
        let json: serde_json::Value = serde_json::from_str(&out.summary.to_json()).unwrap();
        if let Err(errors) = compiled.validate(&json) {
            let msgs: Vec<String> = errors.map(|e| e.to_string()).collect();
            panic!("{}: {msgs:?}", kind.name());
        }
        assert!(out.summary.passed());
    }
}

#[test]
fn outputs_are_deterministic() {
    let cfg = small();
    let a = run_scenario(Scenario::Run, &cfg, 1).unwrap();
    let b = run_scenario(Scenario::Run, &cfg, 1).unwrap();
    for name in ["records", "energy"] {
        let ta = records_to_csv(a.series(name).unwrap()).unwrap();
        let tb = records_to_csv(b.series(name).unwrap()).unwrap();
        assert_eq!(ta, tb);
        let table = parse_csv(&ta).unwrap();
        assert_eq!(table.column("t").unwrap().last().copied(), Some(0.05));
    }
}

#[test]
fn generated_data_reproduce_the_run_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small();
    run_scenario(Scenario::GenIc, &cfg, 1).unwrap().write(dir.path()).unwrap();
    let ic = dir.path().join("initial.mhd2");
    let from_file = SMALL.replace(
        "family = \"random_symmetric\"\nepsilon = 0.03\nseed = 11\nband = 2",
        &format!("family = \"from_file\"\npath = {:?}", ic.display().to_string()),
    );
    let cfg_file = SimConfig::from_toml(&from_file).unwrap();
    let direct = run_scenario(Scenario::Run, &cfg, 1).unwrap();
    let loaded = run_scenario(Scenario::Run, &cfg_file, 1).unwrap();
    let (sa, sb) = (&direct.checkpoints[0].1, &loaded.checkpoints[0].1);
    assert_eq!(sa.eta, sb.eta);
    assert_eq!(sa.u, sb.u);
}

#[test]
fn summary_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_scenario(Scenario::Linear, &small(), 1).unwrap();
    out.write(dir.path()).unwrap();
    let back = Summary::read(dir.path().join("summary.json")).unwrap();
    assert_eq!(back.scenario, "linear");
    assert_eq!(back.metric("max_div"), out.summary.metric("max_div"));
    assert!(dir.path().join("linear.csv").exists());
}

fn mhd2d(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_mhd2d")).args(args).output().unwrap()
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(&cfg, SMALL).unwrap();
    let out = dir.path().join("out");
    let (cfg_s, out_s) = (cfg.to_str().unwrap(), out.to_str().unwrap());

    let ok = mhd2d(&["run", "--config", cfg_s, "--out", out_s, "--seed", "3"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(out.join("summary.json").exists() && out.join("records.csv").exists());

    // an unreachable slope target fails the gate
    let gated = dir.path().join("gated.toml");
    let text = SMALL.replace("t_end = 0.05", "t_end = 0.1");
    std::fs::write(&gated, format!("{text}\n[msweep]\nm_values = [8.0, 16.0, 32.0]\nmax_slope = -10.0\n")).unwrap();
    let fail = mhd2d(&["msweep", "--config", gated.to_str().unwrap(), "--out", out_s, "--threads", "2"]);
    assert_eq!(fail.status.code(), Some(1), "{}", String::from_utf8_lossy(&fail.stderr));
    assert!(String::from_utf8_lossy(&fail.stdout).contains("FAIL"));

    let missing = mhd2d(&["run", "--config", "/nonexistent.toml", "--out", out_s]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("error"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn formatted_floats_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(format_float(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }
}
