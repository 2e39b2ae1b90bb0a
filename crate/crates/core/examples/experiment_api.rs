//! Drive a subcommand from Rust: parse a TOML config, run it and inspect
//! the summary without touching the file system.

use flowmap_mhd::experiment::{run_scenario, Scenario, SimConfig};

const CONFIG: &str = r#"
[grid]
n = 32

[physics]
nu = 0.05
m = 20.0

[data]
family = "taylor_green"
epsilon = 0.05

[stepping]
dt = 0.005
t_end = 1.0
record_every = 20
"#;

fn main() -> flowmap_mhd::Result<()> {
    let cfg = SimConfig::from_toml(CONFIG)?;
    for kind in [Scenario::Run, Scenario::Linear] {
        let out = run_scenario(kind, &cfg, 1)?;
        println!("{}:", kind.name());
        for (name, value) in &out.summary.metrics {
            println!("  {name:<24} {value:.4e}");
        }
        for (name, records) in &out.series {
            println!("  series {name}: {} records", records.len());
        }
    }
    Ok(())
}
