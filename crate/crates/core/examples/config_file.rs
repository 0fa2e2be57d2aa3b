//! Driving a run from a configuration file with explicit noise categories:
//! measurements and preparations at one rate, gates at another.

use dss::analysis::{emit_csv, rescale_curve};
use dss::config::RunConfig;
use dss::sampler::dss_run;

const CONFIG: &str = r#"
protocol = "steane-det-0"
p_max = [5e-3, 1e-3]
criterion = "binomial"
seed = 3

[stop]
max_shots = 3000

[[noise]]
name = "spam"
kinds = ["init", "measurement"]

[[noise]]
name = "gates"
kinds = ["single_qubit_gate", "two_qubit_gate"]

[grid]
from = 0.01
to = 1.0
points = 5
"#;

fn main() -> dss::Result<()> {
    let cfg = RunConfig::parse(CONFIG)?;
    let run = dss_run(&cfg.protocol()?, &cfg.noise()?, cfg.dss())?;
    print!(
        "{}",
        emit_csv(&rescale_curve(&run.tree, &cfg.grid.points(&cfg.p_max)?)?)
    );
    Ok(())
}
