//! A protocol written in the text format: a Bell pair checked by a parity
//! ancilla, repeated once on rejection. Parsed, validated, then sampled.

use dss::exhaustive::{validate, DEFAULT_BUDGET};
use dss::noise::NoiseParams;
use dss::protocol::parse_protocol;
use dss::sampler::{dss_run, Criterion, DssConfig};

const TEXT: &str = "\
name: bell-check
root: PREP
t: 0

circuit PREP
qubits: 3
INIT Z 0
INIT Z 1
INIT Z 2
GATE H 0
GATE CNOT 0 1
GATE CNOT 0 2
GATE CNOT 1 2
MEAS Z 2 @parity
end

circuit RETRY
qubits: 3
INIT Z 0
INIT Z 1
INIT Z 2
GATE H 0
GATE CNOT 0 1
GATE CNOT 0 2
GATE CNOT 1 2
MEAS Z 2 @parity
end

rule PREP parity=1 -> RETRY
rule PREP -> OK
rule RETRY parity=1 -> FAIL
rule RETRY -> OK
";

fn main() -> dss::Result<()> {
    let protocol = parse_protocol(TEXT)?;
    let noise = NoiseParams::uniform(1e-2)?;
    let report = validate(&protocol, &noise, DEFAULT_BUDGET)?;
    println!(
        "valid: {}  fault-free path: {:?}",
        report.is_valid(),
        report.fault_free_path
    );

    let run = dss_run(
        &protocol,
        &noise,
        DssConfig::new(vec![1e-2], Criterion::Binomial, 2000, 1),
    )?;
    print!("{}", run.tree.dump());
    let b = run.bounds;
    println!(
        "p_L {:.4e} ± {:.1e}, p_U {:.4e} ± {:.1e}",
        b.p_l, b.sigma_l, b.p_u, b.sigma_u
    );
    Ok(())
}
