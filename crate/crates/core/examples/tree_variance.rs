//! The two variance algorithms side by side on a sampled branching tree,
//! and the spread of p_L over independent repetitions for comparison.

use dss::noise::NoiseParams;
use dss::protocol::parse_protocol;
use dss::sampler::{dss_run, Criterion, DssConfig};

const TEXT: &str = "\
root: A
circuit A
qubits: 2
INIT Z 0
GATE H 0
MEAS Z 0 @a
end
circuit B
qubits: 2
INIT Z 1
GATE H 1
MEAS Z 1 @b
end
rule A a=1 -> B
rule A -> OK
rule B b=1 -> FAIL
rule B -> OK
";

fn main() -> dss::Result<()> {
    let protocol = parse_protocol(TEXT)?;
    let p = [0.1];
    let noise = NoiseParams::uniform(p[0])?;
    let sample = |seed| {
        dss_run(
            &protocol,
            &noise,
            DssConfig::new(p.to_vec(), Criterion::Binomial, 400, seed),
        )
    };

    let tree = sample(0)?.tree;
    let (rec_l, rec_u) = tree.var_bounds(&p)?;
    let (pair_l, pair_u) = tree.var_bounds_pairwise(&p)?;
    println!("recursive: Var[p_L] {rec_l:.6e}  Var[p_U] {rec_u:.6e}");
    println!("pairwise:  Var[p_L] {pair_l:.6e}  Var[p_U] {pair_u:.6e}");

    let values: Vec<f64> = (1..=300)
        .map(|seed| sample(seed).and_then(|r| r.tree.p_lower(&p)))
        .collect::<dss::Result<_>>()?;
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
    println!("300 repetitions: mean p_L {mean:.6e}, variance {var:.6e}");
    Ok(())
}
