//! Samples the GHZ preparation with the ERU criterion and checks the bounds
//! against exact subset failure rates over a range of physical rates.

use dss::analysis::{log_factors, ray_grid, rescale_curve};
use dss::exhaustive::{exhaustive_subset, DEFAULT_BUDGET};
use dss::library::ghz_protocol;
use dss::noise::NoiseParams;
use dss::sampler::{dss_run, Criterion, DssConfig};
use dss::stats::binomial_factor;

fn main() -> dss::Result<()> {
    let protocol = ghz_protocol()?;
    let noise = NoiseParams::uniform(1e-3)?;
    let run = dss_run(
        &protocol,
        &noise,
        DssConfig::new(vec![1e-3], Criterion::Eru, 200, 2024),
    )?;
    print!("{}", run.tree.dump());

    let n = protocol.circuit("GHZ")?.len();
    let exact: Vec<f64> = (1..=2)
        .map(|w| exhaustive_subset(&protocol, &noise, &[w], DEFAULT_BUDGET))
        .collect::<dss::Result<_>>()?;
    println!(
        "exact p_fail(1) = {:.6}, p_fail(2) = {:.6}",
        exact[0], exact[1]
    );

    let grid = ray_grid(&[1e-3], &log_factors(0.1, 1.0, 5)?);
    for row in rescale_curve(&run.tree, &grid)? {
        let p = row.p[0];
        let truth = binomial_factor(n, 1, p)? * exact[0] + binomial_factor(n, 2, p)? * exact[1];
        let inside = row.p_l - row.sigma_l <= truth && truth <= row.p_u + row.sigma_u;
        println!(
            "p={p:.2e}  [{:.4e}, {:.4e}]  exact {truth:.4e}  {}",
            row.p_l - row.sigma_l,
            row.p_u + row.sigma_u,
            if inside { "inside" } else { "OUTSIDE" }
        );
    }
    Ok(())
}
