//! Logical failure curve of the deterministic Steane zero preparation under
//! two-parameter noise, sampled once at p_max and rescaled down a ray.
//!
//! Writes CSV to stdout; the log-log slope goes to stderr.

use dss::analysis::{emit_csv, log_factors, loglog_slope, ray_grid, rescale_curve};
use dss::library::steane_det_prep;
use dss::noise::NoiseParams;
use dss::sampler::{dss_run, Criterion, DssConfig};

fn main() -> dss::Result<()> {
    let p_max = vec![1e-3, 1e-2];
    let protocol = steane_det_prep()?;
    let noise = NoiseParams::two_parameter(p_max[0], p_max[1])?;
    let mut config = DssConfig::new(p_max.clone(), Criterion::Binomial, 10_000, 4);
    config.workers = 4;
    let run = dss_run(&protocol, &noise, config)?;

    let rows = rescale_curve(&run.tree, &ray_grid(&p_max, &log_factors(1e-3, 1.0, 13)?))?;
    print!("{}", emit_csv(&rows));
    eprintln!(
        "slope over the lowest decade: {:.3}",
        loglog_slope(&rows, (1e-6, 1e-5))?
    );
    Ok(())
}
