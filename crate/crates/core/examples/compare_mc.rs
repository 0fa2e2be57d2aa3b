//! DSS against direct Monte Carlo on the GHZ preparation at p = 1e-3:
//! total uncertainty per DSS shot next to the Wilson width per MC shot.

use dss::analysis::{compare, emit_compare_csv};
use dss::library::ghz_protocol;
use dss::noise::NoiseParams;
use dss::sampler::{Criterion, DssConfig};

fn main() -> dss::Result<()> {
    let protocol = ghz_protocol()?;
    let noise = NoiseParams::uniform(1e-3)?;
    let report = compare(
        &protocol,
        &noise,
        DssConfig::new(vec![1e-3], Criterion::Eru, 100, 7),
        10_000,
    )?;
    let csv = emit_compare_csv(&report);
    // Every tenth DSS shot, then every thousandth MC shot.
    for (i, line) in csv.lines().enumerate() {
        if i == 0 || (i <= 100 && i % 10 == 0) || i % 1000 == 0 {
            println!("{line}");
        }
    }
    eprintln!(
        "DSS p_hat {:.3e} (eta {:.2e} after 100 shots), MC p_hat {:.3e} (width {:.2e} after 10^4 shots)",
        report.dss_final.p_hat,
        report.dss_final.eta,
        report.mc_p_hat,
        report.mc_width.last().unwrap()
    );
    Ok(())
}
