//! Structural checks on the flagged Steane preparation: validation, the
//! flag error sets used by its decoder, and the exhaustive single-fault audit.

use dss::exhaustive::{audit_ft, validate, DEFAULT_BUDGET};
use dss::library::flag::{flag_readout, FLAG_CIRCUITS};
use dss::library::steane::flag_error_set;
use dss::library::steane_flag_prep;
use dss::noise::NoiseParams;

fn main() -> dss::Result<()> {
    let protocol = steane_flag_prep()?;
    let report = validate(&protocol, &NoiseParams::uniform(1e-3)?, DEFAULT_BUDGET)?;
    println!("fault-free path: {}", report.fault_free_path.join(" -> "));
    for (name, counts) in &report.circuits {
        println!("  {name:5} {counts:?} locations");
    }

    for (k, name) in FLAG_CIRCUITS.iter().take(3).enumerate() {
        let set = flag_error_set(&flag_readout(name, k, 7, 8, false)?, "flag")?;
        println!("{name}: {} flagged data errors", set.members.len());
        for m in &set.members {
            let bits: String = m
                .x_error
                .iter()
                .map(|&b| if b { '1' } else { '0' })
                .collect();
            println!("  X on {bits}  syndrome {:?}", m.syndrome);
        }
    }

    let audit = audit_ft(&protocol, DEFAULT_BUDGET)?;
    println!(
        "single faults: {} placements, {} leaves, {} failures",
        audit.placements,
        audit.leaves,
        audit.failures.len()
    );
    Ok(())
}
