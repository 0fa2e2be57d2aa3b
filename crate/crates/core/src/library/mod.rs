//! Built-in protocols.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::protocol::{HistoryEntry, Next, ProtocolGraph};

pub mod det;
pub mod flag;
pub mod ghz;
pub mod steane;

pub use det::steane_det_prep;
pub use flag::steane_flag_prep;
pub use ghz::ghz_protocol;

/// Names accepted by [`by_name`].
pub const NAMES: [&str; 3] = ["ghz", "steane-det-0", "steane-flag-0"];

pub fn by_name(name: &str) -> Result<ProtocolGraph> {
    match name {
        "ghz" => ghz_protocol(),
        "steane-det-0" => steane_det_prep(),
        "steane-flag-0" => steane_flag_prep(),
        other => Err(Error::Protocol(format!(
            "unknown protocol `{other}`; built-ins are {}",
            NAMES.join(", ")
        ))),
    }
}

pub(crate) fn bit_at(entry: &HistoryEntry, loc: usize) -> Result<bool> {
    entry.record.bit_at(loc).ok_or_else(|| {
        Error::Protocol(format!(
            "`{}` has no outcome at location {loc}",
            entry.circuit
        ))
    })
}

pub(crate) fn successors(list: &[(&str, &[&str])]) -> BTreeMap<String, BTreeSet<Next>> {
    list.iter()
        .map(|(c, targets)| {
            let set = targets
                .iter()
                .map(|&t| match t {
                    "FAIL" => Next::Terminate { fail: true },
                    "OK" => Next::Terminate { fail: false },
                    n => Next::Circuit(n.to_string()),
                })
                .collect();
            (c.to_string(), set)
        })
        .collect()
}
