//! Logical zero of the Steane code by repeated flagged X-stabilizer readouts.
//!
//! Two rounds `a` and `b` of the three flag circuits run in sequence. A
//! raised flag, or a round-`b` syndrome bit that disagrees with round `a`,
//! diverts to one bare readout of all six stabilizers (`NFS`) before the
//! final data measurement. Every circuit uses its own ancillas:
//! data 0..7, then `(s, f)` pairs from 7 for SX1a..SX3b, then six bare
//! ancillas from 19.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::protocol::{HistoryEntry, Next, ProtocolGraph};
use crate::tableau::Basis;

use super::det::data_bits;
use super::steane::{self, FlagErrorSet, Syndrome, SUPPORTS};
use super::{bit_at, successors};

const N: usize = 25;
const NFS_BASE: usize = 19;

pub const FLAG_CIRCUITS: [&str; 6] = ["SX1a", "SX2a", "SX3a", "SX1b", "SX2b", "SX3b"];

/// Flagged readout of the X-stabilizer `k` (0-based) with ancillas `s`, `f`.
///
/// CNOTs run `s` to `a, f, b, c, f, d` over the ascending support, so the
/// two middle data couplings sit between the flag couplings.
pub fn flag_readout(name: &str, k: usize, s: usize, f: usize, init_data: bool) -> Result<Circuit> {
    let mut c = Circuit::new(name, N)?;
    if init_data {
        for q in 0..steane::DATA {
            c.init(Basis::Z, q)?;
        }
    }
    c.init(Basis::X, s)?;
    c.init(Basis::Z, f)?;
    let [a, b, cq, d] = SUPPORTS[k];
    for t in [a, f, b, cq, f, d] {
        c.gate(Gate::Cnot, &[s, t])?;
    }
    c.measure_named(Basis::X, s, "syn")?;
    c.measure_named(Basis::Z, f, "flag")?;
    Ok(c)
}

/// Bare readout of all six generators, labelled `sx1..sx3`, `sz1..sz3`.
pub fn nfs_circuit() -> Result<Circuit> {
    let mut c = Circuit::new("NFS", N)?;
    for (k, sup) in SUPPORTS.iter().enumerate() {
        let a = NFS_BASE + k;
        c.init(Basis::X, a)?;
        for &d in sup {
            c.gate(Gate::Cnot, &[a, d])?;
        }
        c.measure_named(Basis::X, a, &format!("sx{}", k + 1))?;
    }
    for (k, sup) in SUPPORTS.iter().enumerate() {
        let a = NFS_BASE + 3 + k;
        c.init(Basis::Z, a)?;
        for &d in sup {
            c.gate(Gate::Cnot, &[d, a])?;
        }
        c.measure_named(Basis::Z, a, &format!("sz{}", k + 1))?;
    }
    Ok(c)
}

struct FlagInfo {
    stabilizer: usize,
    round_b: bool,
    syn: usize,
    flag: usize,
    errors: FlagErrorSet,
}

struct FlagTransition {
    flags: BTreeMap<String, FlagInfo>,
    nfs_z: [usize; 3],
    meas: Vec<usize>,
}

impl FlagTransition {
    fn after_flag_circuit(&self, h: &[HistoryEntry], name: &str, info: &FlagInfo) -> Result<Next> {
        let last = h.last().expect("non-empty");
        if bit_at(last, info.flag)? {
            return Ok(Next::Circuit("NFS".into()));
        }
        if info.round_b {
            let a_name = FLAG_CIRCUITS[info.stabilizer];
            let a_entry = h
                .iter()
                .find(|e| e.circuit == a_name)
                .ok_or_else(|| Error::Protocol(format!("`{name}` ran before `{a_name}`")))?;
            if bit_at(a_entry, self.flags[a_name].syn)? != bit_at(last, info.syn)? {
                return Ok(Next::Circuit("NFS".into()));
            }
        }
        let pos = FLAG_CIRCUITS
            .iter()
            .position(|&c| c == name)
            .expect("flag circuit");
        Ok(Next::Circuit(
            FLAG_CIRCUITS
                .get(pos + 1)
                .copied()
                .unwrap_or("MEAS")
                .to_string(),
        ))
    }

    fn verdict(&self, h: &[HistoryEntry]) -> Result<Next> {
        let last = h.last().expect("non-empty");
        let mut bits = data_bits(last, &self.meas)?;
        if let Some(i) = h.iter().position(|e| e.circuit == "NFS") {
            let mut syn: Syndrome = [false; 3];
            for (k, &loc) in self.nfs_z.iter().enumerate() {
                syn[k] = bit_at(&h[i], loc)?;
            }
            let before = i
                .checked_sub(1)
                .map(|j| &h[j])
                .ok_or_else(|| Error::Protocol("NFS without predecessor".into()))?;
            let flagged = match self.flags.get(&before.circuit) {
                Some(info) if bit_at(before, info.flag)? => info.errors.correction_for(syn),
                _ => None,
            };
            match flagged {
                Some(e) => {
                    for (b, x) in bits.iter_mut().zip(e) {
                        *b ^= x;
                    }
                }
                None => {
                    if let Some(q) = steane::lookup_decode(syn) {
                        bits[q] ^= true;
                    }
                }
            }
        }
        Ok(Next::Terminate {
            fail: steane::is_logical_failure(&bits),
        })
    }
}

impl crate::protocol::Transition for FlagTransition {
    fn next(&self, h: &[HistoryEntry]) -> Result<Next> {
        let last = h
            .last()
            .ok_or_else(|| Error::Protocol("empty history".into()))?;
        let name = last.circuit.as_str();
        if let Some(info) = self.flags.get(name) {
            return self.after_flag_circuit(h, name, info);
        }
        match name {
            "NFS" => Ok(Next::Circuit("MEAS".into())),
            "MEAS" => self.verdict(h),
            other => Err(Error::UnknownCircuit(other.to_string())),
        }
    }
}

pub fn steane_flag_prep() -> Result<ProtocolGraph> {
    let mut circuits = Vec::new();
    let mut flags = BTreeMap::new();
    for (i, name) in FLAG_CIRCUITS.iter().enumerate() {
        let s = 7 + 2 * i;
        let c = flag_readout(name, i % 3, s, s + 1, i == 0)?;
        flags.insert(
            name.to_string(),
            FlagInfo {
                stabilizer: i % 3,
                round_b: i >= 3,
                syn: c.label_location("syn").expect("labelled"),
                flag: c.label_location("flag").expect("labelled"),
                errors: steane::flag_error_set(&c, "flag")?,
            },
        );
        circuits.push(c);
    }
    let nfs = nfs_circuit()?;
    let nfs_z = [1, 2, 3].map(|k| nfs.label_location(&format!("sz{k}")).expect("labelled"));
    let meas = steane::data_readout(N)?;
    let m = (1..=7)
        .map(|i| meas.label_location(&format!("m{i}")).expect("labelled"))
        .collect();
    circuits.push(nfs);
    circuits.push(meas);
    let hints = successors(&[
        ("SX1a", &["SX2a", "NFS"]),
        ("SX2a", &["SX3a", "NFS"]),
        ("SX3a", &["SX1b", "NFS"]),
        ("SX1b", &["SX2b", "NFS"]),
        ("SX2b", &["SX3b", "NFS"]),
        ("SX3b", &["MEAS", "NFS"]),
        ("NFS", &["MEAS"]),
        ("MEAS", &["FAIL", "OK"]),
    ]);
    let transition = FlagTransition {
        flags,
        nfs_z,
        meas: m,
    };
    Ok(
        ProtocolGraph::new("steane-flag-0", circuits, "SX1a", Arc::new(transition))?
            .with_ft(1, 8)?
            .with_successor_hints(hints),
    )
}
