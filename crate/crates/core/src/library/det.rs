//! Logical zero of the Steane code by encoding, a flagged weight-three check
//! and a conditional correction.
//!
//! Qubits: data 0..7, flag ancilla 7, second ancilla 8.

use std::sync::Arc;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::protocol::{HistoryEntry, Next, ProtocolGraph};
use crate::tableau::Basis;

use super::steane::{self, DataBits};
use super::{bit_at, successors};

const N: usize = 9;
const FLAG: usize = 7;
const SYN: usize = 8;

/// Non-FT encoder followed by the `Z3 Z5 Z6` readout onto the flag ancilla.
///
/// Each pivot fans out to qubit 7 first, so a pivot fault that leaves a
/// weight-two remainder touches qubit 3, 5 or 6 and raises the flag.
pub fn encoder_circuit() -> Result<Circuit> {
    let mut c = Circuit::new("ENC", N)?;
    for q in 0..=FLAG {
        c.init(Basis::Z, q)?;
    }
    for p in [0, 1, 3] {
        c.gate(Gate::H, &[p])?;
    }
    let fans: [(usize, [usize; 3]); 3] = [(0, [6, 4, 2]), (1, [6, 5, 2]), (3, [6, 5, 4])];
    for (p, targets) in fans {
        for t in targets {
            c.gate(Gate::Cnot, &[p, t])?;
        }
    }
    for d in [2, 4, 5] {
        c.gate(Gate::Cnot, &[d, FLAG])?;
    }
    c.measure_named(Basis::Z, FLAG, "flag")?;
    Ok(c)
}

/// Readout of `Z1 Z2 Z4 Z7` on a fresh ancilla.
pub fn sz_circuit() -> Result<Circuit> {
    let mut c = Circuit::new("SZ", N)?;
    c.init(Basis::Z, SYN)?;
    for d in [0, 1, 3, 6] {
        c.gate(Gate::Cnot, &[d, SYN])?;
    }
    c.measure_named(Basis::Z, SYN, "s")?;
    Ok(c)
}

pub fn x7_circuit() -> Result<Circuit> {
    let mut c = Circuit::new("X7", N)?;
    c.gate(Gate::X, &[6])?;
    Ok(c)
}

pub(crate) fn data_bits(entry: &HistoryEntry, meas: &[usize]) -> Result<DataBits> {
    let mut b = [false; steane::DATA];
    for (i, &loc) in meas.iter().enumerate() {
        b[i] = bit_at(entry, loc)?;
    }
    Ok(b)
}

pub fn steane_det_prep() -> Result<ProtocolGraph> {
    let enc = encoder_circuit()?;
    let sz = sz_circuit()?;
    let meas = steane::data_readout(N)?;
    let flag = enc.label_location("flag").expect("labelled");
    let s = sz.label_location("s").expect("labelled");
    let m: Vec<usize> = (1..=7)
        .map(|i| meas.label_location(&format!("m{i}")).expect("labelled"))
        .collect();
    let to = |n: &str| Next::Circuit(n.to_string());
    let transition = move |h: &[HistoryEntry]| -> Result<Next> {
        let last = h
            .last()
            .ok_or_else(|| Error::Protocol("empty history".into()))?;
        Ok(match last.circuit.as_str() {
            "ENC" if bit_at(last, flag)? => to("SZ"),
            "ENC" => to("MEAS"),
            "SZ" if bit_at(last, s)? => to("X7"),
            "SZ" | "X7" => to("MEAS"),
            "MEAS" => Next::Terminate {
                fail: steane::is_logical_failure(&data_bits(last, &m)?),
            },
            other => return Err(Error::UnknownCircuit(other.to_string())),
        })
    };
    let hints = successors(&[
        ("ENC", &["SZ", "MEAS"]),
        ("SZ", &["X7", "MEAS"]),
        ("X7", &["MEAS"]),
        ("MEAS", &["FAIL", "OK"]),
    ]);
    Ok(ProtocolGraph::new(
        "steane-det-0",
        vec![enc, sz, x7_circuit()?, meas],
        "ENC",
        Arc::new(transition),
    )?
    .with_ft(1, 4)?
    .with_deterministic_root(true)
    .with_successor_hints(hints))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::FaultEvent;
    use crate::tableau::StabilizerState;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn encoder_prepares_logical_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut st = StabilizerState::new_zero_state(N).unwrap();
        let rec = encoder_circuit()
            .unwrap()
            .run_with_faults(&mut st, &FaultEvent::empty(), &mut rng)
            .unwrap();
        assert_eq!(rec.bits(), vec![false]);
        for g in steane::generators(N).unwrap() {
            assert!(st.is_stabilized_by(&g), "{g}");
        }
        assert!(st.is_stabilized_by(&steane::logical_z(N).unwrap()));
    }
}
