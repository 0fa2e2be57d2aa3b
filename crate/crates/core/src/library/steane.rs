//! The [[7,1,3]] Steane code: stabilizers, codewords, lookup decoding and flag error sets.
//!
//! Data qubits are 0..7 here; generator supports are listed 0-based.

use std::collections::BTreeSet;

use crate::circuit::FaultPayload;
use crate::circuit::{propagate_frame, Circuit, Operation};
use crate::error::{Error, Result};
use crate::noise::payload_options;
use crate::pauli::{Pauli1, PauliOperator};
use crate::tableau::Basis;

pub const DATA: usize = 7;

/// Supports of K1, K2, K3 (same for X and Z type).
pub const SUPPORTS: [[usize; 4]; 3] = [[3, 4, 5, 6], [0, 2, 4, 6], [1, 2, 5, 6]];

/// Codewords of the logical zero state, qubit 1 first.
pub const CODEWORDS: [&str; 8] = [
    "0000000", "1010101", "0110011", "1100110", "0001111", "1011010", "0111100", "1101001",
];

pub type DataBits = [bool; DATA];
pub type Syndrome = [bool; 3];

pub fn codewords() -> Vec<DataBits> {
    CODEWORDS
        .iter()
        .map(|s| {
            let mut b = [false; DATA];
            for (i, c) in s.chars().enumerate() {
                b[i] = c == '1';
            }
            b
        })
        .collect()
}

/// The six generators K1X..K3X, K1Z..K3Z on an `n`-qubit register.
pub fn generators(n: usize) -> Result<Vec<PauliOperator>> {
    let mut out = Vec::with_capacity(6);
    for p in [Pauli1::X, Pauli1::Z] {
        for s in &SUPPORTS {
            out.push(PauliOperator::on(n, s, p)?);
        }
    }
    Ok(out)
}

pub fn logical_z(n: usize) -> Result<PauliOperator> {
    PauliOperator::on(n, &[0, 1, 2, 3, 4, 5, 6], Pauli1::Z)
}

/// Correction qubit (0-based) for a syndrome `(s1, s2, s3)`.
pub fn lookup_decode(s: Syndrome) -> Option<usize> {
    let q = 4 * s[0] as usize + s[1] as usize + 2 * s[2] as usize;
    q.checked_sub(1)
}

/// Z-stabilizer syndrome of an X error.
pub fn z_syndrome(x_error: &DataBits) -> Syndrome {
    let mut s = [false; 3];
    for (k, sup) in SUPPORTS.iter().enumerate() {
        s[k] = sup.iter().filter(|&&q| x_error[q]).count() % 2 == 1;
    }
    s
}

pub fn hamming_to_code(bits: &DataBits) -> usize {
    codewords()
        .iter()
        .map(|c| c.iter().zip(bits).filter(|(a, b)| a != b).count())
        .min()
        .expect("eight codewords")
}

/// A measured string is a failure when no codeword is within distance one.
pub fn is_logical_failure(bits: &DataBits) -> bool {
    hamming_to_code(bits) > 1
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct FlagError {
    pub x_error: DataBits,
    pub syndrome: Syndrome,
}

/// Data X errors produced by single faults that raise the flag.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FlagErrorSet {
    pub members: Vec<FlagError>,
}

impl FlagErrorSet {
    /// Lowest-weight member with the given syndrome.
    pub fn correction_for(&self, syndrome: Syndrome) -> Option<DataBits> {
        self.members
            .iter()
            .filter(|m| m.syndrome == syndrome)
            .min_by_key(|m| (m.x_error.iter().filter(|&&b| b).count(), m.x_error))
            .map(|m| m.x_error)
    }
}

/// Propagates a fault at `start` to the end of the circuit.
///
/// Returns the final frame and whether the measurement at `flag` was flipped.
fn propagate_from(
    circuit: &Circuit,
    start: usize,
    mut frame: PauliOperator,
    flag: usize,
) -> (PauliOperator, bool) {
    let mut flipped = false;
    for loc in &circuit.locations()[start + 1..] {
        let q = loc.targets[0];
        match loc.operation {
            Operation::Gate(g) => propagate_frame(&mut frame, g, &loc.targets),
            Operation::Init(_) => frame.set(q, Pauli1::I).expect("in range"),
            Operation::Measure(b) => {
                let hit = match b {
                    Basis::Z => frame.x(q),
                    Basis::X => frame.z(q),
                };
                if loc.index == flag && hit {
                    flipped = true;
                }
            }
        }
    }
    (frame, flipped)
}

/// Enumerates every single fault of `circuit` and keeps the data X errors
/// of those that flip the measurement labelled `flag_label`.
pub fn flag_error_set(circuit: &Circuit, flag_label: &str) -> Result<FlagErrorSet> {
    let flag = circuit
        .label_location(flag_label)
        .ok_or_else(|| Error::Protocol(format!("`{}` has no `{flag_label}`", circuit.name())))?;
    let n = circuit.n_qubits();
    let mut found = BTreeSet::new();
    for loc in circuit.locations() {
        for (payload, _) in payload_options(loc.kind) {
            let Some(payload) = payload else { continue };
            let mut frame = PauliOperator::identity(n);
            let mut flipped = false;
            match (loc.operation, payload) {
                (Operation::Gate(_), FaultPayload::Pauli(ps)) => {
                    for (&q, &p) in loc.targets.iter().zip(&ps) {
                        frame.set(q, p)?;
                    }
                }
                (Operation::Init(b), FaultPayload::Flip) => {
                    let p = if b == Basis::Z { Pauli1::X } else { Pauli1::Z };
                    frame.set(loc.targets[0], p)?;
                }
                (Operation::Measure(_), FaultPayload::Flip) => flipped = loc.index == flag,
                _ => unreachable!("payload tables match location kinds"),
            }
            let (frame, hit) = propagate_from(circuit, loc.index, frame, flag);
            if flipped ^ hit {
                let mut x_error = [false; DATA];
                for (q, b) in x_error.iter_mut().enumerate() {
                    *b = frame.x(q);
                }
                found.insert(FlagError {
                    syndrome: z_syndrome(&x_error),
                    x_error,
                });
            }
        }
    }
    Ok(FlagErrorSet {
        members: found.into_iter().collect(),
    })
}

/// Destructive Z readout of the seven data qubits, labelled `m1`..`m7`.
pub fn data_readout(n_qubits: usize) -> Result<Circuit> {
    let mut c = Circuit::new("MEAS", n_qubits)?;
    for q in 0..DATA {
        c.measure_named(Basis::Z, q, &format!("m{}", q + 1))?;
    }
    Ok(c)
}
