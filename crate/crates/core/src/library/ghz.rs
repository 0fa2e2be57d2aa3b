//! Four-qubit GHZ preparation verified by a fifth flag qubit.

use std::sync::Arc;

use crate::circuit::{Circuit, Gate};
use crate::error::Result;
use crate::protocol::{ProtocolGraph, Rule, Target, TransitionTable};
use crate::tableau::Basis;

/// Inits, `H(0)`, the CNOT ladder `0→1, 1→2, 2→3`, then the parity check
/// of qubits 0 and 3 onto qubit 4, measured as `flag`.
pub fn ghz_circuit() -> Result<Circuit> {
    let mut c = Circuit::new("GHZ", 5)?;
    for q in 0..5 {
        c.init(Basis::Z, q)?;
    }
    c.gate(Gate::H, &[0])?;
    for (a, b) in [(0, 1), (1, 2), (2, 3), (0, 4), (3, 4)] {
        c.gate(Gate::Cnot, &[a, b])?;
    }
    c.measure_named(Basis::Z, 4, "flag")?;
    Ok(c)
}

/// Single-circuit protocol: a raised flag is the failure event.
pub fn ghz_protocol() -> Result<ProtocolGraph> {
    let c = ghz_circuit()?;
    let flag = c.label_location("flag").expect("labelled");
    let table = TransitionTable::new(vec![
        Rule {
            circuit: "GHZ".into(),
            conditions: vec![(flag, true)],
            target: Target::Fail,
        },
        Rule {
            circuit: "GHZ".into(),
            conditions: vec![],
            target: Target::Ok,
        },
    ]);
    let hints = table.successors();
    Ok(ProtocolGraph::new("ghz", vec![c], "GHZ", Arc::new(table))?
        .with_ft(0, 1)?
        .with_deterministic_root(true)
        .with_successor_hints(hints))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::LocationKind;

    #[test]
    fn counts() {
        let c = ghz_circuit().unwrap();
        assert_eq!(c.len(), 12);
        let k = c.category_counts();
        assert_eq!(k[LocationKind::Init.index()], 5);
        assert_eq!(k[LocationKind::SingleQubitGate.index()], 1);
        assert_eq!(k[LocationKind::TwoQubitGate.index()], 5);
        assert_eq!(k[LocationKind::Measurement.index()], 1);
    }
}
