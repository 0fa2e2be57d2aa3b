//! Circuits as ordered fault locations, fault events and noisy execution.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::pauli::{Pauli1, PauliOperator};
use crate::tableau::{Basis, CoinSource, StabilizerState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gate {
    I,
    X,
    Y,
    Z,
    H,
    S,
    Cnot,
}

impl Gate {
    pub fn arity(self) -> usize {
        if self == Gate::Cnot {
            2
        } else {
            1
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Gate::I => "I",
            Gate::X => "X",
            Gate::Y => "Y",
            Gate::Z => "Z",
            Gate::H => "H",
            Gate::S => "S",
            Gate::Cnot => "CNOT",
        }
    }
}

impl FromStr for Gate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "I" => Gate::I,
            "X" => Gate::X,
            "Y" => Gate::Y,
            "Z" => Gate::Z,
            "H" => Gate::H,
            "S" => Gate::S,
            "CNOT" | "CX" => Gate::Cnot,
            _ => return Err(Error::UnknownGate(s.to_string())),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Operation {
    Gate(Gate),
    Init(Basis),
    Measure(Basis),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LocationKind {
    SingleQubitGate,
    TwoQubitGate,
    Init,
    Measurement,
}

impl LocationKind {
    pub const ALL: [LocationKind; 4] = [
        LocationKind::SingleQubitGate,
        LocationKind::TwoQubitGate,
        LocationKind::Init,
        LocationKind::Measurement,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            LocationKind::SingleQubitGate => "single_qubit_gate",
            LocationKind::TwoQubitGate => "two_qubit_gate",
            LocationKind::Init => "init",
            LocationKind::Measurement => "measurement",
        }
    }
}

impl FromStr for LocationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LocationKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown location kind `{s}`")))
    }
}

impl Operation {
    pub fn kind(self) -> LocationKind {
        match self {
            Operation::Gate(g) if g.arity() == 2 => LocationKind::TwoQubitGate,
            Operation::Gate(_) => LocationKind::SingleQubitGate,
            Operation::Init(_) => LocationKind::Init,
            Operation::Measure(_) => LocationKind::Measurement,
        }
    }

    fn arity(self) -> usize {
        match self {
            Operation::Gate(g) => g.arity(),
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Location {
    pub index: usize,
    pub kind: LocationKind,
    pub operation: Operation,
    pub targets: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    name: String,
    n_qubits: usize,
    locations: Vec<Location>,
    labels: BTreeMap<String, usize>,
}

impl Circuit {
    pub fn new(name: impl Into<String>, n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::NoQubits);
        }
        Ok(Circuit {
            name: name.into(),
            n_qubits,
            locations: Vec::new(),
            labels: BTreeMap::new(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn locations(&self) -> &[Location] {
        &self.locations
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    /// Appends a location and returns its index.
    pub fn push(&mut self, operation: Operation, targets: &[usize]) -> Result<usize> {
        if targets.len() != operation.arity() {
            return Err(Error::Arity {
                expected: operation.arity(),
                got: targets.len(),
            });
        }
        for (i, &t) in targets.iter().enumerate() {
            if t >= self.n_qubits {
                return Err(Error::QubitOutOfRange {
                    index: t,
                    n: self.n_qubits,
                });
            }
            if targets[..i].contains(&t) {
                return Err(Error::RepeatedTarget(t));
            }
        }
        let index = self.locations.len();
        self.locations.push(Location {
            index,
            kind: operation.kind(),
            operation,
            targets: targets.to_vec(),
        });
        Ok(index)
    }

    pub fn gate(&mut self, gate: Gate, targets: &[usize]) -> Result<usize> {
        self.push(Operation::Gate(gate), targets)
    }

    pub fn init(&mut self, basis: Basis, qubit: usize) -> Result<usize> {
        self.push(Operation::Init(basis), &[qubit])
    }

    pub fn measure(&mut self, basis: Basis, qubit: usize) -> Result<usize> {
        self.push(Operation::Measure(basis), &[qubit])
    }

    /// Adds a measurement whose outcome can be looked up by name.
    pub fn measure_named(&mut self, basis: Basis, qubit: usize, label: &str) -> Result<usize> {
        if self.labels.contains_key(label) {
            return Err(Error::Invalid(format!(
                "duplicate measurement label `{label}`"
            )));
        }
        let idx = self.measure(basis, qubit)?;
        self.labels.insert(label.to_string(), idx);
        Ok(idx)
    }

    pub fn label_location(&self, label: &str) -> Option<usize> {
        self.labels.get(label).copied()
    }

    pub fn labels(&self) -> &BTreeMap<String, usize> {
        &self.labels
    }

    /// Location counts indexed by [`LocationKind::index`].
    pub fn category_counts(&self) -> [usize; 4] {
        let mut c = [0; 4];
        for l in &self.locations {
            c[l.kind.index()] += 1;
        }
        c
    }

    pub fn measurement_count(&self) -> usize {
        self.category_counts()[LocationKind::Measurement.index()]
    }

    /// Executes the circuit with the fault event injected.
    pub fn run_with_faults<C: CoinSource + ?Sized>(
        &self,
        state: &mut StabilizerState,
        fault: &FaultEvent,
        coins: &mut C,
    ) -> Result<MeasurementRecord> {
        if state.n() < self.n_qubits {
            return Err(Error::SizeMismatch {
                expected: self.n_qubits,
                got: state.n(),
            });
        }
        fault.validate(self)?;
        let mut record = MeasurementRecord::default();
        for loc in &self.locations {
            let payload = fault.entries.get(&loc.index);
            match loc.operation {
                Operation::Gate(g) => {
                    apply_gate(state, g, &loc.targets)?;
                    if let Some(FaultPayload::Pauli(ps)) = payload {
                        for (&q, &p) in loc.targets.iter().zip(ps) {
                            state.pauli1(q, p)?;
                        }
                    }
                }
                Operation::Init(basis) => {
                    state.reset(loc.targets[0], basis, coins)?;
                    if payload.is_some() {
                        let flip = if basis == Basis::Z {
                            Pauli1::X
                        } else {
                            Pauli1::Z
                        };
                        state.pauli1(loc.targets[0], flip)?;
                    }
                }
                Operation::Measure(basis) => {
                    let (bit, _) = state.measure(loc.targets[0], basis, coins)?;
                    record.push(loc.index, bit ^ payload.is_some());
                }
            }
        }
        Ok(record)
    }

    /// Serializes to the line format understood by [`Circuit::parse`].
    pub fn to_text(&self) -> String {
        let by_loc: BTreeMap<usize, &str> =
            self.labels.iter().map(|(k, &v)| (v, k.as_str())).collect();
        let mut out = format!("qubits: {}\n", self.n_qubits);
        for loc in &self.locations {
            let (kind, op) = match loc.operation {
                Operation::Gate(g) => ("GATE", g.name()),
                Operation::Init(b) => ("INIT", basis_name(b)),
                Operation::Measure(b) => ("MEAS", basis_name(b)),
            };
            write!(out, "{kind} {op}").unwrap();
            for t in &loc.targets {
                write!(out, " {t}").unwrap();
            }
            if let Some(label) = by_loc.get(&loc.index) {
                write!(out, " @{label}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Parses the line format:
    ///
    /// ```text
    /// qubits: 2
    /// INIT Z 0
    /// GATE H 0
    /// GATE CNOT 0 1
    /// MEAS Z 1 @flag
    /// ```
    ///
    /// Blank lines and `#` comments are ignored. `KIND` is `INIT`, `GATE` or
    /// `MEAS`; bases are `Z` or `X`; qubits are 0-based; an optional
    /// `@label` names a measurement outcome.
    pub fn parse(name: &str, text: &str) -> Result<Circuit> {
        let mut circuit: Option<Circuit> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let perr = |msg: String| Error::Parse { line: line_no, msg };
            let Some(c) = circuit.as_mut() else {
                let n = line
                    .strip_prefix("qubits:")
                    .ok_or_else(|| perr("expected header `qubits: n`".into()))?
                    .trim()
                    .parse::<usize>()
                    .map_err(|e| perr(e.to_string()))?;
                circuit = Some(Circuit::new(name, n).map_err(|e| perr(e.to_string()))?);
                continue;
            };
            let mut toks: Vec<&str> = line.split_whitespace().collect();
            let label = match toks.last() {
                Some(t) if t.starts_with('@') => {
                    let l = t[1..].to_string();
                    toks.pop();
                    Some(l)
                }
                _ => None,
            };
            if toks.len() < 3 {
                return Err(perr("expected `KIND OP TARGETS...`".into()));
            }
            let targets = toks[2..]
                .iter()
                .map(|t| t.parse::<usize>().map_err(|e| perr(format!("{t}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            let op = match toks[0] {
                "GATE" => Operation::Gate(toks[1].parse().map_err(|e: Error| perr(e.to_string()))?),
                "INIT" => {
                    Operation::Init(parse_basis(toks[1]).ok_or_else(|| perr("bad basis".into()))?)
                }
                "MEAS" => Operation::Measure(
                    parse_basis(toks[1]).ok_or_else(|| perr("bad basis".into()))?,
                ),
                k => return Err(perr(format!("unknown kind `{k}`"))),
            };
            match (op, label) {
                (Operation::Measure(b), Some(l)) => {
                    if targets.len() != 1 {
                        return Err(perr("measurement takes one target".into()));
                    }
                    c.measure_named(b, targets[0], &l)
                        .map_err(|e| perr(e.to_string()))?;
                }
                (_, Some(_)) => return Err(perr("labels are only allowed on measurements".into())),
                (op, None) => {
                    c.push(op, &targets).map_err(|e| perr(e.to_string()))?;
                }
            }
        }
        circuit.ok_or(Error::Parse {
            line: 0,
            msg: "missing header `qubits: n`".into(),
        })
    }
}

fn basis_name(b: Basis) -> &'static str {
    match b {
        Basis::Z => "Z",
        Basis::X => "X",
    }
}

fn parse_basis(s: &str) -> Option<Basis> {
    match s {
        "Z" => Some(Basis::Z),
        "X" => Some(Basis::X),
        _ => None,
    }
}

pub fn apply_gate(state: &mut StabilizerState, gate: Gate, targets: &[usize]) -> Result<()> {
    if targets.len() != gate.arity() {
        return Err(Error::Arity {
            expected: gate.arity(),
            got: targets.len(),
        });
    }
    match gate {
        Gate::I => Ok(()),
        Gate::X => state.pauli1(targets[0], Pauli1::X),
        Gate::Y => state.pauli1(targets[0], Pauli1::Y),
        Gate::Z => state.pauli1(targets[0], Pauli1::Z),
        Gate::H => state.h(targets[0]),
        Gate::S => state.s(targets[0]),
        Gate::Cnot => state.cnot(targets[0], targets[1]),
    }
}

/// Pauli frame update for a Clifford gate, ignoring phases.
pub fn propagate_frame(frame: &mut PauliOperator, gate: Gate, targets: &[usize]) {
    match gate {
        Gate::H => {
            let q = targets[0];
            let (x, z) = (frame.x(q), frame.z(q));
            frame.set(q, Pauli1::from_bits(z, x)).expect("in range");
        }
        Gate::S => {
            let q = targets[0];
            let (x, z) = (frame.x(q), frame.z(q));
            frame.set(q, Pauli1::from_bits(x, z ^ x)).expect("in range");
        }
        Gate::Cnot => {
            let (c, t) = (targets[0], targets[1]);
            let (xc, zc, xt, zt) = (frame.x(c), frame.z(c), frame.x(t), frame.z(t));
            frame
                .set(c, Pauli1::from_bits(xc, zc ^ zt))
                .expect("in range");
            frame
                .set(t, Pauli1::from_bits(xt ^ xc, zt))
                .expect("in range");
        }
        _ => {}
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FaultPayload {
    /// One single-qubit Pauli per gate target, applied after the gate.
    Pauli(Vec<Pauli1>),
    /// Flipped preparation or flipped classical outcome.
    Flip,
}

/// Faulty locations of one circuit execution.
///
/// Locations whose fault was drawn but has no effect (an init or
/// measurement that was not flipped) are kept in `silent` so that they
/// still count toward the weight.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct FaultEvent {
    pub entries: BTreeMap<usize, FaultPayload>,
    pub silent: BTreeSet<usize>,
}

impl FaultEvent {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(location: usize, payload: FaultPayload) -> Self {
        let mut e = Self::default();
        e.entries.insert(location, payload);
        e
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty() && self.silent.is_empty()
    }

    pub fn total_weight(&self) -> usize {
        self.entries.len() + self.silent.len()
    }

    pub fn locations(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.keys().chain(self.silent.iter()).copied()
    }

    pub fn validate(&self, circuit: &Circuit) -> Result<()> {
        for (&idx, payload) in &self.entries {
            let loc = circuit
                .locations
                .get(idx)
                .ok_or(Error::NoSuchLocation(idx))?;
            let ok = match (loc.operation, payload) {
                (Operation::Gate(_), FaultPayload::Pauli(ps)) => {
                    ps.len() == loc.targets.len() && ps.iter().any(|&p| p != Pauli1::I)
                }
                (Operation::Init(_) | Operation::Measure(_), FaultPayload::Flip) => true,
                _ => false,
            };
            if !ok {
                return Err(Error::PayloadMismatch(idx));
            }
        }
        for &idx in &self.silent {
            if idx >= circuit.len() {
                return Err(Error::NoSuchLocation(idx));
            }
            if self.entries.contains_key(&idx) {
                return Err(Error::PayloadMismatch(idx));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct MeasurementRecord {
    outcomes: Vec<(usize, bool)>,
}

impl MeasurementRecord {
    pub fn push(&mut self, location: usize, bit: bool) {
        self.outcomes.push((location, bit));
    }

    pub fn outcomes(&self) -> &[(usize, bool)] {
        &self.outcomes
    }

    pub fn bits(&self) -> Vec<bool> {
        self.outcomes.iter().map(|&(_, b)| b).collect()
    }

    pub fn bit_at(&self, location: usize) -> Option<bool> {
        self.outcomes
            .iter()
            .find(|&&(l, _)| l == location)
            .map(|&(_, b)| b)
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }
}

impl fmt::Display for MeasurementRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &(_, b) in &self.outcomes {
            write!(f, "{}", b as u8)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bell() -> Circuit {
        let mut c = Circuit::new("bell", 2).unwrap();
        c.init(Basis::Z, 0).unwrap();
        c.init(Basis::Z, 1).unwrap();
        c.gate(Gate::H, &[0]).unwrap();
        c.gate(Gate::Cnot, &[0, 1]).unwrap();
        c.measure(Basis::X, 0).unwrap();
        c.measure_named(Basis::Z, 1, "b").unwrap();
        c
    }

    #[test]
    fn counts_by_kind() {
        assert_eq!(bell().category_counts(), [1, 1, 2, 2]);
        assert_eq!(Circuit::new("e", 1).unwrap().category_counts(), [0; 4]);
    }

    #[test]
    fn text_round_trip() {
        let c = bell();
        let back = Circuit::parse("bell", &c.to_text()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.label_location("b"), Some(5));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = Circuit::parse("x", "qubits: 2\nGATE FOO 0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(Circuit::parse("x", "GATE H 0").is_err());
        assert!(Circuit::parse("x", "qubits: 2\nGATE CNOT 1 1").is_err());
    }

    #[test]
    fn measurement_flip_inverts_record() {
        let mut c = Circuit::new("m", 1).unwrap();
        c.init(Basis::Z, 0).unwrap();
        let m = c.measure(Basis::Z, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s = StabilizerState::new_zero_state(1).unwrap();
        let clean = c
            .run_with_faults(&mut s, &FaultEvent::empty(), &mut rng)
            .unwrap();
        let mut s = StabilizerState::new_zero_state(1).unwrap();
        let flipped = c
            .run_with_faults(&mut s, &FaultEvent::single(m, FaultPayload::Flip), &mut rng)
            .unwrap();
        assert_eq!(clean.bits(), vec![false]);
        assert_eq!(flipped.bits(), vec![true]);
    }

    #[test]
    fn invalid_faults_are_rejected() {
        let c = bell();
        let mut s = StabilizerState::new_zero_state(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let bad = FaultEvent::single(9, FaultPayload::Flip);
        assert_eq!(
            c.run_with_faults(&mut s, &bad, &mut rng),
            Err(Error::NoSuchLocation(9))
        );
        let bad = FaultEvent::single(2, FaultPayload::Flip);
        assert_eq!(
            c.run_with_faults(&mut s, &bad, &mut rng),
            Err(Error::PayloadMismatch(2))
        );
        let bad = FaultEvent::single(3, FaultPayload::Pauli(vec![Pauli1::X]));
        assert_eq!(
            c.run_with_faults(&mut s, &bad, &mut rng),
            Err(Error::PayloadMismatch(3))
        );
    }

    #[test]
    fn frame_propagation_through_cnot() {
        let mut f: PauliOperator = "XI".parse().unwrap();
        propagate_frame(&mut f, Gate::Cnot, &[0, 1]);
        assert_eq!(f.to_string(), "+XX");
        let mut f: PauliOperator = "IZ".parse().unwrap();
        propagate_frame(&mut f, Gate::Cnot, &[0, 1]);
        assert_eq!(f.to_string(), "+ZZ");
    }
}
