//! Protocols as graphs of circuits connected by measurement-conditioned transitions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::circuit::{Circuit, FaultEvent, MeasurementRecord};
use crate::error::{Error, Result};
use crate::tableau::{CoinSource, StabilizerState};

/// Where a protocol goes after a circuit has run.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Next {
    Circuit(String),
    Terminate { fail: bool },
}

/// Circuit name, `FAIL` or `OK`, as in protocol files.
impl fmt::Display for Next {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Next::Circuit(n) => f.write_str(n),
            Next::Terminate { fail: true } => f.write_str("FAIL"),
            Next::Terminate { fail: false } => f.write_str("OK"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HistoryEntry {
    pub circuit: String,
    pub record: MeasurementRecord,
}

/// Pure map from the full measurement history to the next step.
pub trait Transition: Send + Sync {
    fn next(&self, history: &[HistoryEntry]) -> Result<Next>;
}

impl<F> Transition for F
where
    F: Fn(&[HistoryEntry]) -> Result<Next> + Send + Sync,
{
    fn next(&self, history: &[HistoryEntry]) -> Result<Next> {
        self(history)
    }
}

/// Upper limit on circuits per shot, guarding against transition cycles.
pub const MAX_CIRCUITS_PER_SHOT: usize = 1000;

#[derive(Clone)]
pub struct ProtocolGraph {
    name: String,
    circuits: BTreeMap<String, Circuit>,
    root: String,
    transition: Arc<dyn Transition>,
    ft_order: u8,
    max_ft_length: usize,
    deterministic_root: bool,
    n_qubits: usize,
    successor_hints: Option<BTreeMap<String, BTreeSet<Next>>>,
}

impl fmt::Debug for ProtocolGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProtocolGraph")
            .field("name", &self.name)
            .field("root", &self.root)
            .field("circuits", &self.circuits.keys().collect::<Vec<_>>())
            .field("t", &self.ft_order)
            .field("L", &self.max_ft_length)
            .finish()
    }
}

impl ProtocolGraph {
    pub fn new(
        name: impl Into<String>,
        circuits: Vec<Circuit>,
        root: impl Into<String>,
        transition: Arc<dyn Transition>,
    ) -> Result<Self> {
        let root = root.into();
        let mut map = BTreeMap::new();
        for c in circuits {
            let key = c.name().to_string();
            if map.insert(key.clone(), c).is_some() {
                return Err(Error::Protocol(format!("duplicate circuit `{key}`")));
            }
        }
        if !map.contains_key(&root) {
            return Err(Error::Protocol(format!("root `{root}` is not a circuit")));
        }
        let n_qubits = map.values().map(Circuit::n_qubits).max().unwrap_or(1);
        Ok(ProtocolGraph {
            name: name.into(),
            circuits: map,
            root,
            transition,
            ft_order: 0,
            max_ft_length: 1,
            deterministic_root: false,
            n_qubits,
            successor_hints: None,
        })
    }

    /// Sets the tolerated fault order `t` (0 or 1) and maximal sequence length `L`.
    pub fn with_ft(mut self, t: u8, length: usize) -> Result<Self> {
        if t > 1 {
            return Err(Error::Protocol(format!("fault order {t} not supported")));
        }
        if length == 0 {
            return Err(Error::Protocol("sequence length must be at least 1".into()));
        }
        self.ft_order = t;
        self.max_ft_length = length;
        Ok(self)
    }

    pub fn with_deterministic_root(mut self, yes: bool) -> Self {
        self.deterministic_root = yes;
        self
    }

    pub(crate) fn with_successor_hints(mut self, hints: BTreeMap<String, BTreeSet<Next>>) -> Self {
        self.successor_hints = Some(hints);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn root(&self) -> &str {
        &self.root
    }

    pub fn ft_order(&self) -> u8 {
        self.ft_order
    }

    pub fn max_ft_length(&self) -> usize {
        self.max_ft_length
    }

    pub fn deterministic_root(&self) -> bool {
        self.deterministic_root
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn circuits(&self) -> &BTreeMap<String, Circuit> {
        &self.circuits
    }

    pub fn circuit(&self, name: &str) -> Result<&Circuit> {
        self.circuits
            .get(name)
            .ok_or_else(|| Error::UnknownCircuit(name.to_string()))
    }

    /// Statically declared successor sets, when the protocol is table driven.
    pub fn successor_hints(&self) -> Option<&BTreeMap<String, BTreeSet<Next>>> {
        self.successor_hints.as_ref()
    }

    /// Next step after the last circuit of `history`.
    pub fn next_node(&self, history: &[HistoryEntry]) -> Result<Next> {
        if history.is_empty() {
            return Err(Error::Protocol("empty history".into()));
        }
        for h in history {
            self.circuit(&h.circuit)?;
        }
        let next = self.transition.next(history)?;
        if let Next::Circuit(name) = &next {
            self.circuit(name)?;
        }
        Ok(next)
    }

    /// Runs every circuit fault-free; returns the circuit sequence and verdict.
    pub fn run_fault_free<C: CoinSource + ?Sized>(
        &self,
        coins: &mut C,
    ) -> Result<(Vec<String>, bool)> {
        let mut state = StabilizerState::new_zero_state(self.n_qubits)?;
        let mut history: Vec<HistoryEntry> = Vec::new();
        let mut current = self.root.clone();
        loop {
            if history.len() >= MAX_CIRCUITS_PER_SHOT {
                return Err(Error::Runaway(MAX_CIRCUITS_PER_SHOT));
            }
            let circuit = self.circuit(&current)?;
            let record = circuit.run_with_faults(&mut state, &FaultEvent::empty(), coins)?;
            history.push(HistoryEntry {
                circuit: current.clone(),
                record,
            });
            match self.next_node(&history)? {
                Next::Circuit(n) => current = n,
                Next::Terminate { fail } => {
                    return Ok((history.into_iter().map(|h| h.circuit).collect(), fail));
                }
            }
        }
    }
}

/// Target of a declarative transition rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Target {
    Circuit(String),
    Fail,
    Ok,
}

impl Target {
    fn as_next(&self) -> Next {
        match self {
            Target::Circuit(c) => Next::Circuit(c.clone()),
            Target::Fail => Next::Terminate { fail: true },
            Target::Ok => Next::Terminate { fail: false },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub circuit: String,
    /// `(measurement location, required bit)` pairs, all of which must hold.
    pub conditions: Vec<(usize, bool)>,
    pub target: Target,
}

/// First-match transition table keyed on named bits of the latest record.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TransitionTable {
    rules: Vec<Rule>,
}

impl TransitionTable {
    pub fn new(rules: Vec<Rule>) -> Self {
        TransitionTable { rules }
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn successors(&self) -> BTreeMap<String, BTreeSet<Next>> {
        let mut out: BTreeMap<String, BTreeSet<Next>> = BTreeMap::new();
        for r in &self.rules {
            out.entry(r.circuit.clone())
                .or_default()
                .insert(r.target.as_next());
        }
        out
    }
}

impl Transition for TransitionTable {
    fn next(&self, history: &[HistoryEntry]) -> Result<Next> {
        let last = history
            .last()
            .ok_or_else(|| Error::Protocol("empty history".into()))?;
        for rule in self.rules.iter().filter(|r| r.circuit == last.circuit) {
            let hit = rule
                .conditions
                .iter()
                .all(|&(loc, bit)| last.record.bit_at(loc) == Some(bit));
            if hit {
                return Ok(rule.target.as_next());
            }
        }
        Err(Error::Protocol(format!(
            "no rule matches circuit `{}` with outcomes {}",
            last.circuit, last.record
        )))
    }
}

type RawRule = (usize, String, Vec<(String, bool)>, String);

/// Parses a protocol description.
///
/// ```text
/// name: verify
/// root: PREP
/// t: 0
/// length: 1
/// deterministic_root: true
///
/// circuit PREP
/// qubits: 2
/// INIT Z 0
/// INIT Z 1
/// GATE CNOT 0 1
/// MEAS Z 1 @flag
/// end
///
/// rule PREP flag=1 -> FAIL
/// rule PREP -> OK
/// ```
///
/// Rules are tried in file order; the first whose conditions all hold on
/// the most recent measurement record wins. Targets are a circuit name,
/// `FAIL` or `OK`.
pub fn parse_protocol(text: &str) -> Result<ProtocolGraph> {
    let mut name = String::from("custom");
    let mut root: Option<String> = None;
    let mut t = 0u8;
    let mut length = 1usize;
    let mut det_root = false;
    let mut circuits: Vec<Circuit> = Vec::new();
    // (line, circuit, conditions, target)
    let mut raw_rules: Vec<RawRule> = Vec::new();

    let lines: Vec<&str> = text.lines().collect();
    let mut i = 0;
    while i < lines.len() {
        let line_no = i + 1;
        let line = lines[i].split('#').next().unwrap_or("").trim();
        i += 1;
        if line.is_empty() {
            continue;
        }
        let perr = |msg: String| Error::Parse { line: line_no, msg };
        if let Some(cname) = line.strip_prefix("circuit ") {
            let start = i;
            while i < lines.len() && lines[i].trim() != "end" {
                i += 1;
            }
            if i == lines.len() {
                return Err(perr(format!("circuit `{}` lacks `end`", cname.trim())));
            }
            let body = lines[start..i].join("\n");
            let c = Circuit::parse(cname.trim(), &body).map_err(|e| match e {
                Error::Parse { line, msg } => Error::Parse {
                    line: line + start,
                    msg,
                },
                other => other,
            })?;
            circuits.push(c);
            i += 1;
        } else if let Some(rest) = line.strip_prefix("rule ") {
            let (lhs, rhs) = rest
                .split_once("->")
                .ok_or_else(|| perr("rule needs `->`".into()))?;
            let mut toks = lhs.split_whitespace();
            let circuit = toks
                .next()
                .ok_or_else(|| perr("rule needs a circuit".into()))?
                .to_string();
            let mut conds = Vec::new();
            for tok in toks {
                let (label, bit) = tok
                    .split_once('=')
                    .ok_or_else(|| perr(format!("bad condition `{tok}`")))?;
                let bit = match bit {
                    "0" => false,
                    "1" => true,
                    _ => return Err(perr(format!("bad bit in `{tok}`"))),
                };
                conds.push((label.to_string(), bit));
            }
            raw_rules.push((line_no, circuit, conds, rhs.trim().to_string()));
        } else if let Some((key, value)) = line.split_once(':') {
            let value = value.trim();
            match key.trim() {
                "name" => name = value.to_string(),
                "root" => root = Some(value.to_string()),
                "t" => {
                    t = value
                        .parse()
                        .map_err(|_| perr(format!("bad t `{value}`")))?
                }
                "length" => {
                    length = value
                        .parse()
                        .map_err(|_| perr(format!("bad length `{value}`")))?
                }
                "deterministic_root" => {
                    det_root = value
                        .parse()
                        .map_err(|_| perr(format!("bad flag `{value}`")))?
                }
                k => return Err(perr(format!("unknown key `{k}`"))),
            }
        } else {
            return Err(perr(format!("unrecognized line `{line}`")));
        }
    }

    let by_name: BTreeMap<&str, &Circuit> = circuits.iter().map(|c| (c.name(), c)).collect();
    let mut rules = Vec::new();
    for (line, circuit, conds, target) in raw_rules {
        let perr = |msg: String| Error::Parse { line, msg };
        let c = by_name
            .get(circuit.as_str())
            .ok_or_else(|| perr(format!("unknown circuit `{circuit}`")))?;
        let conditions = conds
            .into_iter()
            .map(|(label, bit)| {
                c.label_location(&label)
                    .map(|loc| (loc, bit))
                    .ok_or_else(|| perr(format!("circuit `{circuit}` has no label `{label}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        let target = match target.as_str() {
            "FAIL" => Target::Fail,
            "OK" => Target::Ok,
            other if by_name.contains_key(other) => Target::Circuit(other.to_string()),
            other => return Err(perr(format!("dangling target `{other}`"))),
        };
        rules.push(Rule {
            circuit,
            conditions,
            target,
        });
    }
    let table = TransitionTable::new(rules);
    let succ = table.successors();
    for (c, s) in &succ {
        if s.len() > 2 {
            return Err(Error::Protocol(format!(
                "circuit `{c}` has {} possible successors; at most two are allowed",
                s.len()
            )));
        }
    }
    let root = root.ok_or_else(|| Error::Protocol("missing `root:`".into()))?;
    Ok(ProtocolGraph::new(name, circuits, root, Arc::new(table))?
        .with_ft(t, length)?
        .with_deterministic_root(det_root)
        .with_successor_hints(succ))
}
