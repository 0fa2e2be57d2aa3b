//! Exact enumeration: subset failure rates, the single-fault audit and
//! successor probing.
//!
//! Random measurement outcomes are expanded exactly: every sequence of fair
//! coins a run consumes is visited once, weighted by `2^-len`.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;

use crate::circuit::{Circuit, FaultEvent, FaultPayload, MeasurementRecord};
use crate::error::{Error, Result};
use crate::noise::{payload_options, NoiseParams};
use crate::protocol::{HistoryEntry, Next, ProtocolGraph, MAX_CIRCUITS_PER_SHOT};
use crate::stats::NeumaierSum;
use crate::tableau::{CoinSource, StabilizerState};

/// Default cap on enumerated leaves.
pub const DEFAULT_BUDGET: u64 = 50_000_000;

/// Coin source replaying a fixed prefix, then answering `false`.
#[derive(Clone, Debug, Default)]
pub struct ForcedCoins {
    prefix: Vec<bool>,
    used: Vec<bool>,
}

impl ForcedCoins {
    pub fn new(prefix: Vec<bool>) -> Self {
        ForcedCoins {
            prefix,
            used: Vec::new(),
        }
    }

    pub fn used(&self) -> &[bool] {
        &self.used
    }

    /// Probability of the consumed sequence.
    pub fn weight(&self) -> f64 {
        0.5f64.powi(self.used.len() as i32)
    }

    /// Prefix of the next unvisited coin sequence, if any.
    pub fn next_prefix(&self) -> Option<Vec<bool>> {
        let mut next = self.used.clone();
        while next.last() == Some(&true) {
            next.pop();
        }
        let last = next.last_mut()?;
        *last = true;
        Some(next)
    }
}

impl CoinSource for ForcedCoins {
    fn flip(&mut self) -> bool {
        let b = self.prefix.get(self.used.len()).copied().unwrap_or(false);
        self.used.push(b);
        b
    }
}

struct Leaves {
    count: u64,
    budget: u64,
}

impl Leaves {
    fn tick(&mut self) -> Result<()> {
        self.count += 1;
        if self.count > self.budget {
            return Err(Error::Budget(self.budget));
        }
        Ok(())
    }
}

/// Runs `circuit` once per coin sequence, calling `f` with the post-state,
/// the record and the sequence probability.
fn for_each_coin_branch(
    circuit: &Circuit,
    state: &StabilizerState,
    fault: &FaultEvent,
    mut f: impl FnMut(StabilizerState, MeasurementRecord, f64) -> Result<()>,
) -> Result<()> {
    let mut prefix = Vec::new();
    loop {
        let mut coins = ForcedCoins::new(prefix);
        let mut st = state.clone();
        let record = circuit.run_with_faults(&mut st, fault, &mut coins)?;
        f(st, record, coins.weight())?;
        match coins.next_prefix() {
            Some(p) => prefix = p,
            None => return Ok(()),
        }
    }
}

/// Failure probability from `current` onward with `fault` in the first
/// circuit and no faults afterwards.
fn fail_probability(
    protocol: &ProtocolGraph,
    state: &StabilizerState,
    history: &mut Vec<HistoryEntry>,
    current: &str,
    fault: &FaultEvent,
    leaves: &mut Leaves,
) -> Result<f64> {
    if history.len() >= MAX_CIRCUITS_PER_SHOT {
        return Err(Error::Runaway(MAX_CIRCUITS_PER_SHOT));
    }
    let circuit = protocol.circuit(current)?;
    let mut total = NeumaierSum::default();
    for_each_coin_branch(circuit, state, fault, |st, record, w| {
        history.push(HistoryEntry {
            circuit: current.to_string(),
            record,
        });
        let next = protocol.next_node(history);
        let r = match next {
            Ok(Next::Terminate { fail }) => {
                leaves.tick()?;
                Ok(if fail { w } else { 0.0 })
            }
            Ok(Next::Circuit(n)) => {
                fail_probability(protocol, &st, history, &n, &FaultEvent::empty(), leaves)
                    .map(|p| w * p)
            }
            Err(e) => Err(e),
        };
        history.pop();
        total.add(r?);
        Ok(())
    })?;
    Ok(total.value())
}

/// Exact failure rate of the `w` subset of the root circuit, with every
/// later circuit fault-free.
///
/// Locations are chosen uniformly within each category and payloads follow
/// the noise model's per-kind tables, including unflipped init and
/// measurement faults.
pub fn exhaustive_subset(
    protocol: &ProtocolGraph,
    noise: &NoiseParams,
    w: &[usize],
    budget: u64,
) -> Result<f64> {
    let root = protocol.circuit(protocol.root())?;
    if w.len() != noise.k() {
        return Err(Error::CategoryMismatch {
            expected: noise.k(),
            got: w.len(),
        });
    }
    let members: Vec<Vec<usize>> = (0..noise.k())
        .map(|k| {
            root.locations()
                .iter()
                .filter(|l| noise.category_of(l.kind) == k)
                .map(|l| l.index)
                .collect()
        })
        .collect();
    let mut configs = 1f64;
    for (k, m) in members.iter().enumerate() {
        if w[k] > m.len() {
            return Err(Error::WeightTooLarge {
                category: k,
                weight: w[k],
                available: m.len(),
            });
        }
        configs *= crate::stats::ln_choose(m.len(), w[k]).exp().round();
    }
    if configs > budget as f64 {
        return Err(Error::Budget(budget));
    }
    let per_combination = 1.0 / configs;
    let mut leaves = Leaves { count: 0, budget };
    let state = StabilizerState::new_zero_state(protocol.n_qubits())?;
    let mut total = NeumaierSum::default();
    let combos = members
        .iter()
        .zip(w)
        .map(|(m, &wk)| m.iter().copied().combinations(wk).collect::<Vec<_>>())
        .multi_cartesian_product();
    let mut visit = |locs: Vec<usize>| -> Result<()> {
        let options: Vec<_> = locs
            .iter()
            .map(|&i| payload_options(root.locations()[i].kind))
            .collect();
        for choice in options.iter().map(|o| o.iter()).multi_cartesian_product() {
            let mut event = FaultEvent::empty();
            let mut prob = per_combination;
            for (&loc, (payload, p)) in locs.iter().zip(choice) {
                prob *= p;
                match payload {
                    Some(pl) => {
                        event.entries.insert(loc, pl.clone());
                    }
                    None => {
                        event.silent.insert(loc);
                    }
                }
            }
            let f = fail_probability(
                protocol,
                &state,
                &mut Vec::new(),
                protocol.root(),
                &event,
                &mut leaves,
            )?;
            total.add(prob * f);
        }
        Ok(())
    };
    if w.iter().all(|&x| x == 0) {
        visit(Vec::new())?;
    } else {
        for parts in combos {
            visit(parts.into_iter().flatten().collect())?;
        }
    }
    Ok(total.value())
}

/// Outcome of the single-fault audit.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AuditReport {
    /// Distinct single-fault placements tried.
    pub placements: u64,
    /// Terminal leaves reached, counting coin branches.
    pub leaves: u64,
    /// Descriptions of placements that ended in failure.
    pub failures: Vec<String>,
    /// Successors seen per `(circuit, faults in that circuit)`.
    pub successors: BTreeMap<(String, usize), BTreeSet<Next>>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn describe(circuit: &str, loc: usize, payload: &FaultPayload) -> String {
    match payload {
        FaultPayload::Flip => format!("{circuit}[{loc}] flip"),
        FaultPayload::Pauli(ps) => {
            let s: String = ps.iter().map(|p| p.symbol()).collect();
            format!("{circuit}[{loc}] {s}")
        }
    }
}

fn single_faults(circuit: &Circuit) -> Vec<(String, FaultEvent)> {
    let mut out = Vec::new();
    for loc in circuit.locations() {
        for (payload, _) in payload_options(loc.kind) {
            if let Some(p) = payload {
                out.push((
                    describe(circuit.name(), loc.index, &p),
                    FaultEvent::single(loc.index, p),
                ));
            }
        }
    }
    out
}

struct Auditor<'a> {
    protocol: &'a ProtocolGraph,
    report: AuditReport,
    leaves: Leaves,
    faults: BTreeMap<String, Vec<(String, FaultEvent)>>,
}

impl Auditor<'_> {
    fn walk(
        &mut self,
        state: &StabilizerState,
        history: &mut Vec<HistoryEntry>,
        current: &str,
        used: Option<&str>,
    ) -> Result<()> {
        if history.len() >= MAX_CIRCUITS_PER_SHOT {
            return Err(Error::Runaway(MAX_CIRCUITS_PER_SHOT));
        }
        let protocol = self.protocol;
        let circuit = protocol.circuit(current)?;
        let mut options = vec![(None, FaultEvent::empty())];
        if used.is_none() {
            let singles = self
                .faults
                .entry(current.to_string())
                .or_insert_with(|| single_faults(circuit));
            options.extend(singles.iter().map(|(d, e)| (Some(d.clone()), e.clone())));
        }
        for (desc, event) in options {
            if desc.is_some() {
                self.report.placements += 1;
            }
            let label = desc.as_deref().or(used).map(str::to_string);
            let weight = usize::from(!event.is_empty());
            for_each_coin_branch(circuit, state, &event, |st, record, _| {
                history.push(HistoryEntry {
                    circuit: current.to_string(),
                    record,
                });
                let r = self.after(&st, history, current, weight, label.as_deref());
                history.pop();
                r
            })?;
        }
        Ok(())
    }

    fn after(
        &mut self,
        state: &StabilizerState,
        history: &mut Vec<HistoryEntry>,
        current: &str,
        weight: usize,
        used: Option<&str>,
    ) -> Result<()> {
        let next = self.protocol.next_node(history)?;
        self.report
            .successors
            .entry((current.to_string(), weight))
            .or_default()
            .insert(next.clone());
        match next {
            Next::Terminate { fail } => {
                self.leaves.tick()?;
                if fail {
                    let path = history.iter().map(|h| h.circuit.as_str()).join(">");
                    let d = format!("{} via {path}", used.unwrap_or("fault-free"));
                    if !self.report.failures.contains(&d) {
                        self.report.failures.push(d);
                    }
                }
                Ok(())
            }
            Next::Circuit(n) => self.walk(state, history, &n, used),
        }
    }
}

/// Places every single fault (all locations, all payloads) on every
/// reachable path, expanding measurement coins exactly, and reports any
/// placement that leads to failure.
pub fn audit_ft(protocol: &ProtocolGraph, budget: u64) -> Result<AuditReport> {
    let mut a = Auditor {
        protocol,
        report: AuditReport::default(),
        leaves: Leaves { count: 0, budget },
        faults: BTreeMap::new(),
    };
    let state = StabilizerState::new_zero_state(protocol.n_qubits())?;
    a.walk(&state, &mut Vec::new(), protocol.root(), None)?;
    a.report.leaves = a.leaves.count;
    Ok(a.report)
}

/// Structural summary of a protocol.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub name: String,
    pub root: String,
    pub ft_order: u8,
    pub max_ft_length: usize,
    /// Location counts per circuit and noise category.
    pub circuits: Vec<(String, Vec<usize>)>,
    pub fault_free_path: Vec<String>,
    pub successors: BTreeMap<(String, usize), BTreeSet<Next>>,
    pub problems: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.problems.is_empty()
    }
}

/// Checks declared targets, the fault-free path and the two-successor rule
/// by probing all histories with at most one fault.
pub fn validate(
    protocol: &ProtocolGraph,
    noise: &NoiseParams,
    budget: u64,
) -> Result<ValidationReport> {
    let mut problems = Vec::new();
    if let Some(hints) = protocol.successor_hints() {
        for (c, targets) in hints {
            if protocol.circuit(c).is_err() {
                problems.push(format!("rules for unknown circuit `{c}`"));
            }
            for t in targets {
                if let Next::Circuit(n) = t {
                    if protocol.circuit(n).is_err() {
                        problems.push(format!("`{c}` targets unknown circuit `{n}`"));
                    }
                }
            }
        }
    }
    let mut fault_free: Option<(Vec<String>, bool)> = None;
    let mut prefix = Vec::new();
    loop {
        let mut coins = ForcedCoins::new(prefix);
        let run = protocol.run_fault_free(&mut coins)?;
        match &fault_free {
            None => fault_free = Some(run),
            Some(first) if *first != run => {
                problems.push("fault-free runs differ between measurement outcomes".into());
                break;
            }
            Some(_) => {}
        }
        match coins.next_prefix() {
            Some(p) => prefix = p,
            None => break,
        }
    }
    let (path, fails) = fault_free.expect("at least one run");
    if fails {
        problems.push("fault-free path fails".into());
    }
    let audit = audit_ft(protocol, budget)?;
    for ((c, w), s) in &audit.successors {
        if s.len() > 2 {
            problems.push(format!(
                "`{c}` with {w} fault(s) has {} successors",
                s.len()
            ));
        }
    }
    if protocol.ft_order() == 1 && !audit.passed() {
        problems.push(format!(
            "{} single faults cause failure",
            audit.failures.len()
        ));
    }
    Ok(ValidationReport {
        name: protocol.name().to_string(),
        root: protocol.root().to_string(),
        ft_order: protocol.ft_order(),
        max_ft_length: protocol.max_ft_length(),
        circuits: protocol
            .circuits()
            .iter()
            .map(|(n, c)| (n.clone(), noise.counts(c)))
            .collect(),
        fault_free_path: path,
        successors: audit.successors,
        problems,
    })
}
