//! Shot engines: dynamical subset sampling and direct Monte Carlo.
//!
//! Every shot `i` draws from its own stream of a ChaCha8 generator seeded
//! with the master seed, so results do not depend on the worker count.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::FaultEvent;
use crate::error::{Error, Result};
use crate::noise::{draw_mc_fault, draw_subset_fault, NoiseParams};
use crate::protocol::{HistoryEntry, Next, ProtocolGraph, MAX_CIRCUITS_PER_SHOT};
use crate::stats::{binomial_factor_unchecked, wilson_interval};
use crate::tableau::StabilizerState;
use crate::tree::{BoundsResult, Outcome, SampleTree, ShotTrace, SubsetNode, TraceStep, Weights};

/// Stream reserved for the fault-free trace that seeds a prohibited root.
const SEED_STREAM: u64 = u64::MAX;

/// Shots drawn per parallel batch.
const BATCH: u64 = 256;

pub fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Binomial,
    Eru,
}

impl FromStr for Criterion {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binomial" => Ok(Criterion::Binomial),
            "eru" => Ok(Criterion::Eru),
            other => Err(Error::Invalid(format!("unknown criterion `{other}`"))),
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Binomial => "binomial",
            Criterion::Eru => "eru",
        })
    }
}

/// Sampling stops at `max_shots` or once `η ≤ eta_max`; `eta_max = 0` disables the latter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    pub max_shots: u64,
    pub eta_max: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DssConfig {
    pub p_max: Vec<f64>,
    pub criterion: Criterion,
    pub stop: StopRule,
    pub seed: u64,
    pub prohibit_zero: bool,
    pub workers: usize,
    /// Keep η after every shot.
    pub record_eta: bool,
}

impl DssConfig {
    pub fn new(p_max: Vec<f64>, criterion: Criterion, max_shots: u64, seed: u64) -> Self {
        DssConfig {
            p_max,
            criterion,
            stop: StopRule {
                max_shots,
                eta_max: 0.0,
            },
            seed,
            prohibit_zero: false,
            workers: 1,
            record_eta: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DssRun {
    pub tree: SampleTree,
    pub bounds: BoundsResult,
    pub shots: u64,
    /// How often each `(circuit, w)` subset was chosen.
    pub choices: BTreeMap<(String, Weights), u64>,
    pub eta_trace: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Draws `w` from the per-category binomial distributions.
///
/// With `prohibit_zero` the all-zero vector is excluded and the rest
/// renormalized; if every category has rate zero the zero vector is returned.
pub fn choose_subset_binomial<R: Rng + ?Sized>(
    counts: &[usize],
    p: &[f64],
    prohibit_zero: bool,
    rng: &mut R,
) -> Weights {
    let a0: Vec<f64> = counts
        .iter()
        .zip(p)
        .map(|(&n, &pk)| binomial_factor_unchecked(n, 0, pk))
        .collect();
    let all_zero: f64 = a0.iter().product();
    if !prohibit_zero || all_zero >= 1.0 {
        return counts
            .iter()
            .zip(p)
            .map(|(&n, &pk)| inverse_binomial(n, pk, rng.gen()))
            .collect();
    }
    // First category with a nonzero weight, then a truncated draw there.
    let mut u = rng.gen::<f64>() * (1.0 - all_zero);
    let mut first = counts.len() - 1;
    let mut prefix = 1.0;
    for (k, &z) in a0.iter().enumerate() {
        let mass = prefix * (1.0 - z);
        if u < mass {
            first = k;
            break;
        }
        u -= mass;
        prefix *= z;
    }
    let mut w = vec![0; counts.len()];
    let z = a0[first];
    w[first] = inverse_binomial(counts[first], p[first], z + rng.gen::<f64>() * (1.0 - z)).max(1);
    for k in first + 1..counts.len() {
        w[k] = inverse_binomial(counts[k], p[k], rng.gen());
    }
    w
}

fn inverse_binomial(n: usize, p: f64, u: f64) -> usize {
    let mut cum = 0.0;
    for w in 0..n {
        cum += binomial_factor_unchecked(n, w, p);
        if u < cum {
            return w;
        }
    }
    n
}

/// Weight vectors with total `total`, each component within `counts`.
fn vectors_with_total(counts: &[usize], total: usize) -> Vec<Weights> {
    fn rec(counts: &[usize], left: usize, cur: &mut Weights, out: &mut Vec<Weights>) {
        if cur.len() == counts.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for w in 0..=left.min(counts[cur.len()]) {
            cur.push(w);
            rec(counts, left - w, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(counts, total, &mut Vec::new(), &mut out);
    out.sort_unstable();
    out
}

fn hypothetical_eta(
    tree: &SampleTree,
    path: &[(Weights, String)],
    p: &[f64],
    edit: impl FnOnce(&mut BTreeMap<Weights, SubsetNode>),
) -> Result<f64> {
    let mut t = tree.clone();
    let node = t
        .circuit_at_mut(path)
        .ok_or_else(|| Error::Trace("context node vanished".into()))?;
    edit(&mut node.subsets);
    Ok(t.bounds(p)?.eta)
}

fn bump(subset: &mut SubsetNode, outcome: Outcome) {
    subset.visits += 1;
    subset.children.entry(outcome).or_default().count += 1;
}

/// Expected reduction of η for each candidate subset at the circuit node
/// reached by `path`.
///
/// Candidates are the subsets already opened at that node that are not
/// frozen, plus every unopened subset of the smallest unopened total
/// weight. A frozen subset that always continues to the same circuit
/// scores the best candidate of that circuit, so that the fault-free
/// path keeps feeding later stages. Opened subsets use the shifted rates `(m+1)/(N+1)` and
/// `m/(N+1)`; an unopened subset is assumed to fail with probability one
/// half. Returns `None` when the node has not been visited.
pub fn eru_scores(
    tree: &SampleTree,
    path: &[(Weights, String)],
    circuit: &str,
    w_before: usize,
    p: &[f64],
) -> Result<Option<Vec<(Weights, f64)>>> {
    let Some(node) = tree.circuit_at(path) else {
        return Ok(None);
    };
    let counts = tree
        .meta()
        .counts
        .get(circuit)
        .ok_or_else(|| Error::UnknownCircuit(circuit.to_string()))?;
    let eta = tree.bounds(p)?.eta;
    let mut scores = Vec::new();
    for (w, s) in &node.subsets {
        let pw = w_before + w.iter().sum::<usize>();
        if tree.is_frozen(s, pw) {
            if let Some(best) = lookahead(tree, path, w, s, pw, p)? {
                scores.push((w.clone(), best));
            }
            continue;
        }
        let all_terminal = s
            .children
            .keys()
            .all(|o| matches!(o, Outcome::Fail | Outcome::NoFail));
        let (plus, minus) = if all_terminal {
            (Outcome::Fail, Outcome::NoFail)
        } else {
            let mut keys = s.children.keys().cloned();
            let first = keys.next().expect("visited subset has a child");
            (first, keys.next().unwrap_or(Outcome::Unexplored))
        };
        let m = s.children.get(&plus).map_or(0, |c| c.count);
        let q = m as f64 / s.visits as f64;
        let eta_plus = hypothetical_eta(tree, path, p, |subs| {
            bump(subs.get_mut(w).expect("exists"), plus.clone())
        })?;
        let eta_minus = hypothetical_eta(tree, path, p, |subs| {
            bump(subs.get_mut(w).expect("exists"), minus.clone())
        })?;
        scores.push((w.clone(), eta - (q * eta_plus + (1.0 - q) * eta_minus)));
    }
    let total: usize = counts.iter().sum();
    for t in 0..=total {
        let fresh: Vec<Weights> = vectors_with_total(counts, t)
            .into_iter()
            .filter(|w| !node.subsets.contains_key(w))
            .collect();
        if fresh.is_empty() {
            continue;
        }
        for w in fresh {
            let mut etas = [0.0; 2];
            for (slot, o) in etas.iter_mut().zip([Outcome::Fail, Outcome::NoFail]) {
                *slot = hypothetical_eta(tree, path, p, |subs| {
                    bump(subs.entry(w.clone()).or_default(), o)
                })?;
            }
            scores.push((w, eta - 0.5 * (etas[0] + etas[1])));
        }
        break;
    }
    scores.sort_by(|a, b| {
        let ta: usize = a.0.iter().sum();
        let tb: usize = b.0.iter().sum();
        ta.cmp(&tb).then_with(|| a.0.cmp(&b.0))
    });
    Ok(Some(scores))
}

/// Best score inside the one circuit a frozen subset always leads to.
fn lookahead(
    tree: &SampleTree,
    path: &[(Weights, String)],
    w: &Weights,
    s: &SubsetNode,
    path_weight: usize,
    p: &[f64],
) -> Result<Option<f64>> {
    let mut children = s.children.keys();
    let (Some(Outcome::Circuit(next)), None) = (children.next(), children.next()) else {
        return Ok(None);
    };
    let mut deeper = path.to_vec();
    deeper.push((w.clone(), next.clone()));
    let scores = eru_scores(tree, &deeper, next, path_weight, p)?;
    Ok(scores.and_then(|v| v.into_iter().map(|(_, d)| d).reduce(f64::max)))
}

/// The candidate with the largest expected η reduction; ties go to the
/// lower weight. Unvisited nodes start with the fault-free subset.
pub fn choose_subset_eru(
    tree: &SampleTree,
    path: &[(Weights, String)],
    circuit: &str,
    w_before: usize,
    p: &[f64],
) -> Result<Weights> {
    let k = p.len();
    let Some(scores) = eru_scores(tree, path, circuit, w_before, p)? else {
        return Ok(vec![0; k]);
    };
    let mut best: Option<&(Weights, f64)> = None;
    for s in &scores {
        if best.is_none_or(|b| s.1 > b.1) {
            best = Some(s);
        }
    }
    Ok(best.map_or_else(|| vec![0; k], |b| b.0.clone()))
}

/// Runs one shot, choosing each circuit's subset with `choose`.
fn execute<R, F>(
    protocol: &ProtocolGraph,
    noise: &NoiseParams,
    rng: &mut R,
    mut choose: F,
) -> Result<ShotTrace>
where
    R: Rng,
    F: FnMut(&[(Weights, String)], &str, usize, &mut R) -> Result<Weights>,
{
    let mut state = StabilizerState::new_zero_state(protocol.n_qubits())?;
    let mut history: Vec<HistoryEntry> = Vec::new();
    let mut path: Vec<(Weights, String)> = Vec::new();
    let mut steps = Vec::new();
    let mut current = protocol.root().to_string();
    let mut w_before = 0;
    loop {
        if steps.len() >= MAX_CIRCUITS_PER_SHOT {
            return Err(Error::Runaway(MAX_CIRCUITS_PER_SHOT));
        }
        let circuit = protocol.circuit(&current)?;
        let w = choose(&path, &current, w_before, rng)?;
        let fault = draw_subset_fault(circuit, noise, &w, rng)?;
        let record = circuit.run_with_faults(&mut state, &fault, rng)?;
        history.push(HistoryEntry {
            circuit: current.clone(),
            record: record.clone(),
        });
        let next = protocol.next_node(&history)?;
        steps.push(TraceStep {
            circuit: current.clone(),
            weights: w.clone(),
            record,
            next: next.clone(),
        });
        match next {
            Next::Circuit(n) => {
                w_before += w.iter().sum::<usize>();
                path.push((w, n.clone()));
                current = n;
            }
            Next::Terminate { .. } => return Ok(ShotTrace { steps }),
        }
    }
}

/// Incremental DSS driver.
pub struct DssSampler<'a> {
    protocol: &'a ProtocolGraph,
    noise: NoiseParams,
    config: DssConfig,
    tree: SampleTree,
    shots: u64,
    choices: BTreeMap<(String, Weights), u64>,
    eta_trace: Vec<f64>,
    warnings: Vec<String>,
    pool: rayon::ThreadPool,
}

impl<'a> DssSampler<'a> {
    pub fn new(
        protocol: &'a ProtocolGraph,
        noise: &NoiseParams,
        config: DssConfig,
    ) -> Result<Self> {
        let noise = noise.with_rates(&config.p_max)?;
        if config.stop.max_shots == 0 && config.stop.eta_max <= 0.0 {
            return Err(Error::Invalid(
                "stop rule needs max_shots or eta_max".into(),
            ));
        }
        let mut warnings = Vec::new();
        for (name, c) in protocol.circuits() {
            let n = c.len();
            if config.p_max.iter().any(|&p| p >= 1.0 / (n as f64 + 1.0)) {
                warnings.push(format!(
                    "p_max {:?} is not below 1/(N+1) for `{name}` (N = {n})",
                    config.p_max
                ));
            }
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers.max(1))
            .build()
            .map_err(|e| Error::Invalid(e.to_string()))?;
        let mut tree = SampleTree::new(protocol, &noise);
        if config.prohibit_zero && protocol.deterministic_root() {
            let mut rng = shot_rng(config.seed, SEED_STREAM);
            let zero = vec![0; noise.k()];
            let trace = execute(protocol, &noise, &mut rng, |_, _, _, _| Ok(zero.clone()))?;
            tree.record_shot(&trace)?;
        }
        Ok(DssSampler {
            protocol,
            noise,
            config,
            tree,
            shots: 0,
            choices: BTreeMap::new(),
            eta_trace: Vec::new(),
            warnings,
            pool,
        })
    }

    pub fn tree(&self) -> &SampleTree {
        &self.tree
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn choices(&self) -> &BTreeMap<(String, Weights), u64> {
        &self.choices
    }

    pub fn bounds(&self) -> Result<BoundsResult> {
        self.tree.bounds(&self.config.p_max)
    }

    fn binomial_trace(&self, index: u64) -> Result<ShotTrace> {
        let mut rng = shot_rng(self.config.seed, index);
        let prohibit = self.config.prohibit_zero && self.protocol.deterministic_root();
        let counts = &self.tree.meta().counts;
        let p = &self.config.p_max;
        execute(self.protocol, &self.noise, &mut rng, |path, c, _, rng| {
            Ok(choose_subset_binomial(
                &counts[c],
                p,
                prohibit && path.is_empty(),
                rng,
            ))
        })
    }

    fn eru_trace(&self, index: u64) -> Result<ShotTrace> {
        let mut rng = shot_rng(self.config.seed, index);
        let tree = &self.tree;
        let p = &self.config.p_max;
        let pool = &self.pool;
        execute(
            self.protocol,
            &self.noise,
            &mut rng,
            |path, c, w_before, _| pool.install(|| choose_subset_eru(tree, path, c, w_before, p)),
        )
    }

    /// Records a trace; returns whether the stop rule now holds.
    fn absorb(&mut self, trace: &ShotTrace) -> Result<bool> {
        self.tree.record_shot(trace)?;
        self.shots += 1;
        for s in &trace.steps {
            *self
                .choices
                .entry((s.circuit.clone(), s.weights.clone()))
                .or_default() += 1;
        }
        let mut done = self.config.stop.max_shots > 0 && self.shots >= self.config.stop.max_shots;
        if self.config.record_eta || self.config.stop.eta_max > 0.0 {
            let eta = self.bounds()?.eta;
            if self.config.record_eta {
                self.eta_trace.push(eta);
            }
            done |= self.config.stop.eta_max > 0.0 && eta <= self.config.stop.eta_max;
        }
        Ok(done)
    }

    /// Samples and records one shot.
    pub fn run_shot(&mut self) -> Result<bool> {
        let trace = match self.config.criterion {
            Criterion::Binomial => self.binomial_trace(self.shots)?,
            Criterion::Eru => self.eru_trace(self.shots)?,
        };
        self.absorb(&trace)
    }

    /// Samples until the stop rule holds.
    pub fn run(&mut self) -> Result<()> {
        let parallel = self.config.criterion == Criterion::Binomial && self.config.workers > 1;
        loop {
            if !parallel {
                if self.run_shot()? {
                    return Ok(());
                }
                continue;
            }
            let start = self.shots;
            let end = match self.config.stop.max_shots {
                0 => start + BATCH,
                m => (start + BATCH).min(m),
            };
            let traces: Vec<Result<ShotTrace>> = self.pool.install(|| {
                (start..end)
                    .into_par_iter()
                    .map(|i| self.binomial_trace(i))
                    .collect()
            });
            for t in traces {
                if self.absorb(&t?)? {
                    return Ok(());
                }
            }
        }
    }

    pub fn finish(self) -> Result<DssRun> {
        let bounds = self.bounds()?;
        Ok(DssRun {
            tree: self.tree,
            bounds,
            shots: self.shots,
            choices: self.choices,
            eta_trace: self.eta_trace,
            warnings: self.warnings,
        })
    }
}

/// Runs DSS to completion.
pub fn dss_run(protocol: &ProtocolGraph, noise: &NoiseParams, config: DssConfig) -> Result<DssRun> {
    let mut s = DssSampler::new(protocol, noise, config)?;
    s.run()?;
    s.finish()
}

/// Direct Monte Carlo estimate with a `z = 1` Wilson interval.
#[derive(Clone, Debug, PartialEq)]
pub struct McResult {
    pub shots: u64,
    pub fails: u64,
    pub p_hat: f64,
    pub low: f64,
    pub high: f64,
    /// Verdict of every shot in order.
    pub outcomes: Vec<bool>,
}

impl McResult {
    /// Half-width of the interval.
    pub fn epsilon(&self) -> f64 {
        0.5 * (self.high - self.low)
    }

    pub fn width(&self) -> f64 {
        self.high - self.low
    }
}

/// One shot with every location faulting independently at its rate.
pub fn mc_shot<R: Rng>(protocol: &ProtocolGraph, noise: &NoiseParams, rng: &mut R) -> Result<bool> {
    let mut state = StabilizerState::new_zero_state(protocol.n_qubits())?;
    let mut history: Vec<HistoryEntry> = Vec::new();
    let mut current = protocol.root().to_string();
    loop {
        if history.len() >= MAX_CIRCUITS_PER_SHOT {
            return Err(Error::Runaway(MAX_CIRCUITS_PER_SHOT));
        }
        let circuit = protocol.circuit(&current)?;
        let fault: FaultEvent = draw_mc_fault(circuit, noise, rng);
        let record = circuit.run_with_faults(&mut state, &fault, rng)?;
        history.push(HistoryEntry {
            circuit: current.clone(),
            record,
        });
        match protocol.next_node(&history)? {
            Next::Circuit(n) => current = n,
            Next::Terminate { fail } => return Ok(fail),
        }
    }
}

pub fn mc_run(
    protocol: &ProtocolGraph,
    noise: &NoiseParams,
    shots: u64,
    seed: u64,
    workers: usize,
) -> Result<McResult> {
    if shots == 0 {
        return Err(Error::Invalid("at least one shot is required".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Invalid(e.to_string()))?;
    let outcomes: Vec<bool> = pool.install(|| {
        (0..shots)
            .into_par_iter()
            .map(|i| mc_shot(protocol, noise, &mut shot_rng(seed, i)))
            .collect::<Result<Vec<bool>>>()
    })?;
    let fails = outcomes.iter().filter(|&&f| f).count() as u64;
    let (low, high) = wilson_interval(fails, shots, 1.0)?;
    Ok(McResult {
        shots,
        fails,
        p_hat: fails as f64 / shots as f64,
        low,
        high,
        outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rate_always_picks_zero() {
        let mut rng = shot_rng(1, 0);
        for _ in 0..100 {
            assert_eq!(
                choose_subset_binomial(&[10, 4], &[0.0, 0.0], false, &mut rng),
                vec![0, 0]
            );
        }
    }

    #[test]
    fn prohibited_zero_never_drawn() {
        let mut rng = shot_rng(2, 0);
        for _ in 0..2000 {
            let w = choose_subset_binomial(&[3, 2], &[0.01, 0.02], true, &mut rng);
            assert!(w.iter().any(|&x| x > 0));
        }
    }

    #[test]
    fn candidate_vectors_are_ordered() {
        assert_eq!(vectors_with_total(&[2, 1], 1), vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(vectors_with_total(&[1, 1], 3), Vec::<Weights>::new());
    }

    #[test]
    fn criterion_round_trip() {
        for c in [Criterion::Binomial, Criterion::Eru] {
            assert_eq!(c.to_string().parse::<Criterion>().unwrap(), c);
        }
    }
}
