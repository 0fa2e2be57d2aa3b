//! The event tree of sampled circuit/subset paths and the bounds it implies.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::circuit::MeasurementRecord;
use crate::error::{Error, Result};
use crate::noise::NoiseParams;
use crate::protocol::{Next, ProtocolGraph};
use crate::stats::{binomial_factor_unchecked, wilson_variance_counts, NeumaierSum, RateEstimate};
use crate::variance::{Bound, Branch, EvalNode};

/// Per-category fault weights of one subset.
pub type Weights = Vec<usize>;

/// What followed a subset: another circuit or a verdict.
///
/// `Unexplored` only appears in hypothetical trees built while scoring
/// subset choices; it stands for a successor that has not been seen.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    Circuit(String),
    Fail,
    NoFail,
    Unexplored,
}

impl Outcome {
    pub fn from_next(next: &Next) -> Outcome {
        match next {
            Next::Circuit(c) => Outcome::Circuit(c.clone()),
            Next::Terminate { fail: true } => Outcome::Fail,
            Next::Terminate { fail: false } => Outcome::NoFail,
        }
    }

    fn is_terminal(&self) -> bool {
        matches!(self, Outcome::Fail | Outcome::NoFail)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CircuitNode {
    pub subsets: BTreeMap<Weights, SubsetNode>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SubsetNode {
    pub visits: u64,
    pub children: BTreeMap<Outcome, Child>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Child {
    pub count: u64,
    pub node: Option<CircuitNode>,
}

/// One executed circuit of a shot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub circuit: String,
    pub weights: Weights,
    pub record: MeasurementRecord,
    pub next: Next,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ShotTrace {
    pub steps: Vec<TraceStep>,
}

impl ShotTrace {
    /// Final verdict, if the trace terminated.
    pub fn failed(&self) -> Option<bool> {
        match self.steps.last()?.next {
            Next::Terminate { fail } => Some(fail),
            Next::Circuit(_) => None,
        }
    }
}

/// Estimator values at one physical rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundsResult {
    pub p_l: f64,
    pub p_u: f64,
    pub sigma_l: f64,
    pub sigma_u: f64,
    pub delta: f64,
    pub eta: f64,
    pub p_hat: f64,
}

/// How a subset node's successors are modelled.
enum Shape {
    /// Only verdicts seen: a failure rate.
    Leaf { fails: u64 },
    /// Two distinct successors.
    Pair { first: u64 },
    /// One non-terminal successor seen.
    Single,
}

fn shape(s: &SubsetNode) -> Shape {
    if s.children.keys().all(Outcome::is_terminal) {
        let fails = s.children.get(&Outcome::Fail).map_or(0, |c| c.count);
        Shape::Leaf { fails }
    } else if s.children.len() >= 2 {
        let first = s.children.values().next().map_or(0, |c| c.count);
        Shape::Pair { first }
    } else {
        Shape::Single
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeMeta {
    pub root: String,
    /// Location counts per circuit and rate category.
    pub counts: BTreeMap<String, Vec<usize>>,
    pub ft_order: u8,
    pub max_ft_length: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleTree {
    meta: TreeMeta,
    root: CircuitNode,
}

struct EvalCtx<'a> {
    meta: &'a TreeMeta,
    p: &'a [f64],
    ft: bool,
    /// `L (1 - M_0)`.
    ft_bound: f64,
}

impl EvalCtx<'_> {
    fn weight(&self, circuit: &str, w: &[usize]) -> f64 {
        let counts = &self.meta.counts[circuit];
        counts
            .iter()
            .zip(w)
            .zip(self.p)
            .map(|((&n, &wk), &pk)| binomial_factor_unchecked(n, wk, pk))
            .product()
    }

    /// Value of an unseen successor for the upper bound.
    fn unseen_value(&self, path_weight: usize) -> f64 {
        if self.ft && path_weight <= 1 {
            self.ft_bound
        } else {
            1.0
        }
    }
}

impl SampleTree {
    pub fn new(protocol: &ProtocolGraph, noise: &NoiseParams) -> SampleTree {
        let counts = protocol
            .circuits()
            .iter()
            .map(|(name, c)| (name.clone(), noise.counts(c)))
            .collect();
        SampleTree {
            meta: TreeMeta {
                root: protocol.root().to_string(),
                counts,
                ft_order: protocol.ft_order(),
                max_ft_length: protocol.max_ft_length(),
            },
            root: CircuitNode::default(),
        }
    }

    pub fn from_parts(meta: TreeMeta, root: CircuitNode) -> SampleTree {
        SampleTree { meta, root }
    }

    pub fn meta(&self) -> &TreeMeta {
        &self.meta
    }

    pub fn root(&self) -> &CircuitNode {
        &self.root
    }

    pub fn k(&self) -> usize {
        self.meta.counts.values().next().map_or(0, Vec::len)
    }

    /// Number of shots recorded (visits through the root).
    pub fn shots(&self) -> u64 {
        self.root.subsets.values().map(|s| s.visits).sum()
    }

    fn check_trace(&self, trace: &ShotTrace) -> Result<()> {
        let steps = &trace.steps;
        if steps.is_empty() {
            return Err(Error::Trace("empty trace".into()));
        }
        if steps[0].circuit != self.meta.root {
            return Err(Error::Trace(format!(
                "trace starts at `{}`, root is `{}`",
                steps[0].circuit, self.meta.root
            )));
        }
        let mut node = Some(&self.root);
        for (i, step) in steps.iter().enumerate() {
            let counts = self
                .meta
                .counts
                .get(&step.circuit)
                .ok_or_else(|| Error::Trace(format!("unknown circuit `{}`", step.circuit)))?;
            if step.weights.len() != counts.len()
                || step.weights.iter().zip(counts).any(|(w, n)| w > n)
            {
                return Err(Error::Trace(format!(
                    "weights {:?} invalid for `{}`",
                    step.weights, step.circuit
                )));
            }
            match (&step.next, steps.get(i + 1)) {
                (Next::Circuit(n), Some(s)) if *n == s.circuit => {}
                (Next::Terminate { .. }, None) => {}
                _ => return Err(Error::Trace(format!("step {i} does not connect"))),
            }
            let outcome = Outcome::from_next(&step.next);
            let subset = node.and_then(|n| n.subsets.get(&step.weights));
            if let Some(s) = subset {
                if !s.children.contains_key(&outcome) && s.children.len() >= 2 {
                    return Err(Error::Trace(format!(
                        "third successor {:?} after `{}` {:?}",
                        outcome, step.circuit, step.weights
                    )));
                }
            }
            node = subset
                .and_then(|s| s.children.get(&outcome))
                .and_then(|c| c.node.as_ref());
        }
        Ok(())
    }

    /// Adds one shot to the tree.
    pub fn record_shot(&mut self, trace: &ShotTrace) -> Result<()> {
        self.check_trace(trace)?;
        let mut node = &mut self.root;
        for step in &trace.steps {
            let subset = node.subsets.entry(step.weights.clone()).or_default();
            subset.visits += 1;
            let outcome = Outcome::from_next(&step.next);
            let is_circuit = matches!(outcome, Outcome::Circuit(_));
            let child = subset.children.entry(outcome).or_default();
            child.count += 1;
            if !is_circuit {
                break;
            }
            node = child.node.get_or_insert_with(CircuitNode::default);
        }
        Ok(())
    }

    /// Adds all counts of `other`; the result does not depend on merge order.
    pub fn merge(&mut self, other: &SampleTree) -> Result<()> {
        if self.meta != other.meta {
            return Err(Error::Trace("trees belong to different protocols".into()));
        }
        let mut merged = self.root.clone();
        merge_circuit(&mut merged, &other.root)?;
        self.root = merged;
        Ok(())
    }

    /// The tree at physical rates `p` as an evaluated structure.
    pub fn eval(&self, p: &[f64]) -> Result<EvalNode> {
        if p.len() != self.k() {
            return Err(Error::CategoryMismatch {
                expected: self.k(),
                got: p.len(),
            });
        }
        if p.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::Invalid(format!("rates {p:?} outside [0, 1]")));
        }
        let m0 = self
            .meta
            .counts
            .values()
            .map(|c| {
                c.iter()
                    .zip(p)
                    .map(|(&n, &pk)| binomial_factor_unchecked(n, 0, pk))
                    .product::<f64>()
            })
            .fold(1.0, f64::min);
        let ctx = EvalCtx {
            meta: &self.meta,
            p,
            ft: self.meta.ft_order == 1,
            ft_bound: self.meta.max_ft_length as f64 * (1.0 - m0),
        };
        Ok(eval_circuit(&ctx, &self.root, &self.meta.root, 0))
    }

    pub fn p_lower(&self, p: &[f64]) -> Result<f64> {
        Ok(self.eval(p)?.mean(Bound::Lower))
    }

    pub fn delta_total(&self, p: &[f64]) -> Result<f64> {
        Ok(self.eval(p)?.cutoff())
    }

    /// `(Var[p_L], Var[p_U])` propagated from the leaves.
    pub fn var_bounds(&self, p: &[f64]) -> Result<(f64, f64)> {
        let e = self.eval(p)?;
        Ok((e.recursive(Bound::Lower).1, e.recursive(Bound::Upper).1))
    }

    /// `(Var[p_L], Var[p_U])` from path variances and pairwise covariances.
    pub fn var_bounds_pairwise(&self, p: &[f64]) -> Result<(f64, f64)> {
        let e = self.eval(p)?;
        Ok((e.pairwise(Bound::Lower), e.pairwise(Bound::Upper)))
    }

    pub fn bounds(&self, p: &[f64]) -> Result<BoundsResult> {
        Ok(bounds_of(&self.eval(p)?))
    }

    /// Circuit node reached by following `path` from the root.
    pub fn circuit_at(&self, path: &[(Weights, String)]) -> Option<&CircuitNode> {
        let mut node = &self.root;
        for (w, next) in path {
            node = node
                .subsets
                .get(w)?
                .children
                .get(&Outcome::Circuit(next.clone()))?
                .node
                .as_ref()?;
        }
        Some(node)
    }

    pub(crate) fn circuit_at_mut(
        &mut self,
        path: &[(Weights, String)],
    ) -> Option<&mut CircuitNode> {
        let mut node = &mut self.root;
        for (w, next) in path {
            node = node
                .subsets
                .get_mut(w)?
                .children
                .get_mut(&Outcome::Circuit(next.clone()))?
                .node
                .as_mut()?;
        }
        Some(node)
    }

    /// Whether the subset's rate is fixed at zero by determinism or fault tolerance.
    pub fn is_frozen(&self, subset: &SubsetNode, path_weight: usize) -> bool {
        frozen(subset, path_weight, self.meta.ft_order == 1)
    }

    /// Deterministic indented text rendering.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        writeln!(out, "circuit {}", self.meta.root).unwrap();
        dump_circuit(&mut out, &self.root, 1, 0, self.meta.ft_order == 1);
        out
    }
}

pub(crate) fn bounds_of(e: &EvalNode) -> BoundsResult {
    let (p_l, var_l) = e.recursive(Bound::Lower);
    let (_, var_u) = e.recursive(Bound::Upper);
    let delta = e.cutoff().max(0.0);
    let p_l = p_l.max(0.0);
    let p_u = p_l + delta;
    let sigma_l = var_l.max(0.0).sqrt();
    let sigma_u = var_u.max(0.0).sqrt();
    BoundsResult {
        p_l,
        p_u,
        sigma_l,
        sigma_u,
        delta,
        eta: sigma_l + sigma_u + delta,
        p_hat: 0.5 * (p_l + p_u),
    }
}

fn frozen(s: &SubsetNode, path_weight: usize, ft: bool) -> bool {
    match shape(s) {
        Shape::Leaf { fails } => fails == 0 && (path_weight == 0 || (ft && path_weight <= 1)),
        Shape::Single => path_weight == 0,
        Shape::Pair { .. } => false,
    }
}

fn merge_circuit(into: &mut CircuitNode, from: &CircuitNode) -> Result<()> {
    for (w, s) in &from.subsets {
        let dst = into.subsets.entry(w.clone()).or_default();
        dst.visits += s.visits;
        for (o, c) in &s.children {
            let d = dst.children.entry(o.clone()).or_default();
            d.count += c.count;
            if let Some(n) = &c.node {
                merge_circuit(d.node.get_or_insert_with(CircuitNode::default), n)?;
            }
        }
        if dst.children.len() > 2 {
            return Err(Error::Trace(format!(
                "more than two successors under {w:?}"
            )));
        }
    }
    Ok(())
}

fn eval_circuit(ctx: &EvalCtx, node: &CircuitNode, name: &str, w_before: usize) -> EvalNode {
    let counts = &ctx.meta.counts[name];
    let mut children = Vec::with_capacity(node.subsets.len() + 2);
    let mut covered = NeumaierSum::default();
    for (w, s) in &node.subsets {
        let a = ctx.weight(name, w);
        covered.add(a);
        let pw = w_before + w.iter().sum::<usize>();
        children.push((a, eval_subset(ctx, s, pw)));
    }
    if ctx.ft && w_before <= 1 {
        // Unsampled subsets that keep the path weight at most one cannot end
        // in failure by themselves; bound them by L (1 - M_0).
        let mut virtual_weights: Vec<Weights> = Vec::new();
        if w_before == 0 {
            for k in 0..counts.len() {
                if counts[k] > 0 {
                    let mut w = vec![0; counts.len()];
                    w[k] = 1;
                    virtual_weights.push(w);
                }
            }
        } else {
            virtual_weights.push(vec![0; counts.len()]);
        }
        for w in virtual_weights {
            if !node.subsets.contains_key(&w) {
                let a = ctx.weight(name, &w);
                covered.add(a);
                children.push((a, EvalNode::leaf(0.0, ctx.ft_bound)));
            }
        }
    }
    let rest = (1.0 - covered.value()).max(0.0);
    children.push((rest, EvalNode::leaf(0.0, 1.0)));
    EvalNode::Circuit(children)
}

fn outcome_node(ctx: &EvalCtx, o: &Outcome, c: &Child, pw: usize) -> EvalNode {
    match o {
        Outcome::Circuit(name) => match &c.node {
            Some(n) => eval_circuit(ctx, n, name, pw),
            None => EvalNode::leaf(0.0, 1.0),
        },
        Outcome::Fail => EvalNode::leaf(1.0, 1.0),
        Outcome::NoFail => EvalNode::leaf(0.0, 0.0),
        Outcome::Unexplored => EvalNode::leaf(0.0, ctx.unseen_value(pw)),
    }
}

fn eval_subset(ctx: &EvalCtx, s: &SubsetNode, pw: usize) -> EvalNode {
    let n = s.visits;
    let is_frozen = frozen(s, pw, ctx.ft);
    match shape(s) {
        Shape::Leaf { fails } => {
            let q = fails as f64 / n as f64;
            let v = if is_frozen {
                0.0
            } else {
                wilson_variance_counts(fails, n)
            };
            EvalNode::Subset(vec![
                Branch {
                    mean: q,
                    var: v,
                    node: EvalNode::leaf(1.0, 1.0),
                },
                Branch {
                    mean: 1.0 - q,
                    var: v,
                    node: EvalNode::leaf(0.0, 0.0),
                },
            ])
        }
        Shape::Pair { first } => {
            let q = first as f64 / n as f64;
            let v = wilson_variance_counts(first, n);
            let mut it = s.children.iter();
            let (o0, c0) = it.next().expect("two children");
            let (o1, c1) = it.next().expect("two children");
            EvalNode::Subset(vec![
                Branch {
                    mean: q,
                    var: v,
                    node: outcome_node(ctx, o0, c0, pw),
                },
                Branch {
                    mean: 1.0 - q,
                    var: v,
                    node: outcome_node(ctx, o1, c1, pw),
                },
            ])
        }
        Shape::Single => {
            let (o, c) = s.children.iter().next().expect("one child");
            let node = outcome_node(ctx, o, c, pw);
            if is_frozen {
                EvalNode::Subset(vec![Branch {
                    mean: 1.0,
                    var: 0.0,
                    node,
                }])
            } else {
                let v = wilson_variance_counts(n, n);
                EvalNode::Subset(vec![
                    Branch {
                        mean: 1.0,
                        var: v,
                        node,
                    },
                    Branch {
                        mean: 0.0,
                        var: v,
                        node: EvalNode::leaf(0.0, ctx.unseen_value(pw)),
                    },
                ])
            }
        }
    }
}

/// Rate estimate shown for a subset node: failures for verdict-only
/// subsets, otherwise the count of the first successor.
pub fn subset_rate(s: &SubsetNode, path_weight: usize, ft: bool) -> RateEstimate {
    let m = match shape(s) {
        Shape::Leaf { fails } => fails,
        Shape::Pair { first } => first,
        Shape::Single => s.visits,
    };
    if frozen(s, path_weight, ft) && m == 0 {
        RateEstimate::frozen(s.visits)
    } else {
        RateEstimate {
            m,
            n: s.visits,
            frozen_zero: false,
        }
    }
}

fn dump_circuit(out: &mut String, node: &CircuitNode, depth: usize, w_before: usize, ft: bool) {
    let pad = "  ".repeat(depth);
    for (w, s) in &node.subsets {
        let pw = w_before + w.iter().sum::<usize>();
        let r = subset_rate(s, pw, ft);
        writeln!(
            out,
            "{pad}subset w={w:?} m/N={}/{} frozen={}",
            r.m,
            r.n,
            frozen(s, pw, ft)
        )
        .unwrap();
        for (o, c) in &s.children {
            let label = match o {
                Outcome::Circuit(name) => format!("circuit {name}"),
                Outcome::Fail => "fail".to_string(),
                Outcome::NoFail => "nofail".to_string(),
                Outcome::Unexplored => "unexplored".to_string(),
            };
            writeln!(out, "{pad}  {label} n={}", c.count).unwrap();
            if let Some(n) = &c.node {
                dump_circuit(out, n, depth + 2, pw, ft);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(counts: &[(&str, Vec<usize>)], t: u8, l: usize) -> TreeMeta {
        TreeMeta {
            root: counts[0].0.to_string(),
            counts: counts
                .iter()
                .map(|(n, c)| (n.to_string(), c.clone()))
                .collect(),
            ft_order: t,
            max_ft_length: l,
        }
    }

    fn step(c: &str, w: usize, next: Next) -> TraceStep {
        TraceStep {
            circuit: c.into(),
            weights: vec![w],
            record: MeasurementRecord::default(),
            next,
        }
    }

    fn term(fail: bool) -> Next {
        Next::Terminate { fail }
    }

    fn shot(steps: Vec<TraceStep>) -> ShotTrace {
        ShotTrace { steps }
    }

    #[test]
    fn first_fault_free_shot() {
        let mut t = SampleTree::from_parts(meta(&[("A", vec![12])], 0, 1), CircuitNode::default());
        t.record_shot(&shot(vec![step("A", 0, term(false))]))
            .unwrap();
        let s = &t.root().subsets[&vec![0]];
        assert_eq!(s.visits, 1);
        assert!(t.is_frozen(s, 0));
        assert_eq!(
            t.dump(),
            "circuit A\n  subset w=[0] m/N=0/1 frozen=true\n    nofail n=1\n"
        );
    }

    #[test]
    fn failing_shot_counts() {
        let mut t = SampleTree::from_parts(meta(&[("A", vec![12])], 0, 1), CircuitNode::default());
        t.record_shot(&shot(vec![step("A", 1, term(true))]))
            .unwrap();
        t.record_shot(&shot(vec![step("A", 1, term(true))]))
            .unwrap();
        let r = subset_rate(&t.root().subsets[&vec![1]], 1, false);
        assert_eq!((r.m, r.n), (2, 2));
    }

    #[test]
    fn single_circuit_lower_bound_and_cutoff() {
        let mut t = SampleTree::from_parts(meta(&[("A", vec![50])], 0, 1), CircuitNode::default());
        t.record_shot(&shot(vec![step("A", 0, term(false))]))
            .unwrap();
        for i in 0..10 {
            t.record_shot(&shot(vec![step("A", 1, term(i < 3))]))
                .unwrap();
        }
        let p = 0.002;
        let a1 = 50.0 * p * (1.0f64 - p).powi(49);
        assert!((t.p_lower(&[p]).unwrap() - a1 * 0.3).abs() < 1e-15);
        let d = t.delta_total(&[p]).unwrap();
        let hand = 1.0 - (1.0f64 - p).powi(50) - a1;
        assert!((d - hand).abs() < 1e-14);
        assert!((d - 0.00462).abs() < 1e-4);
    }

    #[test]
    fn empty_tree_bounds() {
        let t = SampleTree::from_parts(meta(&[("A", vec![5])], 0, 1), CircuitNode::default());
        let b = t.bounds(&[0.01]).unwrap();
        assert_eq!(b.p_l, 0.0);
        assert_eq!(b.sigma_l, 0.0);
        assert!((b.delta - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fully_explored_circuit_has_no_cutoff() {
        let mut t = SampleTree::from_parts(meta(&[("A", vec![2])], 0, 1), CircuitNode::default());
        for w in 0..=2 {
            t.record_shot(&shot(vec![step("A", w, term(w == 2))]))
                .unwrap();
        }
        assert!(t.delta_total(&[0.3]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn unexplored_unit_subset_uses_ft_bound() {
        let mut t = SampleTree::from_parts(meta(&[("A", vec![12])], 1, 1), CircuitNode::default());
        t.record_shot(&shot(vec![step("A", 0, term(false))]))
            .unwrap();
        let p = 1e-3;
        let a0 = (1.0f64 - p).powi(12);
        let a1 = 12.0 * p * (1.0f64 - p).powi(11);
        let expected = a1 * (1.0 - a0) + (1.0 - a0 - a1);
        assert!((t.delta_total(&[p]).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn rejects_inconsistent_traces() {
        let mut t = SampleTree::from_parts(
            meta(&[("A", vec![3]), ("B", vec![2]), ("C", vec![2])], 0, 2),
            CircuitNode::default(),
        );
        assert!(t
            .record_shot(&shot(vec![step("B", 0, term(false))]))
            .is_err());
        assert!(t
            .record_shot(&shot(vec![step("A", 4, term(false))]))
            .is_err());
        let to = |n: &str| Next::Circuit(n.into());
        assert!(t.record_shot(&shot(vec![step("A", 0, to("B"))])).is_err());
        t.record_shot(&shot(vec![
            step("A", 1, to("B")),
            step("B", 0, term(false)),
        ]))
        .unwrap();
        t.record_shot(&shot(vec![
            step("A", 1, to("C")),
            step("C", 0, term(false)),
        ]))
        .unwrap();
        let third = shot(vec![step("A", 1, term(true))]);
        assert!(matches!(t.record_shot(&third), Err(Error::Trace(_))));
        assert_eq!(t.shots(), 2);
    }

    #[test]
    fn merge_is_order_independent() {
        let m = meta(&[("A", vec![3]), ("B", vec![2])], 0, 2);
        let to = |n: &str| Next::Circuit(n.into());
        let shots_a = vec![
            shot(vec![step("A", 0, to("B")), step("B", 0, term(false))]),
            shot(vec![step("A", 1, term(true))]),
        ];
        let shots_b = vec![
            shot(vec![step("A", 1, to("B")), step("B", 1, term(true))]),
            shot(vec![step("A", 0, to("B")), step("B", 2, term(false))]),
        ];
        let build = |shots: &[ShotTrace]| {
            let mut t = SampleTree::from_parts(m.clone(), CircuitNode::default());
            for s in shots {
                t.record_shot(s).unwrap();
            }
            t
        };
        let (ta, tb) = (build(&shots_a), build(&shots_b));
        let mut ab = ta.clone();
        ab.merge(&tb).unwrap();
        let mut ba = tb.clone();
        ba.merge(&ta).unwrap();
        assert_eq!(ab, ba);
        let all: Vec<ShotTrace> = shots_b.iter().chain(&shots_a).cloned().collect();
        assert_eq!(ab, build(&all));
    }
}
