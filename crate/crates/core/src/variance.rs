//! Evaluated event trees and the two variance algorithms over them.
//!
//! An [`EvalNode`] is a sample tree with every binomial factor, rate and
//! rate variance fixed at one physical rate. Each leaf carries a pair of
//! values, one for the lower and one for the upper bound, so that both
//! bounds and the cutoff share one structure.

use crate::stats::NeumaierSum;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    Lower,
    Upper,
}

#[derive(Clone, Debug, PartialEq)]
pub enum EvalNode {
    /// Children weighted by constant factors (binomial weights or cutoffs).
    Circuit(Vec<(f64, EvalNode)>),
    /// One or two branches of a Bernoulli choice; two branches have means
    /// `q` and `1 - q` and share one variance.
    Subset(Vec<Branch>),
    Leaf {
        lower: f64,
        upper: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub mean: f64,
    pub var: f64,
    pub node: EvalNode,
}

impl EvalNode {
    pub fn leaf(lower: f64, upper: f64) -> EvalNode {
        EvalNode::Leaf { lower, upper }
    }

    /// Expected value of the tree for one bound.
    pub fn mean(&self, bound: Bound) -> f64 {
        match self {
            EvalNode::Leaf { lower, upper } => match bound {
                Bound::Lower => *lower,
                Bound::Upper => *upper,
            },
            EvalNode::Circuit(children) => children
                .iter()
                .map(|(a, c)| a * c.mean(bound))
                .collect::<NeumaierSum>()
                .value(),
            EvalNode::Subset(branches) => branches
                .iter()
                .map(|b| b.mean * b.node.mean(bound))
                .collect::<NeumaierSum>()
                .value(),
        }
    }

    /// Difference between the upper and lower expected values.
    pub fn cutoff(&self) -> f64 {
        match self {
            EvalNode::Leaf { lower, upper } => upper - lower,
            EvalNode::Circuit(children) => children
                .iter()
                .map(|(a, c)| a * c.cutoff())
                .collect::<NeumaierSum>()
                .value(),
            EvalNode::Subset(branches) => branches
                .iter()
                .map(|b| b.mean * b.node.cutoff())
                .collect::<NeumaierSum>()
                .value(),
        }
    }

    /// `(mean, variance)` by propagation from the leaves upward.
    pub fn recursive(&self, bound: Bound) -> (f64, f64) {
        match self {
            EvalNode::Leaf { .. } => (self.mean(bound), 0.0),
            EvalNode::Circuit(children) => {
                let mut p = NeumaierSum::default();
                let mut v = NeumaierSum::default();
                for (a, c) in children {
                    let (cp, cv) = c.recursive(bound);
                    p.add(a * cp);
                    v.add(a * a * cv);
                }
                (p.value(), v.value())
            }
            EvalNode::Subset(branches) => match branches.as_slice() {
                [] => (0.0, 0.0),
                [b] => {
                    let (x, vx) = b.node.recursive(bound);
                    (b.mean * x, b.var * (x * x + vx) + b.mean * b.mean * vx)
                }
                [b0, b1] => {
                    let (x, vx) = b0.node.recursive(bound);
                    let (y, vy) = b1.node.recursive(bound);
                    let var = b0.var;
                    let p = b0.mean * x + b1.mean * y;
                    let v = var * ((x - y) * (x - y) + vx + vy)
                        + b0.mean * b0.mean * vx
                        + b1.mean * b1.mean * vy;
                    (p, v)
                }
                _ => panic!("subset nodes have at most two branches"),
            },
        }
    }

    /// Variance as a sum of path variances plus pairwise path covariances.
    ///
    /// Quadratic in the number of paths; intended as an independent check
    /// of [`EvalNode::recursive`].
    pub fn pairwise(&self, bound: Bound) -> f64 {
        let mut paths = Vec::new();
        let mut prefix = Vec::new();
        let mut next_id = 0usize;
        collect_paths(self, bound, &mut prefix, &mut next_id, &mut paths);
        let mut total = NeumaierSum::default();
        for (i, a) in paths.iter().enumerate() {
            total.add(goodman(&a.factors));
            for b in &paths[i + 1..] {
                total.add(2.0 * covariance(a, b));
            }
        }
        total.value()
    }
}

#[derive(Clone, Copy, Debug)]
struct Factor {
    node: usize,
    branch: usize,
    at_subset: bool,
    mean: f64,
    var: f64,
}

#[derive(Debug)]
struct Path {
    factors: Vec<Factor>,
}

fn collect_paths(
    node: &EvalNode,
    bound: Bound,
    prefix: &mut Vec<Factor>,
    next_id: &mut usize,
    out: &mut Vec<Path>,
) {
    let id = *next_id;
    *next_id += 1;
    match node {
        EvalNode::Leaf { .. } => {
            let value = node.mean(bound);
            if value != 0.0 {
                let mut factors = prefix.clone();
                factors.push(Factor {
                    node: id,
                    branch: 0,
                    at_subset: false,
                    mean: value,
                    var: 0.0,
                });
                out.push(Path { factors });
            }
        }
        EvalNode::Circuit(children) => {
            for (j, (a, c)) in children.iter().enumerate() {
                prefix.push(Factor {
                    node: id,
                    branch: j,
                    at_subset: false,
                    mean: *a,
                    var: 0.0,
                });
                collect_paths(c, bound, prefix, next_id, out);
                prefix.pop();
            }
        }
        EvalNode::Subset(branches) => {
            for (j, b) in branches.iter().enumerate() {
                prefix.push(Factor {
                    node: id,
                    branch: j,
                    at_subset: true,
                    mean: b.mean,
                    var: b.var,
                });
                collect_paths(&b.node, bound, prefix, next_id, out);
                prefix.pop();
            }
        }
    }
}

/// Variance of a product of independent factors.
fn goodman(factors: &[Factor]) -> f64 {
    let mut second = 1.0;
    let mut first_sq = 1.0;
    for f in factors {
        second *= f.var + f.mean * f.mean;
        first_sq *= f.mean * f.mean;
    }
    second - first_sq
}

fn product_mean(factors: &[Factor]) -> f64 {
    factors.iter().map(|f| f.mean).product()
}

fn covariance(a: &Path, b: &Path) -> f64 {
    let k = a
        .factors
        .iter()
        .zip(&b.factors)
        .position(|(x, y)| x.node != y.node || x.branch != y.branch)
        .expect("distinct paths diverge somewhere");
    debug_assert_eq!(a.factors[k].node, b.factors[k].node);
    let upstream = &a.factors[..k];
    let var_u = goodman(upstream);
    if !a.factors[k].at_subset {
        // diverging below a circuit node
        product_mean(&a.factors[k..]) * product_mean(&b.factors[k..]) * var_u
    } else {
        // diverging at a Bernoulli choice: Cov[U X, U (1 - X)]
        let x = a.factors[k];
        let mut ux = upstream.to_vec();
        ux.push(x);
        let cov_split = var_u * x.mean - goodman(&ux);
        product_mean(&a.factors[k + 1..]) * product_mean(&b.factors[k + 1..]) * cov_split
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bern(q: f64, v: f64, a: EvalNode, b: EvalNode) -> EvalNode {
        EvalNode::Subset(vec![
            Branch {
                mean: q,
                var: v,
                node: a,
            },
            Branch {
                mean: 1.0 - q,
                var: v,
                node: b,
            },
        ])
    }

    fn fail_leaf(q: f64, v: f64) -> EvalNode {
        bern(q, v, EvalNode::leaf(1.0, 1.0), EvalNode::leaf(0.0, 0.0))
    }

    #[test]
    fn goodman_two_edges() {
        let f = |m, v| Factor {
            node: 0,
            branch: 0,
            at_subset: true,
            mean: m,
            var: v,
        };
        let g = goodman(&[f(0.5, 0.05), f(0.5, 0.05)]);
        assert!((g - 0.0275).abs() < 1e-15);
    }

    #[test]
    fn single_edge_path() {
        let v = (5.0 * 0.24 + 0.25) / 36.0;
        let tree = EvalNode::Circuit(vec![(0.1, fail_leaf(0.6, v))]);
        let (p, var) = tree.recursive(Bound::Lower);
        assert!((p - 0.06).abs() < 1e-15);
        assert!((var - 0.01 * v).abs() < 1e-15);
        assert!((tree.pairwise(Bound::Lower) - 0.01 * v).abs() < 1e-15);
    }

    #[test]
    fn two_branch_closed_form() {
        let (b, c, qj, qk, ql, vj, vk, vl) = (0.3, 0.2, 0.4, 0.7, 0.1, 0.01, 0.02, 0.03);
        let tree = EvalNode::Circuit(vec![(
            1.0,
            bern(
                qj,
                vj,
                EvalNode::Circuit(vec![(b, fail_leaf(qk, vk))]),
                EvalNode::Circuit(vec![(c, fail_leaf(ql, vl))]),
            ),
        )]);
        let closed = b * b * (qj * qj * vk + qk * qk * vj + vj * vk)
            + c * c * (ql * ql * vj + (1.0 - qj) * (1.0 - qj) * vl + vj * vl)
            - 2.0 * b * c * qk * ql * vj;
        let (_, rec) = tree.recursive(Bound::Lower);
        assert!((rec - closed).abs() < 1e-15);
        assert!((tree.pairwise(Bound::Lower) - closed).abs() < 1e-15);
    }

    #[test]
    fn frozen_tree_has_no_variance() {
        let tree = EvalNode::Circuit(vec![
            (0.9, fail_leaf(0.0, 0.0)),
            (0.1, EvalNode::leaf(0.0, 1.0)),
        ]);
        assert_eq!(tree.recursive(Bound::Lower), (0.0, 0.0));
        assert_eq!(tree.recursive(Bound::Upper).1, 0.0);
        assert!((tree.cutoff() - 0.1).abs() < 1e-15);
    }
}
