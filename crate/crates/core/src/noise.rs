//! Circuit-level depolarizing noise with location kinds grouped into rate categories.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, FaultEvent, FaultPayload, LocationKind, Operation};
use crate::error::{Error, Result};
use crate::pauli::Pauli1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Category {
    pub name: String,
    pub kinds: Vec<String>,
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseParams {
    categories: Vec<Category>,
    kind_to_cat: [usize; 4],
}

impl NoiseParams {
    pub fn new(categories: Vec<Category>) -> Result<Self> {
        if categories.is_empty() {
            return Err(Error::Noise("at least one category is required".into()));
        }
        let mut kind_to_cat = [usize::MAX; 4];
        for (ci, c) in categories.iter().enumerate() {
            if !(0.0..=1.0).contains(&c.rate) {
                return Err(Error::Noise(format!(
                    "rate {} of `{}` outside [0, 1]",
                    c.rate, c.name
                )));
            }
            for k in &c.kinds {
                let kind: LocationKind = k.parse()?;
                if kind_to_cat[kind.index()] != usize::MAX {
                    return Err(Error::Noise(format!("kind `{k}` assigned twice")));
                }
                kind_to_cat[kind.index()] = ci;
            }
        }
        if let Some(k) = LocationKind::ALL
            .iter()
            .find(|k| kind_to_cat[k.index()] == usize::MAX)
        {
            return Err(Error::Noise(format!("kind `{}` not assigned", k.name())));
        }
        Ok(NoiseParams {
            categories,
            kind_to_cat,
        })
    }

    /// One rate for every location kind.
    pub fn uniform(p: f64) -> Result<Self> {
        Self::new(vec![Category {
            name: "p".into(),
            kinds: LocationKind::ALL
                .iter()
                .map(|k| k.name().to_string())
                .collect(),
            rate: p,
        }])
    }

    /// `p1` for single-qubit gates, inits and measurements; `p2` for two-qubit gates.
    pub fn two_parameter(p1: f64, p2: f64) -> Result<Self> {
        Self::new(vec![
            Category {
                name: "p1".into(),
                kinds: ["single_qubit_gate", "init", "measurement"]
                    .iter()
                    .map(|s| s.to_string())
                    .collect(),
                rate: p1,
            },
            Category {
                name: "p2".into(),
                kinds: vec!["two_qubit_gate".into()],
                rate: p2,
            },
        ])
    }

    /// The default model for `k` rates: uniform for one, two-parameter for two.
    pub fn from_rates(rates: &[f64]) -> Result<Self> {
        match rates {
            [p] => Self::uniform(*p),
            [p1, p2] => Self::two_parameter(*p1, *p2),
            _ => Err(Error::Noise(format!(
                "no default partition for {} rates; configure categories explicitly",
                rates.len()
            ))),
        }
    }

    pub fn categories(&self) -> &[Category] {
        &self.categories
    }

    pub fn k(&self) -> usize {
        self.categories.len()
    }

    pub fn rates(&self) -> Vec<f64> {
        self.categories.iter().map(|c| c.rate).collect()
    }

    pub fn with_rates(&self, rates: &[f64]) -> Result<Self> {
        if rates.len() != self.k() {
            return Err(Error::CategoryMismatch {
                expected: self.k(),
                got: rates.len(),
            });
        }
        let mut cats = self.categories.clone();
        for (c, &r) in cats.iter_mut().zip(rates) {
            c.rate = r;
        }
        Self::new(cats)
    }

    pub fn category_of(&self, kind: LocationKind) -> usize {
        self.kind_to_cat[kind.index()]
    }

    /// Number of fault locations per category.
    pub fn counts(&self, circuit: &Circuit) -> Vec<usize> {
        let mut c = vec![0; self.k()];
        for l in circuit.locations() {
            c[self.category_of(l.kind)] += 1;
        }
        c
    }

    /// Weight vector of a fault event.
    pub fn weights(&self, circuit: &Circuit, fault: &FaultEvent) -> Vec<usize> {
        let mut w = vec![0; self.k()];
        for idx in fault.locations() {
            w[self.category_of(circuit.locations()[idx].kind)] += 1;
        }
        w
    }
}

/// Number of distinct nontrivial payloads at a location kind.
pub fn payload_options(kind: LocationKind) -> Vec<(Option<FaultPayload>, f64)> {
    match kind {
        LocationKind::SingleQubitGate => [Pauli1::X, Pauli1::Y, Pauli1::Z]
            .into_iter()
            .map(|p| (Some(FaultPayload::Pauli(vec![p])), 1.0 / 3.0))
            .collect(),
        LocationKind::TwoQubitGate => (1..16)
            .map(|i| {
                let pair = vec![Pauli1::ALL[i / 4], Pauli1::ALL[i % 4]];
                (Some(FaultPayload::Pauli(pair)), 1.0 / 15.0)
            })
            .collect(),
        LocationKind::Init | LocationKind::Measurement => {
            vec![(Some(FaultPayload::Flip), 2.0 / 3.0), (None, 1.0 / 3.0)]
        }
    }
}

fn draw_payload<R: Rng + ?Sized>(op: Operation, rng: &mut R) -> Option<FaultPayload> {
    match op.kind() {
        LocationKind::SingleQubitGate => {
            Some(FaultPayload::Pauli(vec![Pauli1::ALL[rng.gen_range(1..4)]]))
        }
        LocationKind::TwoQubitGate => {
            let i = rng.gen_range(1..16);
            Some(FaultPayload::Pauli(vec![
                Pauli1::ALL[i / 4],
                Pauli1::ALL[i % 4],
            ]))
        }
        LocationKind::Init | LocationKind::Measurement => {
            if rng.gen_range(0..3) < 2 {
                Some(FaultPayload::Flip)
            } else {
                None
            }
        }
    }
}

fn place<R: Rng + ?Sized>(circuit: &Circuit, idx: usize, event: &mut FaultEvent, rng: &mut R) {
    match draw_payload(circuit.locations()[idx].operation, rng) {
        Some(p) => {
            event.entries.insert(idx, p);
        }
        None => {
            event.silent.insert(idx);
        }
    }
}

/// Uniform fault configuration with exactly `w[k]` faulty locations in category `k`.
pub fn draw_subset_fault<R: Rng + ?Sized>(
    circuit: &Circuit,
    noise: &NoiseParams,
    w: &[usize],
    rng: &mut R,
) -> Result<FaultEvent> {
    if w.len() != noise.k() {
        return Err(Error::CategoryMismatch {
            expected: noise.k(),
            got: w.len(),
        });
    }
    let mut event = FaultEvent::empty();
    for (k, &wk) in w.iter().enumerate() {
        if wk == 0 {
            continue;
        }
        let members: Vec<usize> = circuit
            .locations()
            .iter()
            .filter(|l| noise.category_of(l.kind) == k)
            .map(|l| l.index)
            .collect();
        if wk > members.len() {
            return Err(Error::WeightTooLarge {
                category: k,
                weight: wk,
                available: members.len(),
            });
        }
        let mut chosen: Vec<usize> = index::sample(rng, members.len(), wk)
            .into_iter()
            .map(|i| members[i])
            .collect();
        chosen.sort_unstable();
        for idx in chosen {
            place(circuit, idx, &mut event, rng);
        }
    }
    Ok(event)
}

/// Every location independently faulty with its category rate.
pub fn draw_mc_fault<R: Rng + ?Sized>(
    circuit: &Circuit,
    noise: &NoiseParams,
    rng: &mut R,
) -> FaultEvent {
    let rates = noise.rates();
    let mut event = FaultEvent::empty();
    for loc in circuit.locations() {
        let p = rates[noise.category_of(loc.kind)];
        if p > 0.0 && rng.gen::<f64>() < p {
            place(circuit, loc.index, &mut event, rng);
        }
    }
    event
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use crate::tableau::Basis;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small() -> Circuit {
        let mut c = Circuit::new("c", 2).unwrap();
        c.init(Basis::Z, 0).unwrap();
        c.gate(Gate::H, &[0]).unwrap();
        c.gate(Gate::Cnot, &[0, 1]).unwrap();
        c.measure(Basis::Z, 1).unwrap();
        c
    }

    #[test]
    fn partition_must_be_exact() {
        assert!(NoiseParams::uniform(0.1).is_ok());
        assert!(NoiseParams::two_parameter(0.1, 0.2).is_ok());
        let missing = vec![Category {
            name: "a".into(),
            kinds: vec!["init".into()],
            rate: 0.1,
        }];
        assert!(NoiseParams::new(missing).is_err());
        assert!(NoiseParams::uniform(1.5).is_err());
    }

    #[test]
    fn counts_and_weights() {
        let n = NoiseParams::two_parameter(0.1, 0.2).unwrap();
        assert_eq!(n.counts(&small()), vec![3, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let e = draw_subset_fault(&small(), &n, &[2, 1], &mut rng).unwrap();
        assert_eq!(n.weights(&small(), &e), vec![2, 1]);
        assert!(draw_subset_fault(&small(), &n, &[4, 0], &mut rng).is_err());
    }

    #[test]
    fn zero_and_saturated_weights() {
        let n = NoiseParams::uniform(0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(draw_subset_fault(&small(), &n, &[0], &mut rng)
            .unwrap()
            .is_empty());
        let e = draw_subset_fault(&small(), &n, &[4], &mut rng).unwrap();
        assert_eq!(e.total_weight(), 4);
    }

    #[test]
    fn mc_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let zero = NoiseParams::uniform(0.0).unwrap();
        assert!(draw_mc_fault(&small(), &zero, &mut rng).is_empty());
        let mut gates = Circuit::new("g", 1).unwrap();
        for _ in 0..5 {
            gates.gate(Gate::H, &[0]).unwrap();
        }
        let one = NoiseParams::uniform(1.0).unwrap();
        assert_eq!(draw_mc_fault(&gates, &one, &mut rng).total_weight(), 5);
    }

    #[test]
    fn payload_tables_are_normalized() {
        for k in LocationKind::ALL {
            let total: f64 = payload_options(k).iter().map(|(_, p)| p).sum();
            assert!((total - 1.0).abs() < 1e-15);
        }
        assert_eq!(payload_options(LocationKind::TwoQubitGate).len(), 15);
    }
}
