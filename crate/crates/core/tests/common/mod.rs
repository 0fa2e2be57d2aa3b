#![allow(dead_code)]

use itertools::Itertools;

/// Three circuits of four locations each: `A` branches on its outcome to
/// `B` (outcome 1) or `C` (outcome 0); each of those fails on outcome 1.
pub const SYNTHETIC: &str = "\
name: synthetic
root: A
t: 0
length: 1

circuit A
qubits: 3
INIT Z 0
GATE H 0
GATE H 0
MEAS Z 0 @a
end

circuit B
qubits: 3
INIT Z 1
GATE H 1
GATE H 1
MEAS Z 1 @b
end

circuit C
qubits: 3
INIT Z 2
GATE H 2
GATE H 2
MEAS Z 2 @c
end

rule A a=1 -> B
rule A -> C
rule B b=1 -> FAIL
rule B -> OK
rule C c=1 -> FAIL
rule C -> OK
";

#[derive(Clone, Copy)]
enum Loc {
    Init(usize),
    H(usize),
    Cnot(usize, usize),
    Meas(usize),
}

/// Possible effects of one fault: `(x flips per qubit, outcome flip, probability)`.
fn payloads(loc: Loc) -> Vec<([bool; 5], bool, f64)> {
    let x_on = |qs: &[(usize, bool)]| {
        let mut x = [false; 5];
        for &(q, b) in qs {
            x[q] = b;
        }
        x
    };
    match loc {
        Loc::Init(q) => vec![
            (x_on(&[(q, true)]), false, 2.0 / 3.0),
            ([false; 5], false, 1.0 / 3.0),
        ],
        Loc::Meas(_) => vec![
            ([false; 5], true, 2.0 / 3.0),
            ([false; 5], false, 1.0 / 3.0),
        ],
        // X, Y, Z after the gate; X and Y carry an X component.
        Loc::H(q) => [true, true, false]
            .iter()
            .map(|&x| (x_on(&[(q, x)]), false, 1.0 / 3.0))
            .collect(),
        // I, X, Y, Z on each qubit, excluding I⊗I.
        Loc::Cnot(c, t) => (1..16)
            .map(|i| {
                let xc = matches!(i / 4, 1 | 2);
                let xt = matches!(i % 4, 1 | 2);
                (x_on(&[(c, xc), (t, xt)]), false, 1.0 / 15.0)
            })
            .collect(),
    }
}

/// Exact flag probability of the GHZ circuit in the `w`-fault subset.
///
/// The fault-free flag is 0, so the flag equals the X component of the
/// propagated error frame on qubit 4 plus any outcome flip. Z components
/// never reach a Z measurement through this circuit and are dropped.
pub fn ghz_flag_rate(w: usize) -> f64 {
    let mut locs: Vec<Loc> = (0..5).map(Loc::Init).collect();
    locs.push(Loc::H(0));
    for (a, b) in [(0, 1), (1, 2), (2, 3), (0, 4), (3, 4)] {
        locs.push(Loc::Cnot(a, b));
    }
    locs.push(Loc::Meas(4));

    let mut total = 0.0;
    let mut configs = 0usize;
    for chosen in (0..locs.len()).combinations(w) {
        configs += 1;
        let options: Vec<_> = chosen.iter().map(|&i| payloads(locs[i])).collect();
        let choices = if w == 0 {
            vec![vec![]]
        } else {
            options
                .iter()
                .map(|o| 0..o.len())
                .multi_cartesian_product()
                .collect()
        };
        for pick in choices {
            let prob: f64 = pick
                .iter()
                .enumerate()
                .map(|(i, &j)| options[i][j].2)
                .product();
            let mut x = [false; 5];
            let mut flip = false;
            for (idx, loc) in locs.iter().enumerate() {
                match *loc {
                    Loc::Cnot(c, t) => x[t] ^= x[c],
                    // Nothing carries a Z component into H, and X leaves as Z.
                    Loc::Init(q) | Loc::H(q) => x[q] = false,
                    Loc::Meas(_) => {}
                }
                if let Some(i) = chosen.iter().position(|&c| c == idx) {
                    let (dx, df, _) = options[i][pick[i]];
                    for q in 0..5 {
                        x[q] ^= dx[q];
                    }
                    flip ^= df;
                }
            }
            if x[4] ^ flip {
                total += prob;
            }
        }
    }
    total / configs as f64
}

/// Chi-square p-values of weight-`w` fault configurations on a
/// three-location circuit: direct draws conditioned on weight `w`, and
/// subset draws, each against brute-force enumeration.
pub fn conditional_fault_pvalues(w: usize, samples: usize, seed: u64) -> (f64, f64) {
    use dss::circuit::{Circuit, FaultEvent};
    use dss::noise::{draw_mc_fault, draw_subset_fault, NoiseParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    use std::collections::BTreeMap;

    let c = Circuit::parse("T", "qubits: 1\nINIT Z 0\nGATE H 0\nMEAS Z 0\n").unwrap();
    // Per location: (payload label, probability); "-" is a fault without effect.
    let kinds: [&[(&str, f64)]; 3] = [
        &[("flip", 2.0 / 3.0), ("-", 1.0 / 3.0)],
        &[("X", 1.0 / 3.0), ("Y", 1.0 / 3.0), ("Z", 1.0 / 3.0)],
        &[("flip", 2.0 / 3.0), ("-", 1.0 / 3.0)],
    ];
    let mut expected: BTreeMap<String, f64> = BTreeMap::new();
    let n_sets = (0..3).combinations(w).count() as f64;
    for set in (0..3).combinations(w) {
        for pick in set
            .iter()
            .map(|&l| kinds[l].iter())
            .multi_cartesian_product()
        {
            let key = set
                .iter()
                .zip(&pick)
                .map(|(l, (name, _))| format!("{l}{name}"))
                .join(" ");
            *expected.entry(key).or_default() +=
                pick.iter().map(|(_, p)| p).product::<f64>() / n_sets;
        }
    }
    let key_of = |e: &FaultEvent| {
        let mut parts: BTreeMap<usize, String> =
            e.silent.iter().map(|&l| (l, format!("{l}-"))).collect();
        for (&l, payload) in &e.entries {
            let name = match payload {
                dss::circuit::FaultPayload::Flip => "flip".to_string(),
                dss::circuit::FaultPayload::Pauli(ps) => format!("{:?}", ps[0]),
            };
            parts.insert(l, format!("{l}{name}"));
        }
        parts.into_values().join(" ")
    };
    let pvalue = |counts: &BTreeMap<String, usize>| {
        let total: usize = counts.values().sum();
        assert!(
            counts.keys().all(|k| expected.contains_key(k)),
            "{counts:?}"
        );
        let stat: f64 = expected
            .iter()
            .map(|(k, p)| {
                let e = p * total as f64;
                let o = *counts.get(k).unwrap_or(&0) as f64;
                (o - e) * (o - e) / e
            })
            .sum();
        let dof = (expected.len() - 1) as f64;
        1.0 - ChiSquared::new(dof).unwrap().cdf(stat)
    };

    let noise = NoiseParams::uniform(0.4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mc: BTreeMap<String, usize> = BTreeMap::new();
    while mc.values().sum::<usize>() < samples {
        let e = draw_mc_fault(&c, &noise, &mut rng);
        if e.total_weight() == w {
            *mc.entry(key_of(&e)).or_default() += 1;
        }
    }
    let mut sub: BTreeMap<String, usize> = BTreeMap::new();
    for _ in 0..samples {
        let e = draw_subset_fault(&c, &noise, &[w], &mut rng).unwrap();
        *sub.entry(key_of(&e)).or_default() += 1;
    }
    (pvalue(&mc), pvalue(&sub))
}
