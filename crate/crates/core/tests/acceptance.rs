//! End-to-end acceptance checks. Each test writes one `criterion N: PASS|FAIL`
//! line straight to stdout, so the lines show even when output is captured.

mod common;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dss::analysis::{log_factors, loglog_slope, ray_grid, rescale_curve};
use dss::exhaustive::{audit_ft, exhaustive_subset, DEFAULT_BUDGET};
use dss::library::{ghz_protocol, steane_det_prep, steane_flag_prep};
use dss::noise::NoiseParams;
use dss::protocol::parse_protocol;
use dss::sampler::{dss_run, mc_run, Criterion, DssConfig, DssRun};
use dss::stats::{binomial_factor, wilson_interval};
use dss::tree::{Child, CircuitNode, Outcome, SampleTree, SubsetNode};
use dss::variance::{Bound, Branch, EvalNode};

type Verdict = Result<String, String>;

fn report(n: usize, title: &str, verdict: Verdict) {
    let line = match &verdict {
        Ok(d) => format!("criterion {n:>2}: PASS  {title}: {d}\n"),
        Err(d) => format!("criterion {n:>2}: FAIL  {title}: {d}\n"),
    };
    // Bypasses the test harness capture.
    std::io::stdout().lock().write_all(line.as_bytes()).unwrap();
    if let Err(d) = verdict {
        panic!("criterion {n} failed: {d}");
    }
}

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn run(
    protocol: &dss::protocol::ProtocolGraph,
    p: &[f64],
    criterion: Criterion,
    shots: u64,
    seed: u64,
) -> DssRun {
    let noise = NoiseParams::from_rates(p).unwrap();
    dss_run(
        protocol,
        &noise,
        DssConfig::new(p.to_vec(), criterion, shots, seed),
    )
    .unwrap()
}

fn ghz_containment() -> Verdict {
    let start = Instant::now();
    let protocol = ghz_protocol().unwrap();
    let noise = NoiseParams::uniform(1e-3).unwrap();
    let exact: Vec<f64> = (1..=2)
        .map(|w| exhaustive_subset(&protocol, &noise, &[w], DEFAULT_BUDGET).unwrap())
        .collect();
    let dss = run(&protocol, &[1e-3], Criterion::Eru, 200, 2024);
    let n = protocol.circuit("GHZ").unwrap().len();
    let grid = ray_grid(&[1e-3], &log_factors(0.1, 1.0, 10).unwrap());
    let mut misses = Vec::new();
    for row in rescale_curve(&dss.tree, &grid).unwrap() {
        let p = row.p[0];
        let truth = binomial_factor(n, 1, p).unwrap() * exact[0]
            + binomial_factor(n, 2, p).unwrap() * exact[1];
        if !(row.p_l - row.sigma_l <= truth && truth <= row.p_u + row.sigma_u) {
            misses.push(format!(
                "p={p:.3e}: {truth:.4e} outside [{:.4e}, {:.4e}]",
                row.p_l - row.sigma_l,
                row.p_u + row.sigma_u
            ));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        misses.is_empty() && secs < 60.0,
        format!(
            "p_fail(1)={:.6} p_fail(2)={:.6}, 10 grid points, {} outside, {secs:.2}s {}",
            exact[0],
            exact[1],
            misses.len(),
            misses.join("; ")
        ),
    )
}

#[test]
fn criterion_01_ghz_bounds_contain_exact_rate() {
    report(1, "GHZ oracle containment", ghz_containment());
}

#[test]
fn criterion_02_dss_needs_far_fewer_shots_than_mc() {
    let protocol = ghz_protocol().unwrap();
    let noise = NoiseParams::uniform(1e-3).unwrap();
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    for seed in 1..=5u64 {
        let eta = run(&protocol, &[1e-3], Criterion::Eru, 100, seed)
            .bounds
            .eta;
        let mc = mc_run(&protocol, &noise, 10_000, seed, 1).unwrap();
        worst = worst.max(eta / mc.width());
        details.push(format!("{eta:.2e}/{:.2e}", mc.width()));
    }
    report(
        2,
        "DSS eta at 1e2 shots vs MC width at 1e4 shots",
        check(
            worst <= 2.0,
            format!(
                "worst ratio {worst:.3} (eta/width per seed: {})",
                details.join(", ")
            ),
        ),
    );
}

#[test]
fn criterion_03_single_faults_never_fail() {
    let mut details = Vec::new();
    let mut ok = true;
    for protocol in [steane_det_prep().unwrap(), steane_flag_prep().unwrap()] {
        let r = audit_ft(&protocol, DEFAULT_BUDGET).unwrap();
        ok &= r.passed();
        details.push(format!(
            "{}: {} placements, {} failures",
            protocol.name(),
            r.placements,
            r.failures.len()
        ));
    }
    report(3, "weight-1 audit", check(ok, details.join("; ")));
}

#[test]
fn criterion_04_det_prep_scales_quadratically() {
    let p_max = [1e-3, 1e-2];
    let dss = run(
        &steane_det_prep().unwrap(),
        &p_max,
        Criterion::Binomial,
        10_000,
        4,
    );
    let rows = rescale_curve(
        &dss.tree,
        &ray_grid(&p_max, &log_factors(1e-2, 1e-1, 9).unwrap()),
    )
    .unwrap();
    let verdict = match loglog_slope(&rows, (1e-5, 1e-4)) {
        Ok(s) => check((1.9..=2.1).contains(&s), format!("slope {s:.4}")),
        Err(e) => Err(e.to_string()),
    };
    report(4, "det-prep log-log slope", verdict);
}

#[test]
fn criterion_05_variance_matches_repetitions() {
    let protocol = parse_protocol(common::SYNTHETIC).unwrap();
    let p = [0.1];
    let reps = 1000;
    let mut values = Vec::with_capacity(reps);
    let mut predicted = 0.0;
    let mut worst_gap: f64 = 0.0;
    for seed in 0..reps as u64 {
        let tree = run(&protocol, &p, Criterion::Binomial, 300, 10_000 + seed).tree;
        values.push(tree.p_lower(&p).unwrap());
        let (rec, _) = tree.var_bounds(&p).unwrap();
        let (pair, _) = tree.var_bounds_pairwise(&p).unwrap();
        worst_gap = worst_gap.max((rec - pair).abs());
        predicted += rec / reps as f64;
    }
    let mean = values.iter().sum::<f64>() / reps as f64;
    let empirical =
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (reps as f64 - 1.0);
    let rel = (predicted / empirical - 1.0).abs();
    report(
        5,
        "variance vs repetitions",
        check(
            rel <= 0.2 && worst_gap <= 1e-10,
            format!("predicted {predicted:.4e}, empirical {empirical:.4e}, rel diff {rel:.3}, max recursive-pairwise gap {worst_gap:.1e}"),
        ),
    );
}

#[allow(clippy::too_many_arguments)]
fn two_branch_closed_form(
    b: f64,
    c: f64,
    qj: f64,
    qk: f64,
    ql: f64,
    vj: f64,
    vk: f64,
    vl: f64,
) -> f64 {
    b * b * (qj * qj * vk + qk * qk * vj + vj * vk)
        + c * c * (ql * ql * vj + (1.0 - qj) * (1.0 - qj) * vl + vj * vl)
        - 2.0 * b * c * qk * ql * vj
}

fn wilson(m: u64, n: u64) -> f64 {
    let nf = n as f64;
    let q = m as f64 / nf;
    (nf * q * (1.0 - q) + 0.25) / ((1.0 + nf) * (1.0 + nf))
}

fn verdict_subset(fails: u64, visits: u64) -> SubsetNode {
    let mut children = BTreeMap::new();
    for (o, n) in [(Outcome::Fail, fails), (Outcome::NoFail, visits - fails)] {
        if n > 0 {
            children.insert(
                o,
                Child {
                    count: n,
                    node: None,
                },
            );
        }
    }
    SubsetNode { visits, children }
}

#[test]
fn criterion_06_two_branch_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    // Arbitrary real parameters on an evaluated tree.
    for _ in 0..1000 {
        let [b, c, qj, qk, ql]: [f64; 5] = std::array::from_fn(|_| rng.gen());
        let [vj, vk, vl]: [f64; 3] = std::array::from_fn(|_| rng.gen::<f64>() * 0.1);
        let leaf = |q: f64, v: f64| {
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
        };
        let tree = EvalNode::Circuit(vec![(
            1.0,
            EvalNode::Subset(vec![
                Branch {
                    mean: qj,
                    var: vj,
                    node: EvalNode::Circuit(vec![(b, leaf(qk, vk))]),
                },
                Branch {
                    mean: 1.0 - qj,
                    var: vj,
                    node: EvalNode::Circuit(vec![(c, leaf(ql, vl))]),
                },
            ]),
        )]);
        let closed = two_branch_closed_form(b, c, qj, qk, ql, vj, vk, vl);
        worst = worst.max((tree.recursive(Bound::Lower).1 - closed).abs());
        worst = worst.max((tree.pairwise(Bound::Lower) - closed).abs());
    }
    // Random counts on a sampled tree of the synthetic protocol, through var_bounds.
    let protocol = parse_protocol(common::SYNTHETIC).unwrap();
    let noise = NoiseParams::uniform(0.1).unwrap();
    let meta = SampleTree::new(&protocol, &noise).meta().clone();
    for _ in 0..1000 {
        let n: u64 = rng.gen_range(2..500);
        let nb = rng.gen_range(1..n);
        let fb = rng.gen_range(0..=nb);
        let fc = rng.gen_range(0..=n - nb);
        let p: f64 = rng.gen_range(1e-4..0.2);
        let child = |name: &str, fails: u64, visits: u64| {
            let mut node = CircuitNode::default();
            node.subsets.insert(vec![1], verdict_subset(fails, visits));
            (
                Outcome::Circuit(name.into()),
                Child {
                    count: visits,
                    node: Some(node),
                },
            )
        };
        let mut root = CircuitNode::default();
        root.subsets.insert(
            vec![1],
            SubsetNode {
                visits: n,
                children: [child("B", fb, nb), child("C", fc, n - nb)]
                    .into_iter()
                    .collect(),
            },
        );
        let tree = SampleTree::from_parts(meta.clone(), root);
        let a1 = binomial_factor(4, 1, p).unwrap();
        let closed = a1
            * a1
            * two_branch_closed_form(
                a1,
                a1,
                nb as f64 / n as f64,
                fb as f64 / nb as f64,
                fc as f64 / (n - nb) as f64,
                wilson(nb, n),
                wilson(fb, nb),
                wilson(fc, n - nb),
            );
        let (var, _) = tree.var_bounds(&[p]).unwrap();
        worst = worst.max((var - closed).abs());
    }
    report(
        6,
        "two-branch closed form",
        check(
            worst <= 1e-12,
            format!("2000 draws, max abs diff {worst:.2e}"),
        ),
    );
}

#[test]
fn criterion_07_eru_subset_choices() {
    let protocol = ghz_protocol().unwrap();
    let low = run(&protocol, &[1e-3], Criterion::Eru, 200, 2024).choices;
    let high = run(&protocol, &[1e-2], Criterion::Eru, 200, 2024).choices;
    let get = |c: &BTreeMap<(String, Vec<usize>), u64>, w: usize| {
        c.get(&("GHZ".to_string(), vec![w])).copied().unwrap_or(0)
    };
    report(
        7,
        "ERU subset choices on GHZ",
        check(
            get(&low, 0) == 1 && get(&high, 2) > get(&low, 2),
            format!(
                "w=0 chosen {} time(s) at 1e-3; w=2 chosen {} at 1e-3 and {} at 1e-2",
                get(&low, 0),
                get(&low, 2),
                get(&high, 2)
            ),
        ),
    );
}

#[test]
fn criterion_08_flag_cutoff_scales_quadratically() {
    let protocol = steane_flag_prep().unwrap();
    let grid = ray_grid(&[1e-2], &log_factors(1e-2, 1.0, 9).unwrap());
    let high = run(&protocol, &[1e-2], Criterion::Binomial, 2000, 8);
    let rows = rescale_curve(&high.tree, &grid).unwrap();
    let ratio: Vec<f64> = rows.iter().map(|r| r.delta / (r.p[0] * r.p[0])).collect();
    let at_max = *ratio.last().unwrap();
    let worst = ratio.iter().cloned().fold(0.0, f64::max) / at_max;
    let low = run(&protocol, &[1e-3], Criterion::Binomial, 2000, 8);
    let eta_high = high.tree.bounds(&[1e-4]).unwrap().eta;
    let eta_low = low.tree.bounds(&[1e-4]).unwrap().eta;
    report(
        8,
        "flag-prep cutoff scaling",
        check(
            worst <= 2.0 && eta_high < eta_low,
            format!(
                "max delta/p^2 over [1e-4, 1e-2] is {worst:.3}x its value at 1e-2; eta(1e-4) {eta_high:.3e} sampled at 1e-2 vs {eta_low:.3e} at 1e-3"
            ),
        ),
    );
}

#[test]
fn criterion_09_statistics() {
    let mut problems = Vec::new();
    for &(n, p) in &[(1, 0.3), (12, 1e-3), (50, 0.002), (100, 0.5), (37, 0.99)] {
        let total: f64 = (0..=n).map(|w| binomial_factor(n, w, p).unwrap()).sum();
        if (total - 1.0).abs() > 1e-12 {
            problems.push(format!("sum A_w for N={n}, p={p} is {total}"));
        }
    }
    for n in [1usize, 5, 12, 50, 100] {
        let b = 1.0 / (n as f64 + 1.0);
        let a = |w, p| binomial_factor(n, w, p).unwrap();
        if (a(0, b) - a(1, b)).abs() > 1e-12
            || a(0, b * 0.99) <= a(1, b * 0.99)
            || a(0, b * 1.01) >= a(1, b * 1.01)
        {
            problems.push(format!("A0/A1 boundary wrong at N={n}"));
        }
    }
    let (lo, _) = wilson_interval(0, 20, 1.0).unwrap();
    let (_, hi) = wilson_interval(20, 20, 1.0).unwrap();
    let (l5, h5) = wilson_interval(5, 10, 1.0).unwrap();
    if lo.abs() > 1e-12
        || (hi - 1.0).abs() > 1e-12
        || ((l5 + h5) / 2.0 - 0.5).abs() > 1e-12
        || ((h5 - l5) / 2.0 - 0.1508).abs() > 1e-4
    {
        problems.push(format!("Wilson boundaries: {lo} {hi} [{l5}, {h5}]"));
    }
    let mut pvals = Vec::new();
    for w in 1..=2 {
        let (mc, sub) = common::conditional_fault_pvalues(w, 20_000, 11 + w as u64);
        pvals.push(format!("w={w}: {mc:.3}/{sub:.3}"));
        if mc < 0.01 || sub < 0.01 {
            problems.push(format!("chi-square rejects at w={w}: {mc}, {sub}"));
        }
    }
    report(
        9,
        "statistics checks",
        check(
            problems.is_empty(),
            format!(
                "chi-square p-values direct/subset {}; {}",
                pvals.join(", "),
                problems.join("; ")
            ),
        ),
    );
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Name and arguments of every golden CLI invocation.
fn golden_cases() -> Vec<(&'static str, Vec<String>)> {
    let cfg = golden_dir().join("det.toml").display().to_string();
    let args = |s: &str| s.split_whitespace().map(String::from).collect::<Vec<_>>();
    let mut cases = vec![
        ("run_ghz_eru", args("run --protocol ghz --pmax 1e-3 --criterion eru --shots 200 --seed 2024 --workers 1")),
        ("run_det_binomial", args("run --protocol steane-det-0 --pmax 1e-3 --pmax 1e-2 --criterion binomial --shots 300 --seed 4 --workers 1")),
        ("curve_ghz", args("curve --protocol ghz --pmax 1e-3 --criterion eru --shots 100 --seed 1 --grid 0.1:1:5 --workers 1")),
        ("curve_flag", args("curve --protocol steane-flag-0 --pmax 1e-2 --criterion binomial --shots 200 --seed 8 --grid 1e-2;1e-3;1e-4 --workers 1")),
        ("compare_ghz", args("compare --protocol ghz --pmax 1e-3 --criterion binomial --prohibit-zero --shots 50 --mc-shots 300 --seed 3 --workers 1")),
        ("audit_det", args("audit-ft --protocol steane-det-0")),
        ("oracle_ghz", args("oracle --protocol ghz --pmax 1e-3 --weight 2")),
    ];
    let mut with_config = args("curve --workers 1 --config");
    with_config.push(cfg);
    cases.push(("curve_det_config", with_config));
    cases
}

fn cli(args: &[String]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_dss"))
        .args(args)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

#[test]
fn criterion_10_cli_outputs_are_reproducible() {
    let bless = std::env::var_os("DSS_BLESS").is_some();
    let mut mismatches = Vec::new();
    let cases = golden_cases();
    for (name, args) in &cases {
        let first = cli(args);
        if cli(args) != first {
            mismatches.push(format!("{name}: differs between runs"));
        }
        let path = golden_dir().join(format!("{name}.txt"));
        if bless {
            std::fs::write(&path, &first).unwrap();
        }
        match std::fs::read(&path) {
            Ok(golden) if golden == first => {}
            Ok(_) => mismatches.push(format!("{name}: differs from golden")),
            Err(e) => mismatches.push(format!("{name}: {e}")),
        }
    }
    report(
        10,
        "CLI determinism",
        check(
            mismatches.is_empty(),
            format!(
                "{} commands, {}",
                cases.len(),
                if mismatches.is_empty() {
                    "all byte-identical".into()
                } else {
                    mismatches.join("; ")
                }
            ),
        ),
    );
}
