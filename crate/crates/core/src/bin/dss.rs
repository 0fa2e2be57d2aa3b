use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use dss::analysis::{compare, emit_compare_csv, emit_csv, rescale_curve};
use dss::config::{load_protocol, GridSpec, RunConfig, StopSpec};
use dss::exhaustive::{audit_ft, exhaustive_subset, validate, DEFAULT_BUDGET};
use dss::noise::NoiseParams;
use dss::sampler::{dss_run, Criterion, DssRun};
use dss::tree::BoundsResult;

#[derive(Parser)]
#[command(
    name = "dss",
    version,
    about = "Dynamical subset sampling of logical failure rates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a protocol and print the tree and bounds at p_max.
    Run(SampleArgs),
    /// Sample, then evaluate the bounds over a grid of rates as CSV.
    Curve(SampleArgs),
    /// Uncertainty per shot for DSS and direct Monte Carlo as CSV.
    Compare {
        #[command(flatten)]
        sample: SampleArgs,
        /// Direct Monte Carlo shots.
        #[arg(long, default_value_t = 10_000)]
        mc_shots: u64,
    },
    /// Enumerate every single fault and report logical failures.
    AuditFt {
        #[arg(long)]
        protocol: String,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact failure rate of one fault subset of the root circuit.
    Oracle {
        #[arg(long)]
        protocol: String,
        /// Rate per category; fixes the number of categories.
        #[arg(long = "pmax", required = true)]
        pmax: Vec<f64>,
        /// Weight per category, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        weight: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Flags override the values of `--config`.
#[derive(Args)]
struct SampleArgs {
    /// TOML or JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in protocol name or protocol file.
    #[arg(long)]
    protocol: Option<String>,
    /// Rate per noise category; repeat for several categories.
    #[arg(long = "pmax")]
    pmax: Vec<f64>,
    #[arg(long)]
    criterion: Option<Criterion>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    eta_max: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// `FROM:TO:POINTS` scale factors on p_max, or `p,p;p,p` rate vectors.
    #[arg(long)]
    grid: Option<GridSpec>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    prohibit_zero: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SampleArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => {
                let Some(protocol) = self.protocol.clone() else {
                    bail!("--protocol or --config is required");
                };
                if self.pmax.is_empty() {
                    bail!("--pmax is required without --config");
                }
                RunConfig {
                    protocol,
                    p_max: self.pmax.clone(),
                    criterion: Criterion::Eru,
                    stop: StopSpec::default(),
                    seed: 0,
                    workers: 1,
                    prohibit_zero: false,
                    noise: Vec::new(),
                    grid: GridSpec::default(),
                }
            }
        };
        if let Some(p) = &self.protocol {
            cfg.protocol = p.clone();
        }
        if !self.pmax.is_empty() {
            cfg.p_max = self.pmax.clone();
        }
        if let Some(c) = self.criterion {
            cfg.criterion = c;
        }
        if let Some(s) = self.shots {
            cfg.stop.max_shots = s;
        }
        if let Some(e) = self.eta_max {
            cfg.stop.eta_max = e;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(g) = &self.grid {
            cfg.grid = g.clone();
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        cfg.prohibit_zero |= self.prohibit_zero;
        Ok(cfg)
    }
}

fn sample(cfg: &RunConfig) -> Result<DssRun> {
    let protocol = cfg.protocol()?;
    let run = dss_run(&protocol, &cfg.noise()?, cfg.dss())?;
    for w in &run.warnings {
        eprintln!("warning: {w}");
    }
    Ok(run)
}

fn bounds_text(b: &BoundsResult) -> String {
    [
        ("p_L", b.p_l),
        ("sigma_L", b.sigma_l),
        ("p_U", b.p_u),
        ("sigma_U", b.sigma_u),
        ("delta", b.delta),
        ("eta", b.eta),
        ("p_hat", b.p_hat),
    ]
    .iter()
    .map(|(k, v)| format!("{k} = {v:.11e}\n"))
    .collect()
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => Ok(std::io::stdout().write_all(text.as_bytes())?),
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => {
            let cfg = args.resolve()?;
            let run = sample(&cfg)?;
            let mut text = format!(
                "protocol {}\ncriterion {}\nseed {}\nshots {}\np_max {:?}\n",
                cfg.protocol, cfg.criterion, cfg.seed, run.shots, cfg.p_max
            );
            text += &run.tree.dump();
            text += &bounds_text(&run.bounds);
            emit(&args.out, &text)
        }
        Command::Curve(args) => {
            let cfg = args.resolve()?;
            let run = sample(&cfg)?;
            let rows = rescale_curve(&run.tree, &cfg.grid.points(&cfg.p_max)?)?;
            emit(&args.out, &emit_csv(&rows))
        }
        Command::Compare { sample, mc_shots } => {
            let cfg = sample.resolve()?;
            let protocol = cfg.protocol()?;
            let report = compare(&protocol, &cfg.noise()?, cfg.dss(), mc_shots)?;
            eprintln!(
                "dss p_hat {:.4e} eta {:.4e}; mc p_hat {:.4e} width {:.4e}",
                report.dss_final.p_hat,
                report.dss_final.eta,
                report.mc_p_hat,
                report.mc_width.last().copied().unwrap_or(f64::NAN)
            );
            emit(&sample.out, &emit_compare_csv(&report))
        }
        Command::AuditFt {
            protocol,
            budget,
            out,
        } => {
            let p = load_protocol(&protocol)?;
            let r = audit_ft(&p, budget)?;
            let mut text = format!(
                "protocol {}\nplacements {}\nleaves {}\nfailures {}\n",
                p.name(),
                r.placements,
                r.leaves,
                r.failures.len()
            );
            for f in &r.failures {
                text += &format!("  {f}\n");
            }
            for ((c, k), next) in &r.successors {
                let names: Vec<String> = next.iter().map(|n| format!("{n}")).collect();
                text += &format!("successors {c} faults={k}: {}\n", names.join(" "));
            }
            text += if r.passed() {
                "result PASS\n"
            } else {
                "result FAIL\n"
            };
            emit(&out, &text)?;
            if !r.passed() {
                std::process::exit(1);
            }
            Ok(())
        }
        Command::Oracle {
            protocol,
            pmax,
            weight,
            budget,
            out,
        } => {
            let p = load_protocol(&protocol)?;
            let noise = NoiseParams::from_rates(&pmax)?;
            let report = validate(&p, &noise, budget)?;
            for problem in &report.problems {
                eprintln!("warning: {problem}");
            }
            let rate = exhaustive_subset(&p, &noise, &weight, budget)?;
            emit(
                &out,
                &format!(
                    "protocol {}\nroot {}\nweight {:?}\np_fail = {rate:.15e}\n",
                    p.name(),
                    p.root(),
                    weight
                ),
            )
        }
    }
}
