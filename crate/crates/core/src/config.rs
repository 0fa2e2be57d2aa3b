//! Run configuration files.
//!
//! TOML is the native format; text whose first non-blank character is `{`
//! is read as JSON with the same keys.
//!
//! ```toml
//! protocol = "steane-det-0"      # built-in name or path to a protocol file
//! p_max = [1e-3, 1e-2]           # one rate per noise category
//! criterion = "binomial"         # or "eru"
//! seed = 7
//! workers = 1
//! prohibit_zero = false
//!
//! [stop]
//! max_shots = 10000
//! eta_max = 0.0                  # 0 disables the uncertainty target
//!
//! [[noise]]                      # optional; default partition otherwise
//! name = "p1"
//! kinds = ["single_qubit_gate", "init", "measurement"]
//!
//! [[noise]]
//! name = "p2"
//! kinds = ["two_qubit_gate"]
//!
//! [grid]                         # scale factors along the ray through p_max
//! from = 0.01
//! to = 1.0
//! points = 11
//! ```
//!
//! An explicit grid is written `grid = { rates = [[1e-4, 1e-3], [1e-3, 1e-2]] }`.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::{log_factors, ray_grid};
use crate::error::{Error, Result};
use crate::library;
use crate::noise::{Category, NoiseParams};
use crate::protocol::{parse_protocol, ProtocolGraph};
use crate::sampler::{Criterion, DssConfig, StopRule};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategorySpec {
    pub name: String,
    pub kinds: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    /// `points` factors log-spaced from `from` to `to`, applied to `p_max`.
    Ray {
        from: f64,
        to: f64,
        points: usize,
    },
    Explicit {
        rates: Vec<Vec<f64>>,
    },
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Ray {
            from: 1e-2,
            to: 1.0,
            points: 11,
        }
    }
}

impl GridSpec {
    pub fn points(&self, p_max: &[f64]) -> Result<Vec<Vec<f64>>> {
        match self {
            GridSpec::Ray { from, to, points } => {
                Ok(ray_grid(p_max, &log_factors(*from, *to, *points)?))
            }
            GridSpec::Explicit { rates } => {
                if let Some(r) = rates.iter().find(|r| r.len() != p_max.len()) {
                    return Err(Error::CategoryMismatch {
                        expected: p_max.len(),
                        got: r.len(),
                    });
                }
                Ok(rates.clone())
            }
        }
    }
}

/// `FROM:TO:POINTS` for a ray, or `;`-separated rate vectors with `,`
/// between categories.
impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |m: String| Error::Invalid(format!("grid `{s}`: {m}"));
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() == 3 {
            let f = |x: &str| x.trim().parse::<f64>().map_err(|e| bad(e.to_string()));
            return Ok(GridSpec::Ray {
                from: f(parts[0])?,
                to: f(parts[1])?,
                points: parts[2]
                    .trim()
                    .parse()
                    .map_err(|e: std::num::ParseIntError| bad(e.to_string()))?,
            });
        }
        let rates = s
            .split(';')
            .filter(|p| !p.trim().is_empty())
            .map(|p| {
                p.split(',')
                    .map(|x| x.trim().parse::<f64>().map_err(|e| bad(e.to_string())))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        if rates.is_empty() {
            return Err(bad("no points".into()));
        }
        Ok(GridSpec::Explicit { rates })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopSpec {
    #[serde(default = "default_shots")]
    pub max_shots: u64,
    #[serde(default)]
    pub eta_max: f64,
}

impl Default for StopSpec {
    fn default() -> Self {
        StopSpec {
            max_shots: default_shots(),
            eta_max: 0.0,
        }
    }
}

fn default_shots() -> u64 {
    1000
}

fn default_workers() -> usize {
    1
}

fn default_criterion() -> Criterion {
    Criterion::Eru
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub protocol: String,
    pub p_max: Vec<f64>,
    #[serde(default = "default_criterion")]
    pub criterion: Criterion,
    #[serde(default)]
    pub stop: StopSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub prohibit_zero: bool,
    #[serde(default)]
    pub noise: Vec<CategorySpec>,
    #[serde(default)]
    pub grid: GridSpec,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::Parse {
                line: e.line(),
                msg: e.to_string(),
            })?
        } else {
            toml::from_str(text).map_err(|e| Error::Parse {
                line: e
                    .span()
                    .map_or(0, |s| text[..s.start].lines().count().max(1)),
                msg: e.message().to_string(),
            })?
        };
        cfg.noise()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read(path)?)
    }

    pub fn noise(&self) -> Result<NoiseParams> {
        if self.noise.is_empty() {
            return NoiseParams::from_rates(&self.p_max);
        }
        if self.noise.len() != self.p_max.len() {
            return Err(Error::CategoryMismatch {
                expected: self.noise.len(),
                got: self.p_max.len(),
            });
        }
        NoiseParams::new(
            self.noise
                .iter()
                .zip(&self.p_max)
                .map(|(c, &rate)| Category {
                    name: c.name.clone(),
                    kinds: c.kinds.clone(),
                    rate,
                })
                .collect(),
        )
    }

    pub fn protocol(&self) -> Result<ProtocolGraph> {
        load_protocol(&self.protocol)
    }

    pub fn dss(&self) -> DssConfig {
        DssConfig {
            p_max: self.p_max.clone(),
            criterion: self.criterion,
            stop: StopRule {
                max_shots: self.stop.max_shots,
                eta_max: self.stop.eta_max,
            },
            seed: self.seed,
            prohibit_zero: self.prohibit_zero,
            workers: self.workers,
            record_eta: false,
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

/// A built-in protocol by name, otherwise a protocol file at that path.
pub fn load_protocol(name_or_path: &str) -> Result<ProtocolGraph> {
    if library::NAMES.contains(&name_or_path) {
        return library::by_name(name_or_path);
    }
    let path = Path::new(name_or_path);
    if !path.exists() {
        return library::by_name(name_or_path);
    }
    parse_protocol(&read(path)?)
}
