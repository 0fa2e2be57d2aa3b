//! Rescaling a sampled tree over physical rates, CSV output and fits.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::noise::NoiseParams;
use crate::protocol::ProtocolGraph;
use crate::sampler::{dss_run, mc_run, DssConfig, McResult};
use crate::stats::wilson_interval;
use crate::tree::{BoundsResult, SampleTree};

#[derive(Clone, Debug, PartialEq)]
pub struct CurveRow {
    pub p: Vec<f64>,
    pub p_l: f64,
    pub sigma_l: f64,
    pub p_u: f64,
    pub sigma_u: f64,
    pub delta: f64,
    pub p_hat: f64,
}

impl CurveRow {
    pub fn new(p: Vec<f64>, b: &BoundsResult) -> Self {
        CurveRow {
            p,
            p_l: b.p_l,
            sigma_l: b.sigma_l,
            p_u: b.p_u,
            sigma_u: b.sigma_u,
            delta: b.delta,
            p_hat: b.p_hat,
        }
    }
}

/// Bounds of `tree` at every grid point, sorted by the first rate.
pub fn rescale_curve(tree: &SampleTree, grid: &[Vec<f64>]) -> Result<Vec<CurveRow>> {
    let mut rows = grid
        .iter()
        .map(|p| Ok(CurveRow::new(p.clone(), &tree.bounds(p)?)))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.p[0].total_cmp(&b.p[0]));
    Ok(rows)
}

/// `points` factors spaced evenly in log between `lo` and `hi` (inclusive).
pub fn log_factors(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo) || points == 0 {
        return Err(Error::Invalid(format!(
            "bad log range {lo}..{hi} with {points} points"
        )));
    }
    if points == 1 {
        return Ok(vec![hi]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect())
}

/// Grid along the ray through `p_max`, one point per scale factor.
pub fn ray_grid(p_max: &[f64], factors: &[f64]) -> Vec<Vec<f64>> {
    factors
        .iter()
        .map(|f| p_max.iter().map(|p| p * f).collect())
        .collect()
}

pub fn csv_header(k: usize) -> String {
    let mut h: Vec<String> = (1..=k).map(|i| format!("p_phys_{i}")).collect();
    h.extend(["p_L", "sigma_L", "p_U", "sigma_U", "delta", "p_hat"].map(String::from));
    h.join(",")
}

fn num(x: f64) -> String {
    format!("{x:.11e}")
}

/// CSV with 12 significant digits and LF line endings.
pub fn emit_csv(rows: &[CurveRow]) -> String {
    let k = rows.first().map_or(1, |r| r.p.len());
    let mut out = csv_header(k);
    out.push('\n');
    for r in rows {
        let vals: Vec<String> =
            r.p.iter()
                .chain(&[r.p_l, r.sigma_l, r.p_u, r.sigma_u, r.delta, r.p_hat])
                .map(|&x| num(x))
                .collect();
        out.push_str(&vals.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<CurveRow>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Parse {
        line: 1,
        msg: "missing header".into(),
    })?;
    let cols = header.split(',').count();
    if cols < 7 {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected at least 7 columns, got {cols}"),
        });
    }
    let k = cols - 6;
    if header != csv_header(k) {
        return Err(Error::Parse {
            line: 1,
            msg: format!("unexpected header `{header}`"),
        });
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.is_empty()) {
        let vals = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse {
                line: i + 2,
                msg: e.to_string(),
            })?;
        if vals.len() != cols {
            return Err(Error::Parse {
                line: i + 2,
                msg: format!("expected {cols} values, got {}", vals.len()),
            });
        }
        rows.push(CurveRow {
            p: vals[..k].to_vec(),
            p_l: vals[k],
            sigma_l: vals[k + 1],
            p_u: vals[k + 2],
            sigma_u: vals[k + 3],
            delta: vals[k + 4],
            p_hat: vals[k + 5],
        });
    }
    Ok(rows)
}

/// Least-squares slope of `ln p_L` against `ln p` (first rate) over the
/// rows with `window.0 <= p <= window.1`.
pub fn loglog_slope(rows: &[CurveRow], window: (f64, f64)) -> Result<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.p[0] >= window.0 && r.p[0] <= window.1)
        .map(|r| (r.p[0], r.p_l))
        .collect();
    if pts.len() < 3 {
        return Err(Error::Invalid(format!(
            "{} rows in window, need 3",
            pts.len()
        )));
    }
    if let Some((p, v)) = pts.iter().find(|(p, v)| *p <= 0.0 || *v <= 0.0) {
        return Err(Error::Invalid(format!("nonpositive value at p = {p}: {v}")));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.iter().map(|(p, v)| (p.ln(), v.ln())).unzip();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// Uncertainty per shot for a DSS run and a direct MC run at the same rate.
#[derive(Clone, Debug, PartialEq)]
pub struct CompareReport {
    /// `η` after each DSS shot.
    pub dss_eta: Vec<f64>,
    /// Wilson interval width after each MC shot.
    pub mc_width: Vec<f64>,
    pub dss_final: BoundsResult,
    pub mc_p_hat: f64,
}

/// Running `z = 1` Wilson widths of an MC outcome sequence.
pub fn mc_width_trace(mc: &McResult) -> Vec<f64> {
    let mut fails = 0;
    mc.outcomes
        .iter()
        .enumerate()
        .map(|(i, &f)| {
            fails += f as u64;
            let (lo, hi) = wilson_interval(fails, i as u64 + 1, 1.0).expect("n >= 1");
            hi - lo
        })
        .collect()
}

/// Runs DSS with `config` and direct MC for `mc_shots` at `config.p_max`
/// with the same seed and worker count.
pub fn compare(
    protocol: &ProtocolGraph,
    noise: &NoiseParams,
    mut config: DssConfig,
    mc_shots: u64,
) -> Result<CompareReport> {
    config.record_eta = true;
    let mc_noise = noise.with_rates(&config.p_max)?;
    let (seed, workers) = (config.seed, config.workers);
    let dss = dss_run(protocol, noise, config)?;
    let mc = mc_run(protocol, &mc_noise, mc_shots, seed, workers)?;
    Ok(CompareReport {
        dss_eta: dss.eta_trace,
        mc_width: mc_width_trace(&mc),
        dss_final: dss.bounds,
        mc_p_hat: mc.p_hat,
    })
}

/// CSV `shot,dss_eta,mc_width`; columns end where a trace ends.
pub fn emit_compare_csv(r: &CompareReport) -> String {
    let mut out = String::from("shot,dss_eta,mc_width\n");
    let n = r.dss_eta.len().max(r.mc_width.len());
    for i in 0..n {
        let cell = |v: Option<&f64>| v.map_or(String::new(), |&x| num(x));
        writeln!(
            out,
            "{},{},{}",
            i + 1,
            cell(r.dss_eta.get(i)),
            cell(r.mc_width.get(i))
        )
        .unwrap();
    }
    out
}
