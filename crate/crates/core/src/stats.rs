//! Binomial subset weights and binomial-proportion interval statistics.

use crate::error::{Error, Result};

/// `ln C(n, k)`, summed term by term for the smaller of `k` and `n - k`.
pub fn ln_choose(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (1..=k)
        .map(|i| ((n - k + i) as f64).ln() - (i as f64).ln())
        .sum()
}

/// `C(N, w) p^w (1-p)^(N-w)`, evaluated in log space.
pub fn binomial_factor(n: usize, w: usize, p: f64) -> Result<f64> {
    if w > n {
        return Err(Error::Invalid(format!("weight {w} exceeds {n} locations")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Invalid(format!("rate {p} outside [0, 1]")));
    }
    Ok(binomial_factor_unchecked(n, w, p))
}

pub(crate) fn binomial_factor_unchecked(n: usize, w: usize, p: f64) -> f64 {
    if p == 0.0 {
        return if w == 0 { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if w == n { 1.0 } else { 0.0 };
    }
    let ln = ln_choose(n, w) + w as f64 * p.ln() + (n - w) as f64 * (-p).ln_1p();
    if ln < -690.0 {
        0.0
    } else {
        ln.exp()
    }
}

/// Product of per-category binomial factors.
pub fn multi_binomial_factor(counts: &[usize], w: &[usize], p: &[f64]) -> Result<f64> {
    if counts.len() != w.len() || counts.len() != p.len() {
        return Err(Error::CategoryMismatch {
            expected: counts.len(),
            got: w.len().min(p.len()),
        });
    }
    let mut acc = 1.0;
    for k in 0..counts.len() {
        acc *= binomial_factor(counts[k], w[k], p[k])?;
    }
    Ok(acc)
}

/// `1 - Σ_{w ≤ w_max} A_w`, clamped to `[0, 1]`.
pub fn single_circuit_cutoff(n: usize, w_max: usize, p: f64) -> Result<f64> {
    if w_max >= n {
        return Ok(0.0);
    }
    let mut sum = NeumaierSum::default();
    for w in 0..=w_max {
        sum.add(binomial_factor(n, w, p)?);
    }
    Ok((1.0 - sum.value()).clamp(0.0, 1.0))
}

/// Counts behind a transition or failure rate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct RateEstimate {
    pub m: u64,
    pub n: u64,
    pub frozen_zero: bool,
}

impl RateEstimate {
    pub fn new(m: u64, n: u64) -> Result<Self> {
        if m > n {
            return Err(Error::Rate(format!("{m} successes out of {n} trials")));
        }
        Ok(RateEstimate {
            m,
            n,
            frozen_zero: false,
        })
    }

    pub fn frozen(n: u64) -> Self {
        RateEstimate {
            m: 0,
            n,
            frozen_zero: true,
        }
    }

    pub fn q(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.m as f64 / self.n as f64
        }
    }

    /// Rates after one more trial that succeeds (`q⁺`) or fails (`q⁻`).
    pub fn shifted(&self) -> (f64, f64) {
        let n1 = (self.n + 1) as f64;
        ((self.m + 1) as f64 / n1, self.m as f64 / n1)
    }
}

/// `(N q(1-q) + 1/4) / (1 + N)^2`, or 0 for a frozen rate.
pub fn wilson_variance(est: &RateEstimate) -> Result<f64> {
    if est.frozen_zero {
        return Ok(0.0);
    }
    if est.n == 0 {
        return Err(Error::Rate("no trials".into()));
    }
    Ok(wilson_variance_counts(est.m, est.n))
}

pub(crate) fn wilson_variance_counts(m: u64, n: u64) -> f64 {
    let nf = n as f64;
    let q = m as f64 / nf;
    (nf * q * (1.0 - q) + 0.25) / ((1.0 + nf) * (1.0 + nf))
}

/// Wilson score interval for `m` successes in `n` trials.
pub fn wilson_interval(m: u64, n: u64, z: f64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::Rate("no trials".into()));
    }
    if m > n {
        return Err(Error::Rate(format!("{m} successes out of {n} trials")));
    }
    let nf = n as f64;
    let p = m as f64 / nf;
    let z2 = z * z;
    let scale = 1.0 / (1.0 + z2 / nf);
    let center = p + z2 / (2.0 * nf);
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    let lo = (scale * (center - half)).clamp(0.0, 1.0);
    let hi = (scale * (center + half)).clamp(0.0, 1.0);
    Ok((lo, hi))
}

/// Normal-approximation standard error `sqrt(p(1-p)/N)`.
pub fn wald_error(p: f64, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Rate("no trials".into()));
    }
    Ok((p * (1.0 - p) / n as f64).max(0.0).sqrt())
}

/// Compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::default();
        for v in iter {
            s.add(v);
        }
        s
    }
}
