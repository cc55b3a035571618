//! Tolerances for repeated randomized trials.

use statrs::distribution::{Binomial, DiscreteCDF};

use crate::error::{Error, Result};

/// Smallest `c` with `P[Binom(n, p0) > c] <= level`: the number of failures
/// that `n` independent trials with failure probability `p0` stay within,
/// except with probability `level`.
pub fn allowed_failures(n: u64, p0: f64, level: f64) -> Result<u64> {
    if !(0.0..=1.0).contains(&p0) || !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidProbability(format!("p0 = {p0}, level = {level}")));
    }
    let b = Binomial::new(p0, n).map_err(|e| Error::InvalidProbability(e.to_string()))?;
    Ok((0..=n).find(|&c| b.sf(c) <= level).unwrap_or(n))
}

/// Outcome of a trial-audited property.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialVerdict {
    pub trials: u64,
    pub failures: u64,
    pub p0: f64,
    pub allowed: u64,
}

impl TrialVerdict {
    pub fn new(trials: u64, failures: u64, p0: f64) -> Result<Self> {
        Ok(TrialVerdict {
            trials,
            failures,
            p0,
            allowed: allowed_failures(trials, p0, 0.01)?,
        })
    }

    pub fn passes(&self) -> bool {
        self.failures <= self.allowed
    }
}
