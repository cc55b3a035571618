//! The fixed desk-scale instance suite and repeated-trial bookkeeping.

use crate::error::Result;
use crate::harness::gen::{generate, GenSpec};
use crate::model::Instance;
use crate::stats::TrialVerdict;

/// Distribution counts covered by the desk suite.
pub const DESK_KS: [usize; 4] = [1, 2, 3, 5];

/// Generator settings of the desk instance with `k` distributions. Labels
/// follow a planted hypothesis with 15% noise.
pub fn desk_spec(k: usize) -> GenSpec {
    let (domain_size, hypotheses, support) = match k {
        1 => (8, 16, 6),
        2 => (10, 24, 7),
        3 => (12, 40, 8),
        _ => (16, 64, 8),
    };
    GenSpec {
        domain_size,
        hypotheses,
        k,
        support,
        planted_noise: Some(0.15),
        seed: 1000 + k as u64,
    }
}

pub fn desk_instance(k: usize) -> Result<Instance> {
    generate(&desk_spec(k))
}

/// Runs `trial` on every seed and counts the seeds where it reports a
/// failure; `p0` is the per-trial failure probability the property allows.
pub fn count_failures<F>(seeds: std::ops::Range<u64>, p0: f64, mut trial: F) -> Result<TrialVerdict>
where
    F: FnMut(u64) -> Result<bool>,
{
    let n = seeds.end - seeds.start;
    let mut failures = 0;
    for seed in seeds {
        if trial(seed)? {
            failures += 1;
        }
    }
    TrialVerdict::new(n, failures, p0)
}
