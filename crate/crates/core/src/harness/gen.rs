//! Seeded random instances at desk scale.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BitRow, DiscreteDistribution, Instance};
use crate::sampling::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub domain_size: usize,
    pub hypotheses: usize,
    pub k: usize,
    /// Atoms per distribution, at most `domain_size`.
    pub support: usize,
    /// When set, labels follow hypothesis 0 and are flipped with this
    /// probability; otherwise labels are fair coins.
    pub planted_noise: Option<f64>,
    pub seed: u64,
}

impl GenSpec {
    fn validate(&self) -> Result<()> {
        let n = self.domain_size;
        if n == 0 || self.hypotheses == 0 || self.k == 0 || self.support == 0 {
            return Err(Error::InvalidArgument("all sizes must be positive".into()));
        }
        if self.support > n {
            return Err(Error::InvalidArgument(format!("support {} exceeds domain size {n}", self.support)));
        }
        if n < 64 && self.hypotheses > 1usize << n {
            return Err(Error::InvalidArgument(format!(
                "{} distinct hypotheses do not exist on {n} points",
                self.hypotheses
            )));
        }
        if let Some(q) = self.planted_noise {
            if !(0.0..=1.0).contains(&q) {
                return Err(Error::InvalidArgument(format!("noise {q} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Distinct random rows; with planting, hypothesis 0 labels the data.
pub fn generate(spec: &GenSpec) -> Result<Instance> {
    spec.validate()?;
    let n = spec.domain_size;
    let root = RngStream::new(spec.seed, 0x6765_6e);
    let mut rng = root.derive(0);
    let mut seen = BTreeSet::new();
    let mut rows = Vec::with_capacity(spec.hypotheses);
    while rows.len() < spec.hypotheses {
        let bits: Vec<bool> = (0..n).map(|_| rng.uniform() < 0.5).collect();
        if seen.insert(bits.clone()) {
            rows.push(BitRow::from_bools(&bits));
        }
    }
    let mut dists = Vec::with_capacity(spec.k);
    for i in 0..spec.k {
        let mut rng = root.derive(i as u64 + 1);
        // partial Fisher-Yates for the support
        let mut points: Vec<usize> = (0..n).collect();
        for j in 0..spec.support {
            let r = j + (rng.uniform() * (n - j) as f64) as usize;
            points.swap(j, r.min(n - 1));
        }
        let mut support = points[..spec.support].to_vec();
        support.sort_unstable();
        let weights: Vec<f64> = support.iter().map(|_| 0.05 + rng.uniform()).collect();
        let weighted: Vec<((usize, bool), f64)> = support
            .iter()
            .zip(&weights)
            .map(|(&x, &w)| {
                let y = match spec.planted_noise {
                    Some(q) => rows[0].get(x) ^ (rng.uniform() < q),
                    None => rng.uniform() < 0.5,
                };
                ((x, y), w)
            })
            .collect();
        dists.push(DiscreteDistribution::from_weights(weighted)?);
    }
    Instance::new(n, rows, dists)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(seed: u64) -> GenSpec {
        GenSpec {
            domain_size: 12,
            hypotheses: 40,
            k: 3,
            support: 8,
            planted_noise: Some(0.1),
            seed,
        }
    }

    #[test]
    fn shape_and_determinism() {
        let a = generate(&spec(1)).unwrap();
        assert_eq!((a.domain_size(), a.num_hypotheses(), a.k()), (12, 40, 3));
        let distinct: BTreeSet<_> = a.hypotheses().iter().collect();
        assert_eq!(distinct.len(), 40);
        for d in a.distributions() {
            assert_eq!(d.atoms().len(), 8);
        }
        assert_eq!(a.to_file(), generate(&spec(1)).unwrap().to_file());
        assert_ne!(a.to_file(), generate(&spec(2)).unwrap().to_file());
    }

    #[test]
    fn noiseless_planting_is_realizable() {
        let inst = generate(&GenSpec {
            planted_noise: Some(0.0),
            ..spec(3)
        })
        .unwrap();
        assert_eq!(crate::oracle::brute_force_opt(&inst).unwrap().opt, 0.0);
    }

    #[test]
    fn rejects_impossible_specs() {
        assert!(generate(&GenSpec { hypotheses: 20, domain_size: 4, support: 4, ..spec(0) }).is_err());
        assert!(generate(&GenSpec { support: 13, ..spec(0) }).is_err());
        assert!(generate(&GenSpec { planted_noise: Some(2.0), ..spec(0) }).is_err());
    }
}
