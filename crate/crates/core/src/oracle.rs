//! Exact brute-force ground truth: OPT and h*, VC dimension, and exact
//! heavy-subset losses.
//!
//! Tests use these as the reference; population mode uses the same exact
//! losses in place of samples.

use serde::{Deserialize, Serialize};

use crate::boost::MultiLearnerOracle;
use crate::error::{Error, Result};
use crate::filter::{lex_less, mask_to_subset, HeavySubset, K_EXHAUSTIVE};
use crate::model::{Instance, LearningContext, LossTable, MixtureClassifier, MixtureStrategy};
use crate::sampling::{BudgetLedger, RngStream};

/// Largest domain the exhaustive shattering search accepts.
pub const MAX_VC_DOMAIN: usize = 24;

/// Upper limit on `|H| * k * atoms` for brute-force OPT.
pub const MAX_BRUTE_FORCE_WORK: usize = 500_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub opt: f64,
    pub argmin: usize,
    pub per_hypothesis_max_loss: Vec<f64>,
    pub vc_dimension: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptSolution {
    pub opt: f64,
    pub argmin: usize,
    pub per_hypothesis_max_loss: Vec<f64>,
}

/// `min_h max_i l_{D_i}(h)` by enumeration; ties go to the lowest index.
pub fn brute_force_opt(inst: &Instance) -> Result<OptSolution> {
    let atoms: usize = inst.distributions().iter().map(|d| d.atoms().len()).sum();
    let work = inst.num_hypotheses().saturating_mul(atoms);
    if work > MAX_BRUTE_FORCE_WORK {
        return Err(Error::TooLarge {
            what: "brute-force OPT",
            detail: format!("|H| * atoms = {work} exceeds {MAX_BRUTE_FORCE_WORK}"),
        });
    }
    let table = LossTable::compute(inst);
    Ok(opt_over(&table, &inst.all_hypotheses()))
}

/// Minimax solution restricted to `subset` (nonempty).
pub fn opt_over(table: &LossTable, subset: &[usize]) -> OptSolution {
    let per: Vec<f64> = subset.iter().map(|&h| table.max_loss(h)).collect();
    let mut best = 0;
    for (j, &v) in per.iter().enumerate() {
        if v < per[best] {
            best = j;
        }
    }
    OptSolution {
        opt: per[best],
        argmin: subset[best],
        per_hypothesis_max_loss: per,
    }
}

/// Largest `m` such that some `m` points are shattered. Builds shattered
/// sets level by level; a set is only tried when the set minus its largest
/// point was shattered, and the search stops at the first empty level.
pub fn vc_dimension(inst: &Instance) -> Result<usize> {
    let n = inst.domain_size();
    if n > MAX_VC_DOMAIN {
        return Err(Error::TooLarge {
            what: "exhaustive VC dimension",
            detail: format!("domain size {n} exceeds {MAX_VC_DOMAIN}; supply d explicitly"),
        });
    }
    let rows: Vec<u64> = inst.hypotheses().iter().map(|r| r.words()[0]).collect();
    let max_possible = usize::BITS as usize - 1 - inst.num_hypotheses().leading_zeros() as usize;
    // (mask, largest point)
    let mut level: Vec<(u64, usize)> = vec![(0, 0)];
    let mut d = 0;
    let mut seen = Vec::new();
    for m in 1..=max_possible.min(n) {
        let mut next = Vec::new();
        for &(mask, top) in &level {
            let start = if m == 1 { 0 } else { top + 1 };
            for x in start..n {
                let cand = mask | (1u64 << x);
                let points: Vec<usize> = (0..n).filter(|&p| cand >> p & 1 == 1).collect();
                seen.clear();
                seen.resize(1usize << m, false);
                let mut distinct = 0;
                for &r in &rows {
                    let pattern = points.iter().enumerate().fold(0usize, |acc, (j, &p)| acc | ((r >> p & 1) as usize) << j);
                    if !seen[pattern] {
                        seen[pattern] = true;
                        distinct += 1;
                        if distinct == seen.len() {
                            break;
                        }
                    }
                }
                if distinct == seen.len() {
                    next.push((cand, x));
                }
            }
        }
        if next.is_empty() {
            break;
        }
        d = m;
        level = next;
    }
    Ok(d)
}

pub fn ground_truth(inst: &Instance) -> Result<GroundTruth> {
    let sol = brute_force_opt(inst)?;
    Ok(GroundTruth {
        opt: sol.opt,
        argmin: sol.argmin,
        per_hypothesis_max_loss: sol.per_hypothesis_max_loss,
        vc_dimension: vc_dimension(inst)?,
    })
}

/// Maximizes `sum_I p(i) l_i / sum_I p(i)` over subsets with `sum_I p(i) >= 1/2`.
/// Sums run in ascending index order; ties go to the lexicographically
/// smallest subset.
pub fn heavy_subset_max(weights: &[f64], losses: &[f64]) -> Result<HeavySubset> {
    let k = weights.len();
    if k > K_EXHAUSTIVE {
        return Err(Error::TooManyDistributions {
            k,
            limit: K_EXHAUSTIVE,
        });
    }
    if losses.len() != k {
        return Err(Error::LengthMismatch {
            expected: k,
            got: losses.len(),
        });
    }
    let mut best: Option<(u32, f64)> = None;
    for mask in 1u32..(1u32 << k) {
        let mut w = 0.0;
        let mut num = 0.0;
        for i in 0..k {
            if mask >> i & 1 == 1 {
                w += weights[i];
                num += weights[i] * losses[i];
            }
        }
        if w < 0.5 {
            continue;
        }
        let ratio = num / w;
        best = match best {
            None => Some((mask, ratio)),
            Some((bm, br)) if ratio > br || (ratio == br && lex_less(mask, bm)) => Some((mask, ratio)),
            keep => keep,
        };
    }
    let (mask, ratio) = best.ok_or_else(|| Error::InvalidProbability("weights sum below 1/2".into()))?;
    Ok(HeavySubset {
        subset: mask_to_subset(mask),
        ratio,
    })
}

/// Exact worst heavy sub-mixture loss of hypothesis `h` under strategy `p`.
pub fn exact_heavy_subset_max(inst: &Instance, p: &MixtureStrategy, h: usize) -> Result<HeavySubset> {
    inst.check_hypothesis(h)?;
    if p.len() != inst.k() {
        return Err(Error::LengthMismatch {
            expected: inst.k(),
            got: p.len(),
        });
    }
    let losses: Vec<f64> = (0..inst.k())
        .map(|i| crate::model::population_loss(inst, i, &MixtureClassifier::point_mass(h)))
        .collect::<Result<_>>()?;
    heavy_subset_max(p.as_slice(), &losses)
}

/// Returns the survivor with the smallest exact max-loss. With `h*` among
/// the survivors its max-loss is at most OPT, so it satisfies any declared
/// `alpha >= 0`. Draws no samples.
#[derive(Debug, Clone, Copy)]
pub struct ExactMinimaxOracle {
    pub alpha: f64,
}

impl MultiLearnerOracle for ExactMinimaxOracle {
    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn learn(
        &self,
        ctx: &LearningContext,
        surviving: &[usize],
        _opt_prime: f64,
        _rng: &mut RngStream,
        _ledger: &mut BudgetLedger,
    ) -> Result<MixtureClassifier> {
        if surviving.is_empty() {
            return Err(Error::EmptySurvivors {
                round: 0,
                opt_prime: _opt_prime,
            });
        }
        Ok(MixtureClassifier::point_mass(opt_over(&ctx.losses, surviving).argmin))
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;
    use crate::model::{Atom, BitRow, DiscreteDistribution};

    fn rows_instance(rows: Vec<Vec<bool>>, dists: Vec<Vec<Atom>>) -> Instance {
        let n = rows[0].len();
        Instance::new(
            n,
            rows.iter().map(|r| BitRow::from_bools(r)).collect(),
            dists.into_iter().map(|a| DiscreteDistribution::new(a).unwrap()).collect(),
        )
        .unwrap()
    }

    fn uniform_dist(n: usize) -> Vec<Atom> {
        (0..n).map(|x| Atom { x, y: false, p: 1.0 / n as f64 }).collect()
    }

    fn all_functions(n: usize) -> Vec<Vec<bool>> {
        (0..1u32 << n).map(|m| (0..n).map(|x| m >> x & 1 == 1).collect()).collect()
    }

    fn thresholds(n: usize) -> Vec<Vec<bool>> {
        (0..=n).map(|j| (0..n).map(|x| x >= j).collect()).collect()
    }

    /// Independent shattering check: every subset, every pattern.
    fn vc_by_definition(rows: &[Vec<bool>]) -> usize {
        let n = rows[0].len();
        let mut best = 0;
        for mask in 0u32..(1 << n) {
            let pts: Vec<usize> = (0..n).filter(|x| mask >> x & 1 == 1).collect();
            let patterns: HashSet<Vec<bool>> = rows.iter().map(|r| pts.iter().map(|&x| r[x]).collect()).collect();
            if patterns.len() == 1 << pts.len() {
                best = best.max(pts.len());
            }
        }
        best
    }

    #[test]
    fn vc_of_full_class_is_domain_size() {
        for n in 1..=5 {
            let inst = rows_instance(all_functions(n), vec![uniform_dist(n)]);
            assert_eq!(vc_dimension(&inst).unwrap(), n);
        }
    }

    #[test]
    fn vc_of_singleton_is_zero() {
        let inst = rows_instance(vec![vec![false; 4]], vec![uniform_dist(4)]);
        assert_eq!(vc_dimension(&inst).unwrap(), 0);
    }

    #[test]
    fn vc_of_thresholds_is_one() {
        let rows = thresholds(6);
        assert_eq!(vc_by_definition(&rows), 1);
        let inst = rows_instance(rows, vec![uniform_dist(6)]);
        assert_eq!(vc_dimension(&inst).unwrap(), 1);
    }

    #[test]
    fn vc_matches_definition_on_random_classes() {
        let mut rng = RngStream::new(77, 0);
        for _ in 0..40 {
            let n = 3 + (rng.uniform() * 5.0) as usize;
            let count = 2 + (rng.uniform() * 20.0) as usize;
            let mut set = HashSet::new();
            while set.len() < count.min(1 << n) {
                set.insert((0..n).map(|_| rng.uniform() < 0.5).collect::<Vec<bool>>());
            }
            let rows: Vec<_> = set.into_iter().collect();
            let expected = vc_by_definition(&rows);
            let inst = rows_instance(rows, vec![uniform_dist(n)]);
            assert_eq!(vc_dimension(&inst).unwrap(), expected);
        }
    }

    #[test]
    fn vc_rejects_large_domain() {
        let inst = rows_instance(vec![vec![false; 30]], vec![uniform_dist(30)]);
        assert!(matches!(vc_dimension(&inst), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn realizable_instance_has_zero_opt() {
        let target = vec![true, false, true, true];
        let atoms = |w: [f64; 4]| -> Vec<Atom> {
            (0..4).map(|x| Atom { x, y: target[x], p: w[x] }).collect()
        };
        let inst = rows_instance(
            vec![vec![false; 4], target.clone(), vec![true; 4]],
            vec![atoms([0.25; 4]), atoms([0.1, 0.2, 0.3, 0.4])],
        );
        let sol = brute_force_opt(&inst).unwrap();
        assert_eq!(sol.opt, 0.0);
        assert_eq!(sol.argmin, 1);
    }

    #[test]
    fn two_by_two_loss_table() {
        // x0 carries label 1 with mass a, x1 label 0 with mass 1-a. h1 = all-zero,
        // h2 = all-one: l(h1) = a, l(h2) = 1 - a. Pick masses giving the table
        // h1: (0.2, 0.4), h2: (0.8, 0.6); then a third hypothesis shows ties.
        let d = |a: f64| vec![Atom { x: 0, y: true, p: a }, Atom { x: 1, y: false, p: 1.0 - a }];
        let inst = rows_instance(
            vec![vec![false, false], vec![true, true]],
            vec![d(0.2), d(0.4)],
        );
        let sol = brute_force_opt(&inst).unwrap();
        assert!((sol.opt - 0.4).abs() < 1e-15);
        assert_eq!(sol.argmin, 0);
    }

    #[test]
    fn spec_loss_table_example() {
        // per-distribution losses h1: (0.2, 0.4), h2: (0.3, 0.1)
        let table_inst = rows_instance(
            vec![vec![false, false, false, false], vec![true, false, true, false]],
            vec![
                vec![
                    Atom { x: 0, y: true, p: 0.2 },
                    Atom { x: 2, y: false, p: 0.3 },
                    Atom { x: 3, y: false, p: 0.5 },
                ],
                vec![
                    Atom { x: 1, y: true, p: 0.1 },
                    Atom { x: 2, y: true, p: 0.3 },
                    Atom { x: 3, y: false, p: 0.6 },
                ],
            ],
        );
        let t = LossTable::compute(&table_inst);
        assert!((t.get(0, 0) - 0.2).abs() < 1e-15 && (t.get(0, 1) - 0.4).abs() < 1e-15);
        assert!((t.get(1, 0) - 0.3).abs() < 1e-15 && (t.get(1, 1) - 0.1).abs() < 1e-15);
        let sol = brute_force_opt(&table_inst).unwrap();
        assert!((sol.opt - 0.3).abs() < 1e-15);
        assert_eq!(sol.argmin, 1);
    }

    #[test]
    fn heavy_subset_examples() {
        let r = heavy_subset_max(&[0.5, 0.5], &[0.9, 0.1]).unwrap();
        assert_eq!(r.subset, vec![0]);
        assert!((r.ratio - 0.9).abs() < 1e-15);

        let w = [0.2, 0.3, 0.5];
        let r = heavy_subset_max(&w, &[0.4, 0.4, 0.4]).unwrap();
        assert!((r.ratio - 0.4).abs() < 1e-15);
        assert!(r.subset.iter().map(|&i| w[i]).sum::<f64>() >= 0.5);

        // {0}, {1} and {0, 1} tie exactly; a prefix sorts first
        let r = heavy_subset_max(&[0.5, 0.5], &[0.25, 0.25]).unwrap();
        assert_eq!(r.subset, vec![0]);

        let r = heavy_subset_max(&[1.0], &[0.37]).unwrap();
        assert_eq!((r.subset, r.ratio), (vec![0], 0.37));
    }

    #[test]
    fn full_set_reduction() {
        let mut rng = RngStream::new(5, 5);
        for _ in 0..200 {
            let k = 1 + (rng.uniform() * 6.0) as usize;
            let raw: Vec<f64> = (0..k).map(|_| rng.uniform() + 1e-3).collect();
            let s: f64 = raw.iter().sum();
            let w: Vec<f64> = raw.iter().map(|v| v / s).collect();
            let l: Vec<f64> = (0..k).map(|_| rng.uniform()).collect();
            let r = heavy_subset_max(&w, &l).unwrap();
            let full: f64 = w.iter().zip(&l).map(|(a, b)| a * b).sum::<f64>() / w.iter().sum::<f64>();
            assert!(r.ratio >= full - 1e-12);
        }
    }
}
