//! Removal of cover representatives that do badly on some heavy
//! sub-mixture of the current strategy.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::cover::{log_factor, Cover};
use crate::error::{Error, Result};
use crate::model::{LearningContext, MixtureStrategy};
use crate::oracle::heavy_subset_max;
use crate::sampling::{draw_mixture_set, BudgetLedger, Mode, Phase, RngStream, SampleSet, SamplerKind, TaggedSample};

/// Largest `k` for which heavy subsets are enumerated.
pub const K_EXHAUSTIVE: usize = 16;

/// `m2 = ceil(c2 * (k + d) * ln(max(kd / (eps delta), e)) / eps^2)`.
pub fn filter_sample_size(c2: f64, d: usize, k: usize, eps: f64, delta: f64) -> u64 {
    ((c2 * (k + d) as f64 * log_factor(k, d, eps, delta) / (eps * eps)).ceil() as u64).max(1)
}

/// Per-distribution summary of `S_2` for one hypothesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistStats {
    pub weight: f64,
    pub wrong: u64,
    pub total: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeavySubset {
    pub subset: Vec<usize>,
    pub ratio: f64,
}

pub fn mask_to_subset(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask >> i & 1 == 1).collect()
}

/// Lexicographic order of the ascending index lists encoded by two masks.
pub(crate) fn lex_less(a: u32, b: u32) -> bool {
    if a == b {
        return false;
    }
    let j = (a ^ b).trailing_zeros();
    let above = |m: u32| j < 31 && m >> (j + 1) != 0;
    if a >> j & 1 == 1 {
        // a has j where b continues with something larger, or b ended
        above(b)
    } else {
        !above(a)
    }
}

/// Empirical loss of `h` on the samples drawn from distributions in `subset`.
/// `None` when no such sample exists.
pub fn subset_loss_ratio(
    inst: &crate::model::Instance,
    samples: &[TaggedSample],
    subset: &[usize],
    h: usize,
) -> Result<Option<f64>> {
    inst.check_hypothesis(h)?;
    let row = inst.hypothesis(h);
    let mut wrong = 0u64;
    let mut total = 0u64;
    for s in samples {
        let source = s.source.ok_or_else(|| Error::InvalidArgument("sample without provenance".into()))?;
        if subset.contains(&source) {
            total += 1;
            wrong += (row.get(s.x) != s.y) as u64;
        }
    }
    Ok((total > 0).then(|| wrong as f64 / total as f64))
}

fn check_stats(stats: &[DistStats]) -> Result<()> {
    if stats.len() > K_EXHAUSTIVE {
        return Err(Error::TooManyDistributions {
            k: stats.len(),
            limit: K_EXHAUSTIVE,
        });
    }
    if let Some(s) = stats.iter().find(|s| s.wrong > s.total) {
        return Err(Error::InvalidArgument(format!(
            "wrong count {} exceeds total {}",
            s.wrong, s.total
        )));
    }
    Ok(())
}

/// `a/b > c/d` for nonnegative integers with positive denominators.
fn ratio_greater(a: u64, b: u64, c: u64, d: u64) -> bool {
    (a as u128) * (d as u128) > (c as u128) * (b as u128)
}

fn ratio_equal(a: u64, b: u64, c: u64, d: u64) -> bool {
    (a as u128) * (d as u128) == (c as u128) * (b as u128)
}

struct Best {
    mask: u32,
    wrong: u64,
    total: u64,
}

fn consider(best: &mut Option<Best>, mask: u32, wrong: u64, total: u64) {
    let replace = match best {
        None => true,
        Some(b) => {
            ratio_greater(wrong, total, b.wrong, b.total)
                || (ratio_equal(wrong, total, b.wrong, b.total) && lex_less(mask, b.mask))
        }
    };
    if replace {
        *best = Some(Best { mask, wrong, total });
    }
}

fn finish(best: Option<Best>) -> Option<HeavySubset> {
    best.map(|b| HeavySubset {
        subset: mask_to_subset(b.mask),
        ratio: b.wrong as f64 / b.total as f64,
    })
}

/// Worst pooled empirical loss over subsets with weight at least 1/2 and at
/// least one sample. Weights are summed in ascending index order; ratios are
/// compared exactly; ties go to the lexicographically smallest subset.
/// Plain enumeration, `O(k 2^k)`.
pub fn worst_heavy_subset(stats: &[DistStats]) -> Result<Option<HeavySubset>> {
    check_stats(stats)?;
    let k = stats.len();
    let mut best = None;
    for mask in 1u32..(1u32 << k) {
        let mut w = 0.0;
        let mut wrong = 0;
        let mut total = 0;
        for (i, s) in stats.iter().enumerate() {
            if mask >> i & 1 == 1 {
                w += s.weight;
                wrong += s.wrong;
                total += s.total;
            }
        }
        if w >= 0.5 && total > 0 {
            consider(&mut best, mask, wrong, total);
        }
    }
    Ok(finish(best))
}

/// Same result as [`worst_heavy_subset`] in `O(2^k)`: each subset extends the
/// subset without its highest index, which reproduces the ascending-order
/// weight sum bit for bit.
pub fn worst_heavy_subset_fast(stats: &[DistStats]) -> Result<Option<HeavySubset>> {
    thread_local! {
        // (weight, wrong, total) per mask, reused across calls
        static SCRATCH: RefCell<Vec<(f64, u64, u64)>> = const { RefCell::new(Vec::new()) };
    }
    check_stats(stats)?;
    let size = 1usize << stats.len();
    SCRATCH.with_borrow_mut(|acc| {
        if acc.len() < size {
            acc.resize(size, (0.0, 0, 0));
        }
        // every other entry is written before it is read
        acc[0] = (0.0, 0, 0);
        let mut best = None;
        for mask in 1..size {
            let top = usize::BITS - 1 - mask.leading_zeros();
            let (w, wrong, total) = acc[mask & !(1 << top)];
            let s = &stats[top as usize];
            let cur = (w + s.weight, wrong + s.wrong, total + s.total);
            acc[mask] = cur;
            if cur.0 >= 0.5 && cur.2 > 0 {
                consider(&mut best, mask as u32, cur.1, cur.2);
            }
        }
        Ok(finish(best))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemovedWitness {
    pub representative: usize,
    pub group_size: usize,
    pub subset: Vec<usize>,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivorSet {
    /// Ascending hypothesis indices.
    pub surviving: Vec<usize>,
    pub removed: Vec<RemovedWitness>,
}

fn stats_for(set: &SampleSet, support: &[usize], row: &crate::model::BitRow, p: &MixtureStrategy, out: &mut Vec<DistStats>) {
    out.clear();
    out.extend((0..set.k()).map(|s| DistStats {
        weight: p[s],
        wrong: support.iter().map(|&x| set.count(s, x, !row.get(x))).sum(),
        total: set.source_total(s),
    }));
}

/// Draws `S_2` from the `p`-mixture and removes the whole projection group
/// of every representative whose worst heavy-subset loss reaches
/// `opt_prime + 8 eps`. Population mode uses exact losses and draws nothing.
#[allow(clippy::too_many_arguments)]
pub fn filter(
    ctx: &LearningContext,
    cover: &Cover,
    p: &MixtureStrategy,
    opt_prime: f64,
    eps: f64,
    m2: u64,
    mode: Mode,
    sampler: SamplerKind,
    rng: &mut RngStream,
    ledger: &mut BudgetLedger,
) -> Result<SurvivorSet> {
    let inst = ctx.inst;
    inst.check_strategy(p)?;
    if inst.k() > K_EXHAUSTIVE {
        return Err(Error::TooManyDistributions {
            k: inst.k(),
            limit: K_EXHAUSTIVE,
        });
    }
    let threshold = opt_prime + 8.0 * eps;
    let mut worst: Box<dyn FnMut(usize) -> Result<Option<HeavySubset>>> = match mode {
        Mode::Population => Box::new(|h| heavy_subset_max(p.as_slice(), ctx.losses.row(h)).map(Some)),
        Mode::Sampled => {
            if m2 == 0 {
                return Err(Error::InvalidArgument("filter sample size must be at least 1".into()));
            }
            let set = draw_mixture_set(inst, p, m2, sampler, rng, ledger, Phase::Filter)?;
            let support = set.support();
            let mut stats = Vec::with_capacity(inst.k());
            Box::new(move |h| {
                stats_for(&set, &support, inst.hypothesis(h), p, &mut stats);
                worst_heavy_subset_fast(&stats)
            })
        }
    };
    let mut surviving = Vec::new();
    let mut removed = Vec::new();
    for group in &cover.groups {
        let rep = group.representative();
        match worst(rep)? {
            Some(w) if w.ratio >= threshold => removed.push(RemovedWitness {
                representative: rep,
                group_size: group.members.len(),
                subset: w.subset,
                ratio: w.ratio,
            }),
            _ => surviving.extend_from_slice(&group.members),
        }
    }
    surviving.sort_unstable();
    Ok(SurvivorSet { surviving, removed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::construct_cover;
    use crate::model::{Atom, BitRow, DiscreteDistribution, Instance};
    use proptest::prelude::*;

    fn st(weight: f64, wrong: u64, total: u64) -> DistStats {
        DistStats { weight, wrong, total }
    }

    #[test]
    fn single_distribution() {
        let r = worst_heavy_subset(&[st(1.0, 3, 10)]).unwrap().unwrap();
        assert_eq!(r.subset, vec![0]);
        assert!((r.ratio - 0.3).abs() < 1e-15);
    }

    #[test]
    fn bad_half_is_found() {
        let r = worst_heavy_subset(&[st(0.5, 9, 10), st(0.5, 1, 10)]).unwrap().unwrap();
        assert_eq!(r.subset, vec![0]);
        assert!((r.ratio - 0.9).abs() < 1e-15);
    }

    #[test]
    fn light_subset_is_ignored() {
        // {0} alone has ratio 1 but weight 0.4; the pooled pair is the worst heavy subset
        let r = worst_heavy_subset(&[st(0.4, 10, 10), st(0.6, 0, 10)]).unwrap().unwrap();
        assert_eq!(r.subset, vec![0, 1]);
        assert_eq!(r.ratio, 0.5);
    }

    #[test]
    fn subsets_without_samples_are_skipped() {
        // {0} has no samples; {1} and {0, 1} tie at 1/2, the smaller list wins
        let r = worst_heavy_subset(&[st(0.5, 0, 0), st(0.5, 2, 4)]).unwrap().unwrap();
        assert_eq!(r.subset, vec![0, 1]);
        assert_eq!(r.ratio, 0.5);
        assert!(worst_heavy_subset(&[st(1.0, 0, 0)]).unwrap().is_none());
    }

    #[test]
    fn too_many_distributions() {
        let stats = vec![st(1.0 / 17.0, 0, 1); 17];
        assert!(matches!(worst_heavy_subset(&stats), Err(Error::TooManyDistributions { .. })));
        assert!(matches!(worst_heavy_subset_fast(&stats), Err(Error::TooManyDistributions { .. })));
    }

    #[test]
    fn lex_order_on_masks() {
        let all: Vec<u32> = (1..64).collect();
        for &a in &all {
            for &b in &all {
                assert_eq!(lex_less(a, b), mask_to_subset(a) < mask_to_subset(b), "{a:b} {b:b}");
            }
        }
    }

    fn arb_stats() -> impl Strategy<Value = Vec<DistStats>> {
        prop::collection::vec((1u32..100, 0u64..20, 0u64..20), 1..=7).prop_map(|v| {
            let total_w: u32 = v.iter().map(|t| t.0).sum();
            v.into_iter()
                .map(|(w, a, b)| st(w as f64 / total_w as f64, a.min(a + b), a + b))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn fast_matches_exhaustive(stats in arb_stats()) {
            prop_assert_eq!(worst_heavy_subset(&stats).unwrap(), worst_heavy_subset_fast(&stats).unwrap());
        }

        #[test]
        fn worst_is_at_least_full_pool(stats in arb_stats()) {
            let wrong: u64 = stats.iter().map(|s| s.wrong).sum();
            let total: u64 = stats.iter().map(|s| s.total).sum();
            if let Some(r) = worst_heavy_subset(&stats).unwrap() {
                prop_assert!(r.ratio + 1e-12 >= wrong as f64 / total as f64);
            } else {
                prop_assert_eq!(total, 0);
            }
        }
    }

    fn two_point_instance() -> Instance {
        // h0 errs everywhere on D0 and nowhere on D1; h1 is perfect.
        let d0 = DiscreteDistribution::new(vec![Atom { x: 0, y: true, p: 1.0 }]).unwrap();
        let d1 = DiscreteDistribution::new(vec![Atom { x: 1, y: false, p: 1.0 }]).unwrap();
        Instance::new(
            2,
            vec![BitRow::from_bools(&[false, false]), BitRow::from_bools(&[true, false])],
            vec![d0, d1],
        )
        .unwrap()
    }

    #[test]
    fn population_filter_removes_bad_hypothesis() {
        let inst = two_point_instance();
        let ctx = LearningContext::new(&inst, 1);
        let p = MixtureStrategy::uniform(2);
        let mut rng = RngStream::new(1, 1);
        let mut ledger = BudgetLedger::new(2);
        let cover = construct_cover(&inst, &[0, 1], &p, 1, Mode::Population, SamplerKind::Multinomial, &mut rng, &mut ledger).unwrap();
        let out = filter(&ctx, &cover, &p, 0.1, 0.01, 1, Mode::Population, SamplerKind::Multinomial, &mut rng, &mut ledger).unwrap();
        assert_eq!(out.surviving, vec![1]);
        assert_eq!(out.removed.len(), 1);
        assert_eq!(out.removed[0].representative, 0);
        assert_eq!(out.removed[0].subset, vec![0]);
        assert_eq!(ledger.total, 0);
    }

    #[test]
    fn population_threshold_is_inclusive() {
        // exact losses (0.30, 0.00) under uniform p: worst heavy ratio 0.30
        let d0 = DiscreteDistribution::new(vec![
            Atom { x: 0, y: true, p: 0.3 },
            Atom { x: 1, y: false, p: 0.7 },
        ])
        .unwrap();
        let d1 = DiscreteDistribution::new(vec![Atom { x: 1, y: false, p: 1.0 }]).unwrap();
        let inst = Instance::new(2, vec![BitRow::from_bools(&[false, false])], vec![d0, d1]).unwrap();
        let ctx = LearningContext::new(&inst, 0);
        let p = MixtureStrategy::uniform(2);
        let mut rng = RngStream::new(1, 1);
        let mut ledger = BudgetLedger::new(2);
        let cover = construct_cover(&inst, &[0], &p, 1, Mode::Population, SamplerKind::Multinomial, &mut rng, &mut ledger).unwrap();
        let removed = filter(&ctx, &cover, &p, 0.10, 0.01, 1, Mode::Population, SamplerKind::Multinomial, &mut rng, &mut ledger).unwrap();
        assert!(removed.surviving.is_empty());
        let kept = filter(&ctx, &cover, &p, 0.30, 0.01, 1, Mode::Population, SamplerKind::Multinomial, &mut rng, &mut ledger).unwrap();
        assert_eq!(kept.surviving, vec![0]);
    }

    #[test]
    fn sampled_filter_charges_ledger() {
        let inst = two_point_instance();
        let ctx = LearningContext::new(&inst, 1);
        let p = MixtureStrategy::uniform(2);
        let mut rng = RngStream::new(3, 0);
        let mut ledger = BudgetLedger::new(2);
        let cover = construct_cover(&inst, &[0, 1], &p, 50, Mode::Sampled, SamplerKind::Multinomial, &mut rng, &mut ledger).unwrap();
        let out = filter(&ctx, &cover, &p, 0.0, 0.01, 400, Mode::Sampled, SamplerKind::Multinomial, &mut rng, &mut ledger).unwrap();
        assert_eq!(out.surviving, vec![1]);
        assert_eq!(ledger.per_phase.filter, 400);
        assert_eq!(ledger.per_phase.cover, 50);
        assert!(ledger.is_conserved());
    }

    #[test]
    fn subset_ratio_on_lists() {
        let inst = two_point_instance();
        let samples = vec![
            TaggedSample { x: 0, y: true, source: Some(0) },
            TaggedSample { x: 1, y: false, source: Some(1) },
            TaggedSample { x: 1, y: false, source: Some(1) },
        ];
        assert_eq!(subset_loss_ratio(&inst, &samples, &[0], 0).unwrap(), Some(1.0));
        assert_eq!(subset_loss_ratio(&inst, &samples, &[0, 1], 0).unwrap(), Some(1.0 / 3.0));
        assert_eq!(subset_loss_ratio(&inst, &samples[1..], &[0], 0).unwrap(), None);
    }

    #[test]
    fn filter_sample_size_formula() {
        let m2 = filter_sample_size(1.0, 3, 2, 0.1, 0.1);
        assert_eq!(m2, (5.0 * 600f64.ln() / 0.01).ceil() as u64);
    }
}
