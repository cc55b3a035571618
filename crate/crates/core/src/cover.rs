//! Projections of a hypothesis class onto sample sets, cover construction,
//! and Sauer–Shelah accounting.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{point_mask, Instance, MixtureStrategy};
use crate::sampling::{draw_mixture_set, BudgetLedger, Mode, Phase, RngStream, SampleSet, SamplerKind, TaggedSample};

/// `ln(max(k * d / (eps * delta), e))`, the logarithmic factor shared by the
/// sample-size formulas.
pub fn log_factor(k: usize, d: usize, eps: f64, delta: f64) -> f64 {
    ((k * d) as f64 / (eps * delta)).max(std::f64::consts::E).ln()
}

/// `m1 = ceil(c1 * d * ln(max(kd / (eps delta), e)) / eps)`, at least 1.
pub fn cover_sample_size(c1: f64, d: usize, k: usize, eps: f64, delta: f64) -> u64 {
    ((c1 * d as f64 * log_factor(k, d, eps, delta) / eps).ceil() as u64).max(1)
}

/// Labels a hypothesis assigns to a list of points.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Projection {
    pub pattern: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectionGroup {
    pub pattern: Projection,
    /// Ascending; the first member is the group's representative.
    pub members: Vec<usize>,
}

impl ProjectionGroup {
    pub fn representative(&self) -> usize {
        self.members[0]
    }
}

/// Partitions `hyp_subset` by agreement on `points`. Groups come out ordered
/// by their lowest member; patterns are listed over `points` in the given order.
pub fn project_points(inst: &Instance, hyp_subset: &[usize], points: &[usize]) -> Vec<ProjectionGroup> {
    let mask = point_mask(inst.domain_size(), points);
    let words = mask.len();
    let mut sorted: Vec<usize> = hyp_subset.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let keys: Vec<u64> = sorted
        .iter()
        .flat_map(|&h| inst.hypothesis(h).words().iter().zip(&mask).map(|(w, m)| w & m))
        .collect();
    let key = |j: usize| &keys[j * words..(j + 1) * words];
    // stable sort keeps members ascending within a pattern
    let mut order: Vec<usize> = (0..sorted.len()).collect();
    order.sort_by(|&a, &b| key(a).cmp(key(b)));
    let mut groups: Vec<ProjectionGroup> = Vec::new();
    for (pos, &j) in order.iter().enumerate() {
        let h = sorted[j];
        if pos > 0 && key(order[pos - 1]) == key(j) {
            groups.last_mut().unwrap().members.push(h);
        } else {
            let row = inst.hypothesis(h);
            groups.push(ProjectionGroup {
                pattern: Projection {
                    pattern: points.iter().map(|&x| row.get(x)).collect(),
                },
                members: vec![h],
            });
        }
    }
    groups.sort_unstable_by_key(|g| g.members[0]);
    groups
}

/// The projection `H(S)` of `hyp_subset` onto a sample list, with patterns
/// in sample order.
pub fn project(inst: &Instance, hyp_subset: &[usize], samples: &[TaggedSample]) -> Result<Vec<ProjectionGroup>> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if let Some(s) = samples.iter().find(|s| s.x >= inst.domain_size()) {
        return Err(Error::IndexOutOfRange {
            what: "sample point",
            index: s.x,
            limit: inst.domain_size(),
        });
    }
    hyp_subset.iter().try_for_each(|&h| inst.check_hypothesis(h))?;
    let points: Vec<usize> = samples.iter().map(|s| s.x).collect();
    Ok(project_points(inst, hyp_subset, &points))
}

/// One representative per projection of the class onto `S_1`.
#[derive(Debug, Clone)]
pub struct Cover {
    /// `S_1` as a histogram; `None` in population mode, where `S_1` is the
    /// whole domain.
    pub samples: Option<SampleSet>,
    /// Distinct points of `S_1`, ascending.
    pub support: Vec<usize>,
    /// Projection groups over `support`, ordered by representative.
    pub groups: Vec<ProjectionGroup>,
    group_of: BTreeMap<usize, usize>,
}

impl Cover {
    fn build(inst: &Instance, hyp_subset: &[usize], samples: Option<SampleSet>, support: Vec<usize>) -> Self {
        let groups = project_points(inst, hyp_subset, &support);
        let group_of = groups
            .iter()
            .enumerate()
            .flat_map(|(g, grp)| grp.members.iter().map(move |&h| (h, g)))
            .collect();
        Cover {
            samples,
            support,
            groups,
            group_of,
        }
    }

    pub fn size(&self) -> usize {
        self.groups.len()
    }

    pub fn representatives(&self) -> impl Iterator<Item = usize> + '_ {
        self.groups.iter().map(|g| g.representative())
    }

    pub fn representative_of(&self, h: usize) -> Option<usize> {
        self.group_of.get(&h).map(|&g| self.groups[g].representative())
    }

    pub fn group_of(&self, h: usize) -> Option<&ProjectionGroup> {
        self.group_of.get(&h).map(|&g| &self.groups[g])
    }

    pub fn sample_size(&self) -> u64 {
        self.samples.as_ref().map_or(0, |s| s.total())
    }
}

/// Draws `S_1` from the `p`-mixture and keeps the lowest-index hypothesis of
/// each projection. Population mode projects onto the full domain and draws
/// nothing.
#[allow(clippy::too_many_arguments)]
pub fn construct_cover(
    inst: &Instance,
    hyp_subset: &[usize],
    p: &MixtureStrategy,
    m1: u64,
    mode: Mode,
    sampler: SamplerKind,
    rng: &mut RngStream,
    ledger: &mut BudgetLedger,
) -> Result<Cover> {
    match mode {
        Mode::Population => Ok(Cover::build(inst, hyp_subset, None, (0..inst.domain_size()).collect())),
        Mode::Sampled => {
            if m1 == 0 {
                return Err(Error::InvalidArgument("cover sample size must be at least 1".into()));
            }
            let set = draw_mixture_set(inst, p, m1, sampler, rng, ledger, Phase::Cover)?;
            let support = set.support();
            Ok(Cover::build(inst, hyp_subset, Some(set), support))
        }
    }
}

/// Declared saturation value of [`sauer_shelah_bound`].
pub const SAUER_SHELAH_MAX: u128 = u128::MAX;

/// `sum_{i=0}^{d} C(n, i)`, exact, saturating at [`SAUER_SHELAH_MAX`].
pub fn sauer_shelah_bound(n: u64, d: u64) -> u128 {
    let mut total: u128 = 1;
    let mut term: u128 = 1;
    for i in 1..=d.min(n) {
        // C(n, i) = C(n, i-1) * (n - i + 1) / i, exact at every step
        term = match term.checked_mul((n - i + 1) as u128) {
            Some(v) => v / i as u128,
            None => return SAUER_SHELAH_MAX,
        };
        total = match total.checked_add(term) {
            Some(v) => v,
            None => return SAUER_SHELAH_MAX,
        };
    }
    total
}

/// `(e n / d)^d`, the closed-form relaxation valid for `n >= d >= 1`.
pub fn sauer_shelah_relaxed(n: u64, d: u64) -> f64 {
    if d == 0 {
        return 1.0;
    }
    (std::f64::consts::E * n as f64 / d as f64).powi(d as i32)
}
