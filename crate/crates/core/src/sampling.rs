//! Seeded sampling with provenance, empirical loss, and the sample-budget
//! ledger.
//!
//! Two samplers produce identically distributed sample sets. `InverseCdf`
//! draws every point individually by inverse-CDF over canonically ordered
//! atoms. `Multinomial` draws the count histogram of the same `n` i.i.d.
//! points directly through a chain of conditional binomials. The learner
//! only ever consumes histograms (a [`SampleSet`] is a sufficient statistic
//! for every test it runs), so both samplers are interchangeable there and
//! charge the ledger identically.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{stable_sum, DiscreteDistribution, Instance, MixtureClassifier, MixtureStrategy};

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based ChaCha8 stream identified by `(seed, stream)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RngStream { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Independent child stream for trial / thread `index`. Depends only on
    /// `(seed, stream, index)`, not on how much of `self` was consumed.
    pub fn derive(&self, index: u64) -> RngStream {
        RngStream::new(self.seed, splitmix64(self.stream ^ splitmix64(index)))
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Cover,
    Filter,
    Estimate,
    OracleRecursion,
    Selection,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseCounts {
    pub cover: u64,
    pub filter: u64,
    pub estimate: u64,
    pub oracle_recursion: u64,
    pub selection: u64,
}

impl PhaseCounts {
    pub fn get(&self, phase: Phase) -> u64 {
        match phase {
            Phase::Cover => self.cover,
            Phase::Filter => self.filter,
            Phase::Estimate => self.estimate,
            Phase::OracleRecursion => self.oracle_recursion,
            Phase::Selection => self.selection,
        }
    }

    fn get_mut(&mut self, phase: Phase) -> &mut u64 {
        match phase {
            Phase::Cover => &mut self.cover,
            Phase::Filter => &mut self.filter,
            Phase::Estimate => &mut self.estimate,
            Phase::OracleRecursion => &mut self.oracle_recursion,
            Phase::Selection => &mut self.selection,
        }
    }

    pub fn sum(&self) -> u64 {
        self.cover + self.filter + self.estimate + self.oracle_recursion + self.selection
    }
}

/// Exact count of every sample drawn during one run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetLedger {
    pub total: u64,
    pub per_distribution: Vec<u64>,
    pub per_phase: PhaseCounts,
}

impl BudgetLedger {
    pub fn new(k: usize) -> Self {
        BudgetLedger {
            total: 0,
            per_distribution: vec![0; k],
            per_phase: PhaseCounts::default(),
        }
    }

    pub fn record(&mut self, phase: Phase, dist: usize, n: u64) {
        self.total += n;
        self.per_distribution[dist] += n;
        *self.per_phase.get_mut(phase) += n;
    }

    /// Adds another ledger keeping its phase attribution.
    pub fn merge(&mut self, other: &BudgetLedger) {
        self.total += other.total;
        for (a, b) in self.per_distribution.iter_mut().zip(&other.per_distribution) {
            *a += b;
        }
        for phase in [
            Phase::Cover,
            Phase::Filter,
            Phase::Estimate,
            Phase::OracleRecursion,
            Phase::Selection,
        ] {
            *self.per_phase.get_mut(phase) += other.per_phase.get(phase);
        }
    }

    /// Adds another ledger, charging all of it to `phase`.
    pub fn absorb_as(&mut self, other: &BudgetLedger, phase: Phase) {
        self.total += other.total;
        for (a, b) in self.per_distribution.iter_mut().zip(&other.per_distribution) {
            *a += b;
        }
        *self.per_phase.get_mut(phase) += other.total;
    }

    pub fn is_conserved(&self) -> bool {
        self.per_distribution.iter().sum::<u64>() == self.total && self.per_phase.sum() == self.total
    }
}

/// One labeled draw together with the distribution that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaggedSample {
    pub x: usize,
    pub y: bool,
    /// `None` for raw draws made outside any instance.
    pub source: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    InverseCdf,
    #[default]
    Multinomial,
}

/// Whether the learner sees samples or exact population quantities.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Sampled,
    Population,
}

fn inverse_cdf(cdf: &[f64], u: f64) -> usize {
    let idx = cdf.partition_point(|&c| c <= u);
    if idx < cdf.len() {
        return idx;
    }
    // u landed above the rounded total; take the last atom carrying mass.
    let mut j = cdf.len() - 1;
    while j > 0 && cdf[j] == cdf[j - 1] {
        j -= 1;
    }
    j
}

/// Atom indices of `n` i.i.d. inverse-CDF draws.
pub fn draw_atom_indices(dist: &DiscreteDistribution, n: u64, rng: &mut RngStream) -> Vec<usize> {
    (0..n).map(|_| inverse_cdf(dist.cdf(), rng.uniform())).collect()
}

/// `n` raw draws from a standalone distribution; no provenance, no ledger.
pub fn draw_iid(dist: &DiscreteDistribution, n: u64, rng: &mut RngStream) -> Vec<TaggedSample> {
    draw_atom_indices(dist, n, rng)
        .into_iter()
        .map(|j| {
            let a = dist.atoms()[j];
            TaggedSample {
                x: a.x,
                y: a.y,
                source: None,
            }
        })
        .collect()
}

/// `n` i.i.d. draws from `D_i`, tagged with source `i` and charged to `phase`.
pub fn draw_from(
    inst: &Instance,
    dist_index: usize,
    n: u64,
    rng: &mut RngStream,
    ledger: &mut BudgetLedger,
    phase: Phase,
) -> Result<Vec<TaggedSample>> {
    inst.check_distribution(dist_index)?;
    let dist = inst.distribution(dist_index);
    let samples = draw_atom_indices(dist, n, rng)
        .into_iter()
        .map(|j| {
            let a = dist.atoms()[j];
            TaggedSample {
                x: a.x,
                y: a.y,
                source: Some(dist_index),
            }
        })
        .collect();
    ledger.record(phase, dist_index, n);
    Ok(samples)
}

fn cumulative(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    p.iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect()
}

/// Hierarchical draws from `sum_i p(i) D_i`: source `i ~ p`, then `(x, y) ~ D_i`.
pub fn draw_from_mixture(
    inst: &Instance,
    p: &MixtureStrategy,
    n: u64,
    rng: &mut RngStream,
    ledger: &mut BudgetLedger,
    phase: Phase,
) -> Result<Vec<TaggedSample>> {
    inst.check_strategy(p)?;
    let source_cdf = cumulative(p.as_slice());
    let mut out = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let i = inverse_cdf(&source_cdf, rng.uniform());
        let dist = inst.distribution(i);
        let a = dist.atoms()[inverse_cdf(dist.cdf(), rng.uniform())];
        ledger.record(phase, i, 1);
        out.push(TaggedSample {
            x: a.x,
            y: a.y,
            source: Some(i),
        });
    }
    Ok(out)
}

/// Multinomial count vector of `n` draws over categories with probabilities
/// `probs`, via conditional binomials in index order.
pub fn multinomial(n: u64, probs: &[f64], rng: &mut RngStream) -> Vec<u64> {
    let mut suffix = vec![0.0; probs.len() + 1];
    for j in (0..probs.len()).rev() {
        suffix[j] = suffix[j + 1] + probs[j];
    }
    let last = probs.iter().rposition(|&v| v > 0.0).unwrap_or(probs.len().saturating_sub(1));
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = n;
    for j in 0..probs.len() {
        if remaining == 0 {
            break;
        }
        if j == last {
            counts[j] = remaining;
            break;
        }
        let q = if suffix[j] > 0.0 {
            (probs[j] / suffix[j]).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let c = Binomial::new(remaining, q)
            .expect("binomial parameter lies in [0, 1]")
            .sample(rng.rng());
        counts[j] = c;
        remaining -= c;
    }
    counts
}

/// Per-atom counts of `n` draws from `D_i`, aligned with `inst.distribution(i).atoms()`.
pub fn draw_atom_counts(
    inst: &Instance,
    dist_index: usize,
    n: u64,
    kind: SamplerKind,
    rng: &mut RngStream,
    ledger: &mut BudgetLedger,
    phase: Phase,
) -> Result<Vec<u64>> {
    inst.check_distribution(dist_index)?;
    let dist = inst.distribution(dist_index);
    let counts = match kind {
        SamplerKind::InverseCdf => {
            let mut counts = vec![0u64; dist.atoms().len()];
            for j in draw_atom_indices(dist, n, rng) {
                counts[j] += 1;
            }
            counts
        }
        SamplerKind::Multinomial => {
            let probs: Vec<f64> = dist.atoms().iter().map(|a| a.p).collect();
            multinomial(n, &probs, rng)
        }
    };
    ledger.record(phase, dist_index, n);
    Ok(counts)
}

/// Histogram of tagged samples over `(source, x, y)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSet {
    k: usize,
    domain_size: usize,
    counts: Vec<u64>,
    per_source: Vec<u64>,
    total: u64,
}

impl SampleSet {
    pub fn empty(k: usize, domain_size: usize) -> Self {
        SampleSet {
            k,
            domain_size,
            counts: vec![0; k * domain_size * 2],
            per_source: vec![0; k],
            total: 0,
        }
    }

    #[inline]
    fn slot(&self, source: usize, x: usize, y: bool) -> usize {
        (source * self.domain_size + x) * 2 + y as usize
    }

    pub fn add(&mut self, source: usize, x: usize, y: bool, n: u64) {
        let s = self.slot(source, x, y);
        self.counts[s] += n;
        self.per_source[source] += n;
        self.total += n;
    }

    /// Tallies samples; every sample must carry a source.
    pub fn from_samples(k: usize, domain_size: usize, samples: &[TaggedSample]) -> Result<Self> {
        let mut set = Self::empty(k, domain_size);
        for s in samples {
            let source = s.source.ok_or_else(|| {
                Error::InvalidArgument("sample without provenance in a tagged sample set".into())
            })?;
            if source >= k {
                return Err(Error::IndexOutOfRange {
                    what: "sample source",
                    index: source,
                    limit: k,
                });
            }
            if s.x >= domain_size {
                return Err(Error::IndexOutOfRange {
                    what: "sample point",
                    index: s.x,
                    limit: domain_size,
                });
            }
            set.add(source, s.x, s.y, 1);
        }
        Ok(set)
    }

    #[inline]
    pub fn count(&self, source: usize, x: usize, y: bool) -> u64 {
        self.counts[self.slot(source, x, y)]
    }

    pub fn source_total(&self, source: usize) -> u64 {
        self.per_source[source]
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Distinct points that occur in the set, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.domain_size)
            .filter(|&x| (0..self.k).any(|s| self.count(s, x, false) + self.count(s, x, true) > 0))
            .collect()
    }

    /// Expected misclassification rate of a classifier with `Pr[f(x)=1] = q[x]`.
    pub fn empirical_loss(&self, q: &[f64]) -> Result<f64> {
        if self.total == 0 {
            return Err(Error::EmptySamples);
        }
        let mut terms = Vec::new();
        for s in 0..self.k {
            for (x, &qx) in q.iter().enumerate().take(self.domain_size) {
                let c0 = self.count(s, x, false);
                let c1 = self.count(s, x, true);
                if c0 > 0 {
                    terms.push(c0 as f64 * qx);
                }
                if c1 > 0 {
                    terms.push(c1 as f64 * (1.0 - qx));
                }
            }
        }
        Ok((stable_sum(terms) / self.total as f64).clamp(0.0, 1.0))
    }
}

/// Draws `n` samples from the `p`-mixture into a histogram.
pub fn draw_mixture_set(
    inst: &Instance,
    p: &MixtureStrategy,
    n: u64,
    kind: SamplerKind,
    rng: &mut RngStream,
    ledger: &mut BudgetLedger,
    phase: Phase,
) -> Result<SampleSet> {
    match kind {
        SamplerKind::InverseCdf => {
            let samples = draw_from_mixture(inst, p, n, rng, ledger, phase)?;
            SampleSet::from_samples(inst.k(), inst.domain_size(), &samples)
        }
        SamplerKind::Multinomial => {
            inst.check_strategy(p)?;
            let mut set = SampleSet::empty(inst.k(), inst.domain_size());
            let per_source = multinomial(n, p.as_slice(), rng);
            for (i, &ni) in per_source.iter().enumerate() {
                if ni == 0 {
                    continue;
                }
                let dist = inst.distribution(i);
                let probs: Vec<f64> = dist.atoms().iter().map(|a| a.p).collect();
                for (a, c) in dist.atoms().iter().zip(multinomial(ni, &probs, rng)) {
                    if c > 0 {
                        set.add(i, a.x, a.y, c);
                    }
                }
                ledger.record(phase, i, ni);
            }
            Ok(set)
        }
    }
}

/// Empirical loss of `f` on a sample list. Randomized classifiers contribute
/// their exact per-sample misclassification probability.
pub fn empirical_loss(inst: &Instance, samples: &[TaggedSample], f: &MixtureClassifier) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    f.validate_against(inst)?;
    let q = f.prob_one(inst);
    let loss = stable_sum(samples.iter().map(|s| if s.y { 1.0 - q[s.x] } else { q[s.x] }));
    Ok((loss / samples.len() as f64).clamp(0.0, 1.0))
}
