//! Domain types: instances, hypotheses, labeled distributions, mixtures, and
//! exact population losses.
//!
//! Everything here is immutable after construction and can be shared
//! read-only between trials.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Normalization tolerance for every probability vector in the crate.
pub const PROB_TOL: f64 = 1e-12;

/// Compensated (Neumaier) summation.
pub fn stable_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// A binary hypothesis stored as a packed row of the class matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitRow {
    words: Vec<u64>,
    len: usize,
}

impl BitRow {
    pub fn from_bools(bits: &[bool]) -> Self {
        let mut words = vec![0u64; bits.len().div_ceil(64).max(1)];
        for (x, &b) in bits.iter().enumerate() {
            if b {
                words[x / 64] |= 1u64 << (x % 64);
            }
        }
        BitRow {
            words,
            len: bits.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, x: usize) -> bool {
        (self.words[x / 64] >> (x % 64)) & 1 == 1
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|x| self.get(x)).collect()
    }

    /// The row restricted to the points set in `mask`; two rows agree on
    /// those points iff their masked keys are equal.
    pub fn masked_key(&self, mask: &[u64]) -> Vec<u64> {
        self.words.iter().zip(mask).map(|(w, m)| w & m).collect()
    }

    pub fn complement(&self) -> Self {
        BitRow::from_bools(&self.to_bools().iter().map(|b| !b).collect::<Vec<_>>())
    }
}

/// Packs a set of domain points into a word mask compatible with [`BitRow::masked_key`].
pub fn point_mask(domain_size: usize, points: &[usize]) -> Vec<u64> {
    let mut mask = vec![0u64; domain_size.div_ceil(64).max(1)];
    for &x in points {
        mask[x / 64] |= 1u64 << (x % 64);
    }
    mask
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub x: usize,
    pub y: bool,
    pub p: f64,
}

/// Finite-support distribution over (point, label) pairs. Atoms are kept in
/// canonical `(x, y)` order, which the inverse-CDF sampler relies on.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    atoms: Vec<Atom>,
    cdf: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(mut atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidProbability("distribution has no atoms".into()));
        }
        for a in &atoms {
            if !a.p.is_finite() || a.p < 0.0 {
                return Err(Error::InvalidProbability(format!(
                    "atom ({}, {}) has probability {}",
                    a.x, a.y as u8, a.p
                )));
            }
        }
        atoms.sort_by_key(|a| (a.x, a.y));
        if let Some(w) = atoms.windows(2).find(|w| (w[0].x, w[0].y) == (w[1].x, w[1].y)) {
            return Err(Error::InvalidProbability(format!(
                "duplicate atom ({}, {})",
                w[0].x, w[0].y as u8
            )));
        }
        let total = stable_sum(atoms.iter().map(|a| a.p));
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidProbability(format!(
                "atom probabilities sum to {total}"
            )));
        }
        let mut acc = 0.0;
        let cdf = atoms
            .iter()
            .map(|a| {
                acc += a.p;
                acc
            })
            .collect();
        Ok(DiscreteDistribution { atoms, cdf })
    }

    /// Builds a distribution from unnormalized nonnegative weights, dropping
    /// zero-weight atoms.
    pub fn from_weights(weights: impl IntoIterator<Item = ((usize, bool), f64)>) -> Result<Self> {
        let mut merged: BTreeMap<(usize, bool), f64> = BTreeMap::new();
        for (key, w) in weights {
            *merged.entry(key).or_insert(0.0) += w;
        }
        merged.retain(|_, w| *w > 0.0);
        let total = stable_sum(merged.values().copied());
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidProbability("weights have no positive mass".into()));
        }
        let atoms = merged
            .into_iter()
            .map(|((x, y), w)| Atom { x, y, p: w / total })
            .collect();
        Self::new(atoms)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Cumulative probabilities in canonical atom order.
    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    pub fn probability(&self, x: usize, y: bool) -> f64 {
        self.atoms
            .binary_search_by_key(&(x, y), |a| (a.x, a.y))
            .map(|i| self.atoms[i].p)
            .unwrap_or(0.0)
    }
}

/// Multi-distribution learning problem over a finite domain `0..domain_size`.
#[derive(Debug, Clone)]
pub struct Instance {
    domain_size: usize,
    hypotheses: Vec<BitRow>,
    distributions: Vec<DiscreteDistribution>,
}

/// On-disk JSON form of an [`Instance`].
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub domain_size: usize,
    pub hypotheses: Vec<Vec<u8>>,
    pub distributions: Vec<Vec<AtomFile>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AtomFile {
    pub x: usize,
    pub y: u8,
    pub p: f64,
}

impl Instance {
    pub fn new(
        domain_size: usize,
        hypotheses: Vec<BitRow>,
        distributions: Vec<DiscreteDistribution>,
    ) -> Result<Self> {
        if domain_size == 0 {
            return Err(Error::invalid_instance("domain_size", "must be positive"));
        }
        if hypotheses.is_empty() {
            return Err(Error::invalid_instance("hypotheses", "at least one hypothesis required"));
        }
        if distributions.is_empty() {
            return Err(Error::invalid_instance(
                "distributions",
                "at least one distribution required",
            ));
        }
        let mut seen: BTreeMap<&BitRow, usize> = BTreeMap::new();
        for (h, row) in hypotheses.iter().enumerate() {
            if row.len() != domain_size {
                return Err(Error::invalid_instance(
                    format!("hypotheses[{h}]"),
                    format!("row has length {}, expected {domain_size}", row.len()),
                ));
            }
            if let Some(first) = seen.insert(row, h) {
                return Err(Error::invalid_instance(
                    format!("hypotheses[{h}]"),
                    format!("duplicates hypotheses[{first}]"),
                ));
            }
        }
        for (i, d) in distributions.iter().enumerate() {
            for (j, a) in d.atoms().iter().enumerate() {
                if a.x >= domain_size {
                    return Err(Error::invalid_instance(
                        format!("distributions[{i}][{j}].x"),
                        format!("point {} outside domain of size {domain_size}", a.x),
                    ));
                }
            }
        }
        Ok(Instance {
            domain_size,
            hypotheses,
            distributions,
        })
    }

    /// Validates a parsed file, reporting the first violation with its JSON path.
    pub fn from_file(file: &InstanceFile) -> Result<Self> {
        if file.domain_size == 0 {
            return Err(Error::invalid_instance("domain_size", "must be positive"));
        }
        let mut rows = Vec::with_capacity(file.hypotheses.len());
        for (h, row) in file.hypotheses.iter().enumerate() {
            if row.len() != file.domain_size {
                return Err(Error::invalid_instance(
                    format!("hypotheses[{h}]"),
                    format!("row has length {}, expected {}", row.len(), file.domain_size),
                ));
            }
            let mut bits = Vec::with_capacity(row.len());
            for (x, &v) in row.iter().enumerate() {
                match v {
                    0 => bits.push(false),
                    1 => bits.push(true),
                    _ => {
                        return Err(Error::invalid_instance(
                            format!("hypotheses[{h}][{x}]"),
                            format!("entry {v} is not 0 or 1"),
                        ))
                    }
                }
            }
            rows.push(BitRow::from_bools(&bits));
        }
        let mut dists = Vec::with_capacity(file.distributions.len());
        for (i, atoms) in file.distributions.iter().enumerate() {
            let mut parsed = Vec::with_capacity(atoms.len());
            let mut keys = BTreeMap::new();
            for (j, a) in atoms.iter().enumerate() {
                let path = |field: &str| format!("distributions[{i}][{j}].{field}");
                if a.x >= file.domain_size {
                    return Err(Error::invalid_instance(
                        path("x"),
                        format!("point {} outside domain of size {}", a.x, file.domain_size),
                    ));
                }
                let y = match a.y {
                    0 => false,
                    1 => true,
                    v => return Err(Error::invalid_instance(path("y"), format!("label {v} is not 0 or 1"))),
                };
                if !a.p.is_finite() || a.p < 0.0 {
                    return Err(Error::invalid_instance(
                        path("p"),
                        format!("probability {} is negative or not finite", a.p),
                    ));
                }
                if let Some(prev) = keys.insert((a.x, y), j) {
                    return Err(Error::invalid_instance(
                        format!("distributions[{i}][{j}]"),
                        format!("duplicates atom distributions[{i}][{prev}]"),
                    ));
                }
                parsed.push(Atom { x: a.x, y, p: a.p });
            }
            let dist = DiscreteDistribution::new(parsed).map_err(|e| {
                Error::invalid_instance(format!("distributions[{i}]"), e.to_string())
            })?;
            dists.push(dist);
        }
        Self::new(file.domain_size, rows, dists)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: InstanceFile = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::invalid_instance(path, e.into_inner().to_string())
        })?;
        Self::from_file(&file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            domain_size: self.domain_size,
            hypotheses: self
                .hypotheses
                .iter()
                .map(|r| r.to_bools().into_iter().map(u8::from).collect())
                .collect(),
            distributions: self
                .distributions
                .iter()
                .map(|d| {
                    d.atoms()
                        .iter()
                        .map(|a| AtomFile {
                            x: a.x,
                            y: a.y as u8,
                            p: a.p,
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    pub fn num_hypotheses(&self) -> usize {
        self.hypotheses.len()
    }

    /// Number of distributions, `k`.
    pub fn k(&self) -> usize {
        self.distributions.len()
    }

    pub fn hypothesis(&self, h: usize) -> &BitRow {
        &self.hypotheses[h]
    }

    pub fn hypotheses(&self) -> &[BitRow] {
        &self.hypotheses
    }

    pub fn distribution(&self, i: usize) -> &DiscreteDistribution {
        &self.distributions[i]
    }

    pub fn distributions(&self) -> &[DiscreteDistribution] {
        &self.distributions
    }

    pub fn all_hypotheses(&self) -> Vec<usize> {
        (0..self.hypotheses.len()).collect()
    }

    pub(crate) fn check_hypothesis(&self, h: usize) -> Result<()> {
        if h >= self.hypotheses.len() {
            return Err(Error::IndexOutOfRange {
                what: "hypothesis",
                index: h,
                limit: self.hypotheses.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_distribution(&self, i: usize) -> Result<()> {
        if i >= self.distributions.len() {
            return Err(Error::IndexOutOfRange {
                what: "distribution",
                index: i,
                limit: self.distributions.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_strategy(&self, p: &MixtureStrategy) -> Result<()> {
        if p.len() != self.k() {
            return Err(Error::LengthMismatch {
                expected: self.k(),
                got: p.len(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub weight: f64,
    pub hypothesis: usize,
}

/// Randomized classifier: a finite-support probability mixture over hypotheses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Component>", into = "Vec<Component>")]
pub struct MixtureClassifier {
    components: Vec<Component>,
}

impl TryFrom<Vec<Component>> for MixtureClassifier {
    type Error = Error;

    fn try_from(components: Vec<Component>) -> Result<Self> {
        Self::new(components)
    }
}

impl From<MixtureClassifier> for Vec<Component> {
    fn from(m: MixtureClassifier) -> Self {
        m.components
    }
}

impl MixtureClassifier {
    pub fn new(components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidProbability("mixture has no components".into()));
        }
        if let Some(c) = components.iter().find(|c| !c.weight.is_finite() || c.weight < 0.0) {
            return Err(Error::InvalidProbability(format!(
                "component weight {} for hypothesis {}",
                c.weight, c.hypothesis
            )));
        }
        let total = stable_sum(components.iter().map(|c| c.weight));
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidProbability(format!(
                "mixture weights sum to {total}"
            )));
        }
        Ok(MixtureClassifier { components })
    }

    pub fn point_mass(h: usize) -> Self {
        MixtureClassifier {
            components: vec![Component {
                weight: 1.0,
                hypothesis: h,
            }],
        }
    }

    /// Weighted combination of mixtures, flattened: one component per
    /// distinct hypothesis, sorted by index, renormalized.
    pub fn combine<'a>(parts: impl IntoIterator<Item = (f64, &'a MixtureClassifier)>) -> Result<Self> {
        let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
        for (w, m) in parts {
            for c in &m.components {
                *merged.entry(c.hypothesis).or_insert(0.0) += w * c.weight;
            }
        }
        merged.retain(|_, w| *w > 0.0);
        let total = stable_sum(merged.values().copied());
        if !(total > 0.0) {
            return Err(Error::InvalidProbability("combined mixture has no mass".into()));
        }
        Self::new(
            merged
                .into_iter()
                .map(|(hypothesis, w)| Component {
                    weight: w / total,
                    hypothesis,
                })
                .collect(),
        )
    }

    /// `(1/T) * sum_t f_t`, flattened.
    pub fn uniform_average(parts: &[MixtureClassifier]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidArgument("cannot average zero classifiers".into()));
        }
        let w = 1.0 / parts.len() as f64;
        Self::combine(parts.iter().map(|m| (w, m)))
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn hypotheses(&self) -> impl Iterator<Item = usize> + '_ {
        self.components.iter().map(|c| c.hypothesis)
    }

    pub fn validate_against(&self, inst: &Instance) -> Result<()> {
        self.hypotheses().try_for_each(|h| inst.check_hypothesis(h))
    }

    /// `Pr[f(x) = 1]` for every domain point.
    pub fn prob_one(&self, inst: &Instance) -> Vec<f64> {
        let mut q = vec![0.0; inst.domain_size()];
        for c in &self.components {
            let row = inst.hypothesis(c.hypothesis);
            for (x, qx) in q.iter_mut().enumerate() {
                if row.get(x) {
                    *qx += c.weight;
                }
            }
        }
        q
    }
}

/// A point of the simplex over the `k` distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MixtureStrategy {
    p: Vec<f64>,
}

impl TryFrom<Vec<f64>> for MixtureStrategy {
    type Error = Error;

    fn try_from(p: Vec<f64>) -> Result<Self> {
        Self::new(p)
    }
}

impl From<MixtureStrategy> for Vec<f64> {
    fn from(s: MixtureStrategy) -> Self {
        s.p
    }
}

impl MixtureStrategy {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidProbability("empty strategy".into()));
        }
        if let Some(v) = p.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidProbability(format!("strategy entry {v}")));
        }
        let total = stable_sum(p.iter().copied());
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidProbability(format!("strategy sums to {total}")));
        }
        Ok(MixtureStrategy { p })
    }

    pub fn uniform(k: usize) -> Self {
        MixtureStrategy {
            p: vec![1.0 / k as f64; k],
        }
    }

    pub fn point_mass(k: usize, i: usize) -> Self {
        let mut p = vec![0.0; k];
        p[i] = 1.0;
        MixtureStrategy { p }
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }
}

impl std::ops::Index<usize> for MixtureStrategy {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.p[i]
    }
}

/// Per-distribution losses, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossVector {
    values: Vec<f64>,
}

impl LossVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidArgument(format!("loss {v} outside [0, 1]")));
        }
        Ok(LossVector { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// Exact population loss `Pr_{(x,y)~D_i}[f(x) != y]` of a (possibly
/// randomized) classifier.
pub fn population_loss(inst: &Instance, dist_index: usize, f: &MixtureClassifier) -> Result<f64> {
    inst.check_distribution(dist_index)?;
    f.validate_against(inst)?;
    let q = f.prob_one(inst);
    Ok(loss_given_prob_one(inst.distribution(dist_index), &q))
}

pub(crate) fn loss_given_prob_one(dist: &DiscreteDistribution, q: &[f64]) -> f64 {
    let loss = stable_sum(
        dist.atoms()
            .iter()
            .map(|a| a.p * if a.y { 1.0 - q[a.x] } else { q[a.x] }),
    );
    loss.clamp(0.0, 1.0)
}

/// Materializes `sum_i p(i) D_i`.
pub fn mixture_distribution(inst: &Instance, p: &MixtureStrategy) -> Result<DiscreteDistribution> {
    inst.check_strategy(p)?;
    let mut merged: BTreeMap<(usize, bool), Vec<f64>> = BTreeMap::new();
    for (i, d) in inst.distributions().iter().enumerate() {
        if p[i] == 0.0 {
            continue;
        }
        for a in d.atoms() {
            merged.entry((a.x, a.y)).or_default().push(p[i] * a.p);
        }
    }
    DiscreteDistribution::from_weights(merged.into_iter().map(|(k, ws)| (k, stable_sum(ws))))
}

/// Mass of the `p`-mixture (label marginal) on which `h1` and `h2` disagree.
pub fn disagreement_mass(inst: &Instance, p: &MixtureStrategy, h1: usize, h2: usize) -> Result<f64> {
    inst.check_hypothesis(h1)?;
    inst.check_hypothesis(h2)?;
    inst.check_strategy(p)?;
    let (r1, r2) = (inst.hypothesis(h1), inst.hypothesis(h2));
    let mass = stable_sum(inst.distributions().iter().enumerate().flat_map(|(i, d)| {
        d.atoms()
            .iter()
            .filter(|a| r1.get(a.x) != r2.get(a.x))
            .map(move |a| p[i] * a.p)
    }));
    Ok(mass.clamp(0.0, 1.0))
}

/// Exact loss of every hypothesis on every distribution, `|H| x k`.
#[derive(Debug, Clone)]
pub struct LossTable {
    k: usize,
    values: Vec<f64>,
}

impl LossTable {
    pub fn compute(inst: &Instance) -> Self {
        let k = inst.k();
        let mut values = Vec::with_capacity(inst.num_hypotheses() * k);
        for row in inst.hypotheses() {
            for d in inst.distributions() {
                let loss = stable_sum(
                    d.atoms()
                        .iter()
                        .filter(|a| row.get(a.x) != a.y)
                        .map(|a| a.p),
                );
                values.push(loss.clamp(0.0, 1.0));
            }
        }
        LossTable { k, values }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, h: usize, i: usize) -> f64 {
        self.values[h * self.k + i]
    }

    pub fn row(&self, h: usize) -> &[f64] {
        &self.values[h * self.k..(h + 1) * self.k]
    }

    pub fn max_loss(&self, h: usize) -> f64 {
        self.row(h).iter().copied().fold(0.0, f64::max)
    }

    /// Loss of a mixture on distribution `i` through linearity over components.
    pub fn mixture_loss(&self, f: &MixtureClassifier, i: usize) -> f64 {
        stable_sum(f.components().iter().map(|c| c.weight * self.get(c.hypothesis, i))).clamp(0.0, 1.0)
    }

    pub fn mixture_losses(&self, f: &MixtureClassifier) -> Vec<f64> {
        (0..self.k).map(|i| self.mixture_loss(f, i)).collect()
    }
}

/// Everything a learner needs about an instance: the instance itself, its
/// exact loss table, and the VC dimension used to size samples.
#[derive(Debug, Clone)]
pub struct LearningContext<'a> {
    pub inst: &'a Instance,
    pub losses: LossTable,
    pub vc_dim: usize,
}

impl<'a> LearningContext<'a> {
    pub fn new(inst: &'a Instance, vc_dim: usize) -> Self {
        LearningContext {
            inst,
            losses: LossTable::compute(inst),
            vc_dim,
        }
    }
}
