//! The boosting loop: MWU over distributions, a cover and filter of the
//! class each round, one oracle call on the survivors, and truncated loss
//! estimates fed back to MWU.

use serde::{Deserialize, Serialize};

use crate::cover::{construct_cover, cover_sample_size, log_factor};
use crate::error::{Error, Result};
use crate::filter::{filter, filter_sample_size, RemovedWitness};
use crate::model::{LearningContext, LossVector, MixtureClassifier};
use crate::mwu::{regret_audit, MwuState, RegretAudit, RoundRecord};
use crate::oracle::opt_over;
use crate::sampling::{draw_atom_counts, BudgetLedger, Mode, Phase, RngStream, SamplerKind};

/// Multipliers on the sample-size and round-count formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Constants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c_t: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            c1: 1.0,
            c2: 1.0,
            c3: 1.0,
            c_t: 1.0,
        }
    }
}

impl Constants {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("c1", self.c1), ("c2", self.c2), ("c3", self.c3), ("c_t", self.c_t)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!("constant {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub eps: f64,
    pub delta: f64,
    pub opt_prime: f64,
    /// Error guarantee of the oracle handed to [`boost_learn`].
    pub alpha: f64,
    pub constants: Constants,
    pub mode: Mode,
    pub sampler: SamplerKind,
    /// Reject `eps > alpha / 32` for nontrivial oracles instead of recording
    /// a warning.
    pub strict_assumptions: bool,
}

impl LearnerConfig {
    pub fn new(eps: f64, delta: f64, opt_prime: f64, alpha: f64) -> Self {
        LearnerConfig {
            eps,
            delta,
            opt_prime,
            alpha,
            constants: Constants::default(),
            mode: Mode::Sampled,
            sampler: SamplerKind::default(),
            strict_assumptions: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(Error::InvalidArgument(format!("eps must lie in (0, 1], got {}", self.eps)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidArgument(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !(0.0..=1.0).contains(&self.opt_prime) {
            return Err(Error::InvalidArgument(format!(
                "opt_prime must lie in [0, 1], got {}",
                self.opt_prime
            )));
        }
        if !(self.alpha >= self.eps && self.alpha <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must lie in [eps, 1], got alpha = {} with eps = {}",
                self.alpha, self.eps
            )));
        }
        self.constants.validate()
    }
}

/// Contract: return a mixture supported on `surviving` whose max-loss is at
/// most the best survivor's plus [`alpha`](Self::alpha), except with small
/// probability.
pub trait MultiLearnerOracle {
    fn alpha(&self) -> f64;

    /// True when the oracle ignores its inputs beyond picking a survivor, so
    /// the `eps <= alpha / 32` assumption carries no content.
    fn is_trivial(&self) -> bool {
        false
    }

    fn learn(
        &self,
        ctx: &LearningContext,
        surviving: &[usize],
        opt_prime: f64,
        rng: &mut RngStream,
        ledger: &mut BudgetLedger,
    ) -> Result<MixtureClassifier>;
}

/// Point mass on the lowest-index survivor.
pub fn base_oracle(surviving: &[usize]) -> Result<MixtureClassifier> {
    surviving
        .iter()
        .min()
        .map(|&h| MixtureClassifier::point_mass(h))
        .ok_or(Error::EmptySurvivors {
            round: 0,
            opt_prime: f64::NAN,
        })
}

/// The level-one oracle: `alpha = 1`, no samples.
#[derive(Debug, Clone, Copy, Default)]
pub struct BaseOracle;

impl MultiLearnerOracle for BaseOracle {
    fn alpha(&self) -> f64 {
        1.0
    }

    fn is_trivial(&self) -> bool {
        true
    }

    fn learn(
        &self,
        _ctx: &LearningContext,
        surviving: &[usize],
        _opt_prime: f64,
        _rng: &mut RngStream,
        _ledger: &mut BudgetLedger,
    ) -> Result<MixtureClassifier> {
        base_oracle(surviving)
    }
}

/// `T = max(1, ceil(c_t * ln(k) * (alpha / eps)^2))`.
pub fn horizon(c_t: f64, k: usize, alpha: f64, eps: f64) -> usize {
    let t = (c_t * (k as f64).ln() * (alpha / eps).powi(2)).ceil();
    (t as usize).max(1)
}

/// `m3 = ceil(c3 * ln(max(kd / (eps delta), e)) / eps^2)`.
pub fn estimate_sample_size(c3: f64, d: usize, k: usize, eps: f64, delta: f64) -> u64 {
    ((c3 * log_factor(k, d, eps, delta) / (eps * eps)).ceil() as u64).max(1)
}

/// Round count, MWU parameters, and per-round sample sizes of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub horizon: usize,
    pub width: f64,
    pub eta: f64,
    pub alpha: f64,
    pub vc_dim: usize,
    pub m1: u64,
    pub m2: u64,
    pub m3: u64,
}

impl Schedule {
    pub fn compute(k: usize, vc_dim: usize, config: &LearnerConfig) -> Self {
        let c = &config.constants;
        let (eps, delta) = (config.eps, config.delta);
        let horizon = horizon(c.c_t, k, config.alpha, eps);
        let width = 4.0 * config.alpha + 2.0 * eps;
        Schedule {
            horizon,
            width,
            eta: ((k as f64).ln() / horizon as f64).sqrt() / width,
            alpha: config.alpha,
            vc_dim,
            m1: cover_sample_size(c.c1, vc_dim, k, eps, delta),
            m2: filter_sample_size(c.c2, vc_dim, k, eps, delta),
            m3: estimate_sample_size(c.c3, vc_dim, k, eps, delta),
        }
    }

    /// Samples one run draws outside its oracle calls.
    pub fn samples_per_run(&self, k: usize, mode: Mode) -> u64 {
        match mode {
            Mode::Population => 0,
            Mode::Sampled => self.horizon as u64 * (self.m1 + self.m2 + k as u64 * self.m3),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    /// `l_hat` before truncation.
    pub raw: Vec<f64>,
    /// `max(l_hat, opt_prime - alpha)`.
    pub truncated: LossVector,
}

/// Estimates every per-distribution loss of `f_t` from `m3` fresh samples
/// and floors them at `opt_prime - alpha`. Population mode uses exact losses.
#[allow(clippy::too_many_arguments)]
pub fn estimate_losses(
    ctx: &LearningContext,
    f_t: &MixtureClassifier,
    opt_prime: f64,
    alpha: f64,
    m3: u64,
    mode: Mode,
    sampler: SamplerKind,
    rng: &mut RngStream,
    ledger: &mut BudgetLedger,
) -> Result<Estimate> {
    let inst = ctx.inst;
    f_t.validate_against(inst)?;
    let raw: Vec<f64> = match mode {
        Mode::Population => ctx.losses.mixture_losses(f_t),
        Mode::Sampled => {
            if m3 == 0 {
                return Err(Error::InvalidArgument("estimate sample size must be at least 1".into()));
            }
            let q = f_t.prob_one(inst);
            (0..inst.k())
                .map(|i| {
                    let counts = draw_atom_counts(inst, i, m3, sampler, rng, ledger, Phase::Estimate)?;
                    let wrong: f64 = inst
                        .distribution(i)
                        .atoms()
                        .iter()
                        .zip(&counts)
                        .filter(|(_, &c)| c > 0)
                        .map(|(a, &c)| c as f64 * if a.y { 1.0 - q[a.x] } else { q[a.x] })
                        .sum();
                    Ok((wrong / m3 as f64).clamp(0.0, 1.0))
                })
                .collect::<Result<_>>()?
        }
    };
    truncate(raw, opt_prime, alpha)
}

/// Applies the `opt_prime - alpha` floor.
pub fn truncate(raw: Vec<f64>, opt_prime: f64, alpha: f64) -> Result<Estimate> {
    let floor = opt_prime - alpha;
    let truncated = LossVector::new(raw.iter().map(|&l| l.max(floor)).collect())?;
    Ok(Estimate { raw, truncated })
}

/// What one round saw and did. Exact quantities are audit-only; the learner
/// never reads them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTelemetry {
    pub round: usize,
    pub strategy: Vec<f64>,
    pub cover_size: usize,
    pub survivors: usize,
    pub removed: Vec<RemovedWitness>,
    pub estimates: Vec<f64>,
    pub loss: Vec<f64>,
    /// Declared window `[opt_prime - 2 alpha - eps, opt_prime + 2 alpha + eps]`.
    pub window: [f64; 2],
    pub exact_losses: Vec<f64>,
    pub oracle_max_loss: f64,
    /// Smallest exact max-loss among survivors.
    pub survivor_opt: f64,
    /// Whether the minimax hypothesis of the input class survived.
    pub optimum_survived: bool,
    /// Realized MWU regret after this round.
    pub regret: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostOutcome {
    pub classifier: MixtureClassifier,
    pub schedule: Option<Schedule>,
    pub rounds: Vec<RoundTelemetry>,
    pub regret: Option<RegretAudit>,
    pub warnings: Vec<String>,
}

impl BoostOutcome {
    /// Outcome carrying only a classifier, for learners without a round loop.
    pub fn from_classifier(classifier: MixtureClassifier) -> Self {
        BoostOutcome {
            classifier,
            schedule: None,
            rounds: Vec::new(),
            regret: None,
            warnings: Vec::new(),
        }
    }

    /// MWU history as fed to the update: losses `-l_t` with window offset
    /// `-(opt_prime + 2 alpha + eps)`.
    pub fn mwu_history(&self) -> Vec<RoundRecord> {
        mwu_history(&self.rounds)
    }
}

pub fn mwu_history(rounds: &[RoundTelemetry]) -> Vec<RoundRecord> {
    rounds
        .iter()
        .map(|r| RoundRecord {
            strategy: r.strategy.clone(),
            loss: r.loss.iter().map(|l| -l).collect(),
            offset: -r.window[1],
        })
        .collect()
}

/// Runs the boosting loop on `hyp_subset`. With `record` false the per-round
/// telemetry is not kept, which matters for inner recursion levels.
pub fn boost_learn(
    ctx: &LearningContext,
    hyp_subset: &[usize],
    config: &LearnerConfig,
    oracle: &dyn MultiLearnerOracle,
    rng: &mut RngStream,
    ledger: &mut BudgetLedger,
    record: bool,
) -> Result<BoostOutcome> {
    config.validate()?;
    let inst = ctx.inst;
    if hyp_subset.is_empty() {
        return Err(Error::InvalidArgument("hypothesis subset is empty".into()));
    }
    hyp_subset.iter().try_for_each(|&h| inst.check_hypothesis(h))?;
    if ledger.per_distribution.len() != inst.k() {
        return Err(Error::LengthMismatch {
            expected: inst.k(),
            got: ledger.per_distribution.len(),
        });
    }
    if (oracle.alpha() - config.alpha).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "config alpha {} differs from the oracle's declared alpha {}",
            config.alpha,
            oracle.alpha()
        )));
    }
    let mut warnings = Vec::new();
    if !oracle.is_trivial() && config.eps > config.alpha / 32.0 {
        let msg = format!(
            "eps = {} exceeds alpha / 32 = {} for a nontrivial oracle",
            config.eps,
            config.alpha / 32.0
        );
        if config.strict_assumptions {
            return Err(Error::Assumption(msg));
        }
        warnings.push(msg);
    }

    let k = inst.k();
    let schedule = Schedule::compute(k, ctx.vc_dim, config);
    let (eps, opt_prime, alpha) = (config.eps, config.opt_prime, config.alpha);
    let window = [opt_prime - 2.0 * alpha - eps, opt_prime + 2.0 * alpha + eps];
    let mut mwu = MwuState::with_eta(k, schedule.horizon, schedule.eta);
    let optimum = opt_over(&ctx.losses, hyp_subset).argmin;

    let mut outputs = Vec::with_capacity(schedule.horizon);
    let mut rounds = Vec::new();
    let mut history = Vec::new();
    let mut played = 0.0;
    let mut totals = vec![0.0; k];

    for t in 0..schedule.horizon {
        let p = mwu.strategy();
        let cover = construct_cover(inst, hyp_subset, &p, schedule.m1, config.mode, config.sampler, rng, ledger)?;
        let survivors = filter(ctx, &cover, &p, opt_prime, eps, schedule.m2, config.mode, config.sampler, rng, ledger)?;
        if survivors.surviving.is_empty() {
            return Err(Error::EmptySurvivors { round: t, opt_prime });
        }
        let f_t = oracle.learn(ctx, &survivors.surviving, opt_prime, rng, ledger)?;
        if let Some(h) = f_t.hypotheses().find(|h| survivors.surviving.binary_search(h).is_err()) {
            return Err(Error::OracleContract(format!(
                "round {t}: oracle output uses hypothesis {h} outside the survivor set"
            )));
        }
        let est = estimate_losses(ctx, &f_t, opt_prime, alpha, schedule.m3, config.mode, config.sampler, rng, ledger)?;
        let fed: Vec<f64> = est.truncated.values().iter().map(|l| -l).collect();
        mwu.update(&fed)?;

        if record {
            let loss = est.truncated.values();
            played += p.as_slice().iter().zip(loss).map(|(a, b)| a * b).sum::<f64>();
            for (acc, l) in totals.iter_mut().zip(loss) {
                *acc += l;
            }
            // regret of the fed sequence -l: max_i sum l(i) - sum <p, l>
            let regret = totals.iter().copied().fold(f64::NEG_INFINITY, f64::max) - played;
            let exact = ctx.losses.mixture_losses(&f_t);
            history.push(RoundRecord {
                strategy: p.as_slice().to_vec(),
                loss: fed,
                offset: -window[1],
            });
            rounds.push(RoundTelemetry {
                round: t,
                strategy: p.as_slice().to_vec(),
                cover_size: cover.size(),
                survivors: survivors.surviving.len(),
                removed: survivors.removed,
                estimates: est.raw,
                loss: loss.to_vec(),
                window,
                oracle_max_loss: exact.iter().copied().fold(0.0, f64::max),
                exact_losses: exact,
                survivor_opt: opt_over(&ctx.losses, &survivors.surviving).opt,
                optimum_survived: survivors.surviving.binary_search(&optimum).is_ok(),
                regret,
            });
        }
        outputs.push(f_t);
    }

    let classifier = MixtureClassifier::uniform_average(&outputs)?;
    let regret = if record {
        // a width violation is reported in telemetry, not raised here
        regret_audit(&history, schedule.width).ok()
    } else {
        None
    };
    Ok(BoostOutcome {
        classifier,
        schedule: Some(schedule),
        rounds,
        regret,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Atom, BitRow, DiscreteDistribution, Instance};
    use crate::oracle::{brute_force_opt, vc_dimension, ExactMinimaxOracle};

    fn instance(rows: &[&[u8]], dists: Vec<Vec<(usize, u8, f64)>>) -> Instance {
        let n = rows[0].len();
        Instance::new(
            n,
            rows.iter()
                .map(|r| BitRow::from_bools(&r.iter().map(|&b| b == 1).collect::<Vec<_>>()))
                .collect(),
            dists
                .into_iter()
                .map(|d| DiscreteDistribution::new(d.into_iter().map(|(x, y, p)| Atom { x, y: y == 1, p }).collect()).unwrap())
                .collect(),
        )
        .unwrap()
    }

    fn small_instance() -> Instance {
        instance(
            &[&[0, 0, 0, 0], &[1, 0, 1, 0], &[1, 1, 0, 0], &[0, 1, 1, 1], &[1, 1, 1, 1]],
            vec![
                vec![(0, 1, 0.4), (1, 0, 0.3), (2, 1, 0.2), (3, 0, 0.1)],
                vec![(0, 0, 0.25), (1, 1, 0.25), (2, 1, 0.25), (3, 1, 0.25)],
                vec![(0, 1, 0.1), (1, 1, 0.2), (2, 0, 0.3), (3, 0, 0.4)],
            ],
        )
    }

    #[test]
    fn base_oracle_picks_lowest() {
        assert_eq!(base_oracle(&[7]).unwrap(), MixtureClassifier::point_mass(7));
        assert_eq!(base_oracle(&[9, 3]).unwrap(), MixtureClassifier::point_mass(3));
        assert!(matches!(base_oracle(&[]), Err(Error::EmptySurvivors { .. })));
        let inst = small_instance();
        let ctx = LearningContext::new(&inst, 1);
        let mut ledger = BudgetLedger::new(3);
        let before = ledger.clone();
        BaseOracle.learn(&ctx, &[2, 4], 0.1, &mut RngStream::new(0, 0), &mut ledger).unwrap();
        assert_eq!(ledger, before);
    }

    #[test]
    fn truncation_floor() {
        let e = truncate(vec![0.1, 0.6], 0.4, 0.2).unwrap();
        assert!((e.truncated.values()[0] - 0.2).abs() < 1e-15);
        assert_eq!(e.truncated.values()[1], 0.6);
        let e = truncate(vec![0.1, 0.6], 0.4, 0.5).unwrap();
        assert_eq!(e.truncated.values(), &[0.1, 0.6]);
    }

    #[test]
    fn estimate_charges_k_m3() {
        let inst = small_instance();
        let ctx = LearningContext::new(&inst, 1);
        let mut ledger = BudgetLedger::new(3);
        let mut rng = RngStream::new(4, 0);
        let f = MixtureClassifier::point_mass(1);
        let e = estimate_losses(&ctx, &f, 0.5, 1.0, 200, Mode::Sampled, SamplerKind::Multinomial, &mut rng, &mut ledger).unwrap();
        assert_eq!(ledger.per_phase.estimate, 600);
        assert_eq!(ledger.per_distribution, vec![200, 200, 200]);
        assert_eq!(e.raw.len(), 3);
        let p = estimate_losses(&ctx, &f, 0.5, 1.0, 1, Mode::Population, SamplerKind::Multinomial, &mut rng, &mut ledger).unwrap();
        assert_eq!(p.raw, ctx.losses.row(1).to_vec());
    }

    #[test]
    fn horizon_and_sizes() {
        assert_eq!(horizon(1.0, 1, 1.0, 0.1), 1);
        assert_eq!(horizon(1.0, 3, 1.0, 0.1), (3f64.ln() * 100.0).ceil() as usize);
        assert_eq!(horizon(1.0, 2, 1.0, 0.05), 278);
        let s = Schedule::compute(3, 2, &LearnerConfig::new(0.1, 0.1, 0.3, 1.0));
        assert!((s.width - 4.2).abs() < 1e-12);
        assert!((s.eta - (3f64.ln() / s.horizon as f64).sqrt() / 4.2).abs() < 1e-15);
        assert_eq!(s.m3, (600f64.ln() / 0.01).ceil() as u64);
    }

    #[test]
    fn config_validation() {
        let ok = LearnerConfig::new(0.1, 0.1, 0.3, 1.0);
        assert!(ok.validate().is_ok());
        for bad in [
            LearnerConfig { eps: 0.0, ..ok },
            LearnerConfig { delta: 1.0, ..ok },
            LearnerConfig { opt_prime: 1.5, ..ok },
            LearnerConfig { alpha: 0.05, ..ok },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn single_hypothesis_returns_it() {
        let inst = small_instance();
        let ctx = LearningContext::new(&inst, 1);
        let mut ledger = BudgetLedger::new(3);
        let cfg = LearnerConfig::new(0.2, 0.1, 1.0, 1.0);
        let out = boost_learn(&ctx, &[3], &cfg, &BaseOracle, &mut RngStream::new(1, 0), &mut ledger, true).unwrap();
        assert_eq!(out.classifier, MixtureClassifier::point_mass(3));
        assert!(ledger.is_conserved());
        assert_eq!(ledger.total, out.schedule.unwrap().samples_per_run(3, Mode::Sampled));
    }

    #[test]
    fn single_distribution_population() {
        let inst = instance(
            &[&[0, 0, 0], &[1, 0, 0], &[1, 1, 0], &[1, 1, 1]],
            vec![vec![(0, 1, 0.5), (1, 0, 0.3), (2, 1, 0.2)]],
        );
        let ctx = LearningContext::new(&inst, vc_dimension(&inst).unwrap());
        let gt = brute_force_opt(&inst).unwrap();
        let eps = 0.05;
        let mut cfg = LearnerConfig::new(eps, 0.1, gt.opt, 1.0);
        cfg.mode = Mode::Population;
        let mut ledger = BudgetLedger::new(1);
        let out = boost_learn(&ctx, &inst.all_hypotheses(), &cfg, &BaseOracle, &mut RngStream::new(0, 0), &mut ledger, true).unwrap();
        let loss = ctx.losses.mixture_loss(&out.classifier, 0);
        assert!(loss <= gt.opt + 8.0 * eps + 1e-12);
        assert_eq!(ledger.total, 0);
        // survivors are exactly the hypotheses below opt + 8 eps
        let expected = (0..4).filter(|&h| ctx.losses.get(h, 0) < gt.opt + 8.0 * eps).count();
        assert_eq!(out.rounds[0].survivors, expected);
    }

    #[test]
    fn flattened_output_matches_round_average() {
        let inst = small_instance();
        let ctx = LearningContext::new(&inst, vc_dimension(&inst).unwrap());
        let gt = brute_force_opt(&inst).unwrap();
        let mut cfg = LearnerConfig::new(0.02, 0.1, gt.opt, 0.64);
        cfg.mode = Mode::Population;
        let oracle = ExactMinimaxOracle { alpha: 0.64 };
        let mut ledger = BudgetLedger::new(3);
        let out = boost_learn(&ctx, &inst.all_hypotheses(), &cfg, &oracle, &mut RngStream::new(0, 0), &mut ledger, true).unwrap();
        let t = out.rounds.len() as f64;
        for i in 0..3 {
            let avg: f64 = out.rounds.iter().map(|r| r.exact_losses[i]).sum::<f64>() / t;
            assert!((ctx.losses.mixture_loss(&out.classifier, i) - avg).abs() < 1e-10);
        }
        let audit = out.regret.unwrap();
        assert!(audit.holds(), "{audit:?}");
        for r in &out.rounds {
            assert!(r.optimum_survived);
            for (l, e) in r.loss.iter().zip(&r.exact_losses) {
                assert!(l >= e);
                assert!(*l >= gt.opt - 2.0 * 0.64 - 1e-12 && *l <= gt.opt + 2.0 * 0.64 + 1e-12);
            }
        }
    }

    #[test]
    fn oracle_outside_survivors_is_rejected() {
        struct Rogue;
        impl MultiLearnerOracle for Rogue {
            fn alpha(&self) -> f64 {
                1.0
            }
            fn learn(&self, _: &LearningContext, _: &[usize], _: f64, _: &mut RngStream, _: &mut BudgetLedger) -> Result<MixtureClassifier> {
                Ok(MixtureClassifier::point_mass(4))
            }
        }
        let inst = small_instance();
        let ctx = LearningContext::new(&inst, 1);
        let cfg = LearnerConfig::new(0.2, 0.1, 1.0, 1.0);
        let err = boost_learn(&ctx, &[0, 1], &cfg, &Rogue, &mut RngStream::new(0, 0), &mut BudgetLedger::new(3), false);
        assert!(matches!(err, Err(Error::OracleContract(_))));
    }

    #[test]
    fn low_opt_prime_empties_survivors() {
        let inst = small_instance();
        let ctx = LearningContext::new(&inst, 1);
        let mut cfg = LearnerConfig::new(0.01, 0.1, 0.0, 1.0);
        cfg.mode = Mode::Population;
        let err = boost_learn(&ctx, &inst.all_hypotheses(), &cfg, &BaseOracle, &mut RngStream::new(0, 0), &mut BudgetLedger::new(3), false);
        assert!(matches!(err, Err(Error::EmptySurvivors { round: 0, .. })));
    }

    #[test]
    fn strict_assumption_check() {
        let inst = small_instance();
        let ctx = LearningContext::new(&inst, 1);
        let mut cfg = LearnerConfig::new(0.1, 0.1, 1.0, 1.0);
        cfg.mode = Mode::Population;
        let oracle = ExactMinimaxOracle { alpha: 1.0 };
        let out = boost_learn(&ctx, &[0, 1], &cfg, &oracle, &mut RngStream::new(0, 0), &mut BudgetLedger::new(3), false).unwrap();
        assert_eq!(out.warnings.len(), 1);
        cfg.strict_assumptions = true;
        let err = boost_learn(&ctx, &[0, 1], &cfg, &oracle, &mut RngStream::new(0, 0), &mut BudgetLedger::new(3), false);
        assert!(matches!(err, Err(Error::Assumption(_))));
    }
}
