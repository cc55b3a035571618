//! Recursive self-application of the boosting loop, and the wrapper that
//! removes the need to know OPT by searching over a grid of guesses.

use serde::{Deserialize, Serialize};

use crate::boost::{boost_learn, BaseOracle, BoostOutcome, Constants, LearnerConfig, MultiLearnerOracle};
use crate::error::{Error, Result};
use crate::model::{LearningContext, MixtureClassifier};
use crate::sampling::{draw_atom_counts, BudgetLedger, Mode, Phase, RngStream, SamplerKind};

/// Parameters of one recursion level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelParams {
    pub level: usize,
    pub eps: f64,
    pub delta: f64,
    /// Error guarantee of this level's oracle, clamped to 1.
    pub alpha: f64,
    pub horizon: usize,
}

/// Levels from the top (`depth`) down to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecursionSchedule {
    pub levels: Vec<LevelParams>,
}

/// `eps^{(j-1)/j}`: the error target handed from level `j` to level `j - 1`.
pub fn child_eps(eps: f64, level: usize) -> f64 {
    eps.powf((level - 1) as f64 / level as f64)
}

impl RecursionSchedule {
    pub fn derive(k: usize, depth: usize, eps: f64, delta: f64, c_t: f64) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidArgument("recursion depth must be at least 1".into()));
        }
        let mut levels = Vec::with_capacity(depth);
        let (mut eps, mut delta) = (eps, delta);
        for level in (1..=depth).rev() {
            let alpha = if level == 1 { 1.0 } else { (32.0 * child_eps(eps, level)).min(1.0) };
            let horizon = crate::boost::horizon(c_t, k, alpha, eps);
            levels.push(LevelParams {
                level,
                eps,
                delta,
                alpha,
                horizon,
            });
            if level > 1 {
                eps = child_eps(eps, level);
                delta /= 32.0 * horizon as f64;
            }
        }
        Ok(RecursionSchedule { levels })
    }

    pub fn top(&self) -> &LevelParams {
        &self.levels[0]
    }
}

/// A learner that takes an OPT estimate, as wrapped by [`opt_free_learner`].
pub trait OptLearner {
    /// Exponent of `1/eps` in the learner's sample complexity.
    fn kappa(&self) -> f64 {
        2.0
    }

    #[allow(clippy::too_many_arguments)]
    fn learn(
        &self,
        ctx: &LearningContext,
        hyp_subset: &[usize],
        eps: f64,
        delta: f64,
        opt_prime: f64,
        rng: &mut RngStream,
        ledger: &mut BudgetLedger,
    ) -> Result<BoostOutcome>;
}

/// The level-`depth` learner: depth 1 boosts with the base oracle, deeper
/// levels boost with a level `depth - 1` learner as their oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecursiveLearner {
    pub depth: usize,
    pub constants: Constants,
    pub mode: Mode,
    pub sampler: SamplerKind,
    pub strict_assumptions: bool,
    /// Keep top-level round telemetry.
    pub record: bool,
}

impl RecursiveLearner {
    pub fn new(depth: usize) -> Self {
        RecursiveLearner {
            depth,
            constants: Constants::default(),
            mode: Mode::Sampled,
            sampler: SamplerKind::default(),
            strict_assumptions: false,
            record: true,
        }
    }

    pub fn schedule(&self, k: usize, eps: f64, delta: f64) -> Result<RecursionSchedule> {
        RecursionSchedule::derive(k, self.depth, eps, delta, self.constants.c_t)
    }

    #[allow(clippy::too_many_arguments)]
    fn learn_at(
        &self,
        depth: usize,
        ctx: &LearningContext,
        hyp_subset: &[usize],
        eps: f64,
        delta: f64,
        opt_prime: f64,
        rng: &mut RngStream,
        ledger: &mut BudgetLedger,
        record: bool,
    ) -> Result<BoostOutcome> {
        if depth == 0 {
            return Err(Error::InvalidArgument("recursion depth must be at least 1".into()));
        }
        let alpha = if depth == 1 { 1.0 } else { (32.0 * child_eps(eps, depth)).min(1.0) };
        let config = LearnerConfig {
            eps,
            delta,
            opt_prime,
            alpha,
            constants: self.constants,
            mode: self.mode,
            sampler: self.sampler,
            strict_assumptions: self.strict_assumptions,
        };
        if depth == 1 {
            return boost_learn(ctx, hyp_subset, &config, &BaseOracle, rng, ledger, record);
        }
        let horizon = crate::boost::horizon(self.constants.c_t, ctx.inst.k(), alpha, eps);
        let oracle = RecursiveOracle {
            learner: self,
            depth: depth - 1,
            eps: child_eps(eps, depth),
            delta: delta / (32.0 * horizon as f64),
            alpha,
        };
        boost_learn(ctx, hyp_subset, &config, &oracle, rng, ledger, record)
    }
}

impl OptLearner for RecursiveLearner {
    fn learn(
        &self,
        ctx: &LearningContext,
        hyp_subset: &[usize],
        eps: f64,
        delta: f64,
        opt_prime: f64,
        rng: &mut RngStream,
        ledger: &mut BudgetLedger,
    ) -> Result<BoostOutcome> {
        self.learn_at(self.depth, ctx, hyp_subset, eps, delta, opt_prime, rng, ledger, self.record)
    }
}

/// A lower-depth learner serving as the oracle of the level above. Its draws
/// are charged to the parent under [`Phase::OracleRecursion`].
pub struct RecursiveOracle<'a> {
    learner: &'a RecursiveLearner,
    depth: usize,
    eps: f64,
    delta: f64,
    alpha: f64,
}

impl MultiLearnerOracle for RecursiveOracle<'_> {
    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn learn(
        &self,
        ctx: &LearningContext,
        surviving: &[usize],
        opt_prime: f64,
        rng: &mut RngStream,
        ledger: &mut BudgetLedger,
    ) -> Result<MixtureClassifier> {
        let mut inner = BudgetLedger::new(ctx.inst.k());
        let result = self
            .learner
            .learn_at(self.depth, ctx, surviving, self.eps, self.delta, opt_prime, rng, &mut inner, false);
        ledger.absorb_as(&inner, Phase::OracleRecursion);
        Ok(result?.classifier)
    }
}

/// Grid and budgets of one search stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptSearchPlan {
    pub search_depth: usize,
    pub eps: f64,
    pub grid: Vec<f64>,
    pub thread_delta: f64,
    pub selection_samples: u64,
}

/// `{eps, 2 eps, ..., 1}`, the last point capped at 1.
pub fn base_grid(eps: f64) -> Vec<f64> {
    let b = (1.0 / eps - 1e-9).ceil().max(1.0) as usize;
    (1..=b).map(|j| (j as f64 * eps).min(1.0)).collect()
}

/// `center - b eps` for `b = 1..=ceil(33 eps_pilot / eps)`, clamped to
/// `[0, 1]` with repeats dropped.
pub fn refined_grid(center: f64, eps: f64, eps_pilot: f64) -> Vec<f64> {
    let n = (33.0 * eps_pilot / eps - 1e-9).ceil().max(1.0) as usize;
    let mut grid: Vec<f64> = Vec::with_capacity(n);
    for b in 1..=n {
        let v = (center - b as f64 * eps).clamp(0.0, 1.0);
        if !grid.contains(&v) {
            grid.push(v);
        }
    }
    grid
}

/// Error target of the pilot run at search depth `s + 1`:
/// `eps^{(kappa + kappa^-s) / (kappa + kappa^-(s-1))}`.
pub fn pilot_eps(eps: f64, kappa: f64, s: usize) -> f64 {
    let s = s as i32;
    eps.powf((kappa + kappa.powi(-s)) / (kappa + kappa.powi(-(s - 1))))
}

/// `ceil(c3 * ln(max(k * B / (eps delta), e)) / eps^2)`.
pub fn selection_sample_size(c3: f64, k: usize, candidates: usize, eps: f64, delta: f64) -> u64 {
    let l = ((k * candidates) as f64 / (eps * delta)).max(std::f64::consts::E).ln();
    ((c3 * l / (eps * eps)).ceil() as u64).max(1)
}

/// How candidates are compared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    pub c3: f64,
    pub mode: Mode,
    pub sampler: SamplerKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateStage {
    Grid,
    Pilot,
    Refined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub stage: CandidateStage,
    pub opt_prime: Option<f64>,
    pub aborted: Option<String>,
    pub empirical_losses: Option<Vec<f64>>,
    pub empirical_max_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptFreeOutcome {
    pub classifier: MixtureClassifier,
    pub candidates: Vec<Candidate>,
    pub selected: usize,
    /// Run that produced the selected candidate, with its telemetry.
    pub selected_run: BoostOutcome,
    pub plan: OptSearchPlan,
    /// Estimated max-loss of the pilot output, for depths above 1.
    pub pilot_center: Option<f64>,
}

/// Per-distribution loss estimates of `f` from `n` fresh samples each, or
/// exact losses in population mode.
pub fn estimate_all(
    ctx: &LearningContext,
    f: &MixtureClassifier,
    n: u64,
    sel: &SelectionConfig,
    rng: &mut RngStream,
    ledger: &mut BudgetLedger,
) -> Result<Vec<f64>> {
    if sel.mode == Mode::Population {
        return Ok(ctx.losses.mixture_losses(f));
    }
    let inst = ctx.inst;
    let q = f.prob_one(inst);
    (0..inst.k())
        .map(|i| {
            let counts = draw_atom_counts(inst, i, n, sel.sampler, rng, ledger, Phase::Selection)?;
            let wrong: f64 = inst
                .distribution(i)
                .atoms()
                .iter()
                .zip(&counts)
                .map(|(a, &c)| c as f64 * if a.y { 1.0 - q[a.x] } else { q[a.x] })
                .sum();
            Ok((wrong / n as f64).clamp(0.0, 1.0))
        })
        .collect()
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

/// Runs one learner thread per grid value, each with its own derived stream
/// and ledger; a thread whose survivor set empties is recorded as aborted.
#[allow(clippy::too_many_arguments)]
fn run_threads(
    ctx: &LearningContext,
    learner: &dyn OptLearner,
    grid: &[f64],
    eps: f64,
    thread_delta: f64,
    stage: CandidateStage,
    rng: &RngStream,
    ledger: &mut BudgetLedger,
) -> Result<Vec<(Candidate, Option<BoostOutcome>)>> {
    let all = ctx.inst.all_hypotheses();
    let mut out = Vec::with_capacity(grid.len());
    for (b, &opt_prime) in grid.iter().enumerate() {
        let mut thread_rng = rng.derive(b as u64 + 1);
        let mut thread_ledger = BudgetLedger::new(ctx.inst.k());
        let result = learner.learn(ctx, &all, eps, thread_delta, opt_prime, &mut thread_rng, &mut thread_ledger);
        ledger.merge(&thread_ledger);
        let (aborted, run) = match result {
            Ok(run) => (None, Some(run)),
            Err(e @ Error::EmptySurvivors { .. }) => (Some(e.to_string()), None),
            Err(e) => return Err(e),
        };
        out.push((
            Candidate {
                stage,
                opt_prime: Some(opt_prime),
                aborted,
                empirical_losses: None,
                empirical_max_loss: None,
            },
            run,
        ));
    }
    Ok(out)
}

/// Estimates every finished candidate and picks the smallest empirical
/// max-loss, lowest index on ties.
fn select(
    ctx: &LearningContext,
    entries: &mut [(Candidate, Option<BoostOutcome>)],
    n: u64,
    sel: &SelectionConfig,
    rng: &mut RngStream,
    ledger: &mut BudgetLedger,
) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, (cand, run)) in entries.iter_mut().enumerate() {
        let Some(run) = run else { continue };
        let losses = estimate_all(ctx, &run.classifier, n, sel, rng, ledger)?;
        let m = max_of(&losses);
        cand.empirical_losses = Some(losses);
        cand.empirical_max_loss = Some(m);
        if best.is_none_or(|(_, bm)| m < bm) {
            best = Some((j, m));
        }
    }
    best.map(|(j, _)| j)
        .ok_or_else(|| Error::InvalidArgument("every candidate aborted".into()))
}

fn finish(
    mut entries: Vec<(Candidate, Option<BoostOutcome>)>,
    selected: usize,
    plan: OptSearchPlan,
    pilot_center: Option<f64>,
) -> OptFreeOutcome {
    let run = entries[selected].1.take().expect("selected candidate finished");
    OptFreeOutcome {
        classifier: run.classifier.clone(),
        candidates: entries.into_iter().map(|(c, _)| c).collect(),
        selected,
        selected_run: run,
        plan,
        pilot_center,
    }
}

/// Learns without knowing OPT. Depth 1 runs the learner on the grid
/// `{eps, ..., 1}` and keeps the best candidate on fresh samples. Depth
/// `s + 1` first solves the problem at depth `s` with a coarser error, then
/// searches a grid of pitch `eps` just below that run's estimated max-loss.
#[allow(clippy::too_many_arguments)]
pub fn opt_free_learner(
    ctx: &LearningContext,
    eps: f64,
    delta: f64,
    search_depth: usize,
    learner: &dyn OptLearner,
    sel: &SelectionConfig,
    rng: &mut RngStream,
    ledger: &mut BudgetLedger,
) -> Result<OptFreeOutcome> {
    if search_depth == 0 {
        return Err(Error::InvalidArgument("search depth must be at least 1".into()));
    }
    if !(eps > 0.0 && eps <= 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("need 0 < eps <= 1 and 0 < delta < 1, got {eps}, {delta}")));
    }
    let k = ctx.inst.k();
    let base = rng.clone();
    if search_depth == 1 {
        let grid = base_grid(eps);
        let threads = grid.len();
        let plan = OptSearchPlan {
            search_depth,
            eps,
            thread_delta: delta / (2.0 * threads as f64),
            selection_samples: selection_sample_size(sel.c3, k, threads, eps, delta),
            grid,
        };
        let mut entries = run_threads(ctx, learner, &plan.grid, eps, plan.thread_delta, CandidateStage::Grid, &base, ledger)?;
        let selected = select(ctx, &mut entries, plan.selection_samples, sel, &mut base.derive(0), ledger)?;
        return Ok(finish(entries, selected, plan, None));
    }

    let s = search_depth - 1;
    let eps_pilot = pilot_eps(eps, learner.kappa(), s);
    let pilot = opt_free_learner(ctx, eps_pilot, delta / 2.0, s, learner, sel, &mut base.derive(0), ledger)?;

    let n_center = selection_sample_size(sel.c3, k, 1, eps, delta / 4.0);
    let center = max_of(&estimate_all(ctx, &pilot.classifier, n_center, sel, &mut base.derive(1), ledger)?);
    let grid = refined_grid(center, eps, eps_pilot);
    let threads = grid.len();
    let plan = OptSearchPlan {
        search_depth,
        eps,
        thread_delta: delta / (4.0 * threads as f64),
        selection_samples: selection_sample_size(sel.c3, k, threads + 1, eps, delta / 4.0),
        grid,
    };
    let refined_rng = base.derive(2);
    let mut entries = vec![(
        Candidate {
            stage: CandidateStage::Pilot,
            opt_prime: None,
            aborted: None,
            empirical_losses: None,
            empirical_max_loss: None,
        },
        Some(pilot.selected_run),
    )];
    entries.extend(run_threads(
        ctx,
        learner,
        &plan.grid,
        eps,
        plan.thread_delta,
        CandidateStage::Refined,
        &refined_rng,
        ledger,
    )?);
    let selected = select(ctx, &mut entries, plan.selection_samples, sel, &mut refined_rng.derive(0), ledger)?;
    Ok(finish(entries, selected, plan, Some(center)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Atom, BitRow, DiscreteDistribution, Instance};
    use crate::oracle::{brute_force_opt, vc_dimension};

    fn instance() -> Instance {
        let rows: Vec<BitRow> = (0..16u32)
            .map(|m| BitRow::from_bools(&(0..4).map(|x| m >> x & 1 == 1).collect::<Vec<_>>()))
            .collect();
        let d = |w: [(bool, f64); 4]| {
            DiscreteDistribution::new(w.iter().enumerate().map(|(x, &(y, p))| Atom { x, y, p }).collect()).unwrap()
        };
        Instance::new(
            4,
            rows,
            vec![
                d([(true, 0.4), (false, 0.3), (true, 0.2), (false, 0.1)]),
                d([(false, 0.4), (false, 0.3), (true, 0.2), (true, 0.1)]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn schedule_arithmetic() {
        let s = RecursionSchedule::derive(3, 2, 0.04, 0.1, 1.0).unwrap();
        assert_eq!(s.levels.len(), 2);
        let (top, inner) = (s.levels[0], s.levels[1]);
        assert_eq!(top.level, 2);
        assert!((inner.eps - 0.2).abs() < 1e-12);
        assert_eq!(inner.alpha, 1.0);
        // 32 * 0.2 = 6.4, clamped
        assert_eq!(top.alpha, 1.0);
        assert!((inner.delta - 0.1 / (32.0 * top.horizon as f64)).abs() < 1e-18);

        let s = RecursionSchedule::derive(3, 3, 0.001, 0.1, 1.0).unwrap();
        assert!((s.levels[1].eps - 0.001f64.powf(2.0 / 3.0)).abs() < 1e-15);
        assert!((s.levels[2].eps - 0.001f64.powf(1.0 / 3.0)).abs() < 1e-12);
        assert!((s.levels[0].alpha - 0.32).abs() < 1e-12);
        assert!(RecursionSchedule::derive(3, 0, 0.1, 0.1, 1.0).is_err());
    }

    #[test]
    fn grid_covers_unit_interval() {
        for eps in [0.3, 0.2, 0.1, 0.07, 0.05, 0.01] {
            let g = base_grid(eps);
            assert_eq!(*g.last().unwrap(), 1.0);
            for j in 0..=1000 {
                let opt = j as f64 / 1000.0;
                assert!(g.iter().any(|&v| (v - opt).abs() <= eps + 1e-12), "eps {eps} opt {opt}");
            }
        }
        assert_eq!(base_grid(0.1).len(), 10);
    }

    #[test]
    fn refined_grid_shape() {
        let g = refined_grid(0.5, 0.05, 0.05);
        assert_eq!(g.len(), 10);
        assert!((g[0] - 0.45).abs() < 1e-12);
        let g = refined_grid(0.1, 0.05, 0.1);
        // 66 steps, all but the first clamp to 0
        assert_eq!(g, vec![0.05, 0.0]);
    }

    #[test]
    fn pilot_exponent() {
        assert!((pilot_eps(0.05, 2.0, 1) - 0.05f64.powf(5.0 / 6.0)).abs() < 1e-15);
        assert!((pilot_eps(0.05, 2.0, 2) - 0.05f64.powf(2.25 / 2.5)).abs() < 1e-15);
    }

    struct Fixed(usize);

    impl OptLearner for Fixed {
        fn learn(&self, _: &LearningContext, _: &[usize], _: f64, _: f64, _: f64, _: &mut RngStream, _: &mut BudgetLedger) -> Result<BoostOutcome> {
            Ok(BoostOutcome::from_classifier(MixtureClassifier::point_mass(self.0)))
        }
    }

    #[test]
    fn identical_candidates_select_first() {
        let inst = instance();
        let ctx = LearningContext::new(&inst, 4);
        let h = brute_force_opt(&inst).unwrap().argmin;
        let sel = SelectionConfig { c3: 1.0, mode: Mode::Sampled, sampler: SamplerKind::Multinomial };
        let mut ledger = BudgetLedger::new(2);
        let out = opt_free_learner(&ctx, 0.1, 0.1, 1, &Fixed(h), &sel, &mut RngStream::new(0, 0), &mut ledger).unwrap();
        assert_eq!(out.classifier, MixtureClassifier::point_mass(h));
        assert_eq!(out.candidates.len(), 10);
        assert_eq!(ledger.per_phase.selection, 10 * 2 * out.plan.selection_samples);
        assert!(ledger.is_conserved());
    }

    #[test]
    fn depth_one_and_two_population() {
        let inst = instance();
        let ctx = LearningContext::new(&inst, vc_dimension(&inst).unwrap());
        let opt = brute_force_opt(&inst).unwrap().opt;
        let mut learner = RecursiveLearner::new(1);
        learner.mode = Mode::Population;
        let sel = SelectionConfig { c3: 1.0, mode: Mode::Population, sampler: SamplerKind::Multinomial };
        for depth in [1, 2] {
            let mut ledger = BudgetLedger::new(2);
            let out = opt_free_learner(&ctx, 0.1, 0.1, depth, &learner, &sel, &mut RngStream::new(3, 0), &mut ledger).unwrap();
            let chosen = max_of(&ctx.losses.mixture_losses(&out.classifier));
            for c in out.candidates.iter().filter_map(|c| c.empirical_max_loss) {
                assert!(chosen <= c);
            }
            assert!(chosen >= opt);
            assert_eq!(out.candidates[out.selected].empirical_max_loss, Some(chosen));
            assert_eq!(ledger.total, 0);
            if depth == 2 {
                assert_eq!(out.candidates[0].stage, CandidateStage::Pilot);
                assert!(out.pilot_center.is_some());
            }
        }
    }

    #[test]
    fn recursion_charges_oracle_phase() {
        let inst = instance();
        let ctx = LearningContext::new(&inst, vc_dimension(&inst).unwrap());
        let opt = brute_force_opt(&inst).unwrap().opt;
        let learner = RecursiveLearner::new(2);
        let mut ledger = BudgetLedger::new(2);
        let out = learner.learn(&ctx, &inst.all_hypotheses(), 0.3, 0.1, opt, &mut RngStream::new(5, 0), &mut ledger).unwrap();
        assert!(ledger.per_phase.oracle_recursion > 0);
        assert!(ledger.is_conserved());
        let sched = out.schedule.unwrap();
        let outer = sched.samples_per_run(2, Mode::Sampled);
        assert_eq!(ledger.total - ledger.per_phase.oracle_recursion, outer);
        assert!(!out.warnings.is_empty());
    }
}
