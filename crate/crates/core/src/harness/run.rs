use std::time::Instant;

use crate::error::{Error, Result};
use crate::harness::config::{OptPrime, Pipeline, RunConfig};
use crate::harness::report::RunReport;
use crate::meta::{opt_free_learner, OptLearner, RecursiveLearner, SelectionConfig};
use crate::model::{Instance, LearningContext};
use crate::oracle::{brute_force_opt, vc_dimension};
use crate::sampling::{BudgetLedger, RngStream};

/// Learner described by a config.
pub fn learner_for(config: &RunConfig) -> RecursiveLearner {
    RecursiveLearner {
        depth: match config.pipeline {
            Pipeline::Boost => 1,
            _ => config.depth,
        },
        constants: config.constants,
        mode: config.mode,
        sampler: config.sampler,
        strict_assumptions: config.strict_assumptions,
        record: true,
    }
}

/// Runs the configured pipeline on `inst`.
pub fn execute(config: &RunConfig, inst: &Instance) -> Result<RunReport> {
    config.validate()?;
    let start = Instant::now();
    let vc = match config.vc_dimension {
        Some(d) => d,
        None => vc_dimension(inst)?,
    };
    let truth = brute_force_opt(inst).ok();
    let ctx = LearningContext::new(inst, vc);
    let mut rng = RngStream::new(config.seed, 0);
    let mut ledger = BudgetLedger::new(inst.k());
    let learner = learner_for(config);
    let recursion = Some(learner.schedule(inst.k(), config.eps, config.delta)?);

    let (run, candidates, selected, opt_prime) = match config.pipeline {
        Pipeline::Boost | Pipeline::Recursive => {
            let opt_prime = match config.opt_prime {
                OptPrime::Value(v) => v,
                OptPrime::Keyword(_) => truth
                    .as_ref()
                    .map(|t| t.opt)
                    .ok_or_else(|| Error::config("opt_prime", "exact OPT is unavailable for this instance"))?,
            };
            let run = learner.learn(
                &ctx,
                &inst.all_hypotheses(),
                config.eps,
                config.delta,
                opt_prime,
                &mut rng,
                &mut ledger,
            )?;
            (run, Vec::new(), None, Some(opt_prime))
        }
        Pipeline::OptFree => {
            let sel = SelectionConfig {
                c3: config.constants.c3,
                mode: config.mode,
                sampler: config.sampler,
            };
            let out = opt_free_learner(
                &ctx,
                config.eps,
                config.delta,
                config.search_depth,
                &learner,
                &sel,
                &mut rng,
                &mut ledger,
            )?;
            (out.selected_run, out.candidates, Some(out.selected), None)
        }
    };

    let output_losses = ctx.losses.mixture_losses(&run.classifier);
    Ok(RunReport {
        config: config.clone(),
        max_output_loss: output_losses.iter().copied().fold(0.0, f64::max),
        output: run.classifier,
        output_losses,
        opt: truth.as_ref().map(|t| t.opt),
        opt_argmin: truth.as_ref().map(|t| t.argmin),
        opt_prime,
        vc_dimension: vc,
        budget: ledger,
        recursion,
        schedule: run.schedule,
        rounds: run.rounds,
        regret: run.regret,
        candidates,
        selected,
        warnings: run.warnings,
        wall_clock_ms: start.elapsed().as_millis() as u64,
    })
}
