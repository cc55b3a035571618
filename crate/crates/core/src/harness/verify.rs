//! Independent re-checks of a report against its instance.

use serde::Serialize;

use crate::boost::mwu_history;
use crate::harness::report::RunReport;
use crate::model::{Instance, LossTable};
use crate::mwu::{realized_regret, regret_bound, width_violations, MwuState};
use crate::oracle::brute_force_opt;

const TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        name,
        passed,
        detail: detail.into(),
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

pub fn verify_report(report: &RunReport, inst: &Instance) -> Vec<Check> {
    let mut out = Vec::new();
    let k = inst.k();

    if let Err(e) = report.output.validate_against(inst) {
        out.push(check("output_classifier", false, e.to_string()));
        return out;
    }
    out.push(check("output_classifier", true, format!("{} components", report.output.components().len())));

    let table = LossTable::compute(inst);
    let exact = table.mixture_losses(&report.output);
    let mismatch: Vec<String> = exact
        .iter()
        .zip(&report.output_losses)
        .enumerate()
        .filter(|(_, (a, b))| (*a - *b).abs() > TOL)
        .map(|(i, (a, b))| format!("D{i}: reported {b}, exact {a}"))
        .collect();
    let length_ok = report.output_losses.len() == k;
    out.push(check(
        "output_losses",
        length_ok && mismatch.is_empty(),
        if !length_ok {
            format!("{} losses for {k} distributions", report.output_losses.len())
        } else if mismatch.is_empty() {
            "match exact evaluation".to_string()
        } else {
            mismatch.join("; ")
        },
    ));
    let max = exact.iter().copied().fold(0.0, f64::max);
    out.push(check(
        "max_output_loss",
        (max - report.max_output_loss).abs() <= TOL,
        format!("reported {}, exact {max}", report.max_output_loss),
    ));
    let in_range = report
        .output_losses
        .iter()
        .chain(report.rounds.iter().flat_map(|r| r.loss.iter().chain(&r.exact_losses)))
        .all(|v| (0.0..=1.0).contains(v));
    out.push(check("losses_in_unit_interval", in_range, ""));

    if let Some(opt) = report.opt {
        match brute_force_opt(inst) {
            Ok(t) => out.push(check(
                "opt",
                (t.opt - opt).abs() <= TOL && Some(t.argmin) == report.opt_argmin,
                format!("reported {opt}, exact {}", t.opt),
            )),
            Err(e) => out.push(check("opt", false, e.to_string())),
        }
    }

    let b = &report.budget;
    out.push(check(
        "ledger_conserved",
        b.is_conserved() && b.per_distribution.len() == k,
        format!("total {}", b.total),
    ));

    if let Some(schedule) = &report.schedule {
        let history = mwu_history(&report.rounds);
        let mut state = MwuState::with_eta(k, schedule.horizon, schedule.eta);
        let mut replay_err = None;
        for (t, rec) in history.iter().enumerate() {
            let p = state.strategy();
            let dev = p
                .as_slice()
                .iter()
                .zip(&rec.strategy)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if rec.strategy.len() != k || dev > 1e-9 {
                replay_err = Some(format!("round {t}: strategy deviates by {dev}"));
                break;
            }
            if let Err(e) = state.update(&rec.loss) {
                replay_err = Some(format!("round {t}: {e}"));
                break;
            }
        }
        if !report.rounds.is_empty() {
            out.push(check(
                "mwu_replay",
                replay_err.is_none(),
                replay_err.unwrap_or_else(|| format!("{} rounds replayed", history.len())),
            ));
            let realized = realized_regret(&history);
            let bound = regret_bound(k, history.len(), schedule.width);
            out.push(check(
                "regret_bound",
                realized <= bound + 1e-9 * bound.max(1.0),
                format!("realized {realized}, bound {bound}"),
            ));
            let violations = width_violations(&history, schedule.width);
            let rounds: Vec<usize> = {
                let mut r: Vec<usize> = violations.iter().map(|v| v.0).collect();
                r.dedup();
                r
            };
            out.push(check(
                "width_window",
                violations.is_empty(),
                if rounds.is_empty() {
                    format!("all losses within windows of width {}", schedule.width)
                } else {
                    format!("rounds outside window: {rounds:?}")
                },
            ));
        }
    }

    if let Some(sel) = report.selected {
        let best = report
            .candidates
            .iter()
            .filter_map(|c| c.empirical_max_loss)
            .fold(f64::INFINITY, f64::min);
        let chosen = report.candidates.get(sel).and_then(|c| c.empirical_max_loss);
        out.push(check(
            "selection",
            chosen == Some(best),
            format!("selected {sel} with {chosen:?}, best {best}"),
        ));
    }
    out
}
