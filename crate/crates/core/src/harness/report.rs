use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::boost::{RoundTelemetry, Schedule};
use crate::error::{Error, Result};
use crate::harness::config::RunConfig;
use crate::meta::{Candidate, RecursionSchedule};
use crate::model::MixtureClassifier;
use crate::mwu::RegretAudit;
use crate::sampling::BudgetLedger;

/// Everything one run produced. Field names are part of the file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub output: MixtureClassifier,
    /// Exact per-distribution losses of `output`.
    pub output_losses: Vec<f64>,
    pub max_output_loss: f64,
    /// Brute-force OPT, when the instance is small enough.
    pub opt: Option<f64>,
    pub opt_argmin: Option<usize>,
    /// OPT estimate handed to the learner; absent for the OPT-free pipeline.
    pub opt_prime: Option<f64>,
    pub vc_dimension: usize,
    pub budget: BudgetLedger,
    pub recursion: Option<RecursionSchedule>,
    /// Top-level schedule of the run that produced `output`.
    pub schedule: Option<Schedule>,
    pub rounds: Vec<RoundTelemetry>,
    pub regret: Option<RegretAudit>,
    pub candidates: Vec<Candidate>,
    pub selected: Option<usize>,
    pub warnings: Vec<String>,
    pub wall_clock_ms: u64,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// JSON with the wall-clock field zeroed: equal for equal configs.
    pub fn deterministic_json(&self) -> Result<String> {
        RunReport {
            wall_clock_ms: 0,
            ..self.clone()
        }
        .to_json()
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| Error::InvalidArgument(format!("report at `{}`: {}", e.path(), e.inner())))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// One row per round: counts, window, regret, then `p`, `l_t`, the raw
    /// estimates and the exact losses, each spread over `k` columns.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let k = self.output_losses.len();
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = ["round", "cover_size", "survivors", "window_lo", "window_hi", "regret"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        for prefix in ["p", "loss", "estimate", "exact"] {
            header.extend((0..k).map(|i| format!("{prefix}_{i}")));
        }
        w.write_record(&header).map_err(csv_err)?;
        for r in &self.rounds {
            let mut row = vec![
                r.round.to_string(),
                r.cover_size.to_string(),
                r.survivors.to_string(),
                r.window[0].to_string(),
                r.window[1].to_string(),
                r.regret.to_string(),
            ];
            for col in [&r.strategy, &r.loss, &r.estimates, &r.exact_losses] {
                row.extend(col.iter().map(|v| v.to_string()));
            }
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}
