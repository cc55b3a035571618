//! Multiplicative weights over `n` experts with a fixed horizon and a
//! declared loss width.
//!
//! The engine minimizes loss. Callers that maximize (the boosting loop)
//! feed negated losses.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::MixtureStrategy;

#[derive(Debug, Clone, PartialEq)]
pub struct MwuState {
    eta: f64,
    cumulative: Vec<f64>,
    t: usize,
    horizon: usize,
}

impl MwuState {
    /// `eta = sqrt(ln(n) / T) / B`.
    pub fn init(n: usize, horizon: usize, width: f64) -> Result<Self> {
        if n == 0 || horizon == 0 {
            return Err(Error::InvalidArgument(format!(
                "MWU needs n >= 1 and T >= 1 (got n = {n}, T = {horizon})"
            )));
        }
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::InvalidArgument(format!("MWU width must be positive, got {width}")));
        }
        let eta = ((n as f64).ln() / horizon as f64).sqrt() / width;
        Ok(Self::with_eta(n, horizon, eta))
    }

    pub fn with_eta(n: usize, horizon: usize, eta: f64) -> Self {
        MwuState {
            eta,
            cumulative: vec![0.0; n],
            t: 0,
            horizon,
        }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn rounds(&self) -> usize {
        self.t
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// Replaces the cumulative losses; used by tests probing the softmax.
    pub fn set_cumulative(&mut self, cumulative: Vec<f64>) -> Result<()> {
        if cumulative.len() != self.cumulative.len() {
            return Err(Error::LengthMismatch {
                expected: self.cumulative.len(),
                got: cumulative.len(),
            });
        }
        self.cumulative = cumulative;
        Ok(())
    }

    /// `p(i) ∝ exp(-eta * (c_i - min_j c_j))`.
    pub fn strategy(&self) -> MixtureStrategy {
        MixtureStrategy::new(softmax_weights(self.eta, &self.cumulative))
            .expect("softmax of finite cumulative losses is a probability vector")
    }

    pub fn update(&mut self, loss: &[f64]) -> Result<()> {
        if loss.len() != self.cumulative.len() {
            return Err(Error::LengthMismatch {
                expected: self.cumulative.len(),
                got: loss.len(),
            });
        }
        if self.t >= self.horizon {
            return Err(Error::HorizonExceeded {
                horizon: self.horizon,
            });
        }
        for (c, l) in self.cumulative.iter_mut().zip(loss) {
            *c += l;
        }
        self.t += 1;
        Ok(())
    }
}

fn softmax_weights(eta: f64, cumulative: &[f64]) -> Vec<f64> {
    let min = cumulative.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = cumulative.iter().map(|c| (-eta * (c - min)).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|v| v / total).collect()
}

/// One round of MWU history: the strategy played, the loss revealed, and the
/// declared window `[offset, offset + width]` the loss is supposed to lie in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub strategy: Vec<f64>,
    pub loss: Vec<f64>,
    pub offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegretAudit {
    pub realized: f64,
    pub bound: f64,
}

impl RegretAudit {
    pub fn holds(&self) -> bool {
        self.realized <= self.bound + 1e-9 * self.bound.max(1.0)
    }
}

/// `sum_t <p_t, l_t> - min_i sum_t l_t(i)`.
pub fn realized_regret(history: &[RoundRecord]) -> f64 {
    let Some(first) = history.first() else {
        return 0.0;
    };
    let n = first.loss.len();
    let mut played = 0.0;
    let mut totals = vec![0.0; n];
    for r in history {
        played += r.strategy.iter().zip(&r.loss).map(|(p, l)| p * l).sum::<f64>();
        for (t, l) in totals.iter_mut().zip(&r.loss) {
            *t += l;
        }
    }
    played - totals.into_iter().fold(f64::INFINITY, f64::min)
}

/// `2 * sqrt(ln(n) * T) * B`.
pub fn regret_bound(n: usize, rounds: usize, width: f64) -> f64 {
    2.0 * ((n as f64).ln() * rounds as f64).sqrt() * width
}

/// Rounds `(round, expert, value)` whose loss leaves its declared window.
pub fn width_violations(history: &[RoundRecord], width: f64) -> Vec<(usize, usize, f64)> {
    let tol = 1e-12;
    history
        .iter()
        .enumerate()
        .flat_map(|(t, r)| {
            r.loss
                .iter()
                .enumerate()
                .filter(move |(_, &l)| l < r.offset - tol || l > r.offset + width + tol)
                .map(move |(i, &l)| (t, i, l))
        })
        .collect()
}

/// Realized regret alongside the theoretical bound. A loss outside its
/// declared window is reported as an error since the bound then says nothing.
pub fn regret_audit(history: &[RoundRecord], width: f64) -> Result<RegretAudit> {
    if let Some(first) = history.first() {
        let n = first.loss.len();
        for r in history {
            if r.loss.len() != n || r.strategy.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    got: r.loss.len().min(r.strategy.len()),
                });
            }
        }
    }
    if let Some(&(round, expert, value)) = width_violations(history, width).first() {
        let offset = history[round].offset;
        return Err(Error::WidthViolation {
            round,
            expert,
            value,
            lo: offset,
            hi: offset + width,
        });
    }
    let n = history.first().map_or(1, |r| r.loss.len());
    Ok(RegretAudit {
        realized: realized_regret(history),
        bound: regret_bound(n, history.len(), width),
    })
}

/// Plays MWU against a fixed loss sequence and returns the history.
pub fn play(losses: &[(Vec<f64>, f64)], width: f64) -> Result<Vec<RoundRecord>> {
    let n = losses.first().map_or(1, |(l, _)| l.len());
    let mut state = MwuState::init(n, losses.len().max(1), width)?;
    let mut history = Vec::with_capacity(losses.len());
    for (loss, offset) in losses {
        let strategy = state.strategy().as_slice().to_vec();
        state.update(loss)?;
        history.push(RoundRecord {
            strategy,
            loss: loss.clone(),
            offset: *offset,
        });
    }
    Ok(history)
}
