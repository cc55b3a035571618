//! Multi-distribution learning over explicit finite hypothesis classes.
//!
//! A boosting loop runs multiplicative weights over `k` distributions. Each
//! round covers the class on samples from the current mixture, filters out
//! hypotheses that do badly on some heavy sub-mixture, calls an oracle on
//! the survivors, and feeds truncated loss estimates back. The loop can be
//! nested as its own oracle, and wrapped in a grid search that removes the
//! need to know the optimal minimax loss.

pub mod boost;
pub mod cover;
pub mod error;
pub mod filter;
pub mod harness;
pub mod meta;
pub mod model;
pub mod mwu;
pub mod oracle;
pub mod sampling;
pub mod stats;

pub use error::{Error, Result};
