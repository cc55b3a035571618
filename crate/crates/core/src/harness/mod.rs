//! Configuration, pipeline execution, reports, verification, and instance
//! generation behind the `mdl` binary.

pub mod config;
pub mod gen;
pub mod report;
pub mod run;
pub mod trials;
pub mod verify;

pub use config::{OptKeyword, OptPrime, Pipeline, RunConfig};
pub use report::RunReport;
pub use run::execute;
pub use verify::{verify_report, Check};
