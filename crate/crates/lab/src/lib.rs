//! Scenario catalog, verification reports and file export for the
//! fractional chemostat solver in [`fracchem`].
//!
//! ```no_run
//! let scenario = fracchem_lab::catalog::scenario("fig1-baseline")?;
//! let report = fracchem_lab::run_scenario(&scenario)?;
//! let verdict = fracchem_lab::verify(&report)?;
//! assert!(verdict.passed());
//! # Ok::<(), fracchem_lab::LabError>(())
//! ```

pub mod catalog;
pub mod error;
pub mod export;
pub mod report;
pub mod scenario;

pub use error::{LabError, Result};
pub use export::{csv, svg, write_outputs, Format};
pub use report::{
    run_scenario, sweep, verify, Check, CheckStatus, RunRecord, RunReport, Series, Verification,
};
pub use scenario::{parse_values, Scenario, Study, SweepParameter};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/lab.md")]
mod book_lab {}
