//! Seeded ensemble experiments: every inequality of the library checked on
//! random positive martingales, empirical constants, and reproducible
//! CSV/JSON reports.

mod calibration;
pub mod checks;
mod config;
mod report;
mod suite;

pub use calibration::{Baseline, REGRESSION_SLACK};
pub use config::{ExperimentConfig, FiltrationChoice, Fingerprint, TrialFactory, TrialSetup};
pub use report::{parse_csv, CheckSummary, ExperimentReport, RegressionCheck, Row, Summary, CSV_HEADER};
pub use suite::{
    bg_constant_sweep, bg_constant_sweep_with, c0_report, calibrate, decompose_report, decomposition_rows, llogl_check,
    llogl_check_with, run_verification_suite, run_verification_suite_with, Execution,
};
