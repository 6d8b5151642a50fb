//! Monte Carlo harness: Ville-event frequency, pathwise and conditional
//! bound checks, confidence-sequence coverage and long-run LIL diagnostics.
//!
//! Robbins log-wealth is never evaluated by quadrature at every step.
//! Each check only needs `ln Z_t` on one side of a threshold, so steps are
//! screened with certified brackets (see [`Screen`]) and quadrature runs
//! only when the brackets straddle a threshold.

mod config;
pub mod lil;
pub mod output;
mod report;
mod run;
mod screen;
pub mod stats;

pub use config::{ExperimentConfig, LilConfig};
pub use lil::{lil_longrun, BandCheck, LilCheckpoint, LilDiagnostics, LilPath, LilReport};
pub use report::{
    version_string, BoundSummary, ConditionalSummary, ExperimentReport, LilSummary, RhoViolations, RuntimeStats,
    VilleSummary,
};
pub use run::{run_experiment, run_path, PathRun, TraceRow, VilleOutcome};
pub use screen::{Knowledge, Screen};
