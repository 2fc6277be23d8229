//! Experiment harness: single missions, the Base-vs-MROS matrix, summary
//! tables and the pick-and-place failure scenarios.

mod matrix;
mod mission;
mod pyramid;
mod snapshot;
mod summary;

pub use matrix::{run_matrix, run_matrix_to_file, MatrixFileReport, MatrixSpec, RunRecord, CSV_HEADER};
pub use mission::{
    factory_grid, navigation_model, run_mission, InitialConfig, MissionMetrics, MissionOptions, MissionRun, Mode,
    TestCase, INITIAL_ACCEL, INITIAL_CONFIGS,
};
pub use pyramid::{run_pyramid_scenarios, PyramidReport, ScenarioResult};
pub use snapshot::{load_snapshot, reason_over_snapshot, Snapshot, SnapshotError};
pub use summary::{parse_runs, summarize, Summary, SummaryError};

/// Environment variable overriding the default base seed.
pub const SEED_ENV: &str = "METACTL_SEED";

/// Base seed from `METACTL_SEED`, or `default` when unset or unparsable.
pub fn base_seed(default: u64) -> u64 {
    std::env::var(SEED_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(default)
}
