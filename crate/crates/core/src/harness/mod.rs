//! Scenario files, seeded runs and batches, and their output files.

mod baseline;
mod emit;
mod run;
mod scenario;
mod verify;

pub use baseline::{best_assignment, centralized_baseline, Baseline, MAX_BASELINE_ROBOTS};
pub use emit::{
    emit_run, emit_summary, load_summary, load_trajectory, write_positions_csv, write_trajectory_csv, Format,
    TrajectoryFile, POSITION_COLUMNS, TRAJECTORY_COLUMNS,
};
pub use run::{run_batch, run_single, BatchSummary, CoverOutcome, GraphStats, RunOutput, SeedRow};
pub use scenario::{load_scenario, parse_scenario, BuiltGame, GameSpec, GraphSpec, Instance, LearningSpec, Scenario};
pub use verify::{oracle_gap, verify_game, Check, VerifyReport};
