//! Deterministic multi-gripper bin picking simulator with a Markov baseline
//! and memory-based masking policies (cluster, circle, swap), plus the
//! sequential-failure metric suite used to compare them.

pub mod config;
pub mod engine;
pub mod environment;
pub mod geometry;
pub mod metrics;
pub mod model;
pub mod observation;
pub mod policies;
pub mod records;
pub mod seed;

pub use config::{ConfigError, FileConfig};
pub use engine::{
    run_experiment, run_experiment_with_jobs, run_trial, ExperimentConfig, TimeModel,
};
pub use environment::{generate_heap, EnvConfig, EnvironmentKind};
pub use metrics::{aggregate, trial_stats, AggregateReport, TimeMode, TrialStats};
pub use model::{
    evaluate_grasp, remove_object, Action, GripperId, HeapState, ObjectId, SiteId, Termination,
    TrialLog,
};
pub use policies::{PolicyConfig, PolicyKind};
pub use records::{parse_log, summarize, write_log, RunManifest, SummaryRow};
