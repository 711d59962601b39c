//! Benchmark harness: task files, predicate evaluators, suite runs and the
//! per-domain success-rate report.

pub mod cli;
pub mod eval;
pub mod report;
pub mod suite;
pub mod task;

use std::path::PathBuf;

pub use eval::{evaluate, evaluate_detailed, Evaluation, EvaluatorSpec};
pub use report::{aggregate, format_score, load_results, render, round_to, DomainRow, EpisodeResult, Format, RunReport};
pub use suite::{replay, results_of, run_suite, run_task, Replay, SuiteRun};
pub use task::{load_tasks, TaskSpec};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid task {}: {reason}", file.display())]
    InvalidTask { file: PathBuf, reason: String },
    #[error("task {task_id} references missing scene '{scene_id}'")]
    MissingScene { task_id: String, scene_id: String },
    #[error("results: {0}")]
    Results(String),
    #[error("replay: {0}")]
    Replay(String),
    #[error("{0}")]
    Usage(String),
    #[error("io: {0}")]
    Io(String),
}
