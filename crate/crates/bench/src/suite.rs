//! Running task suites and replaying stored trajectories.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use cua_agent::{act, perceive, run_episode, Policy, TerminatedBy, Trajectory};
use cua_core::hash_hex;
use cua_vmc::Sandbox;
use log::{info, warn};

use crate::eval::evaluate;
use crate::report::{aggregate, EpisodeResult, RunReport};
use crate::task::TaskSpec;
use crate::BenchError;

/// Everything a suite run produced.
#[derive(Debug, Clone)]
pub struct SuiteRun {
    pub report: RunReport,
    /// Sorted by task id.
    pub trajectories: Vec<Trajectory>,
}

impl SuiteRun {
    pub fn episode_errors(&self) -> usize {
        self.trajectories.iter().filter(|t| t.outcome.terminated_by == TerminatedBy::Error).count()
    }

    pub fn results(&self) -> Vec<EpisodeResult> {
        results_of(&self.trajectories)
    }
}

/// Runs one task to completion and scores it. Episode and evaluation
/// failures score 0; the error stays in the outcome.
pub fn run_task(task: &TaskSpec, sandbox: &dyn Sandbox, policy: &mut dyn Policy) -> Trajectory {
    let mut traj = run_episode(&task.goal, task.seed, sandbox, policy);
    let mut score = 0.0;
    if traj.outcome.terminated_by != TerminatedBy::Error {
        match sandbox.fetch_state() {
            Ok(state) => {
                score = evaluate(&state, &task.evaluator);
                traj.final_state_hash = Some(hash_hex(state.state_hash()));
            }
            Err(e) => {
                warn!("{}: final state unavailable: {e}", task.goal.task_id);
                traj.outcome.terminated_by = TerminatedBy::Error;
                traj.outcome.error = Some(e.to_string());
            }
        }
    }
    traj.outcome.score = Some(score);
    info!(
        "{}: {} after {} steps, score {score}",
        task.goal.task_id,
        traj.outcome.terminated_by.as_str(),
        traj.outcome.steps_used
    );
    traj
}

/// Runs every task, one worker per sandbox, and aggregates. Tasks are
/// pulled from a shared queue; results are sorted by task id before
/// aggregation, so the report does not depend on scheduling. When
/// `out_dir` is given, each trajectory is written to `<task_id>.jsonl`.
pub fn run_suite(
    tasks: &[TaskSpec],
    sandboxes: &[&dyn Sandbox],
    make_policy: &(dyn Fn() -> Box<dyn Policy> + Sync),
    out_dir: Option<&Path>,
) -> Result<SuiteRun, BenchError> {
    if sandboxes.is_empty() {
        return Err(BenchError::Usage("at least one sandbox is required".into()));
    }
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|e| BenchError::Io(format!("{}: {e}", dir.display())))?;
    }
    let next = AtomicUsize::new(0);
    let done = Mutex::new(Vec::with_capacity(tasks.len()));
    std::thread::scope(|scope| {
        for sandbox in sandboxes.iter().take(tasks.len().max(1)) {
            let (next, done) = (&next, &done);
            scope.spawn(move || {
                let mut policy = make_policy();
                loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    let Some(task) = tasks.get(i) else { break };
                    let traj = run_task(task, *sandbox, policy.as_mut());
                    done.lock().expect("no worker panics while holding the lock").push(traj);
                }
            });
        }
    });
    let mut trajectories = done.into_inner().expect("workers finished");
    trajectories.sort_by(|a, b| a.task_id.cmp(&b.task_id));

    if let Some(dir) = out_dir {
        for t in &trajectories {
            let path = dir.join(format!("{}.jsonl", t.task_id));
            std::fs::write(&path, t.to_jsonl()).map_err(|e| BenchError::Io(format!("{}: {e}", path.display())))?;
        }
    }
    let run = SuiteRun { report: RunReport::from_trajectories(&trajectories), trajectories };
    Ok(run)
}

impl RunReport {
    pub fn from_trajectories(trajectories: &[Trajectory]) -> RunReport {
        aggregate(&results_of(trajectories))
    }
}

/// Unscored episodes count as 0.
pub fn results_of(trajectories: &[Trajectory]) -> Vec<EpisodeResult> {
    trajectories
        .iter()
        .map(|t| EpisodeResult {
            task_id: t.task_id.clone(),
            domain: t.domain.clone(),
            score: t.outcome.score.unwrap_or(0.0),
            steps_used: t.outcome.steps_used,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Replay {
    pub final_state_hash: String,
    /// `None` when the log carries no final state hash.
    pub hash_matches: Option<bool>,
    /// Present when an evaluator was supplied.
    pub score: Option<f64>,
}

/// Resets to the logged scene and seed, then re-executes every recorded
/// action against a fresh observation. Element ids resolve the same way
/// they did originally because the simulator is deterministic.
pub fn replay(traj: &Trajectory, sandbox: &dyn Sandbox, task: Option<&TaskSpec>) -> Result<Replay, BenchError> {
    let vm = |e: cua_vmc::VmError| BenchError::Replay(e.to_string());
    sandbox.reset(&traj.scene_id, traj.seed).map_err(vm)?;
    for record in &traj.records {
        if record.action.is_terminal() {
            break;
        }
        let raw = sandbox.observe().map_err(vm)?;
        let snapshot = perceive(&raw, u64::from(record.step)).map_err(|e| BenchError::Replay(e.to_string()))?;
        act(&record.action, &snapshot, sandbox).map_err(vm)?;
    }
    let state = sandbox.fetch_state().map_err(vm)?;
    let final_state_hash = hash_hex(state.state_hash());
    Ok(Replay {
        hash_matches: traj.final_state_hash.as_ref().map(|h| *h == final_state_hash),
        final_state_hash,
        score: task.map(|t| evaluate(&state, &t.evaluator)),
    })
}
