//! The perceive-reason-act loop.

use cua_core::wire::{ExecResult, RawObservation};
use cua_core::{compile, contextualize, hash_hex, render_context, resolve_target, ContextSnapshot, SemanticAction};
use cua_vmc::{Sandbox, VmError};
use log::{debug, warn};

use crate::plan::{PlanState, TaskGoal};
use crate::policy::{Decision, Policy, ReasonInput, HISTORY_WINDOW};
use crate::trajectory::{Outcome, StepRecord, TerminatedBy, Trajectory};

/// Byte budget of the element table stored in each step record.
pub const RECORD_CONTEXT_BUDGET: usize = 4096;

/// Initial plan from the policy; an unusable decomposition falls back to
/// the whole instruction as a single subtask.
pub fn orchestrate(policy: &mut dyn Policy, goal: &TaskGoal, snapshot: &ContextSnapshot) -> PlanState {
    match policy.plan(goal, snapshot) {
        Ok(items) if !items.is_empty() => PlanState::new(items),
        Ok(_) => PlanState::single(&goal.instruction),
        Err(e) => {
            warn!("{}: plan fallback: {e}", goal.task_id);
            PlanState::single(&goal.instruction)
        }
    }
}

pub fn perceive(raw: &RawObservation, step: u64) -> Result<ContextSnapshot, cua_core::Error> {
    contextualize(raw, step)
}

pub fn reason(policy: &mut dyn Policy, input: &ReasonInput<'_>) -> Decision {
    policy.decide(input)
}

/// Executes one action. Terminal actions return `None` without touching the
/// sandbox; grounding and rejection failures come back as `ok: false`.
/// Only transport-level failures are errors.
pub fn act(action: &SemanticAction, snapshot: &ContextSnapshot, sandbox: &dyn Sandbox) -> Result<Option<ExecResult>, VmError> {
    if action.is_terminal() {
        return Ok(None);
    }
    let failed = |detail: String| ExecResult { ok: false, applied: 0, detail, tick_after: snapshot.captured_at };
    let cmds = match resolve_target(action, &snapshot.elements, snapshot.screen).and_then(|a| compile(&a)) {
        Ok(cmds) => cmds,
        Err(e) => return Ok(Some(failed(e.to_string()))),
    };
    if cmds.is_empty() {
        return Ok(Some(ExecResult { ok: true, applied: 0, detail: String::new(), tick_after: snapshot.captured_at }));
    }
    match sandbox.execute(&cmds) {
        Ok(r) => Ok(Some(r)),
        Err(VmError::Rejected { index, reason }) => Ok(Some(ExecResult {
            ok: false,
            applied: index,
            detail: format!("command {index} rejected: {reason}"),
            tick_after: snapshot.captured_at + index as u64,
        })),
        Err(e) => Err(e),
    }
}

/// Runs one episode: reset, then observe → perceive → reason → act until
/// the policy finishes or the budget runs out.
pub fn run_episode(goal: &TaskGoal, seed: u64, sandbox: &dyn Sandbox, policy: &mut dyn Policy) -> Trajectory {
    let mut traj = Trajectory {
        task_id: goal.task_id.clone(),
        domain: goal.domain.clone(),
        scene_id: goal.scene_id.clone(),
        seed,
        records: Vec::new(),
        outcome: Outcome { terminated_by: TerminatedBy::BudgetExhausted, steps_used: 0, score: None, error: None },
        final_state_hash: None,
    };
    let fatal = |traj: &mut Trajectory, e: String| {
        warn!("{}: episode error: {e}", goal.task_id);
        traj.outcome.terminated_by = TerminatedBy::Error;
        traj.outcome.error = Some(e);
    };
    if let Err(e) = sandbox.reset(&goal.scene_id, seed) {
        fatal(&mut traj, e.to_string());
        return traj;
    }

    let mut plan: Option<PlanState> = None;
    for step in 1..=goal.budget {
        let raw = match sandbox.observe() {
            Ok(r) => r,
            Err(e) => {
                fatal(&mut traj, e.to_string());
                break;
            }
        };
        let snapshot = match perceive(&raw, u64::from(step)) {
            Ok(s) => s,
            Err(e) => {
                fatal(&mut traj, e.to_string());
                break;
            }
        };
        let plan = plan.get_or_insert_with(|| orchestrate(policy, goal, &snapshot));
        let history = &traj.records[traj.records.len().saturating_sub(HISTORY_WINDOW)..];
        let decision = reason(
            policy,
            &ReasonInput { goal, step, snapshot: &snapshot, plan, history, screenshot: Some(&raw.screenshot) },
        );
        debug!("{} step {step}: {}", goal.task_id, decision.action.to_json());
        let exec = match act(&decision.action, &snapshot, sandbox) {
            Ok(exec) => exec,
            Err(e) => {
                fatal(&mut traj, e.to_string());
                break;
            }
        };
        let terminal = match &decision.action {
            SemanticAction::Done => {
                plan.advance();
                Some(TerminatedBy::Done)
            }
            SemanticAction::Fail { .. } => {
                plan.abandon();
                Some(TerminatedBy::Fail)
            }
            _ => None,
        };
        traj.records.push(StepRecord {
            step,
            snapshot_hash: hash_hex(snapshot.hash()),
            context_text: render_context(&snapshot, RECORD_CONTEXT_BUDGET).expect("budget above minimum"),
            thought: decision.thought,
            action: decision.action,
            exec,
        });
        if let Some(t) = terminal {
            traj.outcome.terminated_by = t;
            break;
        }
    }
    traj.outcome.steps_used = traj.records.len() as u32;
    traj
}
