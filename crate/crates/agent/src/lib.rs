//! LiteCUA: an orchestrator plus Perceptor → Reasoner → Actor workers over
//! a contextualized desktop.
//!
//! The Reasoner is a [`Policy`]: scripted tables for tests, a no-op policy
//! for baselines, or an external chat model.

pub mod episode;
pub mod plan;
pub mod policy;
pub mod trajectory;

pub use episode::{act, orchestrate, perceive, reason, run_episode};
pub use plan::{PlanState, Subtask, SubtaskStatus, TaskGoal, DEFAULT_BUDGET};
pub use policy::{
    parse_plan, parse_reply, ChatBackend, Decision, HttpChat, LlmPolicy, NullPolicy, Policy, PolicyError,
    ReasonInput, ScriptRow, ScriptedPolicy,
};
pub use trajectory::{Outcome, StepRecord, TerminatedBy, Trajectory};
