//! Step records, episode outcomes and the JSONL trajectory log.

use cua_core::wire::ExecResult;
use cua_core::SemanticAction;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminatedBy {
    Done,
    Fail,
    BudgetExhausted,
    Error,
}

impl TerminatedBy {
    pub fn as_str(self) -> &'static str {
        match self {
            TerminatedBy::Done => "done",
            TerminatedBy::Fail => "fail",
            TerminatedBy::BudgetExhausted => "budget_exhausted",
            TerminatedBy::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u32,
    pub snapshot_hash: String,
    pub context_text: String,
    pub thought: String,
    pub action: SemanticAction,
    /// `None` for Done/Fail, which are never sent to the sandbox.
    pub exec: Option<ExecResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub terminated_by: TerminatedBy,
    pub steps_used: u32,
    /// Filled in by the harness after evaluation.
    pub score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub task_id: String,
    pub domain: String,
    pub scene_id: String,
    pub seed: u64,
    pub records: Vec<StepRecord>,
    pub outcome: Outcome,
    /// Hex state hash of the sandbox after the episode, when known.
    pub final_state_hash: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct OutcomeLine {
    kind: String,
    task_id: String,
    domain: String,
    scene_id: String,
    seed: u64,
    terminated_by: TerminatedBy,
    steps_used: u32,
    score: Option<f64>,
    final_state_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("trajectory log has no outcome line")]
    MissingOutcome,
}

impl Trajectory {
    /// One JSON document per step record, then the outcome line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let mut v = serde_json::to_value(r).expect("records serialize");
            v.as_object_mut().expect("records are objects").insert("kind".into(), "step".into());
            out.push_str(&v.to_string());
            out.push('\n');
        }
        let line = OutcomeLine {
            kind: "outcome".into(),
            task_id: self.task_id.clone(),
            domain: self.domain.clone(),
            scene_id: self.scene_id.clone(),
            seed: self.seed,
            terminated_by: self.outcome.terminated_by,
            steps_used: self.outcome.steps_used,
            score: self.outcome.score,
            final_state_hash: self.final_state_hash.clone(),
            error: self.outcome.error.clone(),
        };
        out.push_str(&serde_json::to_string(&line).expect("outcome serializes"));
        out.push('\n');
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, LogError> {
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let bad = |reason: String| LogError::Malformed { line: i + 1, reason };
            let mut v: Value = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
            let kind = v.as_object_mut().and_then(|o| o.remove("kind"));
            match kind.as_ref().and_then(Value::as_str) {
                Some("step") => records.push(serde_json::from_value(v).map_err(|e| bad(e.to_string()))?),
                Some("outcome") => {
                    v["kind"] = "outcome".into();
                    let o: OutcomeLine = serde_json::from_value(v).map_err(|e| bad(e.to_string()))?;
                    return Ok(Trajectory {
                        task_id: o.task_id,
                        domain: o.domain,
                        scene_id: o.scene_id,
                        seed: o.seed,
                        records,
                        outcome: Outcome {
                            terminated_by: o.terminated_by,
                            steps_used: o.steps_used,
                            score: o.score,
                            error: o.error,
                        },
                        final_state_hash: o.final_state_hash,
                    });
                }
                _ => return Err(bad("missing or unknown kind".into())),
            }
        }
        Err(LogError::MissingOutcome)
    }
}
