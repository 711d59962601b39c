use serde::{Deserialize, Serialize};

/// Default operation budget, in agent steps.
pub const DEFAULT_BUDGET: u32 = 50;

fn default_budget() -> u32 {
    DEFAULT_BUDGET
}

/// What the agent is asked to do, and where.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskGoal {
    pub task_id: String,
    pub instruction: String,
    pub domain: String,
    pub scene_id: String,
    #[serde(default = "default_budget")]
    pub budget: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubtaskStatus {
    Pending,
    Active,
    Done,
    Abandoned,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subtask {
    pub description: String,
    pub status: SubtaskStatus,
}

/// The orchestrator's subtask list. At most one subtask is active, and it
/// sits at `cursor`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanState {
    pub subtasks: Vec<Subtask>,
    pub cursor: usize,
}

impl PlanState {
    /// A plan from descriptions; the first one becomes active.
    pub fn new<I, S>(descriptions: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut subtasks: Vec<Subtask> = descriptions
            .into_iter()
            .map(|d| Subtask { description: d.into(), status: SubtaskStatus::Pending })
            .collect();
        if let Some(first) = subtasks.first_mut() {
            first.status = SubtaskStatus::Active;
        }
        Self { subtasks, cursor: 0 }
    }

    pub fn single(instruction: &str) -> Self {
        Self::new([instruction])
    }

    pub fn active(&self) -> Option<&Subtask> {
        self.subtasks.get(self.cursor).filter(|s| s.status == SubtaskStatus::Active)
    }

    /// Marks the active subtask done and activates the next pending one.
    pub fn advance(&mut self) {
        self.finish_active(SubtaskStatus::Done);
    }

    /// Marks the active subtask abandoned and moves on.
    pub fn abandon(&mut self) {
        self.finish_active(SubtaskStatus::Abandoned);
    }

    fn finish_active(&mut self, status: SubtaskStatus) {
        let Some(current) = self.subtasks.get_mut(self.cursor) else { return };
        if current.status != SubtaskStatus::Active {
            return;
        }
        current.status = status;
        if let Some(next) = self.subtasks.get_mut(self.cursor + 1) {
            next.status = SubtaskStatus::Active;
            self.cursor += 1;
        }
    }

    pub fn is_complete(&self) -> bool {
        self.subtasks.iter().all(|s| matches!(s.status, SubtaskStatus::Done | SubtaskStatus::Abandoned))
    }
}
