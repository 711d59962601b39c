//! Task files: one JSON document per task, naming a scene, a seed and an
//! evaluator.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use cua_agent::TaskGoal;
use cua_sim::SceneCatalog;
use serde::{Deserialize, Serialize};

use crate::eval::EvaluatorSpec;
use crate::BenchError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    #[serde(flatten)]
    pub goal: TaskGoal,
    #[serde(default)]
    pub seed: u64,
    pub evaluator: EvaluatorSpec,
}

impl TaskSpec {
    pub fn task_id(&self) -> &str {
        &self.goal.task_id
    }
}

/// Parses every `*.json` file in `dir`, checks scene references against
/// `catalog`, and returns the tasks sorted by id.
pub fn load_tasks(dir: &Path, catalog: &SceneCatalog) -> Result<Vec<TaskSpec>, BenchError> {
    let invalid = |file: &Path, reason: String| BenchError::InvalidTask { file: file.to_path_buf(), reason };
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| invalid(dir, e.to_string()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();

    let mut tasks = Vec::with_capacity(paths.len());
    let mut seen = BTreeSet::new();
    for path in paths {
        let text = std::fs::read_to_string(&path).map_err(|e| invalid(&path, e.to_string()))?;
        let task: TaskSpec = serde_json::from_str(&text).map_err(|e| invalid(&path, e.to_string()))?;
        task.evaluator.validate().map_err(|reason| invalid(&path, reason))?;
        if task.goal.budget == 0 {
            return Err(invalid(&path, "budget must be positive".into()));
        }
        if catalog.get(&task.goal.scene_id).is_none() {
            return Err(BenchError::MissingScene { task_id: task.goal.task_id, scene_id: task.goal.scene_id });
        }
        if !seen.insert(task.goal.task_id.clone()) {
            return Err(invalid(&path, format!("duplicate task_id '{}'", task.goal.task_id)));
        }
        tasks.push(task);
    }
    tasks.sort_by(|a, b| a.goal.task_id.cmp(&b.goal.task_id));
    Ok(tasks)
}
