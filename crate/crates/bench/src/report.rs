//! Success-rate and average-step accounting as a per-domain breakdown
//! table: `Domain  Score  Average Steps`, then a Total row.
//!
//! Score sums are kept to 2 decimals and average steps to 1. The Total
//! row's average steps is the mean of the per-domain means, not the mean
//! over all tasks.

use std::collections::BTreeMap;
use std::path::Path;

use cua_agent::Trajectory;
use serde::{Deserialize, Serialize};

use crate::BenchError;

/// One finished task, as the aggregator sees it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub task_id: String,
    pub domain: String,
    pub score: f64,
    pub steps_used: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainRow {
    pub domain: String,
    pub score_sum: f64,
    pub task_count: usize,
    pub average_steps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub domains: Vec<DomainRow>,
    pub total: DomainRow,
    /// Percentage, 2 decimals.
    pub success_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

pub fn round_to(x: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (x * scale).round() / scale
}

/// Groups by domain (sorted by name). Scores within a domain are summed in
/// sorted order so the report does not depend on the order of `results`.
pub fn aggregate(results: &[EpisodeResult]) -> RunReport {
    let mut groups: BTreeMap<&str, (Vec<f64>, u64)> = BTreeMap::new();
    for r in results {
        let g = groups.entry(r.domain.as_str()).or_default();
        g.0.push(r.score);
        g.1 += u64::from(r.steps_used);
    }
    let mut domains = Vec::with_capacity(groups.len());
    let (mut score_total, mut count_total, mut mean_steps_total) = (0.0, 0usize, 0.0);
    for (domain, (mut scores, steps)) in groups {
        scores.sort_by(f64::total_cmp);
        let sum: f64 = scores.iter().sum();
        let mean_steps = steps as f64 / scores.len() as f64;
        score_total += sum;
        count_total += scores.len();
        mean_steps_total += mean_steps;
        domains.push(DomainRow {
            domain: domain.to_string(),
            score_sum: round_to(sum, 2),
            task_count: scores.len(),
            average_steps: round_to(mean_steps, 1),
        });
    }
    let (success_rate, total_steps) = if count_total == 0 {
        (0.0, 0.0)
    } else {
        (100.0 * score_total / count_total as f64, mean_steps_total / domains.len() as f64)
    };
    RunReport {
        total: DomainRow {
            domain: "Total".into(),
            score_sum: round_to(score_total, 2),
            task_count: count_total,
            average_steps: round_to(total_steps, 1),
        },
        domains,
        success_rate: round_to(success_rate, 2),
    }
}

/// `13` for integral sums, `3.11` otherwise.
pub fn format_score(sum: f64) -> String {
    if (sum - sum.round()).abs() < 1e-9 {
        format!("{}", sum.round() as i64)
    } else {
        format!("{sum:.2}")
    }
}

fn text_row(row: &DomainRow) -> String {
    format!("{}  {}/{}  {:.1}", row.domain, format_score(row.score_sum), row.task_count, row.average_steps)
}

pub fn render(run: &RunReport, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(run).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut out = String::from("Domain  Score  Average Steps\n");
            for row in run.domains.iter().chain(std::iter::once(&run.total)) {
                out.push_str(&text_row(row));
                out.push('\n');
            }
            out.push_str(&format!("Success rate  {:.2}%\n", run.success_rate));
            out
        }
    }
}

/// Reads results back: a JSON array of [`EpisodeResult`] when `path` is a
/// file; otherwise every trajectory log (`*.jsonl`) in the directory.
pub fn load_results(path: &Path) -> Result<Vec<EpisodeResult>, BenchError> {
    let io = |p: &Path, e: std::io::Error| BenchError::Results(format!("{}: {e}", p.display()));
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| io(path, e))?;
        return serde_json::from_str(&text).map_err(|e| BenchError::Results(format!("{}: {e}", path.display())));
    }
    let mut paths: Vec<_> = std::fs::read_dir(path)
        .map_err(|e| io(path, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    paths.sort();
    let mut out = Vec::with_capacity(paths.len());
    for p in paths {
        let text = std::fs::read_to_string(&p).map_err(|e| io(&p, e))?;
        let t = Trajectory::from_jsonl(&text).map_err(|e| BenchError::Results(format!("{}: {e}", p.display())))?;
        out.push(EpisodeResult {
            task_id: t.task_id,
            domain: t.domain,
            score: t.outcome.score.unwrap_or(0.0),
            steps_used: t.outcome.steps_used,
        });
    }
    if out.is_empty() {
        return Err(BenchError::Results(format!("{}: no trajectory logs", path.display())));
    }
    Ok(out)
}
