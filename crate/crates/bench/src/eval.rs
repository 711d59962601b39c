//! Predicate trees scored against a final desktop state.
//!
//! Leaves score 1 or 0. `any_of` takes the best child, `all_of` the
//! weighted mean of its children, which is how a task earns partial credit.

use cua_sim::scene::{WidgetKind, WidgetSpec};
use cua_sim::{DesktopState, WidgetState};
use log::warn;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvaluatorSpec {
    AllOf {
        children: Vec<EvaluatorSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
    AnyOf {
        children: Vec<EvaluatorSpec>,
    },
    ElementValueEquals {
        name: String,
        value: String,
    },
    ElementChecked {
        name: String,
        expected: bool,
    },
    WindowOpen {
        title: String,
        expected: bool,
    },
    PressedAtLeast {
        name: String,
        count: u64,
    },
}

impl EvaluatorSpec {
    /// Weights, when given, must be positive and one per child.
    pub fn validate(&self) -> Result<(), String> {
        match self {
            EvaluatorSpec::AllOf { children, weights } => {
                if children.is_empty() {
                    return Err("all_of needs at least one child".into());
                }
                if let Some(w) = weights {
                    if w.len() != children.len() {
                        return Err(format!("all_of has {} weights for {} children", w.len(), children.len()));
                    }
                    if let Some(bad) = w.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
                        return Err(format!("all_of weight {bad} is not positive"));
                    }
                }
                children.iter().try_for_each(EvaluatorSpec::validate)
            }
            EvaluatorSpec::AnyOf { children } => {
                if children.is_empty() {
                    return Err("any_of needs at least one child".into());
                }
                children.iter().try_for_each(EvaluatorSpec::validate)
            }
            _ => Ok(()),
        }
    }
}

/// Score in `[0, 1]` plus a warning per leaf that named an unknown element.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub score: f64,
    pub warnings: Vec<String>,
}

pub fn evaluate(state: &DesktopState, spec: &EvaluatorSpec) -> f64 {
    let e = evaluate_detailed(state, spec);
    for w in &e.warnings {
        warn!("{}: {w}", state.scene.scene_id);
    }
    e.score
}

pub fn evaluate_detailed(state: &DesktopState, spec: &EvaluatorSpec) -> Evaluation {
    let mut warnings = Vec::new();
    let score = score(state, spec, &mut warnings).clamp(0.0, 1.0);
    Evaluation { score, warnings }
}

/// Looks a widget up by accessible name, then by widget id (status labels
/// usually have no name).
fn lookup<'a>(state: &'a DesktopState, name: &str) -> Option<(&'a WidgetSpec, &'a WidgetState)> {
    state
        .widget_by_name(name)
        .or_else(|| Some((state.scene.widget(name)?, state.widget(name)?)))
}

fn score(state: &DesktopState, spec: &EvaluatorSpec, warnings: &mut Vec<String>) -> f64 {
    let mut leaf = |name: &str, test: &dyn Fn(&WidgetSpec, &WidgetState) -> bool| match lookup(state, name) {
        Some((spec, ws)) => f64::from(u8::from(test(spec, ws))),
        None => {
            warnings.push(format!("unknown element name '{name}'"));
            0.0
        }
    };
    match spec {
        EvaluatorSpec::ElementValueEquals { name, value } => leaf(name, &|spec, ws| {
            if spec.kind == WidgetKind::Scrollbar {
                ws.scroll_offset.to_string() == *value
            } else {
                ws.value == *value
            }
        }),
        EvaluatorSpec::ElementChecked { name, expected } => leaf(name, &|_, ws| ws.checked == *expected),
        EvaluatorSpec::PressedAtLeast { name, count } => leaf(name, &|_, ws| ws.pressed_count >= *count),
        EvaluatorSpec::WindowOpen { title, expected } => f64::from(u8::from(state.is_window_open(title) == *expected)),
        EvaluatorSpec::AnyOf { children } => {
            children.iter().map(|c| score(state, c, warnings)).fold(0.0, f64::max)
        }
        EvaluatorSpec::AllOf { children, weights } => {
            let uniform = vec![1.0; children.len()];
            let weights = weights.as_ref().unwrap_or(&uniform);
            let total: f64 = weights.iter().sum();
            if total <= 0.0 {
                return 0.0;
            }
            children.iter().zip(weights).map(|(c, w)| w * score(state, c, warnings)).sum::<f64>() / total
        }
    }
}
