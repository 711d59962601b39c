//! The Reasoner's policy port and its implementations.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use cua_core::{parse_action, render_context, ContextSnapshot, SemanticAction, UIElement};
use log::warn;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::plan::{PlanState, TaskGoal};
use crate::trajectory::StepRecord;

/// Steps of history shown to a model.
pub const HISTORY_WINDOW: usize = 5;
/// Re-asks after an unparseable reply before giving up.
pub const PARSE_RETRIES: usize = 2;
pub const UNPARSEABLE: &str = "unparseable policy output";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolicyError {
    #[error("unparseable policy output: {0}")]
    Unparseable(String),
    #[error("policy endpoint: {0}")]
    Transport(String),
    #[error("policy configuration: {0}")]
    Config(String),
    #[error("invalid script: {0}")]
    Script(String),
}

/// Everything the Reasoner sees at one step.
pub struct ReasonInput<'a> {
    pub goal: &'a TaskGoal,
    pub step: u32,
    pub snapshot: &'a ContextSnapshot,
    pub plan: &'a PlanState,
    /// Most recent records, oldest first, at most [`HISTORY_WINDOW`].
    pub history: &'a [StepRecord],
    pub screenshot: Option<&'a [u8]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub thought: String,
    pub action: SemanticAction,
}

pub trait Policy {
    /// Initial decomposition of the goal. The default is the whole
    /// instruction as one subtask.
    fn plan(&mut self, goal: &TaskGoal, _snapshot: &ContextSnapshot) -> Result<Vec<String>, PolicyError> {
        Ok(vec![goal.instruction.clone()])
    }

    fn decide(&mut self, input: &ReasonInput<'_>) -> Decision;
}

// ---------------------------------------------------------------- scripted

/// Where a script row points: an element by name (optionally narrowed by
/// role), or a screen point. A bare name prefers interactive elements, so
/// "Sign in" finds the button rather than a window with the same title.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(untagged)]
pub enum Anchor {
    Name(String),
    Point { x: i64, y: i64 },
    Role { name: String, role: String },
}

impl Anchor {
    fn find<'a>(&self, snapshot: &'a ContextSnapshot) -> Result<Option<&'a UIElement>, String> {
        let named = |name: &str, pred: &dyn Fn(&UIElement) -> bool| -> Option<&'a UIElement> {
            snapshot.elements.iter().find(|e| e.name == name && pred(e))
        };
        match self {
            Anchor::Name(name) => named(name, &|e| e.role.is_interactive())
                .or_else(|| named(name, &|_| true))
                .map(Some)
                .ok_or_else(|| format!("no element named '{name}'")),
            Anchor::Role { name, role } => named(name, &|e| e.role.as_str() == role)
                .map(Some)
                .ok_or_else(|| format!("no {role} named '{name}'")),
            Anchor::Point { .. } => Ok(None),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptRow {
    #[serde(default, rename = "match")]
    pub target: Option<Anchor>,
    /// Drag destination.
    #[serde(default)]
    pub match_to: Option<Anchor>,
    /// Action document without its targets, e.g. `{"action":"click"}`.
    pub action: Value,
}

/// Replays per-task step tables. Row `n` answers step `n + 1`; once rows run
/// out the policy declares Done.
#[derive(Debug, Clone, Default)]
pub struct ScriptedPolicy {
    tables: BTreeMap<String, Vec<ScriptRow>>,
}

impl ScriptedPolicy {
    pub fn from_json(text: &str) -> Result<Self, PolicyError> {
        let tables = serde_json::from_str(text).map_err(|e| PolicyError::Script(e.to_string()))?;
        Ok(Self { tables })
    }

    /// Merges every `*.json` file in `dir`; a task id may appear only once.
    pub fn load_dir(dir: &Path) -> Result<Self, PolicyError> {
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .map_err(|e| PolicyError::Script(format!("{}: {e}", dir.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        let mut out = Self::default();
        for p in paths {
            let text = std::fs::read_to_string(&p).map_err(|e| PolicyError::Script(format!("{}: {e}", p.display())))?;
            let more = Self::from_json(&text).map_err(|e| PolicyError::Script(format!("{}: {e}", p.display())))?;
            for (task, rows) in more.tables {
                if out.tables.insert(task.clone(), rows).is_some() {
                    return Err(PolicyError::Script(format!("{}: task {task} scripted twice", p.display())));
                }
            }
        }
        Ok(out)
    }

    pub fn insert(&mut self, task_id: &str, rows: Vec<ScriptRow>) {
        self.tables.insert(task_id.to_string(), rows);
    }

    pub fn has_task(&self, task_id: &str) -> bool {
        self.tables.contains_key(task_id)
    }

    fn row_action(row: &ScriptRow, snapshot: &ContextSnapshot) -> Result<SemanticAction, String> {
        let mut doc = match &row.action {
            Value::Object(o) => o.clone(),
            other => return Err(format!("script action is not an object: {other}")),
        };
        let anchor = |a: &Anchor| -> Result<Map<String, Value>, String> {
            let mut m = Map::new();
            match (a, a.find(snapshot)?) {
                (_, Some(el)) => {
                    m.insert("element_id".into(), json!(el.id));
                }
                (Anchor::Point { x, y }, None) => {
                    m.insert("x".into(), json!(x));
                    m.insert("y".into(), json!(y));
                }
                (_, None) => unreachable!("named anchors resolve or fail"),
            }
            Ok(m)
        };
        let kind = doc.get("action").and_then(Value::as_str).unwrap_or_default().to_string();
        if kind == "drag" {
            if let (Some(from), Some(to)) = (&row.target, &row.match_to) {
                doc.insert("from".into(), Value::Object(anchor(from)?));
                doc.insert("to".into(), Value::Object(anchor(to)?));
            }
        } else if let Some(t) = &row.target {
            doc.extend(anchor(t)?);
        }
        parse_action(&Value::Object(doc)).map_err(|e| e.to_string())
    }
}

impl Policy for ScriptedPolicy {
    fn decide(&mut self, input: &ReasonInput<'_>) -> Decision {
        let thought = "scripted".to_string();
        let Some(rows) = self.tables.get(&input.goal.task_id) else {
            return Decision { thought, action: SemanticAction::Fail { reason: "no script for task".into() } };
        };
        let Some(row) = rows.get(input.step as usize - 1) else {
            return Decision { thought, action: SemanticAction::Done };
        };
        let action = Self::row_action(row, input.snapshot).unwrap_or_else(|reason| SemanticAction::Fail { reason });
        Decision { thought, action }
    }
}

/// Never makes progress: waits one second every step.
#[derive(Debug, Clone, Copy, Default)]
pub struct NullPolicy;

impl Policy for NullPolicy {
    fn decide(&mut self, _input: &ReasonInput<'_>) -> Decision {
        Decision { thought: "waiting".into(), action: SemanticAction::Wait { seconds: 1.0 } }
    }
}

// --------------------------------------------------------------------- LLM

/// Sends one chat-completion request and returns the assistant's text.
pub trait ChatBackend {
    fn complete(&mut self, request: &Value) -> Result<String, PolicyError>;
}

/// Chat-completion endpoint over HTTP.
pub struct HttpChat {
    url: String,
    key: Option<String>,
    agent: ureq::Agent,
}

impl HttpChat {
    pub fn new(url: impl Into<String>, key: Option<String>) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(120)))
            .build()
            .into();
        Self { url: url.into(), key, agent }
    }
}

impl ChatBackend for HttpChat {
    fn complete(&mut self, request: &Value) -> Result<String, PolicyError> {
        let mut req = self.agent.post(&self.url);
        if let Some(key) = &self.key {
            req = req.header("Authorization", format!("Bearer {key}"));
        }
        let mut resp = req.send_json(request).map_err(|e| PolicyError::Transport(e.to_string()))?;
        let body: Value = resp.body_mut().read_json().map_err(|e| PolicyError::Transport(e.to_string()))?;
        body.pointer("/choices/0/message/content")
            .or_else(|| body.pointer("/message/content"))
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| PolicyError::Transport("response has no assistant message text".into()))
    }
}

const SYSTEM_RULES: &str = "You operate a desktop through one atomic action per turn.\n\
Each screen element is listed as `[id] role 'name' @(x,y) state=... usage=...`; refer to elements by id.\n\
Actions: click {element_id | x,y, button?, count?}; type {text}; scroll {direction, amount, element_id?}; \
drag {from, to}; wait {seconds}; hotkey {keys}; done {}; fail {reason}.\n\
Click a text field before typing into it. Say done only once the goal is visibly met.\n\
Reply with one or two sentences of reasoning, then exactly one fenced ```json block holding the action \
object, for example ```json\n{\"action\": \"click\", \"element_id\": 3}\n```.";

const PLAN_RULES: &str = "Split the user's goal into a short ordered list of subtasks. \
Reply with one fenced ```json block holding a JSON array of strings.";

/// Policy backed by an external chat model.
pub struct LlmPolicy<B: ChatBackend = HttpChat> {
    backend: B,
    model: String,
    render_budget: usize,
}

impl LlmPolicy<HttpChat> {
    /// Reads `LITECUA_LLM_URL`, `LITECUA_LLM_KEY` and `LITECUA_MODEL`.
    pub fn from_env() -> Result<Self, PolicyError> {
        let url = std::env::var("LITECUA_LLM_URL")
            .map_err(|_| PolicyError::Config("LITECUA_LLM_URL is not set".into()))?;
        let key = std::env::var("LITECUA_LLM_KEY").ok().filter(|k| !k.is_empty());
        let model = std::env::var("LITECUA_MODEL").unwrap_or_else(|_| "gpt-4o".into());
        Ok(Self::new(HttpChat::new(url, key), model))
    }
}

impl<B: ChatBackend> LlmPolicy<B> {
    pub fn new(backend: B, model: impl Into<String>) -> Self {
        Self { backend, model: model.into(), render_budget: 6000 }
    }

    fn request(&self, system: &str, text: String, screenshot: Option<&[u8]>) -> Value {
        let mut content = vec![json!({"type": "text", "text": text})];
        if let Some(png) = screenshot {
            let url = format!("data:image/png;base64,{}", BASE64.encode(png));
            content.push(json!({"type": "image_url", "image_url": {"url": url}}));
        }
        json!({
            "model": self.model,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": content},
            ],
            "temperature": 0,
        })
    }

    /// The user turn: goal, plan, recent steps and the rendered screen.
    pub fn prompt(&self, input: &ReasonInput<'_>) -> String {
        let mut text = format!("Goal: {}\n\nPlan:\n", input.goal.instruction);
        for (i, s) in input.plan.subtasks.iter().enumerate() {
            text.push_str(&format!("{}. [{:?}] {}\n", i + 1, s.status, s.description));
        }
        let start = input.history.len().saturating_sub(HISTORY_WINDOW);
        if start < input.history.len() {
            text.push_str("\nRecent steps:\n");
            for r in &input.history[start..] {
                let result = match &r.exec {
                    Some(e) if e.ok => "ok".to_string(),
                    Some(e) => format!("failed: {}", e.detail),
                    None => "terminal".to_string(),
                };
                text.push_str(&format!("{}. {} -> {} ({result})\n", r.step, r.thought, r.action.to_json()));
            }
        }
        let screen = render_context(input.snapshot, self.render_budget.max(256)).unwrap_or_default();
        text.push_str(&format!("\nStep {} of {}. Screen:\n{screen}\n", input.step, input.goal.budget));
        text
    }
}

impl<B: ChatBackend> Policy for LlmPolicy<B> {
    fn plan(&mut self, goal: &TaskGoal, snapshot: &ContextSnapshot) -> Result<Vec<String>, PolicyError> {
        let screen = render_context(snapshot, self.render_budget.max(256)).unwrap_or_default();
        let req = self.request(PLAN_RULES, format!("Goal: {}\n\nScreen:\n{screen}", goal.instruction), None);
        let reply = self.backend.complete(&req)?;
        parse_plan(&reply)
    }

    fn decide(&mut self, input: &ReasonInput<'_>) -> Decision {
        let req = self.request(SYSTEM_RULES, self.prompt(input), input.screenshot);
        for attempt in 0..=PARSE_RETRIES {
            match self.backend.complete(&req).and_then(|reply| parse_reply(&reply)) {
                Ok(d) => return d,
                Err(PolicyError::Unparseable(why)) => warn!("policy reply {attempt} unparseable: {why}"),
                Err(e) => {
                    return Decision { thought: String::new(), action: SemanticAction::Fail { reason: e.to_string() } }
                }
            }
        }
        Decision { thought: String::new(), action: SemanticAction::Fail { reason: UNPARSEABLE.into() } }
    }
}

/// Text of the first fenced block, and the prose before it.
fn first_fence(reply: &str) -> Option<(&str, &str)> {
    let open = reply.find("```")?;
    let after = &reply[open + 3..];
    let body_start = after.find('\n').map_or(after.len(), |i| i + 1);
    let tag = after[..body_start].trim();
    if !(tag.is_empty() || tag.eq_ignore_ascii_case("json")) {
        // a tag with inline content, e.g. ```{"action":...}```
        let close = after.find("```")?;
        return Some((reply[..open].trim(), &after[..close]));
    }
    let body = &after[body_start..];
    let close = body.find("```")?;
    Some((reply[..open].trim(), &body[..close]))
}

/// Splits a model reply into thought and action.
pub fn parse_reply(reply: &str) -> Result<Decision, PolicyError> {
    let (thought, block) = first_fence(reply).ok_or_else(|| PolicyError::Unparseable("no fenced block".into()))?;
    let doc: Value = serde_json::from_str(block.trim()).map_err(|e| PolicyError::Unparseable(e.to_string()))?;
    let action = parse_action(&doc).map_err(|e| PolicyError::Unparseable(e.to_string()))?;
    Ok(Decision { thought: thought.to_string(), action })
}

/// Parses a decomposition: a JSON array of strings, or `{"subtasks": [...]}`.
pub fn parse_plan(reply: &str) -> Result<Vec<String>, PolicyError> {
    let (_, block) = first_fence(reply).ok_or_else(|| PolicyError::Unparseable("no fenced block".into()))?;
    let doc: Value = serde_json::from_str(block.trim()).map_err(|e| PolicyError::Unparseable(e.to_string()))?;
    let list = doc.get("subtasks").unwrap_or(&doc);
    let items: Vec<String> = list
        .as_array()
        .ok_or_else(|| PolicyError::Unparseable("plan is not a list".into()))?
        .iter()
        .map(|v| v.as_str().map(str::to_string))
        .collect::<Option<_>>()
        .ok_or_else(|| PolicyError::Unparseable("plan items must be strings".into()))?;
    if items.is_empty() {
        return Err(PolicyError::Unparseable("empty plan".into()));
    }
    Ok(items)
}
