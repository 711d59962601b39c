//! The tool registry and tool dispatch.

use std::collections::BTreeMap;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use cua_core::action::{parse_args, variant_schema};
use cua_core::{compile, contextualize, hash_hex, resolve_target, SemanticAction};
use cua_vmc::Sandbox;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

/// Tools that act on the desktop; each takes its action kind's schema.
pub const ACTION_TOOLS: [&str; 6] = ["click", "drag", "hotkey", "scroll", "type", "wait"];
pub const OBSERVATION_TOOLS: [&str; 3] = ["a11y_tree", "screenshot", "system_info"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolDescriptor {
    pub name: String,
    pub description: String,
    #[serde(rename = "inputSchema")]
    pub input_schema: Value,
}

/// One part of a tool result.
#[derive(Debug, Clone, PartialEq)]
pub enum ContentPart {
    Text(String),
    Image { data: Vec<u8>, media_type: String },
    Structured(Value),
}

impl ContentPart {
    /// Wire form. Structured parts travel as text parts holding compact JSON.
    pub fn to_json(&self) -> Value {
        match self {
            ContentPart::Text(text) => json!({"type": "text", "text": text}),
            ContentPart::Image { data, media_type } => {
                json!({"type": "image", "data": BASE64.encode(data), "mimeType": media_type})
            }
            ContentPart::Structured(v) => json!({"type": "text", "text": v.to_string()}),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToolResult {
    pub is_error: bool,
    pub content: Vec<ContentPart>,
}

impl ToolResult {
    pub fn structured(v: Value) -> Self {
        Self { is_error: false, content: vec![ContentPart::Structured(v)] }
    }

    pub fn error(message: impl Into<String>) -> Self {
        Self { is_error: true, content: vec![ContentPart::Text(message.into())] }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "content": self.content.iter().map(ContentPart::to_json).collect::<Vec<_>>(),
            "isError": self.is_error,
        })
    }
}

fn empty_schema() -> Value {
    json!({"type": "object", "properties": {}, "additionalProperties": false})
}

fn description(name: &str) -> &'static str {
    match name {
        "a11y_tree" => "Compacted table of on-screen elements with ids, roles, names, bounds, states and usage hints.",
        "screenshot" => "Current screen as a PNG image.",
        "system_info" => "Metadata not visible on screen, such as the OS and installed application versions.",
        "click" => "Click an element by id, or a screen point. Optional button (left|right|middle) and count (1|2).",
        "drag" => "Press on one target, move to another and release.",
        "hotkey" => "Press a key chord: keys go down in order and come up in reverse.",
        "scroll" => "Turn the wheel by a number of notches, optionally over a target first.",
        "type" => "Type printable ASCII text into the focused field.",
        "wait" => "Let simulated time pass, up to 30 seconds.",
        _ => "",
    }
}

/// The fixed registry, sorted by name.
pub fn registry() -> Vec<ToolDescriptor> {
    let mut tools: Vec<ToolDescriptor> = OBSERVATION_TOOLS
        .iter()
        .map(|n| (*n, empty_schema()))
        .chain(ACTION_TOOLS.iter().map(|n| (*n, variant_schema(n).expect("action tools have schemas"))))
        .map(|(name, input_schema)| ToolDescriptor {
            name: name.to_string(),
            description: description(name).to_string(),
            input_schema,
        })
        .collect();
    tools.sort_by(|a, b| a.name.cmp(&b.name));
    tools
}

pub fn is_tool(name: &str) -> bool {
    ACTION_TOOLS.contains(&name) || OBSERVATION_TOOLS.contains(&name)
}

/// Expands dotted keys into nested objects: `apps.notepad` → `{"apps":{"notepad":..}}`.
pub fn unflatten(map: &BTreeMap<String, String>) -> Value {
    let mut root = Map::new();
    for (key, value) in map {
        let mut parts: Vec<&str> = key.split('.').collect();
        let leaf = parts.pop().unwrap_or_default();
        let mut node = &mut root;
        for p in parts {
            let entry = node.entry(p.to_string()).or_insert_with(|| Value::Object(Map::new()));
            if !entry.is_object() {
                // a scalar already sits here; keep it under an empty key
                let prev = entry.take();
                *entry = json!({"": prev});
            }
            node = entry.as_object_mut().expect("just ensured an object");
        }
        node.insert(leaf.to_string(), Value::String(value.clone()));
    }
    Value::Object(root)
}

/// Runs one tool. `name` must be registered. Every failure past this point
/// is reported in the result, never as a protocol error.
pub fn call_tool(sandbox: &dyn Sandbox, name: &str, args: &Value) -> ToolResult {
    if OBSERVATION_TOOLS.contains(&name) {
        if args.as_object().is_some_and(|o| !o.is_empty()) {
            return ToolResult::error(format!("schema violation: /: {name} takes no arguments"));
        }
        return observe_tool(sandbox, name);
    }
    let action = match parse_args(name, args) {
        Ok(a) => a,
        Err(e) => return ToolResult::error(e.to_string()),
    };
    act(sandbox, &action)
}

fn observe_tool(sandbox: &dyn Sandbox, name: &str) -> ToolResult {
    let raw = match sandbox.observe() {
        Ok(raw) => raw,
        Err(e) => return ToolResult::error(e.to_string()),
    };
    match name {
        "screenshot" => ToolResult {
            is_error: false,
            content: vec![ContentPart::Image { data: raw.screenshot, media_type: "image/png".into() }],
        },
        "system_info" => ToolResult::structured(unflatten(&raw.system_info)),
        _ => match contextualize(&raw, raw.tick) {
            Ok(snap) => ToolResult::structured(json!({
                "screen": snap.screen,
                "tick": snap.captured_at,
                "elements": snap.elements,
            })),
            Err(e) => ToolResult::error(e.to_string()),
        },
    }
}

fn act(sandbox: &dyn Sandbox, action: &SemanticAction) -> ToolResult {
    let run = || -> Result<Value, String> {
        let raw = sandbox.observe().map_err(|e| e.to_string())?;
        let snap = contextualize(&raw, raw.tick).map_err(|e| e.to_string())?;
        let grounded = resolve_target(action, &snap.elements, snap.screen).map_err(|e| e.to_string())?;
        let cmds = compile(&grounded).map_err(|e| e.to_string())?;
        let applied = if cmds.is_empty() {
            0
        } else {
            sandbox.execute(&cmds).map_err(|e| e.to_string())?.applied
        };
        let after = sandbox.observe().map_err(|e| e.to_string())?;
        Ok(json!({
            "ok": true,
            "detail": format!("applied {applied} commands"),
            "post_action_screen_hash": hash_hex(after.screenshot_hash()),
        }))
    };
    match run() {
        Ok(v) => ToolResult::structured(v),
        Err(e) => ToolResult::error(e),
    }
}
