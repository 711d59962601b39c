//! Semantic action grammar.
//!
//! Actions travel as JSON objects `{"action": <kind>, ...fields}`. Each kind
//! has a JSON schema (see [`variant_schema`]); the MCP server publishes the
//! same schemas as tool input schemas, and [`parse_action`] validates
//! against them before building a [`SemanticAction`].

use std::fmt;

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::context::UIElement;
use crate::geometry::Screen;
use crate::keys;
use crate::primitive::PrimitiveCommand;
use crate::Error;

pub const MAX_TYPE_LEN: usize = 4096;
pub const MAX_HOTKEY_KEYS: usize = 4;
pub const MAX_WAIT_SECONDS: f64 = 30.0;
/// Pause between the two clicks of a double-click.
pub const DOUBLE_CLICK_GAP_MS: u64 = 80;
/// Intermediate pointer positions emitted for a drag.
pub const DRAG_STEPS: i64 = 8;

/// Every action kind, in grammar order.
pub const ACTION_KINDS: [&str; 8] = ["click", "type", "scroll", "drag", "wait", "hotkey", "done", "fail"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MouseButton {
    #[default]
    Left,
    Right,
    Middle,
}

impl MouseButton {
    pub fn as_str(self) -> &'static str {
        match self {
            MouseButton::Left => "left",
            MouseButton::Right => "right",
            MouseButton::Middle => "middle",
        }
    }
}

impl fmt::Display for MouseButton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScrollDirection {
    Up,
    Down,
    Left,
    Right,
}

impl ScrollDirection {
    pub fn as_str(self) -> &'static str {
        match self {
            ScrollDirection::Up => "up",
            ScrollDirection::Down => "down",
            ScrollDirection::Left => "left",
            ScrollDirection::Right => "right",
        }
    }

    /// Wheel notches `(dx, dy)` for `amount` notches in this direction.
    pub fn wheel(self, amount: u32) -> (i64, i64) {
        let n = i64::from(amount);
        match self {
            ScrollDirection::Up => (0, n),
            ScrollDirection::Down => (0, -n),
            ScrollDirection::Left => (-n, 0),
            ScrollDirection::Right => (n, 0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    Element(u32),
    Point { x: i64, y: i64 },
}

impl Target {
    fn write_fields(&self, obj: &mut Map<String, Value>, prefix: &str) {
        match self {
            Target::Element(id) => {
                obj.insert(format!("{prefix}element_id"), json!(id));
            }
            Target::Point { x, y } => {
                obj.insert(format!("{prefix}x"), json!(x));
                obj.insert(format!("{prefix}y"), json!(y));
            }
        }
    }

    fn to_json(self) -> Value {
        let mut obj = Map::new();
        self.write_fields(&mut obj, "");
        Value::Object(obj)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SemanticAction {
    Click { target: Target, button: MouseButton, count: u8 },
    Type { text: String },
    Scroll { target: Option<Target>, direction: ScrollDirection, amount: u32 },
    Drag { from: Target, to: Target },
    Wait { seconds: f64 },
    Hotkey { keys: Vec<String> },
    Done,
    Fail { reason: String },
}

impl SemanticAction {
    pub fn kind(&self) -> &'static str {
        match self {
            SemanticAction::Click { .. } => "click",
            SemanticAction::Type { .. } => "type",
            SemanticAction::Scroll { .. } => "scroll",
            SemanticAction::Drag { .. } => "drag",
            SemanticAction::Wait { .. } => "wait",
            SemanticAction::Hotkey { .. } => "hotkey",
            SemanticAction::Done => "done",
            SemanticAction::Fail { .. } => "fail",
        }
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self, SemanticAction::Done | SemanticAction::Fail { .. })
    }

    pub fn click(target: Target) -> Self {
        SemanticAction::Click { target, button: MouseButton::Left, count: 1 }
    }

    fn targets(&self) -> Vec<Target> {
        match self {
            SemanticAction::Click { target, .. } => vec![*target],
            SemanticAction::Scroll { target: Some(t), .. } => vec![*t],
            SemanticAction::Drag { from, to } => vec![*from, *to],
            _ => Vec::new(),
        }
    }

    /// Canonical JSON form; always accepted by [`parse_action`].
    pub fn to_json(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("action".into(), json!(self.kind()));
        match self {
            SemanticAction::Click { target, button, count } => {
                target.write_fields(&mut obj, "");
                obj.insert("button".into(), json!(button.as_str()));
                obj.insert("count".into(), json!(count));
            }
            SemanticAction::Type { text } => {
                obj.insert("text".into(), json!(text));
            }
            SemanticAction::Scroll { target, direction, amount } => {
                if let Some(t) = target {
                    t.write_fields(&mut obj, "");
                }
                obj.insert("direction".into(), json!(direction.as_str()));
                obj.insert("amount".into(), json!(amount));
            }
            SemanticAction::Drag { from, to } => {
                obj.insert("from".into(), from.to_json());
                obj.insert("to".into(), to.to_json());
            }
            SemanticAction::Wait { seconds } => {
                obj.insert("seconds".into(), json!(seconds));
            }
            SemanticAction::Hotkey { keys } => {
                obj.insert("keys".into(), json!(keys));
            }
            SemanticAction::Done => {}
            SemanticAction::Fail { reason } => {
                obj.insert("reason".into(), json!(reason));
            }
        }
        Value::Object(obj)
    }
}

impl Serialize for SemanticAction {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SemanticAction {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = Value::deserialize(deserializer)?;
        parse_action(&value).map_err(serde::de::Error::custom)
    }
}

fn point_or_element_properties() -> Map<String, Value> {
    let mut props = Map::new();
    props.insert(
        "element_id".into(),
        json!({"type": "integer", "minimum": 0, "description": "id from the a11y_tree element table"}),
    );
    props.insert("x".into(), json!({"type": "integer", "description": "screen x in pixels"}));
    props.insert("y".into(), json!({"type": "integer", "description": "screen y in pixels"}));
    props
}

fn target_schema(description: &str) -> Value {
    json!({
        "type": "object",
        "description": description,
        "properties": point_or_element_properties(),
        "additionalProperties": false,
        "oneOf": [{"required": ["element_id"]}, {"required": ["x", "y"]}],
        "dependentRequired": {"x": ["y"], "y": ["x"]}
    })
}

/// Input schema of one action kind, without the `action` discriminant.
///
/// Returns `None` for unknown kinds.
pub fn variant_schema(kind: &str) -> Option<Value> {
    let schema = match kind {
        "click" => {
            let mut props = point_or_element_properties();
            props.insert("button".into(), json!({"type": "string", "enum": ["left", "right", "middle"], "default": "left"}));
            props.insert("count".into(), json!({"type": "integer", "enum": [1, 2], "default": 1}));
            json!({
                "type": "object",
                "properties": props,
                "additionalProperties": false,
                "oneOf": [{"required": ["element_id"]}, {"required": ["x", "y"]}],
                "dependentRequired": {"x": ["y"], "y": ["x"]}
            })
        }
        "type" => json!({
            "type": "object",
            "properties": {
                "text": {
                    "type": "string",
                    "maxLength": MAX_TYPE_LEN,
                    "pattern": "^[\\x20-\\x7E\\n\\t]*$",
                    "description": "printable ASCII, newline and tab only"
                }
            },
            "required": ["text"],
            "additionalProperties": false
        }),
        "scroll" => {
            let mut props = point_or_element_properties();
            props.insert("direction".into(), json!({"type": "string", "enum": ["up", "down", "left", "right"]}));
            props.insert("amount".into(), json!({"type": "integer", "minimum": 1, "maximum": 1000, "default": 1}));
            json!({
                "type": "object",
                "properties": props,
                "required": ["direction"],
                "additionalProperties": false,
                "dependentRequired": {"x": ["y"], "y": ["x"]},
                "not": {"anyOf": [{"required": ["element_id", "x"]}, {"required": ["element_id", "y"]}]}
            })
        }
        "drag" => json!({
            "type": "object",
            "properties": {
                "from": target_schema("drag start"),
                "to": target_schema("drag end")
            },
            "required": ["from", "to"],
            "additionalProperties": false
        }),
        "wait" => json!({
            "type": "object",
            "properties": {
                "seconds": {"type": "number", "minimum": 0, "maximum": MAX_WAIT_SECONDS}
            },
            "required": ["seconds"],
            "additionalProperties": false
        }),
        "hotkey" => json!({
            "type": "object",
            "properties": {
                "keys": {
                    "type": "array",
                    "items": {"type": "string", "enum": keys::all_key_names()},
                    "minItems": 1,
                    "maxItems": MAX_HOTKEY_KEYS,
                    "uniqueItems": true
                }
            },
            "required": ["keys"],
            "additionalProperties": false
        }),
        "done" => json!({
            "type": "object",
            "properties": {},
            "additionalProperties": false
        }),
        "fail" => json!({
            "type": "object",
            "properties": {"reason": {"type": "string", "maxLength": 1024}},
            "required": ["reason"],
            "additionalProperties": false
        }),
        _ => return None,
    };
    Some(schema)
}

struct CompiledSchemas(Vec<(&'static str, jsonschema::Validator)>);

static VALIDATORS: Lazy<CompiledSchemas> = Lazy::new(|| {
    CompiledSchemas(
        ACTION_KINDS
            .iter()
            .map(|kind| {
                let schema = variant_schema(kind).expect("every kind has a schema");
                let validator =
                    jsonschema::validator_for(&schema).expect("built-in schemas are valid");
                (*kind, validator)
            })
            .collect(),
    )
});

fn validator(kind: &str) -> Option<&'static jsonschema::Validator> {
    VALIDATORS.0.iter().find(|(k, _)| *k == kind).map(|(_, v)| v)
}

/// Validates `args` against the schema of `kind`.
///
/// The error message names the offending field by JSON pointer.
pub fn validate_args(kind: &str, args: &Value) -> Result<(), Error> {
    let validator = validator(kind).ok_or_else(|| Error::UnknownAction(kind.to_string()))?;
    let messages: Vec<String> = validator
        .iter_errors(args)
        .map(|e| {
            let path = e.instance_path().to_string();
            let path = if path.is_empty() { "/".to_string() } else { path };
            format!("{path}: {e}")
        })
        .collect();
    if messages.is_empty() {
        Ok(())
    } else {
        Err(Error::SchemaViolation(messages.join("; ")))
    }
}

/// Parses an action document `{"action": kind, ...}`.
pub fn parse_action(doc: &Value) -> Result<SemanticAction, Error> {
    let obj = doc
        .as_object()
        .ok_or_else(|| Error::SchemaViolation("/: action must be an object".into()))?;
    let kind = match obj.get("action") {
        Some(Value::String(k)) => k.as_str(),
        _ => return Err(Error::SchemaViolation("/action: missing string field".into())),
    };
    let mut args = obj.clone();
    args.remove("action");
    parse_args(kind, &Value::Object(args))
}

/// Parses the fields of an action whose kind is already known, as received
/// by a tool call.
pub fn parse_args(kind: &str, args: &Value) -> Result<SemanticAction, Error> {
    validate_args(kind, args)?;
    let obj = args.as_object().expect("schema guarantees an object");
    let int = |key: &str| obj.get(key).and_then(as_int);

    let action = match kind {
        "click" => SemanticAction::Click {
            target: read_target(obj).expect("schema requires a target"),
            button: obj
                .get("button")
                .map(|b| serde_json::from_value(b.clone()).expect("enum checked by schema"))
                .unwrap_or_default(),
            count: int("count").unwrap_or(1) as u8,
        },
        "type" => SemanticAction::Type {
            text: obj["text"].as_str().unwrap_or_default().to_string(),
        },
        "scroll" => SemanticAction::Scroll {
            target: read_target(obj),
            direction: serde_json::from_value(obj["direction"].clone())
                .expect("enum checked by schema"),
            amount: int("amount").unwrap_or(1) as u32,
        },
        "drag" => SemanticAction::Drag {
            from: read_target(obj["from"].as_object().expect("schema")).expect("schema"),
            to: read_target(obj["to"].as_object().expect("schema")).expect("schema"),
        },
        "wait" => SemanticAction::Wait {
            seconds: obj["seconds"].as_f64().unwrap_or_default(),
        },
        "hotkey" => SemanticAction::Hotkey {
            keys: obj["keys"]
                .as_array()
                .map(|ks| ks.iter().filter_map(|k| k.as_str().map(str::to_string)).collect())
                .unwrap_or_default(),
        },
        "done" => SemanticAction::Done,
        "fail" => SemanticAction::Fail {
            reason: obj["reason"].as_str().unwrap_or_default().to_string(),
        },
        other => return Err(Error::UnknownAction(other.to_string())),
    };
    Ok(action)
}

fn as_int(v: &Value) -> Option<i64> {
    v.as_i64().or_else(|| {
        v.as_f64()
            .filter(|f| f.fract() == 0.0 && f.abs() < 9.0e15)
            .map(|f| f as i64)
    })
}

fn read_target(obj: &Map<String, Value>) -> Option<Target> {
    if let Some(id) = obj.get("element_id").and_then(as_int) {
        return Some(Target::Element(id as u32));
    }
    match (obj.get("x").and_then(as_int), obj.get("y").and_then(as_int)) {
        (Some(x), Some(y)) => Some(Target::Point { x, y }),
        _ => None,
    }
}

/// Grounds every element reference to the clamped center of its bounds.
pub fn resolve_target(
    action: &SemanticAction,
    elements: &[UIElement],
    screen: Screen,
) -> Result<SemanticAction, Error> {
    let ground = |t: Target| -> Result<Target, Error> {
        match t {
            Target::Element(id) => {
                let el = elements
                    .iter()
                    .find(|e| e.id == id)
                    .ok_or(Error::UnknownElement(id))?;
                let (cx, cy) = el.center();
                let (x, y) = screen.clamp(cx, cy);
                Ok(Target::Point { x, y })
            }
            Target::Point { x, y } if screen.contains(x, y) => Ok(t),
            Target::Point { x, y } => Err(Error::OutOfBounds { x, y }),
        }
    };
    let resolved = match action {
        SemanticAction::Click { target, button, count } => SemanticAction::Click {
            target: ground(*target)?,
            button: *button,
            count: *count,
        },
        SemanticAction::Scroll { target, direction, amount } => SemanticAction::Scroll {
            target: target.map(ground).transpose()?,
            direction: *direction,
            amount: *amount,
        },
        SemanticAction::Drag { from, to } => SemanticAction::Drag {
            from: ground(*from)?,
            to: ground(*to)?,
        },
        other => other.clone(),
    };
    Ok(resolved)
}

fn point(t: Target) -> Result<(i64, i64), Error> {
    match t {
        Target::Point { x, y } => Ok((x, y)),
        Target::Element(_) => Err(Error::UnresolvedTarget),
    }
}

/// Rounds `num / den` half-up (towards +inf on ties).
fn div_round_half_up(num: i64, den: i64) -> i64 {
    (2 * num + den).div_euclid(2 * den)
}

/// Expands a grounded action into primitive input commands.
pub fn compile(action: &SemanticAction) -> Result<Vec<PrimitiveCommand>, Error> {
    use PrimitiveCommand as P;

    if action.targets().iter().any(|t| matches!(t, Target::Element(_))) {
        return Err(Error::UnresolvedTarget);
    }
    let mut out = Vec::new();
    match action {
        SemanticAction::Click { target, button, count } => {
            let (x, y) = point(*target)?;
            out.push(P::MoveTo { x, y });
            out.push(P::ButtonDown { button: *button });
            out.push(P::ButtonUp { button: *button });
            if *count >= 2 {
                out.push(P::Sleep { ms: DOUBLE_CLICK_GAP_MS });
                out.push(P::ButtonDown { button: *button });
                out.push(P::ButtonUp { button: *button });
            }
        }
        SemanticAction::Type { text } => {
            for c in text.chars() {
                let (key, shift) = keys::key_for_char(c).ok_or_else(|| {
                    Error::SchemaViolation(format!("/text: character {c:?} cannot be typed"))
                })?;
                if shift {
                    out.push(P::key_down(keys::SHIFT));
                    out.push(P::key_down(&key));
                    out.push(P::key_up(&key));
                    out.push(P::key_up(keys::SHIFT));
                } else {
                    out.push(P::key_down(&key));
                    out.push(P::key_up(&key));
                }
            }
        }
        SemanticAction::Scroll { target, direction, amount } => {
            if let Some(t) = target {
                let (x, y) = point(*t)?;
                out.push(P::MoveTo { x, y });
            }
            let (dx, dy) = direction.wheel(*amount);
            out.push(P::Wheel { dx, dy });
        }
        SemanticAction::Drag { from, to } => {
            let (ax, ay) = point(*from)?;
            let (bx, by) = point(*to)?;
            out.push(P::MoveTo { x: ax, y: ay });
            out.push(P::ButtonDown { button: MouseButton::Left });
            for i in 1..=DRAG_STEPS {
                let x = div_round_half_up(ax * DRAG_STEPS + (bx - ax) * i, DRAG_STEPS);
                let y = div_round_half_up(ay * DRAG_STEPS + (by - ay) * i, DRAG_STEPS);
                out.push(P::MoveTo { x, y });
            }
            out.push(P::ButtonUp { button: MouseButton::Left });
        }
        SemanticAction::Wait { seconds } => {
            out.push(P::Sleep { ms: (seconds * 1000.0).round() as u64 });
        }
        SemanticAction::Hotkey { keys } => {
            out.extend(keys.iter().map(P::key_down));
            out.extend(keys.iter().rev().map(P::key_up));
        }
        SemanticAction::Done | SemanticAction::Fail { .. } => return Err(Error::TerminalAction),
    }
    Ok(out)
}
