//! Raw accessibility-tree wire format and its ingestion.
//!
//! The format is the JSON tree served by a sandbox's `GET /a11y` endpoint:
//! `{role, name?, description?, bounds:{x,y,w,h}, states:[...], value?, children:[...]}`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::geometry::Bounds;
use crate::Error;

/// Deepest level kept by [`ingest_a11y`]; the root sits at depth 1.
pub const MAX_DEPTH: usize = 32;
/// Maximum number of nodes kept by [`ingest_a11y`], counted in pre-order.
pub const MAX_NODES: usize = 10_000;

/// One node of a raw accessibility tree, in source role vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawA11yNode {
    pub role: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub bounds: Bounds,
    #[serde(default)]
    pub states: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    #[serde(default)]
    pub children: Vec<RawA11yNode>,
}

impl RawA11yNode {
    pub fn new(role: impl Into<String>, name: impl Into<String>, bounds: Bounds) -> Self {
        Self {
            role: role.into(),
            name: name.into(),
            description: String::new(),
            bounds,
            states: BTreeSet::new(),
            value: None,
            children: Vec::new(),
        }
    }

    pub fn with_states<I, S>(mut self, states: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.states = states.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_value(mut self, value: impl Into<String>) -> Self {
        self.value = Some(value.into());
        self
    }

    pub fn with_child(mut self, child: RawA11yNode) -> Self {
        self.children.push(child);
        self
    }

    pub fn has_state(&self, state: &str) -> bool {
        self.states.contains(state)
    }

    /// Total number of nodes in this subtree, including `self`.
    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(RawA11yNode::node_count).sum::<usize>()
    }

    /// Roles in document (pre-)order.
    pub fn preorder_roles(&self) -> Vec<&str> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(node) = stack.pop() {
            out.push(node.role.as_str());
            stack.extend(node.children.iter().rev());
        }
        out
    }

    /// Serializes to the wire document.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("raw a11y nodes always serialize")
    }
}

/// Result of ingesting a wire document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct A11yTree {
    pub root: RawA11yNode,
    /// Set when nodes were dropped by the depth or size caps.
    pub truncated: bool,
}

/// Parses a raw tree document, enforcing the depth and node-count caps.
pub fn ingest_a11y(document: &[u8]) -> Result<A11yTree, Error> {
    let value: Value = serde_json::from_slice(document)
        .map_err(|e| Error::MalformedTree(format!("invalid json: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::MalformedTree("top level must be an object".into()))?;
    if !obj.get("role").is_some_and(Value::is_string) {
        return Err(Error::MalformedTree("root node has no role".into()));
    }
    let mut budget = MAX_NODES;
    let mut truncated = false;
    let root = convert(&value, 1, &mut budget, &mut truncated)?;
    Ok(A11yTree { root, truncated })
}

fn convert(
    value: &Value,
    depth: usize,
    budget: &mut usize,
    truncated: &mut bool,
) -> Result<RawA11yNode, Error> {
    let obj = value
        .as_object()
        .ok_or_else(|| Error::MalformedTree("node must be an object".into()))?;
    *budget -= 1;

    let text = |key: &str| -> Result<String, Error> {
        match obj.get(key) {
            None | Some(Value::Null) => Ok(String::new()),
            Some(Value::String(s)) => Ok(s.clone()),
            Some(_) => Err(Error::MalformedTree(format!("field '{key}' must be a string"))),
        }
    };

    let role = match obj.get("role") {
        Some(Value::String(s)) => s.clone(),
        None | Some(Value::Null) => "unknown".to_string(),
        Some(_) => return Err(Error::MalformedTree("field 'role' must be a string".into())),
    };
    let bounds: Bounds = match obj.get("bounds") {
        Some(b) => serde_json::from_value(b.clone())
            .map_err(|e| Error::MalformedTree(format!("bad bounds: {e}")))?,
        None => return Err(Error::MalformedTree(format!("node '{role}' has no bounds"))),
    };
    if bounds.w < 0 || bounds.h < 0 {
        return Err(Error::MalformedTree(format!("node '{role}' has negative extent")));
    }
    let states = match obj.get("states") {
        None | Some(Value::Null) => BTreeSet::new(),
        Some(Value::Array(items)) => items
            .iter()
            .map(|s| {
                s.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| Error::MalformedTree("states must be strings".into()))
            })
            .collect::<Result<_, _>>()?,
        Some(_) => return Err(Error::MalformedTree("states must be an array".into())),
    };
    let value_field = match obj.get("value") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return Err(Error::MalformedTree("field 'value' must be a string".into())),
    };

    let mut children = Vec::new();
    match obj.get("children") {
        None | Some(Value::Null) => {}
        Some(Value::Array(items)) => {
            for child in items {
                if depth + 1 > MAX_DEPTH || *budget == 0 {
                    *truncated = true;
                    break;
                }
                children.push(convert(child, depth + 1, budget, truncated)?);
            }
        }
        Some(_) => return Err(Error::MalformedTree("children must be an array".into())),
    }

    Ok(RawA11yNode {
        role,
        name: text("name")?,
        description: text("description")?,
        bounds,
        states,
        value: value_field,
        children,
    })
}
