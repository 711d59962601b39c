//! Core data model for contextualizing a desktop for computer-use agents.
//!
//! - [`a11y`]: raw accessibility-tree wire format and ingestion.
//! - [`context`]: compaction, usage annotation and text rendering.
//! - [`action`]: the semantic action grammar, target resolution and
//!   compilation into primitive input commands.
//! - [`wire`]: payloads of the sandbox controller HTTP contract.

pub mod a11y;
pub mod action;
pub mod context;
pub mod geometry;
pub mod hash;
pub mod keys;
pub mod primitive;
pub mod wire;

pub use a11y::{ingest_a11y, A11yTree, RawA11yNode};
pub use action::{compile, parse_action, resolve_target, MouseButton, ScrollDirection, SemanticAction, Target};
pub use context::{annotate, compact, contextualize, render_context, ContextSnapshot, Role, UIElement};
pub use geometry::{Bounds, Screen};
pub use hash::{content_hash, hash_hex};
pub use primitive::PrimitiveCommand;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("malformed accessibility tree: {0}")]
    MalformedTree(String),
    #[error("render budget {0} is below the minimum of 256")]
    BudgetTooSmall(usize),
    #[error("unknown action '{0}'")]
    UnknownAction(String),
    #[error("schema violation: {0}")]
    SchemaViolation(String),
    #[error("unknown element id {0}")]
    UnknownElement(u32),
    #[error("point ({x},{y}) is out of bounds")]
    OutOfBounds { x: i64, y: i64 },
    #[error("action still references an element id")]
    UnresolvedTarget,
    #[error("terminal actions are never compiled")]
    TerminalAction,
}
