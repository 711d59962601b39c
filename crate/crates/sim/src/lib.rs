//! A deterministic virtual desktop.
//!
//! Scenes ([`scene`]) declare windows and widgets; [`state::DesktopState`]
//! applies primitive input commands one tick at a time; [`emit`] and
//! [`render`] produce the accessibility tree and screenshot channels; and
//! [`server`] exposes everything over the sandbox controller HTTP contract.
//!
//! Time is simulated: each primitive advances the tick counter by one and
//! the clock by 10 ms, except `Sleep`, which advances the clock by its
//! duration rounded up to 10 ms.

pub mod emit;
pub mod render;
pub mod scene;
pub mod server;
pub mod state;

pub use emit::{a11y_tree, emit_a11y};
pub use render::emit_screenshot;
pub use scene::{Effect, SceneCatalog, SceneSpec, WidgetKind};
pub use server::{Desktop, SimServer};
pub use state::{DesktopState, WidgetState};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("unknown scene '{0}'")]
    UnknownScene(String),
    #[error("out of bounds")]
    OutOfBounds { x: i64, y: i64 },
    #[error("unmatched release of '{0}'")]
    UnmatchedRelease(String),
    #[error("'{0}' is already held")]
    AlreadyHeld(String),
    #[error("invalid key name '{0}'")]
    InvalidKey(String),
    #[error("cannot bind: {0}")]
    BindFailure(String),
}
