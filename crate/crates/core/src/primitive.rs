use std::fmt;

use serde::{Deserialize, Serialize};

use crate::action::MouseButton;

/// One low-level GUI control signal, as carried by `POST /execute`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "cmd", rename_all = "snake_case")]
pub enum PrimitiveCommand {
    MoveTo { x: i64, y: i64 },
    ButtonDown { button: MouseButton },
    ButtonUp { button: MouseButton },
    KeyDown { key: String },
    KeyUp { key: String },
    Wheel { dx: i64, dy: i64 },
    Sleep { ms: u64 },
}

impl PrimitiveCommand {
    pub fn key_down(key: impl Into<String>) -> Self {
        Self::KeyDown { key: key.into() }
    }

    pub fn key_up(key: impl Into<String>) -> Self {
        Self::KeyUp { key: key.into() }
    }
}

impl fmt::Display for PrimitiveCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::MoveTo { x, y } => write!(f, "MoveTo({x},{y})"),
            Self::ButtonDown { button } => write!(f, "ButtonDown({button})"),
            Self::ButtonUp { button } => write!(f, "ButtonUp({button})"),
            Self::KeyDown { key } => write!(f, "KeyDown({key})"),
            Self::KeyUp { key } => write!(f, "KeyUp({key})"),
            Self::Wheel { dx, dy } => write!(f, "Wheel({dx},{dy})"),
            Self::Sleep { ms } => write!(f, "Sleep({ms})"),
        }
    }
}
