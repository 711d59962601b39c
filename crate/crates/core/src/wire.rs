//! Payloads of the sandbox controller HTTP contract (v1).
//!
//! | endpoint          | body                                  |
//! |-------------------|---------------------------------------|
//! | `GET /screenshot` | raw PNG bytes                         |
//! | `GET /a11y`       | raw tree JSON                         |
//! | `GET /system`     | flat string map                       |
//! | `GET /tick`       | [`TickResponse`]                      |
//! | `GET /health`     | [`HealthResponse`]                    |
//! | `GET /state`      | full simulator state (sim extension)  |
//! | `POST /execute`   | [`ExecuteRequest`] → [`ExecResult`]   |
//! | `POST /reset`     | [`ResetRequest`] → [`ResetAck`]       |
//!
//! Every error carries an [`ErrorBody`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geometry::Screen;
use crate::hash::content_hash;
use crate::primitive::PrimitiveCommand;

pub const VERSION_HEADER: &str = "X-VMC-Version";
pub const VERSION: &str = "1";
pub const TICK_HEADER: &str = "X-Tick";
pub const MAX_BATCH: usize = 512;

/// One observation burst, all channels taken at the same tick.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawObservation {
    pub screenshot: Vec<u8>,
    pub screen: Screen,
    pub a11y: Vec<u8>,
    pub system_info: BTreeMap<String, String>,
    pub tick: u64,
}

impl RawObservation {
    pub fn screenshot_hash(&self) -> u64 {
        content_hash(&self.screenshot)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecResult {
    pub ok: bool,
    pub applied: usize,
    pub detail: String,
    pub tick_after: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecuteRequest {
    pub commands: Vec<PrimitiveCommand>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResetRequest {
    pub scene_id: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResetAck {
    pub ok: bool,
    pub scene_id: String,
    pub tick: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TickResponse {
    pub tick: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HealthStatus {
    Ok,
    Degraded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HealthResponse {
    pub status: HealthStatus,
    pub scene_id: String,
    pub tick: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorDetail {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: ErrorDetail,
}

impl ErrorBody {
    pub fn new(code: &str, message: impl Into<String>, index: Option<usize>) -> Self {
        Self {
            error: ErrorDetail {
                code: code.to_string(),
                message: message.into(),
                index,
            },
        }
    }
}

/// Error codes used in [`ErrorBody`].
pub mod codes {
    pub const REJECTED: &str = "rejected";
    pub const UNKNOWN_SCENE: &str = "unknown_scene";
    pub const TICK_MISMATCH: &str = "tick_mismatch";
    pub const BAD_REQUEST: &str = "bad_request";
    pub const NOT_FOUND: &str = "not_found";
}

/// Reads width and height from a PNG IHDR chunk.
pub fn png_dimensions(bytes: &[u8]) -> Option<(u32, u32)> {
    const SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a];
    if bytes.len() < 24 || bytes[..8] != SIGNATURE || &bytes[12..16] != b"IHDR" {
        return None;
    }
    let w = u32::from_be_bytes(bytes[16..20].try_into().ok()?);
    let h = u32::from_be_bytes(bytes[20..24].try_into().ok()?);
    Some((w, h))
}
