//! Client side of the sandbox controller HTTP contract.
//!
//! [`VmClient`] talks to any server implementing the v1 wire contract;
//! [`LocalSandbox`] drives an in-process [`Desktop`] directly. Both implement
//! [`Sandbox`], which is what the MCP server and the agent loop depend on.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Duration;

use cua_core::geometry::Screen;
use cua_core::wire::{
    png_dimensions, ErrorBody, ExecResult, ExecuteRequest, HealthResponse, RawObservation, ResetAck,
    ResetRequest, TickResponse, MAX_BATCH, TICK_HEADER, VERSION, VERSION_HEADER,
};
use cua_core::PrimitiveCommand;
use cua_sim::{Desktop, DesktopState, SimError};
use log::{debug, warn};
use ureq::http::Response;
use ureq::{Agent, Body};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);
pub const OBSERVE_RETRIES: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VmError {
    #[error("sandbox unreachable: {0}")]
    Unreachable(String),
    #[error("observation torn across ticks after {0} attempts")]
    TornObservation(usize),
    #[error("command {index} rejected: {reason}")]
    Rejected { index: usize, reason: String },
    #[error("unknown scene '{0}'")]
    UnknownScene(String),
    #[error("empty batch")]
    EmptyBatch,
    #[error("batch of {0} commands exceeds the limit of {MAX_BATCH}")]
    BatchTooLarge(usize),
    #[error("server error {status}: {message}")]
    Server { status: u16, message: String },
    #[error("protocol error: {0}")]
    Protocol(String),
}

/// A controllable desktop: observation, batched input, lifecycle.
pub trait Sandbox: Send + Sync {
    fn observe(&self) -> Result<RawObservation, VmError>;
    fn execute(&self, batch: &[PrimitiveCommand]) -> Result<ExecResult, VmError>;
    fn reset(&self, scene_id: &str, seed: u64) -> Result<ResetAck, VmError>;
    fn health(&self) -> Result<HealthResponse, VmError>;
    /// Full simulator state, for evaluation. Not part of the portable contract.
    fn fetch_state(&self) -> Result<DesktopState, VmError>;
}

fn check_batch(batch: &[PrimitiveCommand]) -> Result<(), VmError> {
    if batch.is_empty() {
        return Err(VmError::EmptyBatch);
    }
    if batch.len() > MAX_BATCH {
        return Err(VmError::BatchTooLarge(batch.len()));
    }
    Ok(())
}

/// Blocking HTTP client for one sandbox endpoint.
pub struct VmClient {
    base: String,
    agent: Agent,
}

impl VmClient {
    pub fn new(base_url: impl Into<String>) -> Self {
        Self::with_timeout(base_url, DEFAULT_TIMEOUT)
    }

    pub fn with_timeout(base_url: impl Into<String>, timeout: Duration) -> Self {
        let config = Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            // A fresh connection per request: reused connections stall ~40 ms
            // on delayed ACKs when a small body follows its headers.
            .max_idle_connections(0)
            .build();
        Self {
            base: base_url.into().trim_end_matches('/').to_string(),
            agent: Agent::new_with_config(config),
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    fn get(&self, path: &str, tick: Option<u64>) -> Result<Response<Body>, VmError> {
        let mut req = self.agent.get(format!("{}{path}", self.base)).header(VERSION_HEADER, VERSION);
        if let Some(t) = tick {
            req = req.header(TICK_HEADER, t.to_string());
        }
        req.call().map_err(transport)
    }

    fn post<T: serde::Serialize>(&self, path: &str, body: &T) -> Result<Response<Body>, VmError> {
        self.agent
            .post(format!("{}{path}", self.base))
            .header(VERSION_HEADER, VERSION)
            .send_json(body)
            .map_err(transport)
    }

    /// One burst: screenshot, then a11y and system pinned to its tick, then
    /// a tick read to confirm nothing moved in between.
    fn observe_once(&self) -> Result<Option<RawObservation>, VmError> {
        let resp = self.get("/screenshot", None)?;
        let resp = expect_ok(resp)?;
        let tick = tick_of(&resp)?;
        let screenshot = read_bytes(resp)?;

        let resp = self.get("/a11y", Some(tick))?;
        if resp.status().as_u16() == 409 {
            return Ok(None);
        }
        let a11y = read_bytes(expect_ok(resp)?)?;

        let resp = self.get("/system", Some(tick))?;
        if resp.status().as_u16() == 409 {
            return Ok(None);
        }
        let system_info: BTreeMap<String, String> = read_json(expect_ok(resp)?)?;

        let now: TickResponse = read_json(expect_ok(self.get("/tick", None)?)?)?;
        if now.tick != tick {
            return Ok(None);
        }
        let (width, height) = png_dimensions(&screenshot)
            .ok_or_else(|| VmError::Protocol("screenshot is not a PNG".into()))?;
        Ok(Some(RawObservation { screenshot, screen: Screen::new(width, height), a11y, system_info, tick }))
    }
}

impl Sandbox for VmClient {
    fn observe(&self) -> Result<RawObservation, VmError> {
        for attempt in 1..=OBSERVE_RETRIES {
            if let Some(obs) = self.observe_once()? {
                return Ok(obs);
            }
            debug!("observation torn on attempt {attempt}, retrying");
        }
        Err(VmError::TornObservation(OBSERVE_RETRIES))
    }

    fn execute(&self, batch: &[PrimitiveCommand]) -> Result<ExecResult, VmError> {
        check_batch(batch)?;
        let resp = self.post("/execute", &ExecuteRequest { commands: batch.to_vec() })?;
        read_json(expect_ok(resp)?)
    }

    fn reset(&self, scene_id: &str, seed: u64) -> Result<ResetAck, VmError> {
        let resp = self.post("/reset", &ResetRequest { scene_id: scene_id.to_string(), seed })?;
        if resp.status().as_u16() == 404 {
            return Err(VmError::UnknownScene(scene_id.to_string()));
        }
        read_json(expect_ok(resp)?)
    }

    fn health(&self) -> Result<HealthResponse, VmError> {
        read_json(expect_ok(self.get("/health", None)?)?)
    }

    fn fetch_state(&self) -> Result<DesktopState, VmError> {
        read_json(expect_ok(self.get("/state", None)?)?)
    }
}

fn transport(e: ureq::Error) -> VmError {
    match e {
        ureq::Error::Io(_)
        | ureq::Error::Timeout(_)
        | ureq::Error::HostNotFound
        | ureq::Error::ConnectionFailed => VmError::Unreachable(e.to_string()),
        other => VmError::Protocol(other.to_string()),
    }
}

fn tick_of(resp: &Response<Body>) -> Result<u64, VmError> {
    resp.headers()
        .get(TICK_HEADER)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| VmError::Protocol(format!("missing {TICK_HEADER} header")))
}

fn read_bytes(resp: Response<Body>) -> Result<Vec<u8>, VmError> {
    resp.into_body()
        .with_config()
        .limit(64 * 1024 * 1024)
        .read_to_vec()
        .map_err(|e| VmError::Protocol(e.to_string()))
}

fn read_json<T: serde::de::DeserializeOwned>(resp: Response<Body>) -> Result<T, VmError> {
    let bytes = read_bytes(resp)?;
    serde_json::from_slice(&bytes).map_err(|e| VmError::Protocol(e.to_string()))
}

/// Passes 2xx responses through; maps error bodies onto [`VmError`].
fn expect_ok(resp: Response<Body>) -> Result<Response<Body>, VmError> {
    let status = resp.status().as_u16();
    if (200..300).contains(&status) {
        return Ok(resp);
    }
    let bytes = read_bytes(resp)?;
    let Ok(body) = serde_json::from_slice::<ErrorBody>(&bytes) else {
        return Err(VmError::Server { status, message: String::from_utf8_lossy(&bytes).into_owned() });
    };
    let detail = body.error;
    warn!("sandbox replied {status} {}: {}", detail.code, detail.message);
    Err(match (detail.code.as_str(), detail.index) {
        (cua_core::wire::codes::REJECTED, Some(index)) => VmError::Rejected { index, reason: detail.message },
        (cua_core::wire::codes::UNKNOWN_SCENE, _) => VmError::UnknownScene(detail.message),
        _ => VmError::Server { status, message: detail.message },
    })
}

/// In-process sandbox over a shared [`Desktop`]; no sockets involved.
#[derive(Clone)]
pub struct LocalSandbox {
    desktop: Arc<Desktop>,
}

impl LocalSandbox {
    pub fn new(desktop: Arc<Desktop>) -> Self {
        Self { desktop }
    }

    pub fn desktop(&self) -> &Arc<Desktop> {
        &self.desktop
    }
}

impl Sandbox for LocalSandbox {
    fn observe(&self) -> Result<RawObservation, VmError> {
        Ok(self.desktop.observe())
    }

    fn execute(&self, batch: &[PrimitiveCommand]) -> Result<ExecResult, VmError> {
        check_batch(batch)?;
        self.desktop
            .execute(batch)
            .map_err(|(index, e)| VmError::Rejected { index, reason: e.to_string() })
    }

    fn reset(&self, scene_id: &str, seed: u64) -> Result<ResetAck, VmError> {
        self.desktop.reset(scene_id, seed).map_err(|e| match e {
            SimError::UnknownScene(id) => VmError::UnknownScene(id),
            other => VmError::Protocol(other.to_string()),
        })
    }

    fn health(&self) -> Result<HealthResponse, VmError> {
        Ok(self.desktop.health())
    }

    fn fetch_state(&self) -> Result<DesktopState, VmError> {
        Ok(self.desktop.snapshot())
    }
}

impl<S: Sandbox + ?Sized> Sandbox for Arc<S> {
    fn observe(&self) -> Result<RawObservation, VmError> {
        (**self).observe()
    }
    fn execute(&self, batch: &[PrimitiveCommand]) -> Result<ExecResult, VmError> {
        (**self).execute(batch)
    }
    fn reset(&self, scene_id: &str, seed: u64) -> Result<ResetAck, VmError> {
        (**self).reset(scene_id, seed)
    }
    fn health(&self) -> Result<HealthResponse, VmError> {
        (**self).health()
    }
    fn fetch_state(&self) -> Result<DesktopState, VmError> {
        (**self).fetch_state()
    }
}
