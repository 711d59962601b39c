//! HTTP front end implementing the sandbox controller wire contract.

use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, MutexGuard};
use std::thread::JoinHandle;

use cua_core::wire::{
    codes, ErrorBody, ExecResult, ExecuteRequest, HealthResponse, HealthStatus, RawObservation,
    ResetAck, ResetRequest, TickResponse, MAX_BATCH, TICK_HEADER, VERSION, VERSION_HEADER,
};
use cua_core::PrimitiveCommand;
use log::{debug, warn};
use serde::Serialize;

use crate::emit::emit_a11y;
use crate::render::emit_screenshot;
use crate::scene::SceneCatalog;
use crate::state::DesktopState;
use crate::SimError;

const WORKERS: usize = 4;

/// One HTTP reply, independent of the transport.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reply {
    pub status: u16,
    pub content_type: &'static str,
    pub body: Vec<u8>,
    pub tick: u64,
}

impl Reply {
    fn json<T: Serialize>(status: u16, value: &T, tick: u64) -> Self {
        Self {
            status,
            content_type: "application/json",
            body: serde_json::to_vec(value).expect("wire payloads serialize"),
            tick,
        }
    }

    fn error(status: u16, code: &str, message: impl Into<String>, index: Option<usize>, tick: u64) -> Self {
        Self::json(status, &ErrorBody::new(code, message, index), tick)
    }
}

/// Simulator state shared by all request handlers.
///
/// Observation handlers read under the lock, so they always see a state
/// between batches; `/execute` and `/reset` are the only writers.
pub struct Desktop {
    catalog: SceneCatalog,
    current: Mutex<(String, DesktopState)>,
    resetting: AtomicBool,
}

impl Desktop {
    pub fn new(catalog: SceneCatalog) -> Result<Self, SimError> {
        let spec = catalog
            .default_scene()
            .ok_or_else(|| SimError::InvalidScene("scene catalog is empty".into()))?
            .clone();
        let state = DesktopState::load_scene(&spec, 0)?;
        Ok(Self {
            catalog,
            current: Mutex::new((spec.scene_id, state)),
            resetting: AtomicBool::new(false),
        })
    }

    pub fn catalog(&self) -> &SceneCatalog {
        &self.catalog
    }

    fn lock(&self) -> MutexGuard<'_, (String, DesktopState)> {
        self.current.lock().unwrap_or_else(|p| p.into_inner())
    }

    /// Clone of the live state.
    pub fn snapshot(&self) -> DesktopState {
        self.lock().1.clone()
    }

    pub fn reset(&self, scene_id: &str, seed: u64) -> Result<ResetAck, SimError> {
        let spec = self
            .catalog
            .get(scene_id)
            .ok_or_else(|| SimError::UnknownScene(scene_id.to_string()))?;
        self.resetting.store(true, Ordering::SeqCst);
        let fresh = DesktopState::load_scene(spec, seed);
        let result = fresh.map(|state| {
            let mut guard = self.lock();
            *guard = (scene_id.to_string(), state);
            ResetAck { ok: true, scene_id: scene_id.to_string(), tick: 0 }
        });
        self.resetting.store(false, Ordering::SeqCst);
        result
    }

    /// All observation channels, taken under one lock.
    pub fn observe(&self) -> RawObservation {
        let guard = self.lock();
        let state = &guard.1;
        RawObservation {
            screenshot: emit_screenshot(state),
            screen: state.scene.screen,
            a11y: emit_a11y(state),
            system_info: state.scene.system_info.clone(),
            tick: state.tick,
        }
    }

    /// Applies a batch atomically with respect to observers, stopping at the
    /// first rejected command.
    pub fn execute(&self, commands: &[PrimitiveCommand]) -> Result<ExecResult, (usize, SimError)> {
        let mut guard = self.lock();
        let state = &mut guard.1;
        let applied = state.apply_batch(commands)?;
        Ok(ExecResult { ok: true, applied, detail: String::new(), tick_after: state.tick })
    }

    pub fn health(&self) -> HealthResponse {
        let status = if self.resetting.load(Ordering::SeqCst) {
            HealthStatus::Degraded
        } else {
            HealthStatus::Ok
        };
        let guard = self.lock();
        HealthResponse { status, scene_id: guard.0.clone(), tick: guard.1.tick }
    }

    /// Routes one request. `tick_header` is the request's `X-Tick`, if any.
    pub fn handle(&self, method: &str, path: &str, tick_header: Option<u64>, body: &[u8]) -> Reply {
        let path = path.split('?').next().unwrap_or_default();
        match (method, path) {
            ("GET", "/health") => {
                let health = self.health();
                let tick = health.tick;
                Reply::json(200, &health, tick)
            }
            ("POST", "/reset") => self.handle_reset(body),
            ("POST", "/execute") => self.handle_execute(body),
            ("GET", "/screenshot" | "/a11y" | "/system" | "/tick" | "/state") => {
                let guard = self.lock();
                let state = &guard.1;
                let tick = state.tick;
                if let Some(expected) = tick_header {
                    if expected != tick {
                        return Reply::error(
                            409,
                            codes::TICK_MISMATCH,
                            format!("requested tick {expected}, current tick {tick}"),
                            None,
                            tick,
                        );
                    }
                }
                match path {
                    "/screenshot" => Reply {
                        status: 200,
                        content_type: "image/png",
                        body: emit_screenshot(state),
                        tick,
                    },
                    "/a11y" => Reply {
                        status: 200,
                        content_type: "application/json",
                        body: emit_a11y(state),
                        tick,
                    },
                    "/system" => Reply::json(200, &state.scene.system_info, tick),
                    "/tick" => Reply::json(200, &TickResponse { tick }, tick),
                    _ => Reply::json(200, state, tick),
                }
            }
            (_, "/health" | "/reset" | "/execute" | "/screenshot" | "/a11y" | "/system" | "/tick" | "/state") => {
                Reply::error(405, codes::BAD_REQUEST, format!("method {method} not allowed"), None, self.tick())
            }
            _ => Reply::error(404, codes::NOT_FOUND, format!("no endpoint {path}"), None, self.tick()),
        }
    }

    fn tick(&self) -> u64 {
        self.lock().1.tick
    }

    fn handle_reset(&self, body: &[u8]) -> Reply {
        let req: ResetRequest = match serde_json::from_slice(body) {
            Ok(r) => r,
            Err(e) => return Reply::error(400, codes::BAD_REQUEST, e.to_string(), None, self.tick()),
        };
        match self.reset(&req.scene_id, req.seed) {
            Ok(ack) => Reply::json(200, &ack, 0),
            Err(e @ SimError::UnknownScene(_)) => {
                Reply::error(404, codes::UNKNOWN_SCENE, e.to_string(), None, self.tick())
            }
            Err(e) => Reply::error(400, codes::BAD_REQUEST, e.to_string(), None, self.tick()),
        }
    }

    fn handle_execute(&self, body: &[u8]) -> Reply {
        let req: ExecuteRequest = match serde_json::from_slice(body) {
            Ok(r) => r,
            Err(e) => return Reply::error(400, codes::BAD_REQUEST, e.to_string(), None, self.tick()),
        };
        if req.commands.is_empty() || req.commands.len() > MAX_BATCH {
            return Reply::error(
                400,
                codes::BAD_REQUEST,
                format!("batch length must be 1..={MAX_BATCH}"),
                None,
                self.tick(),
            );
        }
        match self.execute(&req.commands) {
            Ok(result) => {
                let tick = result.tick_after;
                Reply::json(200, &result, tick)
            }
            Err((index, err)) => {
                debug!("rejected command {index}: {err}");
                Reply::error(422, codes::REJECTED, err.to_string(), Some(index), self.tick())
            }
        }
    }
}

/// A running simulator bound to a TCP port.
pub struct SimServer {
    desktop: Arc<Desktop>,
    http: Arc<tiny_http::Server>,
    addr: SocketAddr,
    workers: Vec<JoinHandle<()>>,
}

impl SimServer {
    /// Binds `addr` (use port 0 for an ephemeral port) and starts serving.
    pub fn start(catalog: SceneCatalog, addr: &str) -> Result<Self, SimError> {
        let desktop = Arc::new(Desktop::new(catalog)?);
        let http = tiny_http::Server::http(addr).map_err(|e| SimError::BindFailure(format!("{addr}: {e}")))?;
        let addr = http
            .server_addr()
            .to_ip()
            .ok_or_else(|| SimError::BindFailure(format!("{addr}: not an IP listener")))?;
        let http = Arc::new(http);
        let workers = (0..WORKERS)
            .map(|_| {
                let http = Arc::clone(&http);
                let desktop = Arc::clone(&desktop);
                std::thread::spawn(move || {
                    for request in http.incoming_requests() {
                        serve_one(&desktop, request);
                    }
                })
            })
            .collect();
        Ok(Self { desktop, http, addr, workers })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn desktop(&self) -> &Arc<Desktop> {
        &self.desktop
    }

    /// Blocks until the server stops.
    pub fn join(mut self) {
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }
}

impl Drop for SimServer {
    fn drop(&mut self) {
        for _ in 0..self.workers.len() {
            self.http.unblock();
        }
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }
}

fn serve_one(desktop: &Desktop, mut request: tiny_http::Request) {
    let tick_header = request
        .headers()
        .iter()
        .find(|h| h.field.equiv(TICK_HEADER))
        .and_then(|h| h.value.as_str().trim().parse::<u64>().ok());
    let mut body = Vec::new();
    let reply = match request.as_reader().read_to_end(&mut body) {
        Ok(_) => desktop.handle(request.method().as_str(), request.url(), tick_header, &body),
        Err(e) => Reply::error(400, codes::BAD_REQUEST, e.to_string(), None, 0),
    };
    let header = |name: &str, value: &str| {
        tiny_http::Header::from_bytes(name.as_bytes(), value.as_bytes()).expect("static header")
    };
    let response = tiny_http::Response::from_data(reply.body)
        .with_status_code(reply.status)
        .with_header(header("Content-Type", reply.content_type))
        .with_header(header(VERSION_HEADER, VERSION))
        .with_header(header(TICK_HEADER, &reply.tick.to_string()));
    if let Err(e) = request.respond(response) {
        warn!("failed to write response: {e}");
    }
}
