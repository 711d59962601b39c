//! The MCP session: handshake state machine and method dispatch.

use cua_vmc::Sandbox;
use log::{debug, warn};
use serde_json::{json, Value};

use crate::jsonrpc::{
    error_reply, parse_frame, result_reply, Kind, RpcMessage, ALREADY_INITIALIZED, INVALID_PARAMS,
    METHOD_NOT_FOUND, NOT_INITIALIZED,
};
use crate::tools::{call_tool, is_tool, registry};

pub const PROTOCOL_VERSION: &str = "2024-11-05";
pub const SERVER_NAME: &str = "litecua-mcp";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionState {
    New,
    /// `initialize` answered; waiting for `notifications/initialized`.
    Initializing,
    Ready,
}

pub struct McpServer {
    sandbox: Box<dyn Sandbox>,
    state: SessionState,
    protocol_version: String,
    tools_json: Value,
}

impl McpServer {
    pub fn new(sandbox: Box<dyn Sandbox>) -> Self {
        Self::with_version(sandbox, PROTOCOL_VERSION)
    }

    pub fn with_version(sandbox: Box<dyn Sandbox>, protocol_version: &str) -> Self {
        let tools_json = json!({"tools": registry()});
        Self { sandbox, state: SessionState::New, protocol_version: protocol_version.to_string(), tools_json }
    }

    pub fn state(&self) -> SessionState {
        self.state
    }

    /// Handles one frame; returns the reply document, if one is due.
    pub fn handle_frame(&mut self, frame: &[u8]) -> Option<Value> {
        match parse_frame(frame) {
            Ok(msg) => self.handle(msg),
            Err(e) => {
                debug!("bad frame: {e}");
                Some(e.reply())
            }
        }
    }

    /// Same as [`handle_frame`](Self::handle_frame), serialized.
    pub fn handle_text(&mut self, frame: &[u8]) -> Option<String> {
        self.handle_frame(frame).map(|v| v.to_string())
    }

    pub fn handle(&mut self, msg: RpcMessage) -> Option<Value> {
        let method = msg.method.as_deref().unwrap_or_default();
        match msg.kind {
            Kind::Notification => {
                if method == "notifications/initialized" {
                    if self.state == SessionState::Initializing {
                        self.state = SessionState::Ready;
                    } else {
                        warn!("initialized notification in state {:?} ignored", self.state);
                    }
                }
                None
            }
            Kind::Response | Kind::Error => None,
            Kind::Request => {
                let id = msg.id.clone().unwrap_or(Value::Null);
                Some(match self.dispatch(method, &msg.params) {
                    Ok(result) => result_reply(&id, result),
                    Err((code, message)) => error_reply(&id, code, &message),
                })
            }
        }
    }

    fn dispatch(&mut self, method: &str, params: &Value) -> Result<Value, (i64, String)> {
        match method {
            "initialize" => self.initialize(params),
            "ping" => Ok(json!({})),
            "tools/list" | "tools/call" if self.state != SessionState::Ready => {
                Err((NOT_INITIALIZED, "server not initialized".into()))
            }
            "tools/list" => Ok(self.tools_json.clone()),
            "tools/call" => self.tools_call(params),
            other => Err((METHOD_NOT_FOUND, format!("method not found: {other}"))),
        }
    }

    fn initialize(&mut self, params: &Value) -> Result<Value, (i64, String)> {
        if self.state != SessionState::New {
            return Err((ALREADY_INITIALIZED, "already initialized".into()));
        }
        let requested = params
            .get("protocolVersion")
            .or_else(|| params.get("version"))
            .and_then(Value::as_str)
            .ok_or((INVALID_PARAMS, "missing protocolVersion".to_string()))?;
        if requested != self.protocol_version {
            return Err((INVALID_PARAMS, format!("unsupported protocol version {requested}")));
        }
        self.state = SessionState::Initializing;
        Ok(json!({
            "protocolVersion": self.protocol_version,
            "capabilities": {"tools": {}},
            "serverInfo": {"name": SERVER_NAME, "version": env!("CARGO_PKG_VERSION")},
        }))
    }

    fn tools_call(&mut self, params: &Value) -> Result<Value, (i64, String)> {
        let name = params
            .get("name")
            .and_then(Value::as_str)
            .ok_or((INVALID_PARAMS, "missing tool name".to_string()))?;
        if !is_tool(name) {
            return Err((METHOD_NOT_FOUND, format!("unknown tool: {name}")));
        }
        let args = match params.get("arguments") {
            None | Some(Value::Null) => json!({}),
            Some(v @ Value::Object(_)) => v.clone(),
            Some(_) => return Err((INVALID_PARAMS, "arguments must be an object".into())),
        };
        Ok(call_tool(self.sandbox.as_ref(), name, &args).to_json())
    }
}
