//! JSON-RPC 2.0 envelopes.

use serde_json::{json, Map, Value};

pub const PARSE_ERROR: i64 = -32700;
pub const INVALID_REQUEST: i64 = -32600;
pub const METHOD_NOT_FOUND: i64 = -32601;
pub const INVALID_PARAMS: i64 = -32602;
pub const INTERNAL_ERROR: i64 = -32603;
pub const NOT_INITIALIZED: i64 = -32002;
pub const ALREADY_INITIALIZED: i64 = -32003;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Request,
    Notification,
    Response,
    Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RpcError {
    pub code: i64,
    pub message: String,
    pub data: Option<Value>,
}

/// One validated JSON-RPC message.
#[derive(Debug, Clone, PartialEq)]
pub struct RpcMessage {
    pub kind: Kind,
    pub id: Option<Value>,
    pub method: Option<String>,
    pub params: Value,
    pub result: Option<Value>,
    pub error: Option<RpcError>,
    /// Members outside the envelope, kept but not interpreted.
    pub extra: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FrameError {
    #[error("parse error: {0}")]
    MalformedJson(String),
    /// `id` is echoed in the error reply when one could be recovered.
    #[error("invalid request: {reason}")]
    InvalidEnvelope { id: Option<Value>, reason: String },
}

impl FrameError {
    pub fn code(&self) -> i64 {
        match self {
            FrameError::MalformedJson(_) => PARSE_ERROR,
            FrameError::InvalidEnvelope { .. } => INVALID_REQUEST,
        }
    }

    /// The error reply for this frame.
    pub fn reply(&self) -> Value {
        let id = match self {
            FrameError::InvalidEnvelope { id: Some(id), .. } => id.clone(),
            _ => Value::Null,
        };
        error_reply(&id, self.code(), &self.to_string())
    }
}

fn is_valid_id(v: &Value) -> bool {
    v.is_string() || v.is_number()
}

/// Parses one transport frame (a stdio line or an HTTP body).
pub fn parse_frame(bytes: &[u8]) -> Result<RpcMessage, FrameError> {
    let doc: Value = serde_json::from_slice(bytes).map_err(|e| FrameError::MalformedJson(e.to_string()))?;
    let Value::Object(mut obj) = doc else {
        return Err(FrameError::InvalidEnvelope { id: None, reason: "frame is not a JSON object".into() });
    };
    let id = obj.remove("id");
    let usable_id = id.clone().filter(is_valid_id);
    let invalid = |reason: &str| FrameError::InvalidEnvelope { id: usable_id.clone(), reason: reason.into() };

    if obj.remove("jsonrpc") != Some(json!("2.0")) {
        return Err(invalid("jsonrpc must be \"2.0\""));
    }
    if let Some(id) = &id {
        if !is_valid_id(id) {
            return Err(invalid("id must be a string or a number"));
        }
    }

    if let Some(method) = obj.remove("method") {
        let Value::String(method) = method else {
            return Err(invalid("method must be a string"));
        };
        let params = obj.remove("params").unwrap_or(Value::Null);
        if !(params.is_null() || params.is_object() || params.is_array()) {
            return Err(invalid("params must be an object or an array"));
        }
        let kind = if id.is_some() { Kind::Request } else { Kind::Notification };
        return Ok(RpcMessage { kind, id, method: Some(method), params, result: None, error: None, extra: obj });
    }

    let result = obj.remove("result");
    let error = obj.remove("error");
    match (id, result, error) {
        (Some(id), Some(result), None) => Ok(RpcMessage {
            kind: Kind::Response,
            id: Some(id),
            method: None,
            params: Value::Null,
            result: Some(result),
            error: None,
            extra: obj,
        }),
        (Some(id), None, Some(err)) => {
            let code = err.get("code").and_then(Value::as_i64);
            let message = err.get("message").and_then(Value::as_str);
            let (Some(code), Some(message)) = (code, message) else {
                return Err(invalid("error needs an integer code and a string message"));
            };
            Ok(RpcMessage {
                kind: Kind::Error,
                id: Some(id),
                method: None,
                params: Value::Null,
                result: None,
                error: Some(RpcError { code, message: message.to_string(), data: err.get("data").cloned() }),
                extra: obj,
            })
        }
        (None, _, _) => Err(invalid("missing method")),
        _ => Err(invalid("a response carries exactly one of result or error")),
    }
}

pub fn result_reply(id: &Value, result: Value) -> Value {
    json!({"jsonrpc": "2.0", "id": id, "result": result})
}

pub fn error_reply(id: &Value, code: i64, message: &str) -> Value {
    json!({"jsonrpc": "2.0", "id": id, "error": {"code": code, "message": message}})
}
