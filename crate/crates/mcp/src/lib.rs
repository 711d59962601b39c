//! Model Context Protocol server that exposes a sandboxed desktop as a
//! registry of typed tools: three observation tools and one tool per
//! action kind, each with its own JSON schema.

pub mod jsonrpc;
pub mod server;
pub mod tools;
pub mod transport;

pub use jsonrpc::{parse_frame, FrameError, Kind, RpcMessage};
pub use server::{McpServer, SessionState, PROTOCOL_VERSION};
pub use tools::{call_tool, registry, ContentPart, ToolDescriptor, ToolResult};
pub use transport::{serve_stdio, HttpTransport};
