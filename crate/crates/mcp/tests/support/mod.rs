//! Golden MCP transcripts: `>` lines are client frames, `<` lines the exact
//! server replies.
#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use cua_mcp::McpServer;
use cua_sim::{Desktop, SceneCatalog};
use cua_vmc::LocalSandbox;

pub fn fresh_server() -> McpServer {
    let desktop = Arc::new(Desktop::new(SceneCatalog::builtin()).unwrap());
    McpServer::new(Box::new(LocalSandbox::new(desktop)))
}

/// Feeds the client frames of a transcript to a fresh server over the
/// built-in scenes. Returns `(produced, expected)` line lists.
pub fn replay_transcript(path: &Path) -> (Vec<String>, Vec<String>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut server = fresh_server();
    let mut produced = Vec::new();
    let mut expected = Vec::new();
    for line in text.lines() {
        if let Some(frame) = line.strip_prefix("> ") {
            produced.push(line.to_string());
            if let Some(reply) = server.handle_text(frame.as_bytes()) {
                produced.push(format!("< {reply}"));
            }
        }
        expected.push(line.to_string());
    }
    (produced, expected)
}
