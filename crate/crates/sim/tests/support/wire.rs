//! Byte-exact wire transcripts. `>` lines are `METHOD PATH [BODY]` (for a
//! GET, a trailing number is sent as `X-Tick`); `<` lines are
//! `STATUS X-TICK BODY`.
#![allow(dead_code)]

use std::path::Path;

use cua_sim::{Desktop, SceneCatalog};

/// Replays the requests of a transcript against a fresh built-in desktop.
/// Returns `(produced, expected)` line lists.
pub fn replay_transcript(path: &Path) -> (Vec<String>, Vec<String>) {
    let text = std::fs::read_to_string(path).unwrap();
    let desktop = Desktop::new(SceneCatalog::builtin()).unwrap();
    let mut produced = Vec::new();
    let mut expected = Vec::new();
    for line in text.lines() {
        expected.push(line.to_string());
        let Some(req) = line.strip_prefix("> ") else { continue };
        produced.push(line.to_string());
        let mut parts = req.splitn(3, ' ');
        let method = parts.next().unwrap();
        let path = parts.next().unwrap();
        let rest = parts.next().unwrap_or("");
        let (tick, body) = if method == "GET" { (rest.parse().ok(), "") } else { (None, rest) };
        let reply = desktop.handle(method, path, tick, body.as_bytes());
        produced.push(format!("< {} {} {}", reply.status, reply.tick, String::from_utf8_lossy(&reply.body)));
    }
    (produced, expected)
}

/// The a11y trees read at tick 2: after the rejected batch and after its
/// two-command prefix.
pub fn prefix_trees(lines: &[String]) -> Vec<&String> {
    lines.iter().filter(|l| l.starts_with("< 200 2 {\"role\"")).collect()
}
