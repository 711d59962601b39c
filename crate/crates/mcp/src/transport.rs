//! Stdio and HTTP transports. Both feed frames to one [`McpServer`] in
//! arrival order.

use std::io::{BufRead, Write};
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use log::{debug, warn};

use crate::server::McpServer;

pub const HTTP_PATH: &str = "/mcp";

/// Serves newline-delimited JSON until `input` closes. Blank lines are skipped.
pub fn serve_stdio<R: BufRead, W: Write>(server: &mut McpServer, input: R, mut output: W) -> std::io::Result<()> {
    for line in input.split(b'\n') {
        let mut line = line?;
        if line.last() == Some(&b'\r') {
            line.pop();
        }
        if line.iter().all(u8::is_ascii_whitespace) {
            continue;
        }
        if let Some(reply) = server.handle_text(&line) {
            output.write_all(reply.as_bytes())?;
            output.write_all(b"\n")?;
            output.flush()?;
        }
    }
    Ok(())
}

/// HTTP transport: `POST /mcp` with one JSON-RPC document per body.
pub struct HttpTransport {
    http: Arc<tiny_http::Server>,
    addr: SocketAddr,
    worker: Option<JoinHandle<()>>,
}

impl HttpTransport {
    pub fn start(server: McpServer, addr: &str) -> std::io::Result<Self> {
        let http = tiny_http::Server::http(addr).map_err(|e| std::io::Error::other(format!("{addr}: {e}")))?;
        let addr = http
            .server_addr()
            .to_ip()
            .ok_or_else(|| std::io::Error::other(format!("{addr}: not an IP listener")))?;
        let http = Arc::new(http);
        let server = Arc::new(Mutex::new(server));
        let worker = {
            let http = Arc::clone(&http);
            std::thread::spawn(move || {
                for request in http.incoming_requests() {
                    serve_one(&server, request);
                }
            })
        };
        Ok(Self { http, addr, worker: Some(worker) })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}{HTTP_PATH}", self.addr)
    }

    /// Blocks until the listener stops.
    pub fn join(mut self) {
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
    }
}

impl Drop for HttpTransport {
    fn drop(&mut self) {
        self.http.unblock();
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
    }
}

fn serve_one(server: &Mutex<McpServer>, mut request: tiny_http::Request) {
    let json_header = tiny_http::Header::from_bytes("Content-Type", "application/json").expect("static header");
    let response = if request.url().split('?').next() != Some(HTTP_PATH) {
        tiny_http::Response::from_string("not found").with_status_code(404)
    } else if request.method() != &tiny_http::Method::Post {
        tiny_http::Response::from_string("method not allowed").with_status_code(405)
    } else {
        let mut body = Vec::new();
        match request.as_reader().read_to_end(&mut body) {
            Ok(_) => {
                let reply = server.lock().unwrap_or_else(|p| p.into_inner()).handle_text(&body);
                match reply {
                    Some(text) => tiny_http::Response::from_string(text).with_header(json_header),
                    // notifications and client responses get no body
                    None => tiny_http::Response::from_string("").with_status_code(202),
                }
            }
            Err(e) => {
                warn!("reading request body: {e}");
                tiny_http::Response::from_string("bad request").with_status_code(400)
            }
        }
    };
    if let Err(e) = request.respond(response) {
        debug!("client went away: {e}");
    }
}
