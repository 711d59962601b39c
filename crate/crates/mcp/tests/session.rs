use std::collections::BTreeMap;
use std::io::Cursor;
use std::sync::Arc;

use cua_mcp::transport::serve_stdio;
use cua_mcp::{HttpTransport, McpServer, SessionState};
use cua_sim::{Desktop, SceneCatalog};
use cua_vmc::LocalSandbox;
use proptest::prelude::*;
use serde_json::{json, Value};

fn fresh_server() -> McpServer {
    let desktop = Arc::new(Desktop::new(SceneCatalog::builtin()).unwrap());
    McpServer::new(Box::new(LocalSandbox::new(desktop)))
}

fn ready_server() -> McpServer {
    let mut s = fresh_server();
    s.handle_frame(br#"{"jsonrpc":"2.0","id":0,"method":"initialize","params":{"protocolVersion":"2024-11-05"}}"#);
    s.handle_frame(br#"{"jsonrpc":"2.0","method":"notifications/initialized"}"#);
    assert_eq!(s.state(), SessionState::Ready);
    s
}

fn call(s: &mut McpServer, name: &str, args: Value) -> Value {
    let frame = json!({"jsonrpc":"2.0","id":1,"method":"tools/call","params":{"name":name,"arguments":args}});
    s.handle_frame(frame.to_string().as_bytes()).unwrap()["result"].clone()
}

fn structured(result: &Value) -> Value {
    serde_json::from_str(result["content"][0]["text"].as_str().unwrap()).unwrap()
}

#[test]
fn system_info_is_nested() {
    let mut s = ready_server();
    let r = call(&mut s, "system_info", json!({}));
    assert_eq!(r["isError"], false);
    assert_eq!(structured(&r), json!({"os": "simdesk", "apps": {"notepad": "1.0"}}));
}

#[test]
fn screenshot_is_png_image_part() {
    let mut s = ready_server();
    let r = call(&mut s, "screenshot", json!({}));
    let part = &r["content"][0];
    assert_eq!(part["type"], "image");
    assert_eq!(part["mimeType"], "image/png");
    assert!(part["data"].as_str().unwrap().starts_with("iVBORw0KGgo"));
}

#[test]
fn tools_list_is_stable_within_a_session() {
    let mut s = ready_server();
    let a = s.handle_text(br#"{"jsonrpc":"2.0","id":1,"method":"tools/list"}"#).unwrap();
    let b = s.handle_text(br#"{"jsonrpc":"2.0","id":1,"method":"tools/list"}"#).unwrap();
    assert_eq!(a, b);
    let c = ready_server().handle_text(br#"{"jsonrpc":"2.0","id":1,"method":"tools/list"}"#).unwrap();
    assert_eq!(a, c);
}

#[test]
fn click_then_type_reaches_the_desktop() {
    let desktop = Arc::new(Desktop::new(SceneCatalog::builtin()).unwrap());
    desktop.reset("login_form", 0).unwrap();
    let mut s = McpServer::new(Box::new(LocalSandbox::new(Arc::clone(&desktop))));
    s.handle_frame(br#"{"jsonrpc":"2.0","id":0,"method":"initialize","params":{"protocolVersion":"2024-11-05"}}"#);
    s.handle_frame(br#"{"jsonrpc":"2.0","method":"notifications/initialized"}"#);
    let table = structured(&call(&mut s, "a11y_tree", json!({})));
    let user = table["elements"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["name"] == "Username")
        .unwrap()["id"]
        .clone();
    assert_eq!(call(&mut s, "click", json!({"element_id": user}))["isError"], false);
    assert_eq!(call(&mut s, "type", json!({"text": "Ada"}))["isError"], false);
    assert_eq!(desktop.snapshot().widget("user").unwrap().value, "Ada");
}

#[test]
fn stdio_round_trip() {
    let input = concat!(
        r#"{"jsonrpc":"2.0","id":1,"method":"initialize","params":{"protocolVersion":"2024-11-05"}}"#,
        "\n",
        r#"{"jsonrpc":"2.0","method":"notifications/initialized"}"#,
        "\r\n\n",
        r#"{"jsonrpc":"2.0","id":2,"method":"tools/list"}"#,
        "\n",
        "garbage\n",
    );
    let mut out = Vec::new();
    serve_stdio(&mut fresh_server(), Cursor::new(input), &mut out).unwrap();
    let lines: Vec<Value> = String::from_utf8(out).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0]["id"], 1);
    assert_eq!(lines[1]["result"]["tools"].as_array().unwrap().len(), 9);
    assert_eq!(lines[2]["error"]["code"], -32700);
}

#[test]
fn http_transport() {
    let http = HttpTransport::start(fresh_server(), "127.0.0.1:0").unwrap();
    let agent: ureq::Agent = ureq::Agent::config_builder().http_status_as_error(false).build().into();
    let post = |body: &str| {
        let mut r = agent
            .post(http.url())
            .header("Content-Type", "application/json")
            .send(body)
            .unwrap();
        (r.status().as_u16(), r.body_mut().read_to_string().unwrap())
    };
    let (status, body) = post(r#"{"jsonrpc":"2.0","id":1,"method":"initialize","params":{"protocolVersion":"2024-11-05"}}"#);
    assert_eq!(status, 200);
    assert!(body.contains("\"protocolVersion\":\"2024-11-05\""));
    assert_eq!(post(r#"{"jsonrpc":"2.0","method":"notifications/initialized"}"#), (202, String::new()));
    let (_, body) = post(r#"{"jsonrpc":"2.0","id":2,"method":"tools/call","params":{"name":"system_info"}}"#);
    assert!(body.contains("simdesk"));
    let url = format!("http://{}/other", http.addr());
    assert_eq!(agent.post(url).send("{}").unwrap().status(), 404);
    assert_eq!(agent.get(http.url()).call().unwrap().status(), 405);
}

#[derive(Debug, Clone)]
enum Frame {
    Request(&'static str, Value),
    Notification,
    Junk(String),
    BadEnvelope,
    ClientResponse,
}

fn frame() -> impl Strategy<Value = Frame> {
    let method = prop::sample::select(vec!["initialize", "tools/list", "tools/call", "ping", "nosuch"]);
    let params = prop_oneof![
        Just(json!({"protocolVersion": "2024-11-05"})),
        Just(json!({"name": "system_info"})),
        Just(json!({"name": "wait", "arguments": {"seconds": 0}})),
        Just(json!({"name": "click", "arguments": {"element_id": 99}})),
        Just(json!({"name": "nosuch"})),
        Just(Value::Null),
    ];
    prop_oneof![
        4 => (method, params).prop_map(|(m, p)| Frame::Request(m, p)),
        1 => Just(Frame::Notification),
        1 => "[ -~]{0,12}".prop_map(Frame::Junk),
        1 => Just(Frame::BadEnvelope),
        1 => Just(Frame::ClientResponse),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // Every request id receives exactly one reply carrying that id.
    #[test]
    fn one_reply_per_request(frames in prop::collection::vec(frame(), 1..40)) {
        let mut server = fresh_server();
        let mut expected: BTreeMap<String, usize> = BTreeMap::new();
        let mut replies: BTreeMap<String, usize> = BTreeMap::new();
        let mut anonymous_errors = 0;
        let mut junk = 0;
        for (i, f) in frames.iter().enumerate() {
            let id = if i % 2 == 0 { json!(i) } else { json!(format!("r{i}")) };
            let text = match f {
                Frame::Request(m, p) => {
                    *expected.entry(id.to_string()).or_default() += 1;
                    json!({"jsonrpc": "2.0", "id": id, "method": m, "params": p}).to_string()
                }
                Frame::Notification => json!({"jsonrpc": "2.0", "method": "notifications/initialized"}).to_string(),
                Frame::Junk(s) => {
                    // never a valid envelope, so always an error reply without id
                    junk += 1;
                    s.clone()
                }
                Frame::BadEnvelope => {
                    *expected.entry(id.to_string()).or_default() += 1;
                    json!({"jsonrpc": "1.0", "id": id, "method": "tools/list"}).to_string()
                }
                Frame::ClientResponse => json!({"jsonrpc": "2.0", "id": id, "result": {}}).to_string(),
            };
            if let Some(reply) = server.handle_frame(text.as_bytes()) {
                prop_assert_eq!(&reply["jsonrpc"], "2.0");
                prop_assert!(reply.get("result").is_some() != reply.get("error").is_some());
                if reply["id"].is_null() {
                    anonymous_errors += 1;
                } else {
                    *replies.entry(reply["id"].to_string()).or_default() += 1;
                }
            }
        }
        prop_assert_eq!(replies, expected);
        prop_assert_eq!(anonymous_errors, junk);
    }
}
