//! A minimal loopback chat-completion endpoint for harness tests: accepts
//! HTTP/1.1 POSTs, extracts the user prompt from the JSON body, and answers
//! with a caller-supplied responder.
#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::Arc;

pub struct MockServer {
    pub endpoint: String,
}

/// Maps the prompt text to (HTTP status, assistant content, completion tokens).
pub type Responder = dyn Fn(&str) -> (u16, String, u64) + Send + Sync;

impl MockServer {
    pub fn start(responder: Arc<Responder>) -> MockServer {
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind loopback");
        let endpoint = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
        std::thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(stream) = stream else { break };
                let responder = Arc::clone(&responder);
                std::thread::spawn(move || handle(stream, &responder));
            }
        });
        MockServer { endpoint }
    }

    /// A server that always answers with the given content.
    pub fn fixed(content: &str) -> MockServer {
        let content = content.to_string();
        Self::start(Arc::new(move |_| (200, content.clone(), 7)))
    }
}

fn handle(mut stream: TcpStream, responder: &Responder) {
    let mut reader = BufReader::new(stream.try_clone().expect("clone stream"));
    let mut line = String::new();
    let mut content_length = 0usize;
    // request line + headers
    loop {
        line.clear();
        if reader.read_line(&mut line).is_err() || line.trim_end().is_empty() {
            break;
        }
        let lower = line.to_ascii_lowercase();
        if let Some(rest) = lower.strip_prefix("content-length:") {
            content_length = rest.trim().parse().unwrap_or(0);
        }
    }
    let mut body = vec![0u8; content_length];
    if reader.read_exact(&mut body).is_err() {
        return;
    }
    let prompt = serde_json::from_slice::<serde_json::Value>(&body)
        .ok()
        .and_then(|v| {
            v.get("messages")?
                .get(0)?
                .get("content")?
                .as_str()
                .map(str::to_string)
        })
        .unwrap_or_default();
    let (status, content, tokens) = responder(&prompt);
    let payload = serde_json::json!({
        "choices": [{"message": {"role": "assistant", "content": content}}],
        "usage": {"completion_tokens": tokens},
    })
    .to_string();
    let reason = match status {
        200 => "OK",
        401 => "Unauthorized",
        500 => "Internal Server Error",
        _ => "Error",
    };
    let response = format!(
        "HTTP/1.1 {status} {reason}\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{payload}",
        payload.len()
    );
    let _ = stream.write_all(response.as_bytes());
    let _ = stream.flush();
}
