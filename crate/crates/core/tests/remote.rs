//! The remote backend against a throwaway local HTTP server.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::mpsc;
use std::time::Duration;

use optaudit_core::gateway::{ChatBackend, ChatRequest, GatewayError, Message, RemoteBackend, RemoteConfig};

struct Seen {
    auth: String,
    body: serde_json::Value,
}

/// Serves the given (status, body) replies in order, one per connection.
fn serve(replies: Vec<(u16, String)>) -> (String, mpsc::Receiver<Seen>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        for (status, reply) in replies {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream);
            let (mut len, mut auth) = (0usize, String::new());
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let line = line.trim_end();
                if line.is_empty() {
                    break;
                }
                let (k, v) = line.split_once(':').unwrap_or((line, ""));
                match k.to_ascii_lowercase().as_str() {
                    "content-length" => len = v.trim().parse().unwrap(),
                    "authorization" => auth = v.trim().to_string(),
                    _ => {}
                }
            }
            let mut body = vec![0; len];
            reader.read_exact(&mut body).unwrap();
            let _ = tx.send(Seen { auth, body: serde_json::from_slice(&body).unwrap() });
            let mut stream = reader.into_inner();
            let _ = write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}",
                reply.len()
            );
        }
    });
    (format!("http://{addr}/v1"), rx)
}

fn config(base_url: String, retries: u32) -> RemoteConfig {
    RemoteConfig {
        base_url,
        api_key: "test-key".into(),
        model: "m1".into(),
        timeout: Duration::from_secs(5),
        retries,
        backoff: Duration::from_millis(1),
    }
}

fn request() -> ChatRequest {
    ChatRequest::new(vec![Message::system("sys"), Message::user("hi")], "findings", "specialist:objective")
}

const OK: &str =
    r#"{"choices":[{"message":{"content":"{\"findings\":[]}"}}],"usage":{"prompt_tokens":11,"completion_tokens":3}}"#;

#[test]
fn retries_transient_errors_then_succeeds() {
    let (url, rx) = serve(vec![(503, "{}".into()), (200, OK.into())]);
    let r = RemoteBackend::new(config(url, 2)).complete(&request()).unwrap();
    assert_eq!(r.text, r#"{"findings":[]}"#);
    assert_eq!((r.usage.input_tokens, r.usage.output_tokens), (11, 3));
    let first = rx.recv().unwrap();
    assert_eq!(first.auth, "Bearer test-key");
    assert_eq!(first.body["model"], "m1");
    assert_eq!(first.body["temperature"], 0);
    assert_eq!(first.body["messages"].as_array().unwrap().len(), 2);
    assert!(rx.recv().is_ok());
}

#[test]
fn rejected_credentials_are_not_retried() {
    let (url, rx) = serve(vec![(401, "{}".into()), (200, OK.into())]);
    let err = RemoteBackend::new(config(url, 3)).complete(&request()).unwrap_err();
    assert!(matches!(err, GatewayError::BackendError(ref m) if m.contains("401")), "{err}");
    assert!(rx.recv().is_ok());
    assert!(rx.recv_timeout(Duration::from_millis(200)).is_err());
}

#[test]
fn envelope_without_content_is_an_error() {
    let (url, _rx) = serve(vec![(200, r#"{"choices":[]}"#.into())]);
    let err = RemoteBackend::new(config(url, 0)).complete(&request()).unwrap_err();
    assert!(matches!(err, GatewayError::BackendError(_)));
}
