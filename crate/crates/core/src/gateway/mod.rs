//! Pluggable chat-completion backends with fingerprinting, bounded
//! concurrency and usage accounting.

mod fingerprint;
mod parse;
mod remote;
mod replay;
pub mod schemas;

use std::sync::{Condvar, Mutex};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fingerprint::{canonical_json, fingerprint};
pub use parse::{parse_findings, strip_fences, ParsedFindings};
pub use remote::{RemoteBackend, RemoteConfig};
pub use replay::{RecordingBackend, ReplayBackend};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GatewayError {
    #[error("backend error: {0}")]
    BackendError(String),
    #[error("no replay fixture for fingerprint {0}")]
    FixtureMiss(String),
    #[error("response is not structured output: {0}")]
    ParseError(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Remote,
    Replay,
    HeuristicStub,
}

impl BackendKind {
    pub fn parse(s: &str) -> Option<BackendKind> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "remote" => Some(BackendKind::Remote),
            "replay" => Some(BackendKind::Replay),
            "heuristic" | "heuristic_stub" => Some(BackendKind::HeuristicStub),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BackendKind::Remote => "remote",
            BackendKind::Replay => "replay",
            BackendKind::HeuristicStub => "heuristic_stub",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn system(content: impl Into<String>) -> Message {
        Message { role: Role::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Message {
        Message { role: Role::User, content: content.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub messages: Vec<Message>,
    pub response_schema_id: String,
    /// Always 0.
    pub temperature: f64,
    pub max_output_tokens: u32,
    /// Caller role such as `conductor` or `specialist:objective`.
    pub route_tag: String,
}

impl ChatRequest {
    pub fn new(messages: Vec<Message>, schema_id: &str, route_tag: &str) -> ChatRequest {
        ChatRequest {
            messages,
            response_schema_id: schema_id.to_string(),
            temperature: 0.0,
            max_output_tokens: 2048,
            route_tag: route_tag.to_string(),
        }
    }

    pub fn is_specialist(&self) -> bool {
        self.route_tag.starts_with("specialist:")
    }
}

/// Token counts reported for one call.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CallUsage {
    pub input_tokens: u64,
    pub output_tokens: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChatResponse {
    pub text: String,
    pub usage: CallUsage,
}

/// Additive usage totals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct UsageRecord {
    pub input_tokens: u64,
    pub output_tokens: u64,
    pub call_count: u64,
    pub specialist_call_count: u64,
    pub wall_time_ms: u64,
}

impl UsageRecord {
    pub fn add(&mut self, other: &UsageRecord) {
        self.input_tokens += other.input_tokens;
        self.output_tokens += other.output_tokens;
        self.call_count += other.call_count;
        self.specialist_call_count += other.specialist_call_count;
        self.wall_time_ms += other.wall_time_ms;
    }

    pub fn sum<'a>(records: impl IntoIterator<Item = &'a UsageRecord>) -> UsageRecord {
        let mut total = UsageRecord::default();
        for r in records {
            total.add(r);
        }
        total
    }
}

pub trait ChatBackend: Send + Sync {
    fn kind(&self) -> BackendKind;
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, GatewayError>;
}

/// Always answers with an empty findings object; heuristic specialists bypass it.
#[derive(Debug, Default, Clone, Copy)]
pub struct HeuristicStub;

impl ChatBackend for HeuristicStub {
    fn kind(&self) -> BackendKind {
        BackendKind::HeuristicStub
    }

    fn complete(&self, _request: &ChatRequest) -> Result<ChatResponse, GatewayError> {
        Ok(ChatResponse { text: String::new(), usage: CallUsage::default() })
    }
}

type ScriptFn = dyn Fn(&ChatRequest) -> Result<String, GatewayError> + Send + Sync;

/// Backend driven by a closure; reports itself as `replay`. Used for tests
/// and for recording fixtures.
pub struct ScriptedBackend {
    script: Box<ScriptFn>,
}

impl ScriptedBackend {
    pub fn new(f: impl Fn(&ChatRequest) -> Result<String, GatewayError> + Send + Sync + 'static) -> Self {
        ScriptedBackend { script: Box::new(f) }
    }
}

impl ChatBackend for ScriptedBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Replay
    }

    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, GatewayError> {
        let text = (self.script)(request)?;
        Ok(ChatResponse { usage: estimate_usage(request, &text), text })
    }
}

/// Four characters per token, rounded up.
pub fn estimate_usage(request: &ChatRequest, response: &str) -> CallUsage {
    let input: usize = request.messages.iter().map(|m| m.content.chars().count()).sum();
    CallUsage { input_tokens: input.div_ceil(4) as u64, output_tokens: response.chars().count().div_ceil(4) as u64 }
}

struct Limiter {
    in_flight: Mutex<usize>,
    freed: Condvar,
    max: usize,
}

impl Limiter {
    fn acquire(&self) -> LimiterGuard<'_> {
        let mut n = self.in_flight.lock().unwrap_or_else(|e| e.into_inner());
        while *n >= self.max {
            n = self.freed.wait(n).unwrap_or_else(|e| e.into_inner());
        }
        *n += 1;
        LimiterGuard { limiter: self }
    }
}

struct LimiterGuard<'a> {
    limiter: &'a Limiter,
}

impl Drop for LimiterGuard<'_> {
    fn drop(&mut self) {
        let mut n = self.limiter.in_flight.lock().unwrap_or_else(|e| e.into_inner());
        *n -= 1;
        self.limiter.freed.notify_one();
    }
}

/// Shared entry point: a backend behind a bounded in-flight limit.
pub struct Gateway {
    backend: Box<dyn ChatBackend>,
    limiter: Limiter,
}

impl Gateway {
    pub const DEFAULT_MAX_INFLIGHT: usize = 10;

    pub fn new(backend: Box<dyn ChatBackend>, max_inflight: usize) -> Gateway {
        Gateway {
            backend,
            limiter: Limiter { in_flight: Mutex::new(0), freed: Condvar::new(), max: max_inflight.max(1) },
        }
    }

    pub fn heuristic() -> Gateway {
        Gateway::new(Box::new(HeuristicStub), Self::DEFAULT_MAX_INFLIGHT)
    }

    pub fn kind(&self) -> BackendKind {
        self.backend.kind()
    }

    /// One call; the usage record counts it once.
    pub fn complete(&self, request: &ChatRequest) -> Result<(String, UsageRecord), GatewayError> {
        let _slot = self.limiter.acquire();
        let start = Instant::now();
        let resp = self.backend.complete(request)?;
        let usage = UsageRecord {
            input_tokens: resp.usage.input_tokens,
            output_tokens: resp.usage.output_tokens,
            call_count: 1,
            specialist_call_count: u64::from(request.is_specialist()),
            wall_time_ms: start.elapsed().as_millis() as u64,
        };
        Ok((resp.text, usage))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    #[test]
    fn usage_totals_are_sums() {
        let calls = [
            UsageRecord { input_tokens: 100, output_tokens: 50, call_count: 1, ..Default::default() },
            UsageRecord { input_tokens: 100, output_tokens: 50, call_count: 1, ..Default::default() },
        ];
        let t = UsageRecord::sum(&calls);
        assert_eq!((t.input_tokens, t.output_tokens, t.call_count), (200, 100, 2));
    }

    #[test]
    fn limiter_bounds_concurrency() {
        let live = Arc::new(AtomicUsize::new(0));
        let peak = Arc::new(AtomicUsize::new(0));
        let (l2, p2) = (live.clone(), peak.clone());
        let backend = ScriptedBackend::new(move |_| {
            let now = l2.fetch_add(1, Ordering::SeqCst) + 1;
            p2.fetch_max(now, Ordering::SeqCst);
            std::thread::sleep(std::time::Duration::from_millis(5));
            l2.fetch_sub(1, Ordering::SeqCst);
            Ok("{}".into())
        });
        let gw = Gateway::new(Box::new(backend), 3);
        std::thread::scope(|s| {
            for _ in 0..12 {
                s.spawn(|| {
                    let req = ChatRequest::new(vec![Message::user("x")], "findings_v1", "specialist:objective");
                    gw.complete(&req).unwrap();
                });
            }
        });
        assert!(peak.load(Ordering::SeqCst) <= 3);
    }
}
