use std::time::Duration;

use serde_json::{json, Value};

use super::{schemas, BackendKind, CallUsage, ChatBackend, ChatRequest, ChatResponse, GatewayError};

#[derive(Clone, Debug, PartialEq)]
pub struct RemoteConfig {
    /// Base URL up to, not including, `/chat/completions`.
    pub base_url: String,
    pub api_key: String,
    pub model: String,
    pub timeout: Duration,
    pub retries: u32,
    pub backoff: Duration,
}

impl RemoteConfig {
    /// Reads `LLM_BASE_URL` and `LLM_API_KEY`; both must be set.
    pub fn from_env(model: &str, timeout: Duration) -> Result<RemoteConfig, GatewayError> {
        let base_url =
            std::env::var("LLM_BASE_URL").map_err(|_| GatewayError::BackendError("LLM_BASE_URL is not set".into()))?;
        let api_key =
            std::env::var("LLM_API_KEY").map_err(|_| GatewayError::BackendError("LLM_API_KEY is not set".into()))?;
        Ok(RemoteConfig {
            base_url,
            api_key,
            model: model.to_string(),
            timeout,
            retries: 2,
            backoff: Duration::from_millis(500),
        })
    }
}

/// Chat-completion client over HTTP(S).
pub struct RemoteBackend {
    cfg: RemoteConfig,
    agent: ureq::Agent,
}

impl RemoteBackend {
    pub fn new(cfg: RemoteConfig) -> RemoteBackend {
        let agent: ureq::Agent =
            ureq::Agent::config_builder().timeout_global(Some(cfg.timeout)).http_status_as_error(false).build().into();
        RemoteBackend { cfg, agent }
    }

    fn body(&self, request: &ChatRequest) -> Value {
        json!({
            "model": self.cfg.model,
            "messages": request.messages,
            "temperature": 0,
            "max_tokens": request.max_output_tokens,
            "response_format": {
                "type": "json_schema",
                "json_schema": {
                    "name": request.response_schema_id,
                    "schema": schemas::schema(&request.response_schema_id),
                }
            }
        })
    }

    fn attempt(&self, url: &str, body: &str) -> Result<ChatResponse, (bool, GatewayError)> {
        let transient = |e: String| (true, GatewayError::BackendError(e));
        let mut resp = self
            .agent
            .post(url)
            .header("Authorization", &format!("Bearer {}", self.cfg.api_key))
            .header("Content-Type", "application/json")
            .send(body)
            .map_err(|e| transient(format!("transport: {e}")))?;
        let status = resp.status().as_u16();
        let text = resp.body_mut().read_to_string().map_err(|e| transient(format!("read body: {e}")))?;
        if status == 401 || status == 403 {
            return Err((false, GatewayError::BackendError(format!("credential rejected (HTTP {status})"))));
        }
        if status >= 400 {
            return Err((status >= 500 || status == 429, GatewayError::BackendError(format!("HTTP {status}"))));
        }
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| (false, GatewayError::BackendError(format!("invalid response envelope: {e}"))))?;
        let content = v
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .ok_or_else(|| (false, GatewayError::BackendError("response has no message content".into())))?;
        let usage = CallUsage {
            input_tokens: v.pointer("/usage/prompt_tokens").and_then(Value::as_u64).unwrap_or(0),
            output_tokens: v.pointer("/usage/completion_tokens").and_then(Value::as_u64).unwrap_or(0),
        };
        Ok(ChatResponse { text: content.to_string(), usage })
    }
}

impl ChatBackend for RemoteBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Remote
    }

    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, GatewayError> {
        let url = format!("{}/chat/completions", self.cfg.base_url.trim_end_matches('/'));
        let body = self.body(request).to_string();
        let mut last = GatewayError::BackendError("no attempt made".into());
        for attempt in 0..=self.cfg.retries {
            if attempt > 0 {
                std::thread::sleep(self.cfg.backoff);
            }
            match self.attempt(&url, &body) {
                Ok(r) => return Ok(r),
                Err((retry, e)) => {
                    last = e;
                    if !retry {
                        break;
                    }
                }
            }
        }
        Err(last)
    }
}
