use std::fs;
use std::path::{Path, PathBuf};

use super::{estimate_usage, fingerprint, BackendKind, ChatBackend, ChatRequest, ChatResponse, GatewayError};

/// Answers from `<dir>/<fingerprint>.txt`, verbatim.
pub struct ReplayBackend {
    dir: PathBuf,
}

impl ReplayBackend {
    pub fn new(dir: impl Into<PathBuf>) -> Result<ReplayBackend, GatewayError> {
        let dir = dir.into();
        if !dir.is_dir() {
            return Err(GatewayError::BackendError(format!("fixture store {} is not a directory", dir.display())));
        }
        Ok(ReplayBackend { dir })
    }

    pub fn fixture_path(dir: &Path, request: &ChatRequest) -> PathBuf {
        dir.join(format!("{}.txt", fingerprint(request)))
    }
}

impl ChatBackend for ReplayBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Replay
    }

    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, GatewayError> {
        let path = Self::fixture_path(&self.dir, request);
        match fs::read_to_string(&path) {
            Ok(text) => Ok(ChatResponse { usage: estimate_usage(request, &text), text }),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(GatewayError::FixtureMiss(fingerprint(request))),
            Err(e) => Err(GatewayError::BackendError(format!("{}: {e}", path.display()))),
        }
    }
}

/// Forwards to an inner backend and stores every response as a fixture.
pub struct RecordingBackend<B> {
    inner: B,
    dir: PathBuf,
}

impl<B: ChatBackend> RecordingBackend<B> {
    pub fn new(inner: B, dir: impl Into<PathBuf>) -> Result<Self, GatewayError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| GatewayError::BackendError(format!("{}: {e}", dir.display())))?;
        Ok(RecordingBackend { inner, dir })
    }
}

impl<B: ChatBackend> ChatBackend for RecordingBackend<B> {
    fn kind(&self) -> BackendKind {
        self.inner.kind()
    }

    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, GatewayError> {
        let resp = self.inner.complete(request)?;
        let path = ReplayBackend::fixture_path(&self.dir, request);
        fs::write(&path, &resp.text).map_err(|e| GatewayError::BackendError(format!("{}: {e}", path.display())))?;
        Ok(resp)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{Message, ScriptedBackend};
    use super::*;

    #[test]
    fn record_then_replay() {
        let dir = tempfile::tempdir().unwrap();
        let rec = RecordingBackend::new(ScriptedBackend::new(|_| Ok("{\"findings\": []}".into())), dir.path()).unwrap();
        let req = ChatRequest::new(vec![Message::user("hello")], "findings_v1", "specialist:objective");
        rec.complete(&req).unwrap();
        let replay = ReplayBackend::new(dir.path()).unwrap();
        assert_eq!(replay.complete(&req).unwrap().text, "{\"findings\": []}");
        let other = ChatRequest::new(vec![Message::user("hello!")], "findings_v1", "specialist:objective");
        assert!(matches!(replay.complete(&other), Err(GatewayError::FixtureMiss(_))));
    }
}
