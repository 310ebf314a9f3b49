//! Run configuration, read from TOML. Secrets never live here; the remote
//! backend takes them from `LLM_API_KEY` and `LLM_BASE_URL`.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contract::ContractConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config: {0}")]
    Invalid(String),
    #[error("config file {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GatewayConfig {
    pub backend: String,
    pub model: String,
    pub max_inflight: usize,
    pub timeout_seconds: u64,
    pub retries: u32,
    pub backoff_ms: u64,
    pub fixture_dir: Option<PathBuf>,
}

impl Default for GatewayConfig {
    fn default() -> Self {
        GatewayConfig {
            backend: "heuristic".into(),
            model: "gpt-4o-mini".into(),
            max_inflight: 10,
            timeout_seconds: 120,
            retries: 2,
            backoff_ms: 500,
            fixture_dir: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    pub budget: u32,
    pub max_findings: usize,
    pub rescue: bool,
    pub all_experts: bool,
    pub prompt_dir: Option<PathBuf>,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig { budget: 3, max_findings: 3, rescue: true, all_experts: false, prompt_dir: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConsolidateConfig {
    pub tau: f64,
    pub cap: usize,
    pub rerank: bool,
    pub final_judge: bool,
}

impl Default for ConsolidateConfig {
    fn default() -> Self {
        ConsolidateConfig { tau: 0.5, cap: 3, rerank: true, final_judge: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ReportConfig {
    /// Ask the backend for analyst notes (remote/replay only).
    pub analyst_notes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub gateway: GatewayConfig,
    pub detector: DetectorConfig,
    pub consolidate: ConsolidateConfig,
    pub contract: ContractConfig,
    pub report: ReportConfig,
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Config, ConfigError> {
        let cfg: Config = toml::from_str(text).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Config, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Config::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.detector.budget < 1 {
            return Err(ConfigError::Invalid("detector.budget must be at least 1".into()));
        }
        if self.detector.max_findings < 1 {
            return Err(ConfigError::Invalid("detector.max_findings must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.consolidate.tau) {
            return Err(ConfigError::Invalid("consolidate.tau must lie in [0, 1]".into()));
        }
        if self.consolidate.cap < 1 {
            return Err(ConfigError::Invalid("consolidate.cap must be at least 1".into()));
        }
        if self.gateway.max_inflight < 1 {
            return Err(ConfigError::Invalid("gateway.max_inflight must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_toml_keeps_defaults() {
        let c = Config::from_toml_str("[detector]\nbudget = 2\n[consolidate]\ntau = 0.7\n").unwrap();
        assert_eq!(c.detector.budget, 2);
        assert_eq!(c.detector.max_findings, 3);
        assert_eq!(c.consolidate.tau, 0.7);
        assert_eq!(c.contract.entry_point_token, "solve_model");
    }

    #[test]
    fn rejects_bad_values() {
        assert!(Config::from_toml_str("[detector]\nbudget = 0\n").is_err());
        assert!(Config::from_toml_str("[nonsense]\nx = 1\n").is_err());
    }
}
