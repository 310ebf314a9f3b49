//! End-to-end audit of one case or a case set: detection, consolidation,
//! the optional final judge, and run accounting.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::artifact::{build_dependency_graph, AuditTuple};
use crate::config::{Config, GatewayConfig};
use crate::consolidate::{consolidate, final_judge, RankedDiagnosis, Suppression};
use crate::detector::{audit_single_agent, run_audit_loop, AuditContext, AuditOutcome, DetectorError, RoutingDecision};
use crate::evaluator::Prediction;
use crate::finding::{CandidateFinding, Verdict};
use crate::gateway::{
    BackendKind, Gateway, GatewayError, HeuristicStub, RecordingBackend, RemoteBackend, RemoteConfig, ReplayBackend,
    UsageRecord,
};
use crate::report::{CaseUsage, RunManifest};

/// Builds the configured backend. `record` forwards to the remote backend
/// and stores every response under `fixture_dir` for later replay.
pub fn build_gateway(cfg: &GatewayConfig) -> Result<Gateway, GatewayError> {
    let remote = || -> Result<RemoteBackend, GatewayError> {
        let mut rc = RemoteConfig::from_env(&cfg.model, Duration::from_secs(cfg.timeout_seconds))?;
        rc.retries = cfg.retries;
        rc.backoff = Duration::from_millis(cfg.backoff_ms);
        Ok(RemoteBackend::new(rc))
    };
    let fixture_dir = || {
        cfg.fixture_dir
            .clone()
            .ok_or_else(|| GatewayError::BackendError(format!("backend {} needs gateway.fixture_dir", cfg.backend)))
    };
    let backend: Box<dyn crate::gateway::ChatBackend> = match cfg.backend.trim().to_ascii_lowercase().as_str() {
        "record" => Box::new(RecordingBackend::new(remote()?, fixture_dir()?)?),
        other => match BackendKind::parse(other) {
            Some(BackendKind::HeuristicStub) => Box::new(HeuristicStub),
            Some(BackendKind::Replay) => Box::new(ReplayBackend::new(fixture_dir()?)?),
            Some(BackendKind::Remote) => Box::new(remote()?),
            None => return Err(GatewayError::BackendError(format!("unknown backend {}", cfg.backend))),
        },
    };
    Ok(Gateway::new(backend, cfg.max_inflight))
}

/// Which detector produces the raw pool.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    /// Routed specialists with review and rescue.
    MultiAgent,
    /// One call over the whole taxonomy.
    SingleAgent,
}

impl DetectorKind {
    pub fn parse(s: &str) -> Option<DetectorKind> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "multi_agent" | "routed" => Some(DetectorKind::MultiAgent),
            "single_agent" | "single" => Some(DetectorKind::SingleAgent),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DetectorKind::MultiAgent => "multi_agent",
            DetectorKind::SingleAgent => "single_agent",
        }
    }
}

/// Everything known about one audited case.
#[derive(Clone, Debug, PartialEq)]
pub struct CaseAudit {
    pub case_id: String,
    pub outcome: Option<AuditOutcome>,
    pub diagnosis: RankedDiagnosis,
    pub usage: UsageRecord,
    pub diagnostics: Vec<String>,
}

impl CaseAudit {
    pub fn routing(&self) -> Option<&RoutingDecision> {
        self.outcome.as_ref().map(|o| &o.routing)
    }

    pub fn prediction(&self) -> Prediction {
        Prediction::from_diagnosis(&self.case_id, &self.diagnosis)
    }

    /// Abstention carrying the reason the audit could not finish.
    fn failed(case_id: &str, err: &DetectorError) -> CaseAudit {
        CaseAudit {
            case_id: case_id.to_string(),
            outcome: None,
            diagnosis: RankedDiagnosis { findings: Vec::new(), abstained: true, suppressed: Vec::new() },
            usage: UsageRecord::default(),
            diagnostics: vec![format!("audit failed: {err}")],
        }
    }
}

/// Severity, then support, then id. Used when reranking is disabled.
fn plain_order(pool: &[CandidateFinding]) -> RankedDiagnosis {
    let mut findings: Vec<CandidateFinding> = pool.iter().filter(|f| f.verdict != Verdict::Grounded).cloned().collect();
    findings.sort_by(|a, b| b.severity.cmp(&a.severity).then(b.support.total_cmp(&a.support)).then(a.id.cmp(&b.id)));
    let suppressed = pool
        .iter()
        .filter(|f| f.verdict == Verdict::Grounded)
        .map(|f| Suppression { id: f.id, reason: "grounded verdict".into() })
        .collect();
    RankedDiagnosis { abstained: findings.is_empty(), findings, suppressed }
}

/// Detects, consolidates and (optionally) judges one case.
pub fn audit_case(t: &AuditTuple, ctx: &AuditContext<'_>, detector: DetectorKind) -> Result<CaseAudit, DetectorError> {
    let outcome = match detector {
        DetectorKind::MultiAgent => run_audit_loop(t, ctx)?,
        DetectorKind::SingleAgent => audit_single_agent(t, ctx)?,
    };
    let cfg = &ctx.config.consolidate;
    let diagnosis = if cfg.rerank {
        let deps = build_dependency_graph(t);
        consolidate(outcome.pool(), &deps, &outcome.routing, cfg.tau, cfg.cap)
    } else {
        plain_order(outcome.pool())
    };
    let judged = final_judge(diagnosis, ctx.gateway, ctx.prompts, ctx.registry, cfg.final_judge, cfg.cap);
    let mut usage = outcome.usage;
    usage.add(&judged.usage);
    let mut diagnostics = outcome.diagnostics.clone();
    diagnostics.extend(judged.diagnostics);
    Ok(CaseAudit {
        case_id: t.case_id.clone(),
        outcome: Some(outcome),
        diagnosis: judged.diagnosis,
        usage,
        diagnostics,
    })
}

/// Result of a benchmark run; `audits` is sorted by case id.
#[derive(Clone, Debug)]
pub struct BenchRun {
    pub audits: Vec<CaseAudit>,
    pub manifest: RunManifest,
}

impl BenchRun {
    pub fn predictions(&self) -> Vec<Prediction> {
        self.audits.iter().map(CaseAudit::prediction).collect()
    }
}

/// Audits every case on a bounded worker pool. A case whose audit fails is
/// recorded as an abstention with a diagnostic; the run continues.
pub fn run_bench(cases: &[AuditTuple], ctx: &AuditContext<'_>, detector: DetectorKind) -> BenchRun {
    let start = Instant::now();
    let workers = ctx.config.gateway.max_inflight.clamp(1, cases.len().max(1));
    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut audits: Vec<CaseAudit> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                s.spawn(|| {
                    let mut out = Vec::new();
                    loop {
                        let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                        let Some(t) = cases.get(i) else { break };
                        out.push(audit_case(t, ctx, detector).unwrap_or_else(|e| CaseAudit::failed(&t.case_id, &e)));
                    }
                    out
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("audit workers do not panic")).collect()
    });
    audits.sort_by(|a, b| a.case_id.cmp(&b.case_id));
    let per_case: Vec<CaseUsage> = audits
        .iter()
        .map(|a| CaseUsage {
            case_id: a.case_id.clone(),
            usage: a.usage,
            specialist_invocations: a.outcome.as_ref().map_or(0, |o| o.specialist_invocations),
            failed: a.outcome.is_none(),
        })
        .collect();
    let manifest = RunManifest::new(ctx.config, ctx.gateway.kind(), detector, per_case, start.elapsed());
    BenchRun { audits, manifest }
}

/// Convenience for callers that own their configuration.
pub struct Auditor {
    pub config: Config,
    pub gateway: Gateway,
    pub prompts: crate::prompts::PromptSet,
    pub registry: &'static crate::taxonomy::TaxonomyRegistry,
}

impl Auditor {
    /// Heuristic backend, bundled prompts and taxonomy.
    pub fn heuristic(config: Config) -> Auditor {
        Auditor {
            config,
            gateway: Gateway::heuristic(),
            prompts: crate::prompts::PromptSet::bundled(),
            registry: crate::taxonomy::TaxonomyRegistry::bundled(),
        }
    }

    pub fn context(&self) -> AuditContext<'_> {
        AuditContext { gateway: &self.gateway, config: &self.config, prompts: &self.prompts, registry: self.registry }
    }
}
