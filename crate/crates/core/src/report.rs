//! Markdown audit reports and run manifests.
//!
//! The findings section mirrors the ranked diagnosis exactly. The LLM may
//! add analyst notes but never findings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::gateway::{schemas, strip_fences, BackendKind, ChatRequest, Gateway, Message, UsageRecord};
use crate::pipeline::{CaseAudit, DetectorKind};
use crate::prompts::PromptSet;
use crate::taxonomy::{FamilyId, TaxonomyRegistry};

/// Fixed wording so downstream tooling can grep for it.
pub const ABSTENTION: &str = "No supported hallucination found; detector abstained.";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseUsage {
    pub case_id: String,
    pub usage: UsageRecord,
    pub specialist_invocations: u32,
    /// The audit errored and the case was recorded as an abstention.
    pub failed: bool,
}

/// Provenance and cost of one run. `total` is the sum of `cases`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: Config,
    pub backend: BackendKind,
    pub detector: DetectorKind,
    pub cases: Vec<CaseUsage>,
    pub total: UsageRecord,
    pub calls_per_case: f64,
    pub wall_time_ms: u64,
    pub versions: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(
        config: &Config,
        backend: BackendKind,
        detector: DetectorKind,
        cases: Vec<CaseUsage>,
        wall: Duration,
    ) -> RunManifest {
        let total = UsageRecord::sum(cases.iter().map(|c| &c.usage));
        let calls_per_case = if cases.is_empty() { 0.0 } else { total.call_count as f64 / cases.len() as f64 };
        RunManifest {
            config: config.clone(),
            backend,
            detector,
            cases,
            total,
            calls_per_case,
            wall_time_ms: wall.as_millis() as u64,
            versions: versions(),
        }
    }
}

/// Crate version and a digest of the bundled taxonomy.
pub fn versions() -> BTreeMap<String, String> {
    let digest = Sha256::digest(TaxonomyRegistry::bundled_source().as_bytes());
    BTreeMap::from([
        ("optaudit-core".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("taxonomy_sha256".to_string(), hex::encode(digest)),
    ])
}

/// Backend-written commentary; empty in heuristic mode.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalystNotes {
    pub headline: Option<String>,
    pub risk_summary: Option<String>,
    pub notes: Vec<String>,
}

fn strings(v: &Value, key: &str) -> Vec<String> {
    v.get(key)
        .and_then(Value::as_array)
        .map(|xs| xs.iter().filter_map(Value::as_str).map(str::to_string).collect())
        .unwrap_or_default()
}

/// Asks the backend for notes on a finished diagnosis. Any failure yields
/// no notes plus a diagnostic.
pub fn request_analyst_notes(
    audit: &CaseAudit,
    gateway: &Gateway,
    prompts: &PromptSet,
    registry: &TaxonomyRegistry,
) -> (Option<AnalystNotes>, UsageRecord, Vec<String>) {
    if gateway.kind() == BackendKind::HeuristicStub {
        return (None, UsageRecord::default(), Vec::new());
    }
    let lines: Vec<String> = audit
        .diagnosis
        .findings
        .iter()
        .enumerate()
        .map(|(i, f)| {
            format!(
                "{}. {} [{}] at {}: {}",
                i + 1,
                registry.type_name(&f.label),
                f.label.numeric_code,
                f.element,
                f.evidence.join(" | ")
            )
        })
        .collect();
    let body = if lines.is_empty() { ABSTENTION.to_string() } else { lines.join("\n") };
    let req = ChatRequest::new(
        vec![Message::system(prompts.visualization.clone()), Message::user(format!("Aggregated findings:\n{body}\n"))],
        schemas::VISUALIZATION,
        "visualization",
    );
    match gateway.complete(&req) {
        Ok((text, usage)) => match serde_json::from_str::<Value>(strip_fences(&text)) {
            Ok(v) => {
                let notes = AnalystNotes {
                    headline: v.get("headline").and_then(Value::as_str).map(str::to_string),
                    risk_summary: v.get("risk_summary").and_then(Value::as_str).map(str::to_string),
                    notes: strings(&v, "analyst_notes"),
                };
                (Some(notes), usage, Vec::new())
            }
            Err(e) => (None, usage, vec![format!("visualization: unparsable response: {e}")]),
        },
        Err(e) => (None, UsageRecord::default(), vec![format!("visualization: {e}")]),
    }
}

/// Renders the fixed-section markdown report.
pub fn render_markdown(audit: &CaseAudit, registry: &TaxonomyRegistry, notes: Option<&AnalystNotes>) -> String {
    let d = &audit.diagnosis;
    let mut s = format!("# Audit report: {}\n\n## Headline\n\n", audit.case_id);
    match d.findings.first() {
        None => s.push_str(ABSTENTION),
        Some(top) => {
            let _ = write!(
                s,
                "Hallucination detected: {} ({}, {} family) at `{}`.",
                registry.type_name(&top.label),
                top.label.numeric_code,
                top.label.family,
                top.element
            );
            if d.findings.len() > 1 {
                let _ = write!(s, " {} further finding(s) follow.", d.findings.len() - 1);
            }
        }
    }
    s.push_str("\n\n");
    if let Some(h) = notes.and_then(|n| n.headline.as_deref()) {
        let _ = writeln!(s, "> Analyst view: {h}\n");
    }

    s.push_str("## Risk by Module\n\n| module | findings | top support |\n|---|---|---|\n");
    for f in FamilyId::ALL {
        let of: Vec<_> = d.findings.iter().filter(|x| x.family() == f).collect();
        let top = of.iter().map(|x| x.support).fold(None, |a: Option<f64>, b| Some(a.map_or(b, |a| a.max(b))));
        let _ = writeln!(s, "| {f} | {} | {} |", of.len(), top.map_or("-".to_string(), |x| format!("{x:.2}")));
    }
    if let Some(r) = notes.and_then(|n| n.risk_summary.as_deref()) {
        let _ = writeln!(s, "\n{r}");
    }
    s.push('\n');

    s.push_str("## Findings\n\n");
    if d.findings.is_empty() {
        let _ = writeln!(s, "{ABSTENTION}\n");
    }
    for (i, f) in d.findings.iter().enumerate() {
        let _ = writeln!(
            s,
            "### {}. {} ({})\n\n- label: {} / {} / {}\n- element: `{}`\n- support: {:.2}\n- severity: {:?}\n- root cause: {}\n- issue: {}\n- evidence:",
            i + 1,
            registry.type_name(&f.label),
            f.label.numeric_code,
            f.label.family,
            registry.subcategory_name(&f.label),
            registry.type_name(&f.label),
            f.element,
            f.support,
            f.severity,
            if f.is_root_cause { "yes" } else { "no" },
            f.canonical_issue
        );
        for e in &f.evidence {
            let _ = writeln!(s, "  - {e}");
        }
        let _ = writeln!(s, "- repair: {}\n", f.repair);
    }

    s.push_str("## Repair Order\n\n");
    if d.findings.is_empty() {
        s.push_str("Nothing to repair.\n");
    }
    for (i, f) in d.findings.iter().enumerate() {
        let _ = writeln!(s, "{}. {}", i + 1, f.repair);
    }
    s.push('\n');

    s.push_str("## Suppressed\n\n");
    if d.suppressed.is_empty() {
        s.push_str("None.\n");
    }
    for x in &d.suppressed {
        let _ = writeln!(s, "- candidate {}: {}", x.id, x.reason);
    }
    s.push('\n');

    s.push_str("## Run Info\n\n");
    if let Some(o) = &audit.outcome {
        let branches: Vec<&str> = o.routing.active_branches.iter().map(|f| f.as_str()).collect();
        let cues: Vec<&str> = o.routing.cues.iter().map(|c| c.id.name()).collect();
        let _ = writeln!(s, "- active branches: {}", branches.join(", "));
        let _ = writeln!(s, "- cues: {}", if cues.is_empty() { "none".to_string() } else { cues.join(", ") });
        let _ = writeln!(s, "- rescue pass: {}", o.routing.rescue_pass);
        let _ = writeln!(s, "- specialist invocations: {}", o.specialist_invocations);
        let _ = writeln!(s, "- raw candidates: {}", o.pool().len());
    }
    let _ = writeln!(s, "- LLM calls: {}", audit.usage.call_count);
    let _ = writeln!(s, "- tokens: {} in, {} out", audit.usage.input_tokens, audit.usage.output_tokens);
    for n in notes.map(|n| n.notes.as_slice()).unwrap_or_default() {
        let _ = writeln!(s, "- analyst note: {n}");
    }
    for diag in &audit.diagnostics {
        let _ = writeln!(s, "- diagnostic: {diag}");
    }
    s
}
