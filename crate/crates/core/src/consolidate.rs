//! Deterministic consolidation of a raw candidate pool into at most `cap`
//! ordered findings, with an optional LLM final judge that can only select and
//! reorder.
//!
//! Scores are integers in micro-units so ordering never depends on float
//! rounding: `150000·(severity_rank − 1) + round(400000·support)
//! + 150000·on_route + 150000·root_cause`.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::artifact::{DependencyGraph, EdgeKind};
use crate::detector::RoutingDecision;
use crate::finding::{CandidateFinding, Verdict};
use crate::gateway::{schemas, strip_fences, ChatRequest, Gateway, Message, UsageRecord};
use crate::prompts::PromptSet;
use crate::taxonomy::TaxonomyRegistry;

pub const W_SEVERITY_STEP: i64 = 150_000;
pub const W_SUPPORT: f64 = 400_000.0;
pub const W_ROUTE: i64 = 150_000;
pub const W_ROOT: i64 = 150_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Suppression {
    pub id: u32,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedDiagnosis {
    pub findings: Vec<CandidateFinding>,
    /// True exactly when `findings` is empty.
    pub abstained: bool,
    pub suppressed: Vec<Suppression>,
}

/// Lowercase, punctuation stripped, whitespace collapsed.
pub fn normalize_issue(s: &str) -> String {
    let cleaned: String = s
        .chars()
        .map(|c| if c.is_alphanumeric() || c.is_whitespace() { c.to_ascii_lowercase() } else { ' ' })
        .collect();
    cleaned.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn linked_any(deps: &DependencyGraph, a: &crate::artifact::ElementRef, b: &crate::artifact::ElementRef) -> bool {
    a == b || [EdgeKind::Realizes, EdgeKind::Constrains, EdgeKind::Mentions].iter().any(|k| deps.linked(a, b, *k))
}

/// Drops grounded verdicts, in-pool duplicates, merged aliases and
/// consequences of a linked root cause. Output is ordered by id.
pub fn normalize(pool: &[CandidateFinding], deps: &DependencyGraph) -> (Vec<CandidateFinding>, Vec<Suppression>) {
    let mut items: Vec<CandidateFinding> = pool.to_vec();
    items.sort_by_key(|f| f.id);
    let mut suppressed = Vec::new();
    let suppress = |f: &CandidateFinding, reason: String, out: &mut Vec<Suppression>| {
        out.push(Suppression { id: f.id, reason });
    };

    let mut kept: Vec<CandidateFinding> = Vec::new();
    for f in items.iter() {
        if f.verdict == Verdict::Grounded {
            suppress(f, "grounded verdict".into(), &mut suppressed);
        } else {
            kept.push(f.clone());
        }
    }

    let ids: BTreeSet<u32> = kept.iter().map(|f| f.id).collect();
    let mut after_dups: Vec<CandidateFinding> = Vec::new();
    for f in &kept {
        match f.duplicate_of {
            Some(d) if d != f.id && ids.contains(&d) => suppress(f, format!("duplicate of #{d}"), &mut suppressed),
            _ => after_dups.push(f.clone()),
        }
    }

    let mut groups: BTreeMap<(String, usize, String), Vec<CandidateFinding>> = BTreeMap::new();
    for f in after_dups {
        let key = (f.element.to_string(), f.family().index(), normalize_issue(&f.canonical_issue));
        groups.entry(key).or_default().push(f);
    }
    let mut merged: Vec<CandidateFinding> = Vec::new();
    for (_, mut group) in groups {
        // Highest support wins; ties go to the lowest id.
        group.sort_by(|a, b| b.support.total_cmp(&a.support).then(a.id.cmp(&b.id)));
        let mut keep = group[0].clone();
        for other in &group[1..] {
            for e in &other.evidence {
                if !keep.evidence.contains(e) {
                    keep.evidence.push(e.clone());
                }
            }
            keep.is_root_cause |= other.is_root_cause;
            keep.severity = keep.severity.max(other.severity);
            suppress(other, format!("merged into #{}", keep.id), &mut suppressed);
        }
        merged.push(keep);
    }
    merged.sort_by_key(|f| f.id);

    let roots: Vec<&CandidateFinding> = merged.iter().filter(|f| f.is_root_cause).collect();
    let mut out = Vec::new();
    for f in &merged {
        let cause = if f.is_root_cause {
            None
        } else {
            roots.iter().find(|g| g.id != f.id && linked_any(deps, &f.element, &g.element))
        };
        match cause {
            Some(g) => suppress(f, format!("consequence of root cause #{}", g.id), &mut suppressed),
            None => out.push(f.clone()),
        }
    }
    suppressed.sort_by_key(|s| s.id);
    (out, suppressed)
}

/// Frozen priority score in micro-units.
pub fn score(f: &CandidateFinding, routing: &RoutingDecision) -> i64 {
    let sev = W_SEVERITY_STEP * (i64::from(f.severity.rank()) - 1);
    let sup = (f.support.clamp(0.0, 1.0) * W_SUPPORT).round() as i64;
    let route = if routing.is_active(f.family()) { W_ROUTE } else { 0 };
    let root = if f.is_root_cause { W_ROOT } else { 0 };
    sev + sup + route + root
}

/// Threshold, total order, truncation. Pure: the result does not depend on
/// the order of `pool`.
pub fn rerank(pool: &[CandidateFinding], routing: &RoutingDecision, tau: f64, cap: usize) -> RankedDiagnosis {
    let mut suppressed = Vec::new();
    let mut live: Vec<(i64, &CandidateFinding)> = Vec::new();
    for f in pool {
        if f.support < tau {
            suppressed.push(Suppression { id: f.id, reason: format!("support {} below threshold {tau}", f.support) });
        } else {
            live.push((score(f, routing), f));
        }
    }
    live.sort_by(|(sa, a), (sb, b)| {
        Reverse(*sa)
            .cmp(&Reverse(*sb))
            .then(a.family().cmp(&b.family()))
            .then(a.label.code_key().cmp(&b.label.code_key()))
            .then(a.element.local_id.cmp(&b.element.local_id))
            .then(a.id.cmp(&b.id))
    });
    let mut findings = Vec::new();
    for (i, (_, f)) in live.into_iter().enumerate() {
        if i < cap {
            findings.push(f.clone());
        } else {
            suppressed.push(Suppression { id: f.id, reason: format!("beyond cap {cap}") });
        }
    }
    suppressed.sort_by_key(|s| s.id);
    RankedDiagnosis { abstained: findings.is_empty(), findings, suppressed }
}

/// Normalize, then rerank; suppression reasons from both stages are kept.
pub fn consolidate(
    pool: &[CandidateFinding],
    deps: &DependencyGraph,
    routing: &RoutingDecision,
    tau: f64,
    cap: usize,
) -> RankedDiagnosis {
    let (normalized, mut suppressed) = normalize(pool, deps);
    let mut d = rerank(&normalized, routing, tau, cap);
    suppressed.append(&mut d.suppressed);
    suppressed.sort_by_key(|s| s.id);
    d.suppressed = suppressed;
    d
}

/// Result of the judge pass. `diagnostics` explains a fail-open.
#[derive(Clone, Debug, PartialEq)]
pub struct JudgeOutcome {
    pub diagnosis: RankedDiagnosis,
    pub usage: UsageRecord,
    pub diagnostics: Vec<String>,
}

fn parse_selection(text: &str, n: usize) -> Result<Vec<usize>, String> {
    let v: Value = serde_json::from_str(strip_fences(text)).map_err(|e| format!("unparsable response: {e}"))?;
    let sel = v.get("selected").and_then(Value::as_array).ok_or("missing selected array")?;
    let mut out = Vec::new();
    for x in sel {
        let id = x.as_u64().ok_or_else(|| format!("non-integer candidate id {x}"))? as usize;
        if id == 0 || id > n {
            return Err(format!("unknown candidate id {id}"));
        }
        if !out.contains(&(id - 1)) {
            out.push(id - 1);
        }
    }
    Ok(out)
}

/// Lets the backend select and reorder existing candidates; candidate ids
/// are 1-based positions. Any malformed or out-of-range answer keeps the
/// deterministic order. Transport errors also fail open.
pub fn final_judge(
    diagnosis: RankedDiagnosis,
    gateway: &Gateway,
    prompts: &PromptSet,
    registry: &TaxonomyRegistry,
    enabled: bool,
    cap: usize,
) -> JudgeOutcome {
    let identity = |d: RankedDiagnosis, msg: Option<String>| JudgeOutcome {
        diagnosis: d,
        usage: UsageRecord::default(),
        diagnostics: msg.into_iter().collect(),
    };
    if !enabled || diagnosis.findings.is_empty() {
        return identity(diagnosis, None);
    }
    if gateway.kind() == crate::gateway::BackendKind::HeuristicStub {
        return identity(diagnosis, Some("final_judge: skipped for the heuristic backend".into()));
    }
    let lines: Vec<String> = diagnosis
        .findings
        .iter()
        .enumerate()
        .map(|(i, f)| {
            format!(
                "candidate_id {}: {} / {} / {} [{}] element {} support {:.2} root_cause {}\n  evidence: {}",
                i + 1,
                f.family(),
                registry.subcategory_name(&f.label),
                registry.type_name(&f.label),
                f.label.numeric_code,
                f.element,
                f.support,
                f.is_root_cause,
                f.evidence.join(" | ")
            )
        })
        .collect();
    let req = ChatRequest::new(
        vec![
            Message::system(prompts.final_judge.clone()),
            Message::user(format!("Candidates:\n{}\n", lines.join("\n"))),
        ],
        schemas::JUDGE,
        "final_judge",
    );
    let (text, usage) = match gateway.complete(&req) {
        Ok(x) => x,
        Err(e) => {
            return identity(diagnosis, Some(format!("final_judge: {e}; deterministic order kept")));
        }
    };
    match parse_selection(&text, diagnosis.findings.len()) {
        Ok(sel) => {
            let mut d = diagnosis;
            let chosen: Vec<CandidateFinding> = sel.iter().take(cap).map(|&i| d.findings[i].clone()).collect();
            for (i, f) in d.findings.iter().enumerate() {
                if !sel.iter().take(cap).any(|&s| s == i) {
                    d.suppressed.push(Suppression { id: f.id, reason: "not selected by final judge".into() });
                }
            }
            d.suppressed.sort_by_key(|s| s.id);
            d.abstained = chosen.is_empty();
            d.findings = chosen;
            JudgeOutcome { diagnosis: d, usage, diagnostics: Vec::new() }
        }
        Err(msg) => JudgeOutcome {
            diagnosis,
            usage,
            diagnostics: vec![format!("final_judge: {msg}; deterministic order kept")],
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::artifact::{ElementKind, ElementRef};
    use crate::finding::Severity;
    use crate::taxonomy::FamilyId;

    fn finding(id: u32, code: &str, support: f64, sev: Severity) -> CandidateFinding {
        let label = TaxonomyRegistry::bundled().by_code(code).unwrap().clone();
        CandidateFinding {
            id,
            element: ElementRef::model(ElementKind::Objective, "objective"),
            label,
            verdict: Verdict::Hallucinated,
            support,
            evidence: vec!["e".into()],
            canonical_issue: format!("issue {id}"),
            is_root_cause: true,
            duplicate_of: None,
            severity: sev,
            repair: String::new(),
            source: String::new(),
        }
    }

    fn routing(active: &[FamilyId]) -> RoutingDecision {
        RoutingDecision { active_branches: active.to_vec(), cues: vec![], rescue_pass: false }
    }

    #[test]
    fn merge_keeps_max_support() {
        let mut a = finding(1, "1.1.1", 0.8, Severity::Medium);
        let mut b = finding(2, "1.1.1", 0.9, Severity::Medium);
        a.canonical_issue = "Objective sense reversed".into();
        b.canonical_issue = "objective  sense reversed.".into();
        let (out, sup) = normalize(&[a, b], &DependencyGraph::default());
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].support, 0.9);
        assert_eq!(sup[0].id, 1);
    }

    #[test]
    fn duplicate_dropped_and_empty_identity() {
        let a = finding(1, "1.1.1", 0.8, Severity::Medium);
        let mut b = finding(2, "1.2.1", 0.8, Severity::Medium);
        b.duplicate_of = Some(1);
        let (out, _) = normalize(&[a, b], &DependencyGraph::default());
        assert_eq!(out.iter().map(|f| f.id).collect::<Vec<_>>(), vec![1]);
        assert!(normalize(&[], &DependencyGraph::default()).0.is_empty());
    }

    #[test]
    fn threshold_and_family_tie_break() {
        let low = finding(1, "1.1.1", 0.4, Severity::High);
        let d = rerank(&[low], &routing(&[]), 0.5, 3);
        assert!(d.abstained);
        let a = finding(1, "4.1.1", 0.9, Severity::Medium);
        let b = finding(2, "3.6.1", 0.9, Severity::Medium);
        let d = rerank(&[a, b], &routing(&[]), 0.5, 3);
        assert_eq!(d.findings[0].label.numeric_code, "3.6.1");
    }

    #[test]
    fn severity_outranks_lower_support() {
        let a = finding(1, "1.1.1", 0.9, Severity::Low);
        let b = finding(2, "1.2.1", 0.7, Severity::High);
        let d = rerank(&[a, b], &routing(&[FamilyId::Objective]), 0.5, 3);
        assert_eq!(d.findings[0].id, 2);
    }

    #[test]
    fn judge_disabled_is_identity() {
        let d = rerank(&[finding(1, "1.1.1", 0.9, Severity::High)], &routing(&[]), 0.5, 3);
        let j =
            final_judge(d.clone(), &Gateway::heuristic(), &PromptSet::bundled(), TaxonomyRegistry::bundled(), false, 3);
        assert_eq!(j.diagnosis, d);
    }
}
