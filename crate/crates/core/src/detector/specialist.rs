//! Family specialists. Heuristic specialists compare artifacts directly;
//! LLM specialists send the family prompt through the gateway.

use super::symbolic::{discrepancies, Discrepancy};
use super::triage::artifacts_block;
use super::{AuditContext, DetectorError, SharedState};
use crate::artifact::{AuditTuple, ElementKind, ElementRef};
use crate::contract::{CheckKind, CheckResult};
use crate::finding::{CandidateFinding, DependencyNote, Severity, Verdict};
use crate::gateway::{parse_findings, schemas, ChatRequest, GatewayError, Message, UsageRecord};
use crate::prompts::fill;
use crate::taxonomy::{FamilyId, TaxonomyRegistry};

/// Output of one specialist invocation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SpecialistOutput {
    /// Ids are local, 1-based.
    pub findings: Vec<CandidateFinding>,
    pub notes: Vec<DependencyNote>,
    pub diagnostics: Vec<String>,
    pub usage: UsageRecord,
}

fn from_discrepancy(x: &Discrepancy, reg: &TaxonomyRegistry, id: u32) -> CandidateFinding {
    CandidateFinding {
        id,
        element: x.element.clone(),
        label: reg.by_code(x.code).cloned().expect("heuristic codes exist in the taxonomy"),
        verdict: Verdict::Hallucinated,
        support: 1.0,
        evidence: x.evidence.clone(),
        canonical_issue: x.canonical_issue.clone(),
        is_root_cause: true,
        duplicate_of: None,
        severity: Severity::High,
        repair: x.repair.clone(),
        source: "heuristic".into(),
    }
}

/// Plan-side element an implementation finding points at.
fn code_element(t: &AuditTuple, check: &CheckResult, upstream: Option<&ElementRef>) -> ElementRef {
    let plan = |kind, id: &str| ElementRef::plan(kind, id.to_string());
    let target = upstream.or(check.element.as_ref());
    match (check.kind, target) {
        (CheckKind::Materialization, Some(e)) if t.plan.materialization(&e.local_id).is_none() => {
            plan(ElementKind::ExpectedMissing, &e.local_id)
        }
        (CheckKind::Registration, Some(e)) => plan(ElementKind::ExpectedMissing, &e.local_id),
        (_, Some(e)) => plan(ElementKind::CodeObject, &e.local_id),
        (CheckKind::ReadoutVars, None) => plan(ElementKind::CodeObject, "readout"),
        (CheckKind::SenseToken, None) => plan(ElementKind::CodeObject, "objective"),
        _ => plan(ElementKind::CodeObject, "solver_backend"),
    }
}

/// Symbolic discrepancy behind a code-level failure, when the failure is a
/// consequence of an upstream modeling error.
fn upstream_of<'a>(t: &AuditTuple, check: &CheckResult, symbolic: &'a [Discrepancy]) -> Option<&'a Discrepancy> {
    match &check.element {
        Some(e) => symbolic.iter().find(|x| &x.element == e),
        // The backend is incompatible with every discrete variable at once.
        None if check.kind == CheckKind::Backend => symbolic.iter().find(|x| {
            x.element.kind == ElementKind::Variable
                && t.model.variable(&x.element.local_id).is_some_and(|v| v.domain.is_discrete())
        }),
        None => None,
    }
}

fn heuristic_implementation(state: &SharedState, t: &AuditTuple, reg: &TaxonomyRegistry) -> SpecialistOutput {
    let mut out = SpecialistOutput::default();
    let symbolic: Vec<Discrepancy> = [FamilyId::Objective, FamilyId::Variable, FamilyId::Constraint]
        .into_iter()
        .flat_map(|f| discrepancies(f, t, &state.schema))
        .collect();
    for check in state.contract.fails() {
        // Unlabeled failures are critiques, not findings.
        let Some(label) = &check.suggested_label else { continue };
        let upstream = upstream_of(t, check, &symbolic);
        let element = code_element(t, check, upstream.map(|x| &x.element));
        let id = out.findings.len() as u32 + 1;
        if let Some(x) = upstream {
            out.notes.push(DependencyNote {
                from_family: FamilyId::Implementation,
                to_family: x.family(),
                description: format!("{} follows from upstream issue: {}", check.check_id, x.canonical_issue),
                elements: vec![x.element.clone(), element.clone()],
            });
        }
        out.findings.push(CandidateFinding {
            id,
            element,
            label: label.clone(),
            verdict: Verdict::Hallucinated,
            support: 1.0,
            evidence: check.evidence.clone(),
            canonical_issue: format!("{} check failed", check.check_id.to_lowercase()),
            is_root_cause: upstream.is_none(),
            duplicate_of: None,
            severity: Severity::High,
            repair: format!("make the code agree with the symbolic model ({})", reg.type_name(label)),
            source: "contract".into(),
        });
    }
    out
}

/// Deterministic specialist. Never errors.
pub fn run_heuristic_specialist(
    family: FamilyId,
    state: &SharedState,
    t: &AuditTuple,
    reg: &TaxonomyRegistry,
) -> SpecialistOutput {
    if family == FamilyId::Implementation {
        return heuristic_implementation(state, t, reg);
    }
    let findings = discrepancies(family, t, &state.schema)
        .iter()
        .enumerate()
        .map(|(i, x)| from_discrepancy(x, reg, i as u32 + 1))
        .collect();
    SpecialistOutput { findings, ..Default::default() }
}

fn specialist_user_message(family: FamilyId, state: &SharedState, t: &AuditTuple, review: &[DependencyNote]) -> String {
    let mut user = artifacts_block(t);
    if !state.schema.is_empty() {
        let schema = serde_json::to_string_pretty(&state.schema).expect("schema serializes");
        user.push_str(&format!("\nSemantic schema:\n{schema}\n"));
    }
    if family == FamilyId::Implementation {
        let fails: Vec<String> =
            state.contract.fails().map(|c| format!("- {}: {}", c.check_id, c.evidence.join("; "))).collect();
        if !fails.is_empty() {
            user.push_str(&format!("\nHeuristic contract notes:\n{}\n", fails.join("\n")));
        }
    }
    if !review.is_empty() {
        let notes: Vec<String> =
            review.iter().map(|n| format!("- from {}: {}", n.from_family, n.description)).collect();
        user.push_str(&format!("\nDependency notes to resolve:\n{}\n", notes.join("\n")));
    }
    user
}

/// LLM-backed specialist. A response that is not structured output degrades
/// to no findings plus a diagnostic; transport failures propagate.
pub fn run_llm_specialist(
    family: FamilyId,
    state: &SharedState,
    t: &AuditTuple,
    ctx: &AuditContext<'_>,
    review: &[DependencyNote],
) -> Result<SpecialistOutput, DetectorError> {
    let max = ctx.config.detector.max_findings;
    let system = fill(
        ctx.prompts.specialist(family),
        &[("taxonomy_block", &ctx.registry.taxonomy_block(family)), ("max_findings", &max.to_string())],
    );
    let user = specialist_user_message(family, state, t, review);
    let req = ChatRequest::new(
        vec![Message::system(system), Message::user(user)],
        schemas::FINDINGS,
        &format!("specialist:{family}"),
    );
    let (text, usage) = ctx.gateway.complete(&req)?;
    let mut out = SpecialistOutput { usage, ..Default::default() };
    match parse_findings(&text, Some(family), ctx.registry) {
        Ok(p) => {
            out.diagnostics.extend(p.diagnostics.into_iter().map(|d| format!("{family}: {d}")));
            let mut findings = p.findings;
            if findings.len() > max {
                out.diagnostics.push(format!("{family}: kept {max} of {} findings", findings.len()));
                findings.truncate(max);
            }
            let kept = findings.len() as u32;
            for f in &mut findings {
                f.source = format!("specialist:{family}");
                if f.duplicate_of.is_some_and(|d| d > kept) {
                    f.duplicate_of = None;
                }
            }
            out.findings = findings;
            out.notes = p.dependencies;
        }
        Err(GatewayError::ParseError(e)) => out.diagnostics.push(format!("{family}: unparsable response: {e}")),
        Err(e) => return Err(e.into()),
    }
    Ok(out)
}
