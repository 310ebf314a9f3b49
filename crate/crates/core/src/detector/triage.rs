//! Conductor triage: schema selection, deterministic routing cues and the
//! active branch set.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::symbolic::{constraint_discrepancies, objective_discrepancies, variable_discrepancies};
use super::{AuditContext, DetectorError};
use crate::artifact::{render_model_text, render_plan_text, AuditTuple, RequirementKind, SemanticSchema, Sense};
use crate::contract::{CheckKind, ContractReport};
use crate::gateway::{schemas, strip_fences, ChatRequest, Message, UsageRecord};
use crate::taxonomy::FamilyId;

/// Routing cues in priority order; earlier cues win when Π is truncated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CueId {
    SenseMismatch,
    ContractFail,
    DomainTension,
    PooledTotal,
    RelationGap,
    SenseText,
    ObjectiveGap,
}

impl CueId {
    pub fn name(self) -> &'static str {
        match self {
            CueId::SenseMismatch => "SENSE_MISMATCH",
            CueId::ContractFail => "CONTRACT_FAIL",
            CueId::DomainTension => "DOMAIN_TENSION",
            CueId::PooledTotal => "POOLED_TOTAL",
            CueId::RelationGap => "RELATION_GAP",
            CueId::SenseText => "SENSE_TEXT",
            CueId::ObjectiveGap => "OBJECTIVE_GAP",
        }
    }

    pub fn branches(self) -> &'static [FamilyId] {
        match self {
            CueId::SenseMismatch => &[FamilyId::Implementation, FamilyId::Objective],
            CueId::ContractFail => &[FamilyId::Implementation],
            CueId::DomainTension => &[FamilyId::Variable],
            CueId::PooledTotal | CueId::RelationGap => &[FamilyId::Constraint],
            CueId::SenseText | CueId::ObjectiveGap => &[FamilyId::Objective],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cue {
    pub id: CueId,
    pub evidence: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutingDecision {
    /// Π, in the order the branches were selected.
    pub active_branches: Vec<FamilyId>,
    pub cues: Vec<Cue>,
    pub rescue_pass: bool,
}

impl RoutingDecision {
    pub fn is_active(&self, f: FamilyId) -> bool {
        self.active_branches.contains(&f)
    }
}

pub const MAX_INITIAL_BRANCHES: usize = 3;

/// Sense stated in the problem text, when exactly one direction keyword occurs.
pub fn text_sense(text: &str) -> Option<Sense> {
    let t = text.to_lowercase();
    let min = t.contains("minimiz") || t.contains("minimis");
    let max = t.contains("maximiz") || t.contains("maximis");
    match (min, max) {
        (true, false) => Some(Sense::Minimize),
        (false, true) => Some(Sense::Maximize),
        _ => None,
    }
}

/// Evaluates every cue; the result is in [`CueId`] order.
pub fn evaluate_cues(t: &AuditTuple, schema: &SemanticSchema, contract: &ContractReport) -> Vec<Cue> {
    let mut cues = Vec::new();
    let mut push = |id, evidence: String| cues.push(Cue { id, evidence });

    if let Some(c) = contract.fails().find(|c| c.kind == CheckKind::Sense) {
        push(CueId::SenseMismatch, c.evidence.join("; "));
    }
    if let Some(c) = contract.fails().next() {
        push(CueId::ContractFail, format!("{}: {}", c.check_id, c.evidence.join("; ")));
    }
    if let Some(x) = variable_discrepancies(t, schema).first() {
        push(CueId::DomainTension, x.evidence.join("; "));
    }
    let cons = constraint_discrepancies(t, schema);
    if let Some(x) = cons.iter().find(|x| x.pooled) {
        push(CueId::PooledTotal, x.evidence.join("; "));
    }
    if let Some(x) = cons.first() {
        push(CueId::RelationGap, x.evidence.join("; "));
    }
    let obj = objective_discrepancies(t, schema);
    let has_sense_req = schema.requirements(RequirementKind::ObjectiveSense).any(|r| r.sense.is_some());
    if let Some(x) = obj.iter().find(|x| x.code == "1.1.1") {
        push(CueId::SenseText, x.evidence.join("; "));
    } else if !has_sense_req {
        if let Some(s) = text_sense(&t.problem.text).filter(|s| *s != t.model.objective.sense) {
            push(
                CueId::SenseText,
                format!("problem text says {}, model says {}", s.as_str(), t.model.objective.sense.as_str()),
            );
        }
    }
    if let Some(x) = obj.iter().find(|x| x.code != "1.1.1") {
        push(CueId::ObjectiveGap, x.evidence.join("; "));
    }
    cues
}

/// Π from cues (priority order, truncated to three), then extra branches;
/// `{constraint}` when nothing fires.
pub fn route(cues: &[Cue], extra: &[FamilyId], all_experts: bool) -> Vec<FamilyId> {
    if all_experts {
        return FamilyId::ALL.to_vec();
    }
    let mut out: Vec<FamilyId> = Vec::new();
    let from_cues = cues.iter().flat_map(|c| c.id.branches().iter().copied());
    for f in from_cues.chain(extra.iter().copied()) {
        if !out.contains(&f) {
            out.push(f);
        }
    }
    out.truncate(MAX_INITIAL_BRANCHES);
    if out.is_empty() {
        out.push(FamilyId::Constraint);
    }
    out
}

pub(crate) fn artifacts_block(t: &AuditTuple) -> String {
    let mut s = format!(
        "Problem specification:\n{}\n\nSymbolic model:\n{}\n\nSolver plan:\n{}\n",
        t.problem.text.trim(),
        render_model_text(&t.model).trim_end(),
        render_plan_text(&t.plan).trim_end()
    );
    if let Some(code) = &t.plan.raw_code {
        s.push_str(&format!("\nSolver code ({}):\n{}\n", code.language, code.text.trim_end()));
    }
    s
}

/// Gold schema when present; otherwise the conductor's extraction in LLM
/// mode, or an empty schema in heuristic mode.
pub fn triage(
    t: &AuditTuple,
    contract: &ContractReport,
    ctx: &AuditContext<'_>,
    usage: &mut UsageRecord,
    diagnostics: &mut Vec<String>,
) -> Result<(SemanticSchema, RoutingDecision), DetectorError> {
    let gold = t.problem.schema.clone();
    let mut extra = Vec::new();
    let schema = if ctx.is_heuristic() {
        gold.unwrap_or_default()
    } else {
        let mut user = artifacts_block(t);
        let fails: Vec<String> =
            contract.fails().map(|c| format!("- {}: {}", c.check_id, c.evidence.join("; "))).collect();
        if !fails.is_empty() {
            user.push_str(&format!("\nDeterministic contract failures:\n{}\n", fails.join("\n")));
        }
        let req = ChatRequest::new(
            vec![Message::system(ctx.prompts.conductor.clone()), Message::user(user)],
            schemas::CONDUCTOR,
            "conductor",
        );
        let (text, u) = ctx.gateway.complete(&req)?;
        usage.add(&u);
        let (modules, extracted) = parse_conductor(&text, diagnostics);
        extra = modules;
        gold.or(extracted).unwrap_or_default()
    };
    let cues = evaluate_cues(t, &schema, contract);
    let active = route(&cues, &extra, ctx.config.detector.all_experts);
    Ok((schema, RoutingDecision { active_branches: active, cues, rescue_pass: false }))
}

fn parse_conductor(text: &str, diagnostics: &mut Vec<String>) -> (Vec<FamilyId>, Option<SemanticSchema>) {
    let Ok(root) = serde_json::from_str::<Value>(strip_fences(text)) else {
        diagnostics.push("conductor: response is not JSON; routing from cues only".into());
        return (Vec::new(), None);
    };
    let modules = root
        .get("modules")
        .and_then(Value::as_array)
        .map(|xs| xs.iter().filter_map(Value::as_str).filter_map(FamilyId::parse).collect())
        .unwrap_or_default();
    let schema = match root.get("schema") {
        None | Some(Value::Null) => None,
        Some(v) => match serde_json::from_value::<SemanticSchema>(v.clone()) {
            Ok(s) => Some(s),
            Err(e) => {
                diagnostics.push(format!("conductor: schema rejected: {e}"));
                None
            }
        },
    };
    (modules, schema)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cue(id: CueId) -> Cue {
        Cue { id, evidence: String::new() }
    }

    #[test]
    fn default_branch_is_constraint() {
        assert_eq!(route(&[], &[], false), vec![FamilyId::Constraint]);
    }

    #[test]
    fn priority_and_truncation() {
        let cues = [cue(CueId::SenseMismatch), cue(CueId::DomainTension), cue(CueId::RelationGap)];
        assert_eq!(route(&cues, &[], false), vec![FamilyId::Implementation, FamilyId::Objective, FamilyId::Variable]);
        assert_eq!(route(&cues, &[], true).len(), 4);
    }

    #[test]
    fn text_sense_needs_one_direction() {
        assert_eq!(text_sense("Minimize the total cost."), Some(Sense::Minimize));
        assert_eq!(text_sense("maximise profit"), Some(Sense::Maximize));
        assert_eq!(text_sense("minimize cost, maximize reach"), None);
    }
}
