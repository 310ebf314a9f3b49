//! The multi-agent detector: triage and routing, family specialists, the
//! bounded cross-review loop, and the single-call baseline.
//!
//! Mode follows the gateway: a heuristic-stub gateway selects the
//! deterministic specialists, any other backend selects the prompt-driven
//! ones. Within one case everything runs sequentially.

mod specialist;
pub mod symbolic;
mod triage;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use specialist::{run_heuristic_specialist, run_llm_specialist, SpecialistOutput};
pub use triage::{evaluate_cues, route, text_sense, triage, Cue, CueId, RoutingDecision, MAX_INITIAL_BRANCHES};

use crate::artifact::{
    build_dependency_graph, render_model_text, render_plan_text, AuditTuple, DependencyGraph, SemanticSchema,
};
use crate::config::Config;
use crate::contract::{check_tuple, ContractReport};
use crate::finding::{CandidateFinding, DependencyNote};
use crate::gateway::{parse_findings, schemas, BackendKind, ChatRequest, Gateway, GatewayError, Message, UsageRecord};
use crate::prompts::{fill, PromptSet};
use crate::taxonomy::{FamilyId, TaxonomyRegistry};

#[derive(Debug, Error)]
pub enum DetectorError {
    #[error(transparent)]
    Backend(#[from] GatewayError),
    #[error("the single-agent baseline needs a remote or replay backend")]
    HeuristicSingleAgent,
}

/// Everything an audit reads but never mutates.
pub struct AuditContext<'a> {
    pub gateway: &'a Gateway,
    pub config: &'a Config,
    pub prompts: &'a PromptSet,
    pub registry: &'a TaxonomyRegistry,
}

impl AuditContext<'_> {
    pub fn is_heuristic(&self) -> bool {
        self.gateway.kind() == BackendKind::HeuristicStub
    }
}

/// Evidence store. Append-only within a run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Blackboard {
    findings: Vec<CandidateFinding>,
    notes: Vec<DependencyNote>,
    critiques: Vec<String>,
    abstentions: Vec<String>,
}

impl Blackboard {
    pub fn findings(&self) -> &[CandidateFinding] {
        &self.findings
    }

    pub fn notes(&self) -> &[DependencyNote] {
        &self.notes
    }

    pub fn critiques(&self) -> &[String] {
        &self.critiques
    }

    pub fn abstentions(&self) -> &[String] {
        &self.abstentions
    }

    /// Appends findings, renumbering them after the current pool. Local
    /// `duplicate_of` ids are shifted by the same offset.
    pub fn add_findings(&mut self, findings: Vec<CandidateFinding>) {
        let offset = self.findings.len() as u32;
        for mut f in findings {
            f.id += offset;
            f.duplicate_of = f.duplicate_of.map(|d| d + offset);
            self.findings.push(f);
        }
    }

    pub fn add_note(&mut self, n: DependencyNote) {
        self.notes.push(n);
    }

    pub fn add_critique(&mut self, c: String) {
        self.critiques.push(c);
    }

    pub fn add_abstention(&mut self, a: String) {
        self.abstentions.push(a);
    }
}

/// Loop control ω.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Control {
    pub iteration: u32,
    pub budget: u32,
    pub converged: bool,
}

/// Per-case shared state X.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharedState {
    pub schema: SemanticSchema,
    /// Rendered symbolic model.
    pub model_graph: String,
    /// Rendered materialization plan.
    pub code_graph: String,
    pub deps: DependencyGraph,
    pub contract: ContractReport,
    pub blackboard: Blackboard,
    /// Pending review branches Q.
    pub queue: Vec<FamilyId>,
    pub control: Control,
}

/// Raw result of one audit, before consolidation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditOutcome {
    pub case_id: String,
    pub routing: RoutingDecision,
    pub state: SharedState,
    /// Notes left unreviewed when the budget ran out.
    pub unresolved: Vec<DependencyNote>,
    pub specialist_invocations: u32,
    pub usage: UsageRecord,
    pub diagnostics: Vec<String>,
}

impl AuditOutcome {
    pub fn pool(&self) -> &[CandidateFinding] {
        self.state.blackboard.findings()
    }
}

struct Run<'c, 'a> {
    ctx: &'c AuditContext<'a>,
    t: &'c AuditTuple,
    state: SharedState,
    ran: BTreeSet<FamilyId>,
    invocations: u32,
    usage: UsageRecord,
    diagnostics: Vec<String>,
}

impl Run<'_, '_> {
    fn specialist(&mut self, family: FamilyId, review: &[DependencyNote]) -> Result<(), DetectorError> {
        let out = if self.ctx.is_heuristic() {
            run_heuristic_specialist(family, &self.state, self.t, self.ctx.registry)
        } else {
            run_llm_specialist(family, &self.state, self.t, self.ctx, review)?
        };
        self.invocations += 1;
        self.ran.insert(family);
        self.usage.add(&out.usage);
        if out.findings.is_empty() {
            self.state
                .blackboard
                .add_abstention(format!("{family}: no findings (iteration {})", self.state.control.iteration));
        }
        self.state.blackboard.add_findings(out.findings);
        for n in out.notes {
            self.state.blackboard.add_note(n);
        }
        self.diagnostics.extend(out.diagnostics);
        Ok(())
    }

    /// Conductor review pass; its dependency statements join the blackboard.
    fn conductor_review(&mut self) -> Result<(), DetectorError> {
        let summary: Vec<String> = self
            .state
            .blackboard
            .findings()
            .iter()
            .map(|f| {
                format!("- [{}] {} {} ({}): {}", f.id, f.family(), f.label.numeric_code, f.element, f.canonical_issue)
            })
            .collect();
        let notes: Vec<String> = self
            .state
            .blackboard
            .notes()
            .iter()
            .map(|n| format!("- {} -> {}: {}", n.from_family, n.to_family, n.description))
            .collect();
        let user = format!(
            "Specialist findings:\n{}\n\nOpen dependency notes:\n{}\n",
            if summary.is_empty() { "(none)".to_string() } else { summary.join("\n") },
            if notes.is_empty() { "(none)".to_string() } else { notes.join("\n") }
        );
        let req = ChatRequest::new(
            vec![Message::system(self.ctx.prompts.conductor_review.clone()), Message::user(user)],
            schemas::REVIEW,
            "conductor_review",
        );
        let (text, u) = self.ctx.gateway.complete(&req)?;
        self.usage.add(&u);
        let wrapped = match serde_json::from_str::<serde_json::Value>(crate::gateway::strip_fences(&text)) {
            Ok(v) => {
                serde_json::json!({"findings": [], "dependencies": v.get("dependencies").cloned().unwrap_or_default()})
            }
            Err(e) => {
                self.diagnostics.push(format!("conductor_review: unparsable response: {e}"));
                return Ok(());
            }
        };
        if let Ok(p) = parse_findings(&wrapped.to_string(), None, self.ctx.registry) {
            for d in p.diagnostics {
                self.diagnostics.push(format!("conductor_review: {d}"));
            }
            for n in p.dependencies {
                self.state.blackboard.add_note(n);
            }
        }
        Ok(())
    }
}

fn note_key(n: &DependencyNote) -> (FamilyId, FamilyId) {
    (n.from_family, n.to_family)
}

/// Bounded detector loop: triage, initial specialists, cross-review while
/// notes remain and the budget allows, then an optional rescue pass.
pub fn run_audit_loop(t: &AuditTuple, ctx: &AuditContext<'_>) -> Result<AuditOutcome, DetectorError> {
    let budget = ctx.config.detector.budget.max(1);
    let contract = check_tuple(t, &ctx.config.contract, ctx.registry);
    let mut usage = UsageRecord::default();
    let mut diagnostics = Vec::new();
    let (schema, mut routing) = triage(t, &contract, ctx, &mut usage, &mut diagnostics)?;

    let mut run = Run {
        ctx,
        t,
        state: SharedState {
            schema,
            model_graph: render_model_text(&t.model),
            code_graph: render_plan_text(&t.plan),
            deps: build_dependency_graph(t),
            contract,
            blackboard: Blackboard::default(),
            queue: routing.active_branches.clone(),
            control: Control { iteration: 1, budget, converged: false },
        },
        ran: BTreeSet::new(),
        invocations: 0,
        usage,
        diagnostics,
    };
    for c in run.state.contract.fails().filter(|c| c.suggested_label.is_none()) {
        run.state.blackboard.add_critique(format!("{}: {}", c.check_id, c.evidence.join("; ")));
    }

    for f in routing.active_branches.clone() {
        run.specialist(f, &[])?;
    }
    run.state.queue.clear();

    // Each (from, to) pair is reviewed at most once.
    let mut reviewed: BTreeSet<(FamilyId, FamilyId)> = BTreeSet::new();
    let mut unresolved = Vec::new();
    loop {
        let mut pending: Vec<DependencyNote> = Vec::new();
        for n in run.state.blackboard.notes() {
            if n.from_family == n.to_family || reviewed.contains(&note_key(n)) {
                continue;
            }
            // Deterministic specialists give the same answer twice.
            if ctx.is_heuristic() && run.ran.contains(&n.to_family) {
                reviewed.insert(note_key(n));
                continue;
            }
            if !pending.iter().any(|p| note_key(p) == note_key(n)) {
                pending.push(n.clone());
            }
        }
        if pending.is_empty() {
            run.state.control.converged = true;
            break;
        }
        if run.state.control.iteration >= budget {
            for n in &pending {
                run.diagnostics
                    .push(format!("unresolved note {} -> {}: {}", n.from_family, n.to_family, n.description));
            }
            unresolved = pending;
            break;
        }
        run.state.control.iteration += 1;
        if !ctx.is_heuristic() {
            run.conductor_review()?;
        }
        let mut targets: Vec<FamilyId> = pending.iter().map(|n| n.to_family).collect();
        targets.sort();
        targets.dedup();
        run.state.queue = targets.clone();
        for n in &pending {
            reviewed.insert(note_key(n));
        }
        for f in targets {
            let notes: Vec<DependencyNote> = pending.iter().filter(|n| n.to_family == f).cloned().collect();
            run.specialist(f, &notes)?;
        }
        run.state.queue.clear();
    }

    let evidence = run.state.contract.has_fail() || !routing.cues.is_empty();
    if ctx.config.detector.rescue && run.state.blackboard.findings().is_empty() && evidence {
        let mut rescue: Vec<FamilyId> = Vec::new();
        let cue_branches = routing.cues.iter().flat_map(|c| c.id.branches().iter().copied());
        let contract_branch = run.state.contract.has_fail().then_some(FamilyId::Implementation);
        for f in cue_branches.chain(contract_branch) {
            if !run.ran.contains(&f) && !rescue.contains(&f) {
                rescue.push(f);
            }
        }
        if !rescue.is_empty() && run.state.control.iteration < budget {
            run.state.control.iteration += 1;
            routing.rescue_pass = true;
            for f in &rescue {
                if !routing.active_branches.contains(f) {
                    routing.active_branches.push(*f);
                }
            }
            for f in rescue {
                run.specialist(f, &[])?;
            }
        }
    }

    debug_assert!(run.state.control.iteration <= budget);
    Ok(AuditOutcome {
        case_id: t.case_id.clone(),
        routing,
        state: run.state,
        unresolved,
        specialist_invocations: run.invocations,
        usage: run.usage,
        diagnostics: run.diagnostics,
    })
}

/// One monolithic call over the full taxonomy and all three artifacts.
pub fn audit_single_agent(t: &AuditTuple, ctx: &AuditContext<'_>) -> Result<AuditOutcome, DetectorError> {
    if ctx.is_heuristic() {
        return Err(DetectorError::HeuristicSingleAgent);
    }
    let system = fill(&ctx.prompts.single_agent_system, &[("taxonomy_tree", &ctx.registry.taxonomy_tree())]);
    let code = match &t.plan.raw_code {
        Some(c) if !c.text.trim().is_empty() => c.text.clone(),
        _ => render_plan_text(&t.plan),
    };
    let user = fill(
        &ctx.prompts.single_agent_user,
        &[
            ("problem_text", t.problem.text.trim()),
            ("symbolic_model_text", render_model_text(&t.model).trim_end()),
            ("solver_code_text", code.trim_end()),
        ],
    );
    let req = ChatRequest::new(vec![Message::system(system), Message::user(user)], schemas::FINDINGS, "single_agent");
    let (text, usage) = ctx.gateway.complete(&req)?;
    let mut diagnostics = Vec::new();
    let mut blackboard = Blackboard::default();
    match parse_findings(&text, None, ctx.registry) {
        Ok(p) => {
            diagnostics.extend(p.diagnostics.into_iter().map(|d| format!("single_agent: {d}")));
            let findings = p
                .findings
                .into_iter()
                .map(|mut f| {
                    f.source = "single_agent".into();
                    f
                })
                .collect();
            blackboard.add_findings(findings);
        }
        Err(GatewayError::ParseError(e)) => diagnostics.push(format!("single_agent: unparsable response: {e}")),
        Err(e) => return Err(e.into()),
    }
    let contract = check_tuple(t, &ctx.config.contract, ctx.registry);
    Ok(AuditOutcome {
        case_id: t.case_id.clone(),
        routing: RoutingDecision { active_branches: FamilyId::ALL.to_vec(), cues: Vec::new(), rescue_pass: false },
        state: SharedState {
            schema: t.problem.schema.clone().unwrap_or_default(),
            model_graph: render_model_text(&t.model),
            code_graph: render_plan_text(&t.plan),
            deps: build_dependency_graph(t),
            contract,
            blackboard,
            queue: Vec::new(),
            control: Control { iteration: 1, budget: 1, converged: true },
        },
        unresolved: Vec::new(),
        specialist_invocations: 0,
        usage,
        diagnostics,
    })
}
