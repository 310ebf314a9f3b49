//! Deterministic code-contract checks: plan-vs-model fidelity and shallow
//! token heuristics over raw solver code.
//!
//! Two equivalence patterns never fail: a maximize objective built as a
//! minimization over negated coefficients with a declared readout correction,
//! and a variable bound stored as a single-variable constraint row instead of
//! API bounds (or the reverse).

use std::collections::BTreeSet;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::artifact::{
    AuditTuple, CoefficientSource, ConstraintDecl, Coverage, ElementKind, ElementRef, ExtNum, MaterializationPlan,
    ObjectiveReadout, Relation, SymbolicModel,
};
use crate::taxonomy::{LabelPath, TaxonomyRegistry};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CheckKind {
    Sense,
    Materialization,
    Registration,
    ApiDomain,
    Bounds,
    Readout,
    ReadoutVars,
    Backend,
    Entry,
    Placeholder,
    SenseToken,
    ApiToken,
}

impl CheckKind {
    pub const ALL: [CheckKind; 12] = [
        CheckKind::Sense,
        CheckKind::Materialization,
        CheckKind::Registration,
        CheckKind::ApiDomain,
        CheckKind::Bounds,
        CheckKind::Readout,
        CheckKind::ReadoutVars,
        CheckKind::Backend,
        CheckKind::Entry,
        CheckKind::Placeholder,
        CheckKind::SenseToken,
        CheckKind::ApiToken,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Sense => "SENSE",
            CheckKind::Materialization => "MATERIALIZATION",
            CheckKind::Registration => "REGISTRATION",
            CheckKind::ApiDomain => "API_DOMAIN",
            CheckKind::Bounds => "BOUNDS",
            CheckKind::Readout => "READOUT",
            CheckKind::ReadoutVars => "READOUT_VARS",
            CheckKind::Backend => "BACKEND",
            CheckKind::Entry => "ENTRY",
            CheckKind::Placeholder => "PLACEHOLDER",
            CheckKind::SenseToken => "SENSE_TOKEN",
            CheckKind::ApiToken => "API_TOKEN",
        }
    }

    pub fn parse(s: &str) -> Option<CheckKind> {
        CheckKind::ALL.into_iter().find(|k| k.name().eq_ignore_ascii_case(s.trim()))
    }

    /// Raw-code checks operate on text only.
    pub fn is_raw(self) -> bool {
        matches!(self, CheckKind::Entry | CheckKind::Placeholder | CheckKind::SenseToken | CheckKind::ApiToken)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Inapplicable,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check_id: String,
    pub kind: CheckKind,
    pub status: CheckStatus,
    pub evidence: Vec<String>,
    pub suggested_label: Option<LabelPath>,
    /// Model element the check is about, when there is one.
    pub element: Option<ElementRef>,
}

#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ContractReport {
    pub checks: Vec<CheckResult>,
}

impl ContractReport {
    pub fn fails(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }

    pub fn has_fail(&self) -> bool {
        self.fails().next().is_some()
    }

    pub fn fail_kinds(&self) -> BTreeSet<CheckKind> {
        self.fails().map(|c| c.kind).collect()
    }

    pub fn extend(&mut self, other: ContractReport) {
        self.checks.extend(other.checks);
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContractConfig {
    pub entry_point_token: String,
    pub api_allowlist: Vec<String>,
    /// `None` enables every check.
    pub enabled_checks: Option<Vec<String>>,
    pub lp_only_backends: Vec<String>,
}

impl Default for ContractConfig {
    fn default() -> Self {
        let allow = [
            "addVar",
            "addVars",
            "addConstr",
            "addConstrs",
            "addLConstr",
            "setObjective",
            "optimize",
            "update",
            "setParam",
            "getVars",
            "getAttr",
            "solve",
            "Solve",
            "add",
            "add_var",
            "add_variable",
            "add_constraint",
            "add_constr",
            "Add",
            "NumVar",
            "IntVar",
            "BoolVar",
            "Minimize",
            "Maximize",
            "minimize",
            "maximize",
            "Objective",
            "SetCoefficient",
            "SetMinimization",
            "SetMaximization",
            "Value",
            "value",
            "objective",
            "status",
            "solution_value",
            "write",
            "writeLP",
            "sum",
            "quicksum",
        ];
        ContractConfig {
            entry_point_token: "solve_model".to_string(),
            api_allowlist: allow.iter().map(|s| s.to_string()).collect(),
            enabled_checks: None,
            lp_only_backends: ["linprog", "scipy.optimize.linprog", "glop", "clp", "pdlp"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

impl ContractConfig {
    pub fn enabled(&self, kind: CheckKind) -> bool {
        match &self.enabled_checks {
            None => true,
            Some(list) => list.iter().any(|s| CheckKind::parse(s) == Some(kind)),
        }
    }
}

struct Emitter<'a> {
    reg: &'a TaxonomyRegistry,
    cfg: &'a ContractConfig,
    out: Vec<CheckResult>,
}

impl Emitter<'_> {
    fn push(
        &mut self,
        kind: CheckKind,
        id: impl Into<String>,
        fail: Option<(&str, Vec<String>)>,
        element: Option<ElementRef>,
    ) {
        if !self.cfg.enabled(kind) {
            return;
        }
        let (status, evidence, label) = match fail {
            Some((code, ev)) => {
                debug_assert!(!ev.is_empty(), "fails carry evidence");
                let label = if code.is_empty() { None } else { self.reg.by_code(code).cloned() };
                (CheckStatus::Fail, ev, label)
            }
            None => (CheckStatus::Pass, Vec::new(), None),
        };
        self.out.push(CheckResult { check_id: id.into(), kind, status, evidence, suggested_label: label, element });
    }

    fn inapplicable(&mut self, kind: CheckKind) {
        if self.cfg.enabled(kind) {
            self.out.push(CheckResult {
                check_id: kind.name().to_string(),
                kind,
                status: CheckStatus::Inapplicable,
                evidence: Vec::new(),
                suggested_label: None,
                element: None,
            });
        }
    }
}

/// Per-variable bound implied by a single-variable row, normalized to
/// `var relation value`. Rows over indexed variables count only when every
/// index is quantified over its full set.
pub fn row_bound<'a>(m: &SymbolicModel, c: &'a ConstraintDecl) -> Option<(&'a str, Relation, crate::artifact::Coef)> {
    let (var, coef, rhs) = c.as_single_bound()?;
    let t = &c.lhs[0];
    if !t.index.iter().all(|b| b.members.is_none() && c.quantified_over.contains(&b.set)) {
        return None;
    }
    m.variable(var)?;
    let rel = if coef.is_negative() { c.relation.reversed() } else { c.relation };
    Some((var, rel, rhs / coef))
}

fn tighten(lo: &mut ExtNum, hi: &mut ExtNum, rel: Relation, v: crate::artifact::Coef) {
    let v = ExtNum::Finite(v);
    match rel {
        Relation::Le => *hi = (*hi).min(v),
        Relation::Ge => *lo = (*lo).max(v),
        Relation::Eq => {
            *hi = (*hi).min(v);
            *lo = (*lo).max(v);
        }
    }
}

fn materialized_full(plan: &MaterializationPlan, id: &str) -> bool {
    matches!(plan.materialization(id).map(|c| &c.coverage), Some(Coverage::Full))
}

/// Plan-vs-model fidelity checks.
pub fn check_plan_fidelity(
    model: &SymbolicModel,
    plan: &MaterializationPlan,
    cfg: &ContractConfig,
    reg: &TaxonomyRegistry,
) -> ContractReport {
    let mut em = Emitter { reg, cfg, out: Vec::new() };
    let obj = ElementRef::model(ElementKind::Objective, "objective");

    // SENSE
    let eff = plan.objective.effective_sense();
    let negated = plan.objective.coefficient_source == CoefficientSource::Negated;
    if eff != model.objective.sense {
        em.push(
            CheckKind::Sense,
            "SENSE",
            Some((
                "4.1.1",
                vec![
                    format!("model: {}", model.objective.sense.as_str()),
                    format!(
                        "code: api_sense={} with {} coefficients (effective {})",
                        plan.objective.api_sense.as_str(),
                        if negated { "negated" } else { "direct" },
                        eff.as_str()
                    ),
                ],
            )),
            Some(obj.clone()),
        );
    } else if negated && !plan.objective.readout_sign_correction {
        em.push(
            CheckKind::Sense,
            "SENSE",
            Some(("4.1.1", vec!["code: negated coefficients without a declared readout sign correction".to_string()])),
            Some(obj.clone()),
        );
    } else {
        em.push(CheckKind::Sense, "SENSE", None, Some(obj.clone()));
    }

    // Bounds each side could be carrying through rows.
    let row_bounds: Vec<(&str, Relation, crate::artifact::Coef, &str)> = model
        .constraints
        .iter()
        .filter_map(|c| row_bound(model, c).map(|(v, r, x)| (v, r, x, c.id.as_str())))
        .collect();

    // MATERIALIZATION
    for c in &model.constraints {
        let el = Some(ElementRef::model(ElementKind::Constraint, c.id.clone()));
        let id = format!("MATERIALIZATION:{}", c.id);
        let entry = plan.materialization(&c.id);
        let coverage = entry.map(|e| &e.coverage);
        match coverage {
            Some(Coverage::Full) => em.push(CheckKind::Materialization, id, None, el),
            Some(Coverage::Partial(tuples)) => {
                let shown: Vec<String> = tuples.iter().map(|t| format!("({})", t.join(","))).collect();
                em.push(
                    CheckKind::Materialization,
                    id,
                    Some((
                        "4.3.2",
                        vec![format!(
                            "constraint {} built only for {} of its index tuples: {}",
                            c.id,
                            tuples.len(),
                            shown.join(" ")
                        )],
                    )),
                    el,
                )
            }
            None | Some(Coverage::Absent) => {
                // A bound row may be carried by API bounds instead.
                let carried = row_bound(model, c).is_some_and(|(v, rel, val)| {
                    plan.registration(v).is_some_and(|r| {
                        let target = ExtNum::Finite(val);
                        match rel {
                            Relation::Le => r.api_upper <= target,
                            Relation::Ge => r.api_lower >= target,
                            Relation::Eq => r.api_upper <= target && r.api_lower >= target,
                        }
                    })
                });
                if carried {
                    em.push(CheckKind::Materialization, id, None, el);
                } else {
                    let why = if entry.is_some() { "marked absent" } else { "never instantiated" };
                    em.push(
                        CheckKind::Materialization,
                        id,
                        Some(("4.1.2", vec![format!("constraint {} is {why} in code", c.id)])),
                        el,
                    );
                }
            }
        }
    }

    for v in &model.variables {
        let el = Some(ElementRef::model(ElementKind::Variable, v.name.clone()));
        let Some(r) = plan.registration(&v.name) else {
            em.push(
                CheckKind::Registration,
                format!("REGISTRATION:{}", v.name),
                Some(("4.1.3", vec![format!("variable {} is never registered with the solver", v.name)])),
                el,
            );
            continue;
        };
        em.push(CheckKind::Registration, format!("REGISTRATION:{}", v.name), None, el.clone());

        if r.api_domain != v.domain {
            em.push(
                CheckKind::ApiDomain,
                format!("API_DOMAIN:{}", v.name),
                Some((
                    "4.2.1",
                    vec![format!(
                        "variable {} declared {} but created as {}",
                        v.name,
                        v.domain.as_str(),
                        r.api_domain.as_str()
                    )],
                )),
                el.clone(),
            );
        } else {
            em.push(CheckKind::ApiDomain, format!("API_DOMAIN:{}", v.name), None, el.clone());
        }

        let (mut mlo, mut mhi) = v.effective_bounds();
        let (mut clo, mut chi) = (r.api_lower, r.api_upper);
        for (var, rel, val, cid) in &row_bounds {
            if *var != v.name {
                continue;
            }
            tighten(&mut mlo, &mut mhi, *rel, *val);
            if materialized_full(plan, cid) {
                tighten(&mut clo, &mut chi, *rel, *val);
            }
        }
        if r.api_domain == crate::artifact::Domain::Binary {
            clo = clo.max(ExtNum::int(0));
            chi = chi.min(ExtNum::int(1));
        }
        if v.domain == crate::artifact::Domain::Binary {
            mlo = mlo.max(ExtNum::int(0));
            mhi = mhi.min(ExtNum::int(1));
        }
        if (mlo, mhi) != (clo, chi) {
            em.push(
                CheckKind::Bounds,
                format!("BOUNDS:{}", v.name),
                Some((
                    "4.2.2",
                    vec![format!("variable {}: model range [{mlo}, {mhi}], code range [{clo}, {chi}]", v.name)],
                )),
                el,
            );
        } else {
            em.push(CheckKind::Bounds, format!("BOUNDS:{}", v.name), None, el);
        }
    }

    // READOUT
    let readout_negated = plan.readout.objective_readout == ObjectiveReadout::NegatedSolvedValue;
    match plan.readout.objective_readout {
        ObjectiveReadout::Stale => em.push(
            CheckKind::Readout,
            "READOUT",
            Some(("4.5.3", vec!["objective value read from a stale result object".to_string()])),
            Some(obj.clone()),
        ),
        _ if readout_negated != negated => em.push(
            CheckKind::Readout,
            "READOUT",
            Some((
                "4.5.2",
                vec![format!(
                    "reported objective is {} while coefficients are {}",
                    if readout_negated { "sign-flipped" } else { "not sign-corrected" },
                    if negated { "negated" } else { "direct" }
                )],
            )),
            Some(obj.clone()),
        ),
        _ => em.push(CheckKind::Readout, "READOUT", None, Some(obj.clone())),
    }

    let unknown: Vec<&String> =
        plan.readout.reported_variables.iter().filter(|n| model.variable(n).is_none()).collect();
    if unknown.is_empty() {
        em.push(CheckKind::ReadoutVars, "READOUT_VARS", None, None);
    } else {
        let names: Vec<&str> = unknown.iter().map(|s| s.as_str()).collect();
        em.push(
            CheckKind::ReadoutVars,
            "READOUT_VARS",
            Some(("4.5.1", vec![format!("reads back undeclared variables: {}", names.join(", "))])),
            None,
        );
    }

    // BACKEND
    let lp_only = cfg.lp_only_backends.iter().any(|b| b.eq_ignore_ascii_case(plan.solver_backend.trim()));
    let discrete: Vec<&str> =
        model.variables.iter().filter(|v| v.domain.is_discrete()).map(|v| v.name.as_str()).collect();
    if lp_only && !discrete.is_empty() {
        em.push(
            CheckKind::Backend,
            "BACKEND",
            Some((
                "4.4.2",
                vec![format!(
                    "LP-only backend {} with discrete variables {}",
                    plan.solver_backend,
                    discrete.join(", ")
                )],
            )),
            None,
        );
    } else {
        em.push(CheckKind::Backend, "BACKEND", None, None);
    }

    ContractReport { checks: em.out }
}

fn placeholder_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?m)\bTODO\b|\bFIXME\b|\bNotImplementedError\b|^\s*\.\.\.\s*$|:\s*\.\.\.\s*$|unimplemented!|todo!")
            .expect("valid regex")
    })
}

fn min_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"\bLpMinimize\b|\bGRB\.MINIMIZE\b|\bModelSense\s*=\s*1\b|\bsense\s*=\s*['\x22]?min(imize)?\b|\.Minimize\s*\(|\bSetMinimization\s*\(")
            .expect("valid regex")
    })
}

fn max_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"\bLpMaximize\b|\bGRB\.MAXIMIZE\b|\bModelSense\s*=\s*-1\b|\bsense\s*=\s*['\x22]?max(imize)?\b|\.Maximize\s*\(|\bSetMaximization\s*\(")
            .expect("valid regex")
    })
}

fn api_call_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"\b(model|m|mdl|solver|prob|problem|lp|milp)\.([A-Za-z_][A-Za-z0-9_]*)\s*\(").expect("valid regex")
    })
}

fn line_of(text: &str, byte: usize) -> usize {
    text[..byte].matches('\n').count() + 1
}

/// Token-level checks over raw solver code. Empty text makes every check inapplicable.
pub fn check_raw_code(text: &str, _language: &str, cfg: &ContractConfig, reg: &TaxonomyRegistry) -> ContractReport {
    let mut em = Emitter { reg, cfg, out: Vec::new() };
    if text.trim().is_empty() {
        for k in [CheckKind::Entry, CheckKind::Placeholder, CheckKind::SenseToken, CheckKind::ApiToken] {
            em.inapplicable(k);
        }
        return ContractReport { checks: em.out };
    }

    if text.contains(cfg.entry_point_token.as_str()) {
        em.push(CheckKind::Entry, "ENTRY", None, None);
    } else {
        em.push(
            CheckKind::Entry,
            "ENTRY",
            Some(("", vec![format!("entry point {} not found", cfg.entry_point_token)])),
            None,
        );
    }

    let anchors: Vec<String> = placeholder_re()
        .find_iter(text)
        .map(|m| format!("line {}: {}", line_of(text, m.start()), m.as_str().trim()))
        .collect();
    if anchors.is_empty() {
        em.push(CheckKind::Placeholder, "PLACEHOLDER", None, None);
    } else {
        em.push(CheckKind::Placeholder, "PLACEHOLDER", Some(("", anchors)), None);
    }

    let mins: Vec<_> = min_re().find_iter(text).collect();
    let maxs: Vec<_> = max_re().find_iter(text).collect();
    if !mins.is_empty() && !maxs.is_empty() {
        let ev = vec![
            format!("line {}: {}", line_of(text, mins[0].start()), mins[0].as_str()),
            format!("line {}: {}", line_of(text, maxs[0].start()), maxs[0].as_str()),
        ];
        em.push(CheckKind::SenseToken, "SENSE_TOKEN", Some(("4.1.1", ev)), None);
    } else {
        em.push(CheckKind::SenseToken, "SENSE_TOKEN", None, None);
    }

    let allow: BTreeSet<&str> = cfg.api_allowlist.iter().map(String::as_str).collect();
    let bad: Vec<String> = api_call_re()
        .captures_iter(text)
        .filter(|c| !allow.contains(&c[2]))
        .map(|c| {
            let m = c.get(0).expect("whole match");
            format!("line {}: {}", line_of(text, m.start()), m.as_str().trim_end_matches('('))
        })
        .collect();
    if bad.is_empty() {
        em.push(CheckKind::ApiToken, "API_TOKEN", None, None);
    } else {
        em.push(CheckKind::ApiToken, "API_TOKEN", Some(("", bad)), None);
    }

    ContractReport { checks: em.out }
}

/// Plan fidelity plus raw-code checks (inapplicable when no code is attached).
pub fn check_tuple(t: &AuditTuple, cfg: &ContractConfig, reg: &TaxonomyRegistry) -> ContractReport {
    let mut r = check_plan_fidelity(&t.model, &t.plan, cfg, reg);
    let (text, lang) = t.plan.raw_code.as_ref().map(|c| (c.text.as_str(), c.language.as_str())).unwrap_or(("", ""));
    r.extend(check_raw_code(text, lang, cfg, reg));
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::artifact::{materialize, parse_case, Sense};

    fn reg() -> &'static TaxonomyRegistry {
        TaxonomyRegistry::bundled()
    }

    const CASE: &str = r#"{
        "case_id": "t",
        "problem": {"text": "p"},
        "model": {
            "objective": {"sense": "minimize", "terms": [{"coefficient": 1, "variable": "x"}, {"coefficient": 2, "variable": "y"}]},
            "variables": [
                {"name": "x", "domain": "continuous", "sign": "nonneg", "upper": 5},
                {"name": "y", "domain": "integer", "sign": "nonneg"}
            ],
            "constraints": [
                {"id": "c1", "lhs": [{"coefficient": 1, "variable": "x"}, {"coefficient": 1, "variable": "y"}], "relation": ">=", "rhs": 2},
                {"id": "ycap", "lhs": [{"coefficient": 1, "variable": "y"}], "relation": "<=", "rhs": 7}
            ]
        },
        "plan": {
            "registered_variables": [],
            "materialized_constraints": [],
            "objective": {"api_sense": "minimize", "coefficient_source": "direct"},
            "solver_backend": "highs",
            "readout": {"reported_variables": [], "objective_readout": "solved_value"}
        }
    }"#;

    fn faithful() -> (SymbolicModel, MaterializationPlan) {
        let t = parse_case(CASE).unwrap();
        let p = materialize(&t.model, "highs");
        (t.model, p)
    }

    #[test]
    fn identity_plan_is_clean() {
        let (m, p) = faithful();
        let r = check_plan_fidelity(&m, &p, &ContractConfig::default(), reg());
        assert!(!r.has_fail(), "{:?}", r.fails().collect::<Vec<_>>());
    }

    #[test]
    fn sense_flip_fails() {
        let (m, mut p) = faithful();
        p.objective.api_sense = Sense::Maximize;
        let r = check_plan_fidelity(&m, &p, &ContractConfig::default(), reg());
        let f: Vec<_> = r.fails().collect();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].suggested_label.as_ref().unwrap().numeric_code, "4.1.1");
    }

    #[test]
    fn sign_flip_wrapper_passes() {
        let (mut m, mut p) = faithful();
        m.objective.sense = Sense::Maximize;
        p.objective.api_sense = Sense::Minimize;
        p.objective.coefficient_source = CoefficientSource::Negated;
        p.objective.readout_sign_correction = true;
        p.readout.objective_readout = ObjectiveReadout::NegatedSolvedValue;
        let r = check_plan_fidelity(&m, &p, &ContractConfig::default(), reg());
        assert!(!r.has_fail());
    }

    #[test]
    fn missing_row_fails_4_1_2() {
        let (m, mut p) = faithful();
        p.materialized_constraints.retain(|c| c.id != "c1");
        let r = check_plan_fidelity(&m, &p, &ContractConfig::default(), reg());
        let f: Vec<_> = r.fails().collect();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].suggested_label.as_ref().unwrap().numeric_code, "4.1.2");
    }

    #[test]
    fn bound_row_carried_by_api_bound() {
        let (m, mut p) = faithful();
        p.materialized_constraints.retain(|c| c.id != "ycap");
        p.registered_variables[1].api_upper = ExtNum::int(7);
        let r = check_plan_fidelity(&m, &p, &ContractConfig::default(), reg());
        assert!(!r.has_fail(), "{:?}", r.fails().collect::<Vec<_>>());
    }

    #[test]
    fn lp_backend_with_integers() {
        let (m, mut p) = faithful();
        p.solver_backend = "linprog".into();
        let r = check_plan_fidelity(&m, &p, &ContractConfig::default(), reg());
        assert_eq!(r.fail_kinds(), [CheckKind::Backend].into_iter().collect());
    }

    #[test]
    fn raw_checks() {
        let cfg = ContractConfig::default();
        let r = check_raw_code("def solve_model():\n    # TODO finish\n    pass\n", "python", &cfg, reg());
        assert_eq!(r.fail_kinds(), [CheckKind::Placeholder].into_iter().collect());
        let r = check_raw_code("def main():\n    m.optimize()\n", "python", &cfg, reg());
        assert_eq!(r.fail_kinds(), [CheckKind::Entry].into_iter().collect());
        let r = check_raw_code("", "python", &cfg, reg());
        assert!(r.checks.iter().all(|c| c.status == CheckStatus::Inapplicable));
        let r = check_raw_code("def solve_model():\n    m.frobnicate(3)\n", "python", &cfg, reg());
        assert_eq!(r.fail_kinds(), [CheckKind::ApiToken].into_iter().collect());
    }
}
