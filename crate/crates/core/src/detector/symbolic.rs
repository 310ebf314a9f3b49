//! Deterministic comparisons of the symbolic model against the semantic
//! schema. Heuristic specialists and routing cues are both built on these.

use std::collections::BTreeSet;

use crate::artifact::{
    AuditTuple, ConstraintDecl, ElementKind, ElementRef, ExtNum, Relation, RequirementKind, RequirementSpec, Rhs,
    SemanticSchema, SignRestriction, SymbolicModel,
};
use crate::contract::row_bound;
use crate::taxonomy::FamilyId;

/// One schema requirement the model violates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Discrepancy {
    pub code: &'static str,
    pub element: ElementRef,
    pub evidence: Vec<String>,
    pub canonical_issue: String,
    pub repair: String,
    /// Set for pooled-total requirements.
    pub pooled: bool,
}

impl Discrepancy {
    pub fn family(&self) -> FamilyId {
        match self.code.as_bytes().first() {
            Some(b'1') => FamilyId::Objective,
            Some(b'2') => FamilyId::Variable,
            Some(b'3') => FamilyId::Constraint,
            _ => FamilyId::Implementation,
        }
    }
}

fn d(code: &'static str, element: ElementRef, evidence: Vec<String>, issue: String, repair: String) -> Discrepancy {
    Discrepancy { code, element, evidence, canonical_issue: issue, repair, pooled: false }
}

fn objective_ref() -> ElementRef {
    ElementRef::model(ElementKind::Objective, "objective")
}

/// Range of `var` implied by its declaration and every single-variable row.
pub fn implied_bounds(m: &SymbolicModel, var: &str) -> Option<(ExtNum, ExtNum)> {
    let v = m.variable(var)?;
    let (mut lo, mut hi) = v.effective_bounds();
    for c in &m.constraints {
        if let Some((name, rel, val)) = row_bound(m, c) {
            if name != var {
                continue;
            }
            let x = ExtNum::Finite(val);
            if matches!(rel, Relation::Le | Relation::Eq) {
                hi = hi.min(x);
            }
            if matches!(rel, Relation::Ge | Relation::Eq) {
                lo = lo.max(x);
            }
        }
    }
    Some((lo, hi))
}

pub fn objective_discrepancies(t: &AuditTuple, schema: &SemanticSchema) -> Vec<Discrepancy> {
    let m = &t.model;
    let mut out = Vec::new();
    for r in schema.requirements(RequirementKind::ObjectiveSense) {
        let Some(want) = r.sense else { continue };
        if want != m.objective.sense {
            out.push(d(
                "1.1.1",
                objective_ref(),
                vec![format!("problem: {}", want.as_str()), format!("model: {}", m.objective.sense.as_str())],
                "objective sense reversed".into(),
                format!("change the objective sense to {}", want.as_str()),
            ));
        }
    }
    for r in schema.requirements(RequirementKind::ObjectiveTerm) {
        let terms: Vec<_> = m.objective.terms.iter().filter(|x| x.variable == r.target).collect();
        if terms.is_empty() {
            out.push(d(
                "1.2.1",
                objective_ref(),
                vec![format!("problem requires a {} term in the objective", r.target)],
                format!("objective term {} missing", r.target),
                format!("add the {} term back to the objective", r.target),
            ));
            continue;
        }
        for term in terms {
            let restricted = term.index.iter().find_map(|b| {
                let members = b.members.as_ref()?;
                let full = m.set(&b.set)?.members.len();
                (members.len() < full).then(|| (b.set.clone(), members.clone()))
            });
            if let Some((set, members)) = restricted {
                out.push(d(
                    "1.3.2",
                    objective_ref(),
                    vec![format!("objective sums {} over {{{}}} only, not all of {set}", r.target, members.join(","))],
                    format!("objective index range of {} truncated", r.target),
                    format!("sum {} over the full set {set}", r.target),
                ));
                continue;
            }
            let Some(want) = r.value else { continue };
            let have = term.coefficient;
            if !want.is_zero() && want.is_negative() != have.is_negative() {
                out.push(d(
                    "1.2.4",
                    objective_ref(),
                    vec![
                        format!("problem coefficient of {} is {want}", r.target),
                        format!("model coefficient is {have}"),
                    ],
                    format!("objective term {} sign flipped", r.target),
                    format!("use coefficient {want} for {}", r.target),
                ));
            } else if want != have {
                out.push(d(
                    "1.3.1",
                    objective_ref(),
                    vec![
                        format!("problem coefficient of {} is {want}", r.target),
                        format!("model coefficient is {have}"),
                    ],
                    format!("objective coefficient of {} misbound", r.target),
                    format!("use coefficient {want} for {}", r.target),
                ));
            }
        }
    }
    out
}

fn sign_ok(sign: SignRestriction, lo: ExtNum, hi: ExtNum) -> bool {
    let zero = ExtNum::int(0);
    match sign {
        SignRestriction::Nonneg => lo >= zero,
        SignRestriction::Nonpos => hi <= zero,
        SignRestriction::Free => lo < zero && hi > zero,
    }
}

pub fn variable_discrepancies(t: &AuditTuple, schema: &SemanticSchema) -> Vec<Discrepancy> {
    let m = &t.model;
    let mut out = Vec::new();
    for r in schema.requirements(RequirementKind::Domain) {
        let Some(v) = m.variable(&r.target) else { continue };
        let el = ElementRef::model(ElementKind::Variable, v.name.clone());
        if let Some(want) = r.domain {
            let have = v.domain;
            let code = match (want.is_discrete(), have.is_discrete()) {
                (true, false) => Some("2.2.1"),
                (false, true) => Some("2.2.2"),
                (true, true) if want != have => Some("2.2.3"),
                _ => None,
            };
            if let Some(code) = code {
                out.push(d(
                    code,
                    el.clone(),
                    vec![
                        format!("problem: {} is {}", v.name, want.as_str()),
                        format!("model declares {}", have.as_str()),
                    ],
                    format!("domain of {} is {} instead of {}", v.name, have.as_str(), want.as_str()),
                    format!("declare {} as {}", v.name, want.as_str()),
                ));
            }
        }
        if let Some(sign) = r.sign {
            let (lo, hi) = implied_bounds(m, &v.name).expect("variable exists");
            if !sign_ok(sign, lo, hi) {
                out.push(d(
                    "2.2.4",
                    el.clone(),
                    vec![format!("problem: {} is {}", v.name, sign_name(sign)), format!("model range [{lo}, {hi}]")],
                    format!("sign domain of {} wrong", v.name),
                    format!("restrict {} to be {}", v.name, sign_name(sign)),
                ));
            }
        }
    }
    for r in schema.requirements(RequirementKind::Bound) {
        let (Some(v), Some(rel), Some(val)) = (m.variable(&r.target), r.relation, r.value) else { continue };
        let (lo, hi) = implied_bounds(m, &v.name).expect("variable exists");
        let x = ExtNum::Finite(val);
        let ok = match rel {
            Relation::Le => hi == x,
            Relation::Ge => lo == x,
            Relation::Eq => lo == x && hi == x,
        };
        if !ok {
            out.push(d(
                "2.2.3",
                ElementRef::model(ElementKind::Variable, v.name.clone()),
                vec![format!("problem: {} {} {val}", v.name, rel.symbol()), format!("model range [{lo}, {hi}]")],
                format!("value range of {} wrong", v.name),
                format!("bound {} by {} {val}", v.name, rel.symbol()),
            ));
        }
    }
    out
}

fn sign_name(s: SignRestriction) -> &'static str {
    match s {
        SignRestriction::Nonneg => "nonnegative",
        SignRestriction::Nonpos => "nonpositive",
        SignRestriction::Free => "free in sign",
    }
}

fn rhs_value(c: &ConstraintDecl) -> Option<crate::artifact::Coef> {
    match &c.rhs {
        Rhs::Value(v) => Some(*v),
        Rhs::Param { .. } => None,
    }
}

/// Requirement pairs `(ge, le)` that describe a band on one expression.
fn band_swaps<'a>(m: &'a SymbolicModel, reqs: &[&'a RequirementSpec]) -> Vec<(&'a ConstraintDecl, &'a ConstraintDecl)> {
    let mut out = Vec::new();
    for a in reqs {
        for b in reqs {
            let (Some(Relation::Ge), Some(Relation::Le), Some(lo), Some(hi)) =
                (a.relation, b.relation, a.value, b.value)
            else {
                continue;
            };
            let (Some(ca), Some(cb)) = (m.constraint(&a.target), m.constraint(&b.target)) else { continue };
            if ca.id == cb.id || ca.lhs != cb.lhs || ca.quantified_over != cb.quantified_over || lo == hi {
                continue;
            }
            if ca.relation == Relation::Ge
                && cb.relation == Relation::Le
                && rhs_value(ca) == Some(hi)
                && rhs_value(cb) == Some(lo)
            {
                out.push((ca, cb));
            }
        }
    }
    out
}

pub fn constraint_discrepancies(t: &AuditTuple, schema: &SemanticSchema) -> Vec<Discrepancy> {
    let m = &t.model;
    let mut out = Vec::new();
    let reqs: Vec<&RequirementSpec> = schema.requirements(RequirementKind::Relation).collect();
    let mut handled = BTreeSet::new();
    for (ca, cb) in band_swaps(m, &reqs) {
        handled.insert(ca.id.clone());
        handled.insert(cb.id.clone());
        out.push(d(
            "3.7.2",
            ElementRef::model(ElementKind::Constraint, ca.id.clone()),
            vec![
                format!("{} has lower side {}", ca.id, rhs_value(ca).expect("band rhs")),
                format!("{} has upper side {}", cb.id, rhs_value(cb).expect("band rhs")),
            ],
            format!("band bounds of {} and {} swapped", ca.id, cb.id),
            format!("swap the right-hand sides of {} and {}", ca.id, cb.id),
        ));
    }
    for r in &reqs {
        if handled.contains(&r.target) {
            continue;
        }
        let Some(c) = m.constraint(&r.target) else {
            let mut x = missing(r);
            x.pooled = r.pooled;
            out.push(x);
            continue;
        };
        let el = ElementRef::model(ElementKind::Constraint, c.id.clone());
        if let Some(want) = r.relation {
            let code = match (want, c.relation) {
                (w, h) if w == h => None,
                (Relation::Eq, _) => Some(("3.4.1", "equality relaxed to inequality")),
                (_, Relation::Eq) => Some(("3.8.2", "inequality tightened to equality")),
                _ => Some(("3.7.1", "inequality direction flipped")),
            };
            if let Some((code, issue)) = code {
                out.push(d(
                    code,
                    el.clone(),
                    vec![
                        format!("problem: {} uses {}", c.id, want.symbol()),
                        format!("model: {} uses {}", c.id, c.relation.symbol()),
                    ],
                    format!("{issue} in {}", c.id),
                    format!("use {} in {}", want.symbol(), c.id),
                ));
                continue;
            }
        }
        if r.pooled && !r.over.is_empty() {
            let have: BTreeSet<&str> = c.lhs.iter().map(|x| x.variable.as_str()).collect();
            let lacking: Vec<&str> = r.over.iter().map(String::as_str).filter(|v| !have.contains(v)).collect();
            if !lacking.is_empty() {
                let mut x = d(
                    "3.6.1",
                    el.clone(),
                    vec![format!("pooled total {} omits {}", c.id, lacking.join(", "))],
                    format!("pooled total {} aggregated at the wrong level", c.id),
                    format!("sum {} jointly in {}", r.over.join(", "), c.id),
                );
                x.pooled = true;
                out.push(x);
                continue;
            }
        }
        if let (Some(want), Some(have)) = (r.value, rhs_value(c)) {
            if want != have {
                out.push(d(
                    "3.7.4",
                    el,
                    vec![format!("problem threshold for {} is {want}", c.id), format!("model uses {have}")],
                    format!("threshold of {} wrong", c.id),
                    format!("set the right-hand side of {} to {want}", c.id),
                ));
            }
        }
    }
    for r in schema.requirements(RequirementKind::Coverage) {
        if m.constraint(&r.target).is_none() {
            out.push(missing(r));
        }
    }
    out
}

fn missing(r: &RequirementSpec) -> Discrepancy {
    let el = ElementRef::model(ElementKind::ExpectedMissing, r.target.clone());
    if r.pooled {
        let mut x = d(
            "3.6.1",
            el,
            vec![format!("problem requires a pooled total {} over {}", r.target, r.over.join(", "))],
            format!("pooled total {} missing", r.target),
            format!("add one joint constraint {} over {}", r.target, r.over.join(", ")),
        );
        x.pooled = true;
        x
    } else {
        d(
            "3.2.3",
            el,
            vec![format!("problem requires constraint {}; the model has none", r.target)],
            format!("constraint {} missing", r.target),
            format!("add constraint {}", r.target),
        )
    }
}

/// Symbolic discrepancies of one family; the implementation family has none.
pub fn discrepancies(family: FamilyId, t: &AuditTuple, schema: &SemanticSchema) -> Vec<Discrepancy> {
    match family {
        FamilyId::Objective => objective_discrepancies(t, schema),
        FamilyId::Variable => variable_discrepancies(t, schema),
        FamilyId::Constraint => constraint_discrepancies(t, schema),
        FamilyId::Implementation => Vec::new(),
    }
}
