//! Canonical (problem, model, plan) representation.
//!
//! Case documents are JSON objects; case sets are JSON Lines. Every reference
//! inside a case is checked by [`validate`], so a parsed [`AuditTuple`] never
//! dangles.

mod coef;
mod graph;
mod materialize;
mod render;
mod types;

use std::collections::BTreeSet;

use thiserror::Error;

pub use coef::{Coef, CoefParseError, ExtNum};
pub use graph::{build_dependency_graph, DependencyGraph, Edge, EdgeKind};
pub use materialize::materialize;
pub use render::{render_constraint, render_model_text, render_objective, render_plan_text, render_term};
pub use types::*;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ArtifactError {
    #[error("case schema error: {0}")]
    SchemaError(String),
    #[error("dangling reference in {location}: {name}")]
    ReferenceError { location: String, name: String },
}

/// Parses and validates one case document.
pub fn parse_case(document: &str) -> Result<AuditTuple, ArtifactError> {
    let tuple: AuditTuple = serde_json::from_str(document).map_err(|e| ArtifactError::SchemaError(e.to_string()))?;
    validate(&tuple)?;
    Ok(tuple)
}

/// Parses a case from an already-decoded JSON value.
pub fn parse_case_value(value: serde_json::Value) -> Result<AuditTuple, ArtifactError> {
    let tuple: AuditTuple = serde_json::from_value(value).map_err(|e| ArtifactError::SchemaError(e.to_string()))?;
    validate(&tuple)?;
    Ok(tuple)
}

/// Canonical single-line serialization; map keys are sorted.
pub fn serialize_case(tuple: &AuditTuple) -> String {
    let value = serde_json::to_value(tuple).expect("audit tuples always serialize");
    serde_json::to_string(&value).expect("json values always serialize")
}

/// Parses a JSON Lines case set, skipping blank lines. Errors carry the 1-based line.
pub fn parse_case_set(text: &str) -> Result<Vec<AuditTuple>, ArtifactError> {
    let mut out = Vec::new();
    let mut ids = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let t = parse_case(line).map_err(|e| match e {
            ArtifactError::SchemaError(m) => ArtifactError::SchemaError(format!("line {}: {m}", i + 1)),
            ArtifactError::ReferenceError { location, name } => {
                ArtifactError::ReferenceError { location: format!("line {}: {location}", i + 1), name }
            }
        })?;
        if !ids.insert(t.case_id.clone()) {
            return Err(ArtifactError::SchemaError(format!("line {}: duplicate case_id {}", i + 1, t.case_id)));
        }
        out.push(t);
    }
    Ok(out)
}

fn schema_err(msg: impl Into<String>) -> ArtifactError {
    ArtifactError::SchemaError(msg.into())
}

fn dangling(location: impl Into<String>, name: impl Into<String>) -> ArtifactError {
    ArtifactError::ReferenceError { location: location.into(), name: name.into() }
}

/// Checks every type invariant and cross-reference of a tuple.
pub fn validate(t: &AuditTuple) -> Result<(), ArtifactError> {
    if t.case_id.trim().is_empty() {
        return Err(schema_err("case_id must be nonempty"));
    }
    let m = &t.model;

    let mut set_names = BTreeSet::new();
    for s in &m.aux.sets {
        if !set_names.insert(s.name.as_str()) {
            return Err(schema_err(format!("duplicate set {}", s.name)));
        }
        let members: BTreeSet<&String> = s.members.iter().collect();
        if members.len() != s.members.len() {
            return Err(schema_err(format!("set {} has duplicate members", s.name)));
        }
    }
    let mut param_names = BTreeSet::new();
    for p in &m.aux.parameters {
        if !param_names.insert(p.name.as_str()) {
            return Err(schema_err(format!("duplicate parameter {}", p.name)));
        }
        for s in &p.index_sets {
            if m.set(s).is_none() {
                return Err(dangling(format!("parameter {}", p.name), s));
            }
        }
    }

    let mut var_names = BTreeSet::new();
    for v in &m.variables {
        if v.name.trim().is_empty() || v.name == "objective" {
            return Err(schema_err(format!("invalid variable name {:?}", v.name)));
        }
        if !var_names.insert(v.name.as_str()) {
            return Err(schema_err(format!("duplicate variable {}", v.name)));
        }
        for s in &v.index_sets {
            if m.set(s).is_none() {
                return Err(dangling(format!("variable {}", v.name), s));
            }
        }
        if v.lower > v.upper {
            return Err(schema_err(format!("variable {} has lower > upper", v.name)));
        }
        if v.domain == Domain::Binary && (v.lower > ExtNum::int(1) || v.upper < ExtNum::int(0)) {
            return Err(schema_err(format!("binary variable {} has bounds outside [0,1]", v.name)));
        }
        let (lo, hi) = v.effective_bounds();
        if lo > hi {
            return Err(schema_err(format!("variable {} has an empty effective range", v.name)));
        }
    }

    let mut con_ids = BTreeSet::new();
    for c in &m.constraints {
        if c.id.trim().is_empty() || c.id == "objective" {
            return Err(schema_err(format!("invalid constraint id {:?}", c.id)));
        }
        if var_names.contains(c.id.as_str()) {
            return Err(schema_err(format!("constraint id {} collides with a variable", c.id)));
        }
        if !con_ids.insert(c.id.as_str()) {
            return Err(schema_err(format!("duplicate constraint id {}", c.id)));
        }
        if c.lhs.is_empty() {
            return Err(schema_err(format!("constraint {} has an empty left-hand side", c.id)));
        }
        for s in &c.quantified_over {
            if m.set(s).is_none() {
                return Err(dangling(format!("constraint {}", c.id), s));
            }
        }
        for term in &c.lhs {
            check_term(m, term, &format!("constraint {}", c.id))?;
        }
        if let Rhs::Param { param } = &c.rhs {
            if m.param(param).is_none() {
                return Err(dangling(format!("constraint {} rhs", c.id), param));
            }
        }
    }
    for term in &m.objective.terms {
        check_term(m, term, "objective")?;
    }

    check_plan(t)?;
    if let Some(schema) = &t.problem.schema {
        check_schema(schema)?;
    }
    Ok(())
}

fn check_term(m: &SymbolicModel, term: &Term, loc: &str) -> Result<(), ArtifactError> {
    let var = m.variable(&term.variable).ok_or_else(|| dangling(loc, &term.variable))?;
    if let Some(p) = &term.param {
        if m.param(p).is_none() {
            return Err(dangling(loc, p));
        }
    }
    if term.index.len() != var.index_sets.len() {
        return Err(schema_err(format!(
            "{loc}: variable {} expects {} indices, got {}",
            var.name,
            var.index_sets.len(),
            term.index.len()
        )));
    }
    for (b, expected) in term.index.iter().zip(&var.index_sets) {
        let set = m.set(&b.set).ok_or_else(|| dangling(loc, &b.set))?;
        if &b.set != expected {
            return Err(schema_err(format!(
                "{loc}: variable {} indexed by {} where {} is declared",
                var.name, b.set, expected
            )));
        }
        if let Some(members) = &b.members {
            for mem in members {
                if !set.members.contains(mem) {
                    return Err(dangling(format!("{loc} binding on {}", b.set), mem));
                }
            }
        }
    }
    Ok(())
}

fn check_plan(t: &AuditTuple) -> Result<(), ArtifactError> {
    let p = &t.plan;
    let mut seen = BTreeSet::new();
    for r in &p.registered_variables {
        if !seen.insert(r.name.as_str()) {
            return Err(schema_err(format!("plan registers {} twice", r.name)));
        }
        if r.api_lower > r.api_upper {
            return Err(schema_err(format!("plan registration {} has lower > upper", r.name)));
        }
    }
    let mut seen = BTreeSet::new();
    for c in &p.materialized_constraints {
        if !seen.insert(c.id.as_str()) {
            return Err(schema_err(format!("plan materializes {} twice", c.id)));
        }
    }
    if p.solver_backend.trim().is_empty() {
        return Err(schema_err("plan.solver_backend must be nonempty"));
    }
    Ok(())
}

fn check_schema(s: &SemanticSchema) -> Result<(), ArtifactError> {
    let known: BTreeSet<&str> = s
        .entities
        .iter()
        .map(String::as_str)
        .chain(s.index_sets.iter().map(|x| x.name.as_str()))
        .chain(s.quantities.iter().map(|q| q.name.as_str()))
        .collect();
    for (i, r) in s.hard_requirements.iter().enumerate() {
        let loc = format!("schema requirement {i}");
        match r.kind {
            RequirementKind::ObjectiveSense => {
                if r.sense.is_none() {
                    return Err(schema_err(format!("{loc}: objective_sense needs sense")));
                }
            }
            RequirementKind::Domain => {
                if r.domain.is_none() && r.sign.is_none() {
                    return Err(schema_err(format!("{loc}: domain needs domain or sign")));
                }
            }
            RequirementKind::Bound => {
                if r.relation.is_none() || r.value.is_none() {
                    return Err(schema_err(format!("{loc}: bound needs relation and value")));
                }
            }
            RequirementKind::Relation => {
                if r.relation.is_none() {
                    return Err(schema_err(format!("{loc}: relation needs relation")));
                }
            }
            RequirementKind::ObjectiveTerm | RequirementKind::Coverage => {}
        }
        if r.kind != RequirementKind::ObjectiveSense && !known.contains(r.target.as_str()) {
            return Err(dangling(loc.clone(), &r.target));
        }
        for o in &r.over {
            if !known.contains(o.as_str()) {
                return Err(dangling(loc.clone(), o));
            }
        }
    }
    for u in &s.units {
        if !known.contains(u.target.as_str()) {
            return Err(dangling("schema units", &u.target));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MINIMAL: &str = r#"{
        "case_id": "mini",
        "problem": {"text": "Minimize x subject to x >= 1."},
        "model": {
            "objective": {"sense": "minimize", "terms": [{"coefficient": 1, "variable": "x"}]},
            "variables": [{"name": "x", "domain": "continuous", "sign": "nonneg"}],
            "constraints": [{"id": "c1", "lhs": [{"coefficient": 1, "variable": "x"}], "relation": ">=", "rhs": 1}]
        },
        "plan": {
            "registered_variables": [{"name": "x", "api_domain": "continuous", "api_lower": 0}],
            "materialized_constraints": [{"id": "c1", "coverage": "full"}],
            "objective": {"api_sense": "minimize", "coefficient_source": "direct"},
            "solver_backend": "highs",
            "readout": {"reported_variables": ["x"], "objective_readout": "solved_value"}
        }
    }"#;

    #[test]
    fn minimal_case_parses() {
        let t = parse_case(MINIMAL).unwrap();
        assert_eq!(t.case_id, "mini");
        let again = parse_case(&serialize_case(&t)).unwrap();
        assert_eq!(t, again);
    }

    #[test]
    fn dangling_variable() {
        let doc = MINIMAL.replace(r#""relation": ">=", "rhs": 1"#, r#""relation": ">=", "rhs": 1}, {"id": "c2", "lhs": [{"coefficient": 1, "variable": "z"}], "relation": "<=", "rhs": 3"#);
        match parse_case(&doc) {
            Err(ArtifactError::ReferenceError { name, .. }) => assert_eq!(name, "z"),
            other => panic!("expected ReferenceError, got {other:?}"),
        }
    }

    #[test]
    fn malformed_is_schema_error() {
        assert!(matches!(parse_case("{\"case_id\": 3}"), Err(ArtifactError::SchemaError(_))));
    }

    #[test]
    fn element_ref_string_form() {
        let r: ElementRef = "model/constraint/c1".parse().unwrap();
        assert_eq!(r, ElementRef::model(ElementKind::Constraint, "c1"));
        assert_eq!(serde_json::to_string(&r).unwrap(), "\"model/constraint/c1\"");
    }
}
