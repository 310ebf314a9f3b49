//! Lenient per-record parsing of structured findings.
//!
//! A bad record is dropped with a diagnostic; only a response that is not a
//! JSON object or array at all is a [`GatewayError::ParseError`].

use std::collections::BTreeMap;

use serde_json::Value;

use super::GatewayError;
use crate::artifact::{ArtifactKind, ElementKind, ElementRef};
use crate::finding::{CandidateFinding, DependencyNote, Severity, Verdict};
use crate::taxonomy::{normalize_key, FamilyId, LabelPath, TaxonomyRegistry};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParsedFindings {
    /// Ids are 1-based positions among accepted records.
    pub findings: Vec<CandidateFinding>,
    pub dependencies: Vec<DependencyNote>,
    pub diagnostics: Vec<String>,
}

const VAGUE: [&str; 6] = ["other", "misc", "miscellaneous", "generic mismatch", "modeling bug", "unknown"];

/// Removes a surrounding Markdown code fence, if any.
pub fn strip_fences(text: &str) -> &str {
    let t = text.trim();
    let Some(rest) = t.strip_prefix("```") else { return t };
    let body = rest.split_once('\n').map(|(_, b)| b).unwrap_or("");
    body.trim_end().strip_suffix("```").unwrap_or(body).trim()
}

fn str_field<'a>(rec: &'a Value, keys: &[&str]) -> Option<&'a str> {
    keys.iter().find_map(|k| rec.get(*k).and_then(Value::as_str))
}

fn id_key(v: &Value) -> Option<String> {
    match v {
        Value::String(s) if !s.trim().is_empty() => Some(s.trim().to_string()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn is_vague(s: &str) -> bool {
    let k = normalize_key(s);
    VAGUE.contains(&k.as_str()) || FamilyId::parse(&k).is_some()
}

fn default_element(family: FamilyId, hint: &str) -> ElementRef {
    let (artifact, kind) = match family {
        FamilyId::Objective => (ArtifactKind::Model, ElementKind::Objective),
        FamilyId::Variable => (ArtifactKind::Model, ElementKind::Variable),
        FamilyId::Constraint => (ArtifactKind::Model, ElementKind::Constraint),
        FamilyId::Implementation => (ArtifactKind::Plan, ElementKind::CodeObject),
    };
    let local = if hint.trim().is_empty() { "unspecified".to_string() } else { hint.trim().to_string() };
    ElementRef::new(artifact, kind, local)
}

fn resolve(rec: &Value, reg: &TaxonomyRegistry) -> Result<LabelPath, String> {
    let module = str_field(rec, &["module", "family"]);
    let sub = str_field(rec, &["subcategory"]);
    let spec = str_field(rec, &["specific_type", "specific"]);
    if let (Some(m), Some(s), Some(t)) = (module, sub, spec) {
        if is_vague(t) || is_vague(s) {
            return Err(format!("vague label {m}/{s}/{t}"));
        }
        return reg.resolve_label(m, s, t).map_err(|e| e.to_string());
    }
    if let Some(code) = str_field(rec, &["code", "numeric_code"]) {
        return reg.label(code).map_err(|e| e.to_string());
    }
    match (module, spec) {
        (Some(m), Some(t)) if is_vague(t) => Err(format!("vague label {m}/{t}")),
        _ => Err("label needs module, subcategory and specific_type".to_string()),
    }
}

fn parse_record(
    rec: &Value,
    reg: &TaxonomyRegistry,
    family_filter: Option<FamilyId>,
) -> Result<(CandidateFinding, Option<String>), String> {
    if !rec.is_object() {
        return Err("record is not an object".into());
    }
    let label = resolve(rec, reg)?;
    if let Some(f) = family_filter {
        if label.family != f {
            return Err(format!("{} is outside the {f} family", label.numeric_code));
        }
    }
    let verdict = str_field(rec, &["verdict"]).ok_or("missing verdict")?.to_string();
    let verdict = Verdict::parse(&verdict).ok_or(format!("unknown verdict {verdict:?}"))?;
    let support = rec
        .get("support")
        .or_else(|| rec.get("confidence"))
        .and_then(Value::as_f64)
        .ok_or("missing numeric support")?;
    if !(0.0..=1.0).contains(&support) {
        return Err(format!("support {support} outside [0,1]"));
    }
    let evidence: Vec<String> = match rec.get("evidence") {
        Some(Value::Array(xs)) => xs.iter().filter_map(Value::as_str).map(str::to_string).collect(),
        Some(Value::String(s)) if !s.trim().is_empty() => vec![s.clone()],
        _ => Vec::new(),
    };
    if verdict == Verdict::Hallucinated && evidence.iter().all(|e| e.trim().is_empty()) {
        return Err("hallucinated verdict without evidence".into());
    }
    let element_hint = str_field(rec, &["element"]).unwrap_or("");
    let element = element_hint.parse::<ElementRef>().unwrap_or_else(|_| default_element(label.family, element_hint));
    let canonical_issue = str_field(rec, &["canonical_issue"])
        .map(str::to_string)
        .unwrap_or_else(|| reg.type_name(&label).to_lowercase());
    let severity = str_field(rec, &["severity"]).and_then(Severity::parse).unwrap_or_default();
    let dup = rec.get("duplicate_of").and_then(id_key);
    let finding = CandidateFinding {
        id: 0,
        element,
        label,
        verdict,
        support,
        evidence,
        canonical_issue,
        is_root_cause: rec.get("is_root_cause").and_then(Value::as_bool).unwrap_or(true),
        duplicate_of: None,
        severity,
        repair: str_field(rec, &["repair", "fix"]).unwrap_or("").to_string(),
        source: String::new(),
    };
    Ok((finding, dup))
}

fn parse_dependency(v: &Value) -> Result<DependencyNote, String> {
    let from = str_field(v, &["from", "from_family"]).and_then(FamilyId::parse).ok_or("bad from family")?;
    let to = str_field(v, &["to", "to_family"]).and_then(FamilyId::parse).ok_or("bad to family")?;
    if from == to {
        return Err("dependency from a family to itself".into());
    }
    let elements = match v.get("elements") {
        Some(Value::Array(xs)) => xs.iter().filter_map(Value::as_str).filter_map(|s| s.parse().ok()).collect(),
        _ => Vec::new(),
    };
    Ok(DependencyNote {
        from_family: from,
        to_family: to,
        description: str_field(v, &["description"]).unwrap_or("").to_string(),
        elements,
    })
}

/// Parses a findings response. Every emitted label exists in `reg`.
pub fn parse_findings(
    response: &str,
    family_filter: Option<FamilyId>,
    reg: &TaxonomyRegistry,
) -> Result<ParsedFindings, GatewayError> {
    let body = strip_fences(response);
    let root: Value = serde_json::from_str(body).map_err(|e| GatewayError::ParseError(e.to_string()))?;
    let (records, deps) = match &root {
        Value::Array(xs) => (xs.clone(), Vec::new()),
        Value::Object(map) => {
            let recs = match map.get("findings") {
                Some(Value::Array(xs)) => xs.clone(),
                None | Some(Value::Null) => Vec::new(),
                Some(_) => return Err(GatewayError::ParseError("findings is not an array".into())),
            };
            let deps = match map.get("dependencies") {
                Some(Value::Array(xs)) => xs.clone(),
                _ => Vec::new(),
            };
            (recs, deps)
        }
        _ => return Err(GatewayError::ParseError("expected a JSON object or array".into())),
    };

    let mut out = ParsedFindings::default();
    let mut local_ids: BTreeMap<String, u32> = BTreeMap::new();
    let mut pending_dups: Vec<(usize, String)> = Vec::new();
    for (i, rec) in records.iter().enumerate() {
        match parse_record(rec, reg, family_filter) {
            Ok((mut f, dup)) => {
                f.id = out.findings.len() as u32 + 1;
                let key = rec.get("id").and_then(id_key).unwrap_or_else(|| (i + 1).to_string());
                local_ids.entry(key).or_insert(f.id);
                if let Some(d) = dup {
                    pending_dups.push((out.findings.len(), d));
                }
                out.findings.push(f);
            }
            Err(msg) => out.diagnostics.push(format!("record {}: rejected: {msg}", i + 1)),
        }
    }
    for (idx, key) in pending_dups {
        match local_ids.get(&key) {
            Some(&target) if target != out.findings[idx].id => out.findings[idx].duplicate_of = Some(target),
            _ => out.diagnostics.push(format!("record {}: duplicate_of {key:?} ignored", idx + 1)),
        }
    }
    for (i, d) in deps.iter().enumerate() {
        match parse_dependency(d) {
            Ok(n) => out.dependencies.push(n),
            Err(msg) => out.diagnostics.push(format!("dependency {}: rejected: {msg}", i + 1)),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reg() -> &'static TaxonomyRegistry {
        TaxonomyRegistry::bundled()
    }

    const GOOD: &str = r#"{"module":"objective","subcategory":"Objective Semantic Mapping Errors","specific_type":"Wrong Optimization Direction","verdict":"hallucinated","support":0.9,"evidence":["maximize cost"]}"#;

    #[test]
    fn well_formed_record() {
        let p = parse_findings(&format!("{{\"findings\":[{GOOD}]}}"), None, reg()).unwrap();
        assert_eq!(p.findings.len(), 1);
        assert_eq!(p.findings[0].label.numeric_code, "1.1.1");
        assert!(p.diagnostics.is_empty());
    }

    #[test]
    fn out_of_range_support_rejected_individually() {
        let bad = GOOD.replace("0.9", "1.7");
        let p = parse_findings(&format!("{{\"findings\":[{bad},{GOOD}]}}"), None, reg()).unwrap();
        assert_eq!(p.findings.len(), 1);
        assert_eq!(p.diagnostics.len(), 1);
        assert!(p.diagnostics[0].contains("outside"));
    }

    #[test]
    fn vague_label_rejected() {
        let rec = r#"{"module":"objective","subcategory":"objective","specific_type":"other","verdict":"hallucinated","support":0.5,"evidence":["x"]}"#;
        let p = parse_findings(&format!("[{rec}]"), None, reg()).unwrap();
        assert!(p.findings.is_empty());
        assert!(p.diagnostics[0].contains("vague"));
    }

    #[test]
    fn family_filter_and_fences() {
        let text = format!("```json\n{{\"findings\":[{GOOD}]}}\n```");
        let p = parse_findings(&text, Some(FamilyId::Variable), reg()).unwrap();
        assert!(p.findings.is_empty());
        assert_eq!(p.diagnostics.len(), 1);
    }

    #[test]
    fn unstructured_is_parse_error() {
        assert!(matches!(parse_findings("no json here", None, reg()), Err(GatewayError::ParseError(_))));
    }

    #[test]
    fn duplicate_of_maps_local_ids() {
        let a = GOOD.replacen('{', "{\"id\":\"a\",", 1);
        let b = GOOD.replacen('{', "{\"id\":\"b\",\"duplicate_of\":\"a\",", 1);
        let p = parse_findings(&format!("[{a},{b}]"), None, reg()).unwrap();
        assert_eq!(p.findings[1].duplicate_of, Some(1));
    }
}
