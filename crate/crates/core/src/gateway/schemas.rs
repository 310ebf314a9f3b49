//! Structured-output schemas sent with remote requests, keyed by schema id.

use serde_json::{json, Value};

pub const FINDINGS: &str = "findings_v1";
pub const CONDUCTOR: &str = "conductor_v1";
pub const REVIEW: &str = "review_v1";
pub const JUDGE: &str = "judge_v1";
pub const VISUALIZATION: &str = "visualization_v1";

fn finding_item() -> Value {
    json!({
        "type": "object",
        "required": ["module", "subcategory", "specific_type", "verdict", "support", "evidence"],
        "properties": {
            "id": {"type": ["string", "integer"]},
            "element": {"type": "string"},
            "module": {"type": "string", "enum": ["objective", "variable", "constraint", "implementation"]},
            "subcategory": {"type": "string"},
            "specific_type": {"type": "string"},
            "verdict": {"type": "string", "enum": ["grounded", "needs_review", "hallucinated"]},
            "support": {"type": "number", "minimum": 0, "maximum": 1},
            "evidence": {"type": "array", "items": {"type": "string"}},
            "canonical_issue": {"type": "string"},
            "is_root_cause": {"type": "boolean"},
            "duplicate_of": {"type": ["string", "integer", "null"]},
            "severity": {"type": "string", "enum": ["low", "medium", "high"]},
            "repair": {"type": "string"}
        }
    })
}

fn dependency_item() -> Value {
    json!({
        "type": "object",
        "required": ["from", "to", "description"],
        "properties": {
            "from": {"type": "string"},
            "to": {"type": "string"},
            "description": {"type": "string"},
            "elements": {"type": "array", "items": {"type": "string"}}
        }
    })
}

/// JSON schema for `id`; unknown ids get a permissive object schema.
pub fn schema(id: &str) -> Value {
    match id {
        FINDINGS => json!({
            "type": "object",
            "required": ["findings"],
            "properties": {
                "findings": {"type": "array", "items": finding_item()},
                "dependencies": {"type": "array", "items": dependency_item()}
            }
        }),
        CONDUCTOR => json!({
            "type": "object",
            "required": ["modules"],
            "properties": {
                "schema": {"type": "object"},
                "modules": {"type": "array", "items": {"type": "string"}},
                "routing_notes": {"type": "string"},
                "assumptions": {"type": "array", "items": {"type": "string"}}
            }
        }),
        REVIEW => json!({
            "type": "object",
            "properties": {
                "dependencies": {"type": "array", "items": dependency_item()},
                "duplicates": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
                "notes": {"type": "array", "items": {"type": "string"}}
            }
        }),
        JUDGE => json!({
            "type": "object",
            "required": ["selected"],
            "properties": {"selected": {"type": "array", "items": {"type": "integer"}}}
        }),
        VISUALIZATION => json!({
            "type": "object",
            "properties": {
                "headline": {"type": "string"},
                "risk_summary": {"type": "string"},
                "repair_order": {"type": "array", "items": {"type": "string"}},
                "analyst_notes": {"type": "array", "items": {"type": "string"}}
            }
        }),
        _ => json!({"type": "object"}),
    }
}
