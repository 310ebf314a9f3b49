use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::ChatRequest;

/// Compact JSON with object keys sorted at every depth.
pub fn canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_canonical(v, &mut out);
    out
}

fn write_canonical(v: &Value, out: &mut String) {
    match v {
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_canonical(&map[k], out);
            }
            out.push('}');
        }
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(item, out);
            }
            out.push(']');
        }
        other => out.push_str(&other.to_string()),
    }
}

/// SHA-256 hex digest of the canonical `{messages, schema_id}` document.
pub fn fingerprint(request: &ChatRequest) -> String {
    let doc = json!({
        "messages": request.messages,
        "schema_id": request.response_schema_id,
    });
    let digest = Sha256::digest(canonical_json(&doc).as_bytes());
    hex::encode(digest)
}

#[cfg(test)]
mod tests {
    use super::super::{ChatRequest, Message};
    use super::*;

    #[test]
    fn depends_only_on_messages_and_schema() {
        let a = ChatRequest::new(vec![Message::system("s"), Message::user("u")], "findings_v1", "conductor");
        let mut b = a.clone();
        b.route_tag = "other".into();
        b.max_output_tokens = 7;
        assert_eq!(fingerprint(&a), fingerprint(&b));
        b.messages[1].content.push(' ');
        assert_ne!(fingerprint(&a), fingerprint(&b));
        assert_eq!(fingerprint(&a).len(), 64);
    }

    #[test]
    fn key_order_is_irrelevant() {
        let x: Value = serde_json::from_str(r#"{"b":1,"a":{"d":2,"c":[3,{"f":4,"e":5}]}}"#).unwrap();
        assert_eq!(canonical_json(&x), r#"{"a":{"c":[3,{"e":5,"f":4}],"d":2},"b":1}"#);
    }
}
