//! JSON-pointer patches between two serialized cases.

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// One changed location. `None` means the key is absent on that side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Patch {
    pub path: String,
    pub before: Option<Value>,
    pub after: Option<Value>,
}

fn escape(key: &str) -> String {
    key.replace('~', "~0").replace('/', "~1")
}

fn unescape(seg: &str) -> String {
    seg.replace("~1", "/").replace("~0", "~")
}

/// Minimal differences from `a` to `b`. Arrays of different lengths are
/// reported whole, so an insertion or deletion is one patch.
pub fn diff_values(path: &str, a: Option<&Value>, b: Option<&Value>) -> Vec<Patch> {
    let whole = || vec![Patch { path: path.to_string(), before: a.cloned(), after: b.cloned() }];
    match (a, b) {
        (Some(Value::Object(x)), Some(Value::Object(y))) => {
            let mut keys: Vec<&String> = x.keys().chain(y.keys()).collect();
            keys.sort();
            keys.dedup();
            keys.into_iter().flat_map(|k| diff_values(&format!("{path}/{}", escape(k)), x.get(k), y.get(k))).collect()
        }
        (Some(Value::Array(x)), Some(Value::Array(y))) if x.len() == y.len() => x
            .iter()
            .zip(y)
            .enumerate()
            .flat_map(|(i, (p, q))| diff_values(&format!("{path}/{i}"), Some(p), Some(q)))
            .collect(),
        _ if a == b => Vec::new(),
        _ => whole(),
    }
}

/// Sets (or with `None`, removes) the value at a JSON pointer. The parent
/// must exist.
pub fn set_pointer(root: &mut Value, path: &str, value: Option<Value>) -> Result<(), String> {
    if path.is_empty() {
        *root = value.ok_or("cannot remove the root")?;
        return Ok(());
    }
    let (parent, last) = path.rsplit_once('/').ok_or("pointer must start with '/'")?;
    let key = unescape(last);
    let target = root.pointer_mut(parent).ok_or_else(|| format!("missing parent {parent}"))?;
    match target {
        Value::Object(map) => {
            match value {
                Some(v) => map.insert(key, v),
                None => map.remove(&key),
            };
            Ok(())
        }
        Value::Array(items) => {
            let i: usize = key.parse().map_err(|_| format!("bad array index {key}"))?;
            let slot = items.get_mut(i).ok_or_else(|| format!("index {i} out of range"))?;
            *slot = value.ok_or("cannot remove an array element in place")?;
            Ok(())
        }
        _ => Err(format!("{parent} is not a container")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn diff_then_restore() {
        let a = json!({"x": [1, 2, 3], "y": {"a/b": 1, "k": "v"}});
        let b = json!({"x": [1, 2], "y": {"a/b": 2}});
        let patches = diff_values("", Some(&a), Some(&b));
        assert_eq!(patches.len(), 3);
        let mut v = b.clone();
        for p in &patches {
            set_pointer(&mut v, &p.path, p.before.clone()).unwrap();
        }
        assert_eq!(v, a);
    }
}
