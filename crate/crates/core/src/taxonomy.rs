//! Four-family hallucination taxonomy: registry loading, label resolution,
//! and hit-level comparison.
//!
//! The registry ships as `assets/taxonomy.json` and is validated on load
//! against the fixed family/subcategory/type counts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const BUNDLED: &str = include_str!("../assets/taxonomy.json");

/// Expected specific-type counts per family, in [`FamilyId::ALL`] order.
pub const TYPE_COUNTS: [usize; 4] = [18, 18, 31, 16];
/// Expected subcategory counts per family, in [`FamilyId::ALL`] order.
pub const SUBCATEGORY_COUNTS: [usize; 4] = [5, 5, 9, 5];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TaxonomyError {
    #[error("taxonomy schema error: {0}")]
    SchemaError(String),
    #[error("family {family}: expected {expected} {what}, found {found}")]
    CountMismatch { family: FamilyId, what: &'static str, expected: usize, found: usize },
    #[error("unknown label {0}")]
    UnknownLabel(String),
    #[error("ambiguous label {0}")]
    AmbiguousLabel(String),
}

/// The four disjoint families. Declaration order is the tie-break order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyId {
    Objective,
    Variable,
    Constraint,
    Implementation,
}

impl FamilyId {
    pub const ALL: [FamilyId; 4] =
        [FamilyId::Objective, FamilyId::Variable, FamilyId::Constraint, FamilyId::Implementation];

    pub fn as_str(self) -> &'static str {
        match self {
            FamilyId::Objective => "objective",
            FamilyId::Variable => "variable",
            FamilyId::Constraint => "constraint",
            FamilyId::Implementation => "implementation",
        }
    }

    /// Zero-based position in [`FamilyId::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    /// Leading digit of the family's numeric codes.
    pub fn code_digit(self) -> u32 {
        self as u32 + 1
    }

    pub fn parse(s: &str) -> Option<FamilyId> {
        match normalize_key(s).as_str() {
            "objective" => Some(FamilyId::Objective),
            "variable" => Some(FamilyId::Variable),
            "constraint" => Some(FamilyId::Constraint),
            "implementation" => Some(FamilyId::Implementation),
            _ => None,
        }
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Coordinates of one specific type.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabelPath {
    pub family: FamilyId,
    pub subcategory: String,
    pub specific: String,
    pub numeric_code: String,
}

impl LabelPath {
    /// Numeric sort key of the dotted code; unparsable parts sort last.
    pub fn code_key(&self) -> [u32; 3] {
        code_key(&self.numeric_code)
    }
}

impl fmt::Display for LabelPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}/{}/{}", self.numeric_code, self.family, self.subcategory, self.specific)
    }
}

pub fn code_key(code: &str) -> [u32; 3] {
    let mut out = [u32::MAX; 3];
    for (slot, part) in out.iter_mut().zip(code.split('.')) {
        *slot = part.parse().unwrap_or(u32::MAX);
    }
    out
}

/// Depth at which a predicted label agrees with a gold label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HitLevel {
    None,
    Family,
    Subcategory,
    Specific,
}

pub fn hit_level(predicted: &LabelPath, gold: &LabelPath) -> HitLevel {
    if predicted.family != gold.family {
        HitLevel::None
    } else if predicted.subcategory != gold.subcategory {
        HitLevel::Family
    } else if predicted.specific != gold.specific {
        HitLevel::Subcategory
    } else {
        HitLevel::Specific
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeNode {
    pub id: String,
    pub name: String,
    pub code: String,
    pub definition: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubcategoryNode {
    pub id: String,
    pub name: String,
    pub types: Vec<TypeNode>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyNode {
    pub id: FamilyId,
    pub name: String,
    pub subcategories: Vec<SubcategoryNode>,
}

#[derive(Deserialize)]
struct RegistryDoc {
    families: Vec<FamilyNode>,
}

/// Immutable family → subcategory → type tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaxonomyRegistry {
    families: Vec<FamilyNode>,
    by_code: BTreeMap<String, LabelPath>,
}

impl TaxonomyRegistry {
    /// Shared instance of the bundled registry.
    pub fn bundled() -> &'static TaxonomyRegistry {
        static REG: OnceLock<TaxonomyRegistry> = OnceLock::new();
        REG.get_or_init(|| load_registry(BUNDLED).expect("bundled taxonomy must satisfy its own invariants"))
    }

    pub fn bundled_source() -> &'static str {
        BUNDLED
    }

    pub fn from_path(path: &Path) -> Result<TaxonomyRegistry, TaxonomyError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| TaxonomyError::SchemaError(format!("{}: {e}", path.display())))?;
        load_registry(&text)
    }

    pub fn families(&self) -> &[FamilyNode] {
        &self.families
    }

    pub fn family(&self, id: FamilyId) -> &FamilyNode {
        &self.families[id.index()]
    }

    /// All labels in code order.
    pub fn labels(&self) -> impl Iterator<Item = &LabelPath> {
        let mut v: Vec<&LabelPath> = self.by_code.values().collect();
        v.sort_by_key(|l| l.code_key());
        v.into_iter()
    }

    pub fn len(&self) -> usize {
        self.by_code.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_code.is_empty()
    }

    pub fn by_code(&self, code: &str) -> Option<&LabelPath> {
        self.by_code.get(code.trim())
    }

    pub fn label(&self, code: &str) -> Result<LabelPath, TaxonomyError> {
        self.by_code(code).cloned().ok_or_else(|| TaxonomyError::UnknownLabel(code.to_string()))
    }

    /// Registry node for a label: (subcategory, type).
    pub fn node(&self, label: &LabelPath) -> Option<(&SubcategoryNode, &TypeNode)> {
        let fam = self.family(label.family);
        let sub = fam.subcategories.iter().find(|s| s.id == label.subcategory)?;
        let ty = sub.types.iter().find(|t| t.id == label.specific)?;
        Some((sub, ty))
    }

    pub fn type_name<'a>(&'a self, label: &'a LabelPath) -> &'a str {
        self.node(label).map(|(_, t)| t.name.as_str()).unwrap_or(&label.specific)
    }

    pub fn subcategory_name<'a>(&'a self, label: &'a LabelPath) -> &'a str {
        self.node(label).map(|(s, _)| s.name.as_str()).unwrap_or(&label.subcategory)
    }

    /// Resolves names or ids, case-insensitively with whitespace collapsed.
    pub fn resolve_label(&self, family: &str, subcategory: &str, specific: &str) -> Result<LabelPath, TaxonomyError> {
        let unknown = || TaxonomyError::UnknownLabel(format!("{family} / {subcategory} / {specific}"));
        let fkey = normalize_key(family);
        let fam = self
            .families
            .iter()
            .find(|f| f.id.as_str() == fkey || normalize_key(&f.name) == fkey)
            .ok_or_else(unknown)?;
        let skey = normalize_key(subcategory);
        let sub =
            fam.subcategories.iter().find(|s| s.id == skey || normalize_key(&s.name) == skey).ok_or_else(unknown)?;
        let tkey = normalize_key(specific);
        let ty = sub.types.iter().find(|t| t.id == tkey || normalize_key(&t.name) == tkey).ok_or_else(unknown)?;
        Ok(self.by_code[&ty.code].clone())
    }

    /// One line per type, grouped by subcategory, for a single family.
    pub fn taxonomy_block(&self, family: FamilyId) -> String {
        let fam = self.family(family);
        let mut out = format!("{} ({})\n", fam.name, fam.id);
        for sub in &fam.subcategories {
            out.push_str(&format!("- {}\n", sub.name));
            for t in &sub.types {
                out.push_str(&format!("  - {} [{}]: {}\n", t.name, t.code, t.definition));
            }
        }
        out
    }

    /// Names-only tree of all four families.
    pub fn taxonomy_tree(&self) -> String {
        let mut out = String::new();
        for fam in &self.families {
            let mut title = fam.id.as_str().to_string();
            title[..1].make_ascii_uppercase();
            out.push_str(&format!("{title}:\n"));
            for sub in &fam.subcategories {
                out.push_str(&format!("- {}\n", sub.name));
                for t in &sub.types {
                    out.push_str(&format!("  - {}\n", t.name));
                }
            }
            out.push('\n');
        }
        out.trim_end().to_string()
    }
}

/// Lowercase, whitespace collapsed, surrounding whitespace trimmed.
pub fn normalize_key(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Lowercase hyphenated id derived from a display name.
pub fn slugify(name: &str) -> String {
    let mut out = String::new();
    let mut pending = false;
    for c in name.chars() {
        if c.is_ascii_alphanumeric() {
            if pending && !out.is_empty() {
                out.push('-');
            }
            pending = false;
            out.push(c.to_ascii_lowercase());
        } else {
            pending = true;
        }
    }
    out
}

pub fn load_registry(source: &str) -> Result<TaxonomyRegistry, TaxonomyError> {
    let doc: RegistryDoc = serde_json::from_str(source).map_err(|e| TaxonomyError::SchemaError(e.to_string()))?;

    let present: Vec<FamilyId> = doc.families.iter().map(|f| f.id).collect();
    if present != FamilyId::ALL {
        return Err(TaxonomyError::SchemaError(format!(
            "families must be exactly objective, variable, constraint, implementation in order; got {present:?}"
        )));
    }

    let mut by_code = BTreeMap::new();
    let mut sub_ids = BTreeSet::new();
    let mut type_ids = BTreeSet::new();
    for fam in &doc.families {
        let idx = fam.id.index();
        let type_total: usize = fam.subcategories.iter().map(|s| s.types.len()).sum();
        if fam.subcategories.len() != SUBCATEGORY_COUNTS[idx] {
            return Err(TaxonomyError::CountMismatch {
                family: fam.id,
                what: "subcategories",
                expected: SUBCATEGORY_COUNTS[idx],
                found: fam.subcategories.len(),
            });
        }
        if type_total != TYPE_COUNTS[idx] {
            return Err(TaxonomyError::CountMismatch {
                family: fam.id,
                what: "specific types",
                expected: TYPE_COUNTS[idx],
                found: type_total,
            });
        }
        for sub in &fam.subcategories {
            check_id(&sub.id)?;
            if !sub_ids.insert(sub.id.clone()) {
                return Err(TaxonomyError::SchemaError(format!("duplicate subcategory id {}", sub.id)));
            }
            for t in &sub.types {
                check_id(&t.id)?;
                if !type_ids.insert(t.id.clone()) {
                    return Err(TaxonomyError::SchemaError(format!("duplicate type id {}", t.id)));
                }
                let key = code_key(&t.code);
                if key.contains(&u32::MAX) || t.code.split('.').count() != 3 {
                    return Err(TaxonomyError::SchemaError(format!("malformed code {:?}", t.code)));
                }
                if key[0] != fam.id.code_digit() {
                    return Err(TaxonomyError::SchemaError(format!(
                        "code {} does not belong to family {}",
                        t.code, fam.id
                    )));
                }
                if t.name.trim().is_empty() || t.definition.trim().is_empty() {
                    return Err(TaxonomyError::SchemaError(format!("type {} lacks name or definition", t.code)));
                }
                let label = LabelPath {
                    family: fam.id,
                    subcategory: sub.id.clone(),
                    specific: t.id.clone(),
                    numeric_code: t.code.clone(),
                };
                if by_code.insert(t.code.clone(), label).is_some() {
                    return Err(TaxonomyError::SchemaError(format!("duplicate code {}", t.code)));
                }
            }
        }
    }

    Ok(TaxonomyRegistry { families: doc.families, by_code })
}

fn check_id(id: &str) -> Result<(), TaxonomyError> {
    if id.is_empty() || slugify(id) != id {
        return Err(TaxonomyError::SchemaError(format!("id {id:?} is not a slug")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_counts() {
        let reg = TaxonomyRegistry::bundled();
        assert_eq!(reg.len(), 83);
        for (i, fam) in reg.families().iter().enumerate() {
            assert_eq!(fam.subcategories.len(), SUBCATEGORY_COUNTS[i]);
        }
    }

    #[test]
    fn resolve_examples() {
        let reg = TaxonomyRegistry::bundled();
        let l =
            reg.resolve_label("constraint", "Aggregation and Index-Coding Errors", "Wrong Aggregation Level").unwrap();
        assert_eq!(l.numeric_code, "3.6.1");
        let l =
            reg.resolve_label("implementation", "Symbolic-Code  Mismatch", " wrong objective sense in code").unwrap();
        assert_eq!(l.numeric_code, "4.1.1");
        assert!(matches!(reg.resolve_label("objective", "Made Up Subcat", "X"), Err(TaxonomyError::UnknownLabel(_))));
    }

    #[test]
    fn hit_levels() {
        let reg = TaxonomyRegistry::bundled();
        let a = reg.label("3.6.1").unwrap();
        let b = reg.label("3.6.2").unwrap();
        let c = reg.label("4.1.1").unwrap();
        let d = reg.label("3.7.1").unwrap();
        assert_eq!(hit_level(&a, &a), HitLevel::Specific);
        assert_eq!(hit_level(&b, &a), HitLevel::Subcategory);
        assert_eq!(hit_level(&d, &a), HitLevel::Family);
        assert_eq!(hit_level(&c, &a), HitLevel::None);
    }

    #[test]
    fn slugify_names() {
        assert_eq!(slugify("Big-M Direction Error"), "big-m-direction-error");
        assert_eq!(
            slugify("Scheduling- and Activity-Structure-Specific Errors"),
            "scheduling-and-activity-structure-specific-errors"
        );
    }
}
