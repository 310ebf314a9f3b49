//! Single-error injection into clean cases.
//!
//! A recipe edits exactly one site of the model or plan and labels the
//! result with its taxonomy type. The edit is recorded as JSON-pointer
//! patches against the seed, so the inverse is exact by construction.
//! The gold semantic schema is never touched.

mod benchmark;
mod patch;
mod recipes;

use std::collections::BTreeSet;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use benchmark::{build_benchmark, Benchmark, CoverageRow, CoverageStatus};
pub use patch::{diff_values, Patch};
pub use recipes::{quantified_tuples, repair_text, Site, RECIPE_CODES};

use crate::artifact::{parse_case_value, serialize_case, ArtifactError, AuditTuple, GoldBlock, Provenance};
use crate::contract::{check_tuple, ContractConfig};
use crate::detector::symbolic::discrepancies;
use crate::taxonomy::{FamilyId, LabelPath, TaxonomyRegistry};

#[derive(Debug, Error)]
pub enum InjectError {
    #[error("recipe {recipe} has no applicable site in case {case_id}")]
    NotApplicable { recipe: String, case_id: String },
    #[error("no injection recipe for type {0}")]
    UnknownRecipe(String),
    #[error("per-type target must be at least 1")]
    InvalidTarget,
    #[error(transparent)]
    Artifact(#[from] ArtifactError),
}

/// One injection recipe, bound to its taxonomy label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InjectionRecipe {
    pub label: LabelPath,
}

impl InjectionRecipe {
    pub fn new(code: &str, reg: &TaxonomyRegistry) -> Result<InjectionRecipe, InjectError> {
        if !RECIPE_CODES.contains(&code) {
            return Err(InjectError::UnknownRecipe(code.to_string()));
        }
        let label = reg.by_code(code).cloned().ok_or_else(|| InjectError::UnknownRecipe(code.to_string()))?;
        Ok(InjectionRecipe { label })
    }

    /// Every recipe, in taxonomy order.
    pub fn all(reg: &TaxonomyRegistry) -> Vec<InjectionRecipe> {
        RECIPE_CODES.iter().map(|c| InjectionRecipe::new(c, reg).expect("recipe codes exist in the taxonomy")).collect()
    }

    pub fn code(&self) -> &str {
        &self.label.numeric_code
    }

    /// Sites that fit the recipe and whose edit yields exactly this one label.
    pub fn applicable(&self, t: &AuditTuple, reg: &TaxonomyRegistry) -> Vec<Site> {
        recipes::candidate_sites(self.code(), t)
            .into_iter()
            .filter(|s| recipes::transform(self.code(), t, s).is_some_and(|out| !collides(self.code(), &out, reg)))
            .collect()
    }

    /// Seeded uniform pick among the applicable sites.
    pub fn inject(&self, t: &AuditTuple, rng_seed: u64, reg: &TaxonomyRegistry) -> Result<InjectedCase, InjectError> {
        let sites = self.applicable(t, reg);
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let site = sites.choose(&mut rng).cloned().ok_or_else(|| InjectError::NotApplicable {
            recipe: self.code().to_string(),
            case_id: t.case_id.clone(),
        })?;
        self.inject_at(t, &site, rng_seed)
    }

    /// Injects at a given site. The site is not screened for collisions.
    pub fn inject_at(&self, t: &AuditTuple, site: &Site, rng_seed: u64) -> Result<InjectedCase, InjectError> {
        let not_applicable =
            || InjectError::NotApplicable { recipe: self.code().to_string(), case_id: t.case_id.clone() };
        let mut case = recipes::transform(self.code(), t, site).ok_or_else(not_applicable)?;
        let provenance = Provenance {
            seed_case_id: t.case_id.clone(),
            recipe: self.code().to_string(),
            site: site.to_string(),
            rng_seed,
        };
        case.case_id = format!("{}::{}::{}", t.case_id, self.code(), site);
        case.gold = Some(GoldBlock {
            family: self.label.family,
            subcategory: self.label.subcategory.clone(),
            specific: self.label.specific.clone(),
            numeric_code: self.label.numeric_code.clone(),
            provenance: provenance.clone(),
        });
        let patches = structural_diff(t, &case);
        // Edits must leave a valid case.
        let case = parse_case_value(serde_json::to_value(&case).expect("tuples serialize"))?;
        Ok(InjectedCase { case, gold: self.label.clone(), provenance, site: site.clone(), patches })
    }
}

/// A corrupted case with its label and the patches that undo it.
#[derive(Clone, Debug, PartialEq)]
pub struct InjectedCase {
    pub case: AuditTuple,
    pub gold: LabelPath,
    pub provenance: Provenance,
    pub site: Site,
    /// Model and plan differences against the seed.
    pub patches: Vec<Patch>,
}

impl InjectedCase {
    /// Restores the seed by applying every patch's `before` value.
    pub fn inverse(&self) -> Result<AuditTuple, InjectError> {
        let mut v = serde_json::to_value(&self.case).expect("tuples serialize");
        for p in &self.patches {
            patch::set_pointer(&mut v, &p.path, p.before.clone())
                .map_err(|e| ArtifactError::SchemaError(format!("inverse patch {}: {e}", p.path)))?;
        }
        let obj = v.as_object_mut().expect("tuples serialize to objects");
        obj.insert("case_id".into(), self.provenance.seed_case_id.clone().into());
        obj.remove("gold");
        Ok(parse_case_value(v)?)
    }

    pub fn repair(&self) -> String {
        repair_text(&self.provenance.recipe, &self.site)
    }

    /// Semantic sites the edit touched; a band swap counts as one site.
    pub fn touched_sites(&self) -> usize {
        match self.site {
            Site::Band(..) if self.patches.len() == 2 => 1,
            _ => self.patches.len(),
        }
    }
}

/// Patches over the model and plan subtrees only.
pub fn structural_diff(seed: &AuditTuple, case: &AuditTuple) -> Vec<Patch> {
    let a = serde_json::to_value(seed).expect("tuples serialize");
    let b = serde_json::to_value(case).expect("tuples serialize");
    let mut out = Vec::new();
    for key in ["model", "plan"] {
        out.extend(diff_values(&format!("/{key}"), a.get(key), b.get(key)));
    }
    out
}

/// True when the edited tuple carries evidence of any label besides `code`.
/// Model-family edits are judged on the symbolic comparison; code-level edits
/// on the labeled contract failures.
fn collides(code: &str, edited: &AuditTuple, reg: &TaxonomyRegistry) -> bool {
    let want = BTreeSet::from([code.to_string()]);
    if code.starts_with('4') {
        let fails: BTreeSet<String> = check_tuple(edited, &ContractConfig::default(), reg)
            .fails()
            .filter_map(|c| c.suggested_label.as_ref().map(|l| l.numeric_code.clone()))
            .collect();
        let schema = edited.problem.schema.clone().unwrap_or_default();
        let symbolic = [FamilyId::Objective, FamilyId::Variable, FamilyId::Constraint]
            .into_iter()
            .any(|f| !discrepancies(f, edited, &schema).is_empty());
        fails != want || symbolic
    } else {
        let Some(schema) = &edited.problem.schema else { return true };
        let codes: BTreeSet<String> = [FamilyId::Objective, FamilyId::Variable, FamilyId::Constraint]
            .into_iter()
            .flat_map(|f| discrepancies(f, edited, schema))
            .map(|x| x.code.to_string())
            .collect();
        !codes.is_subset(&want)
    }
}

/// Byte-exact comparison of canonical serializations.
pub fn same_case(a: &AuditTuple, b: &AuditTuple) -> bool {
    serialize_case(a) == serialize_case(b)
}

#[cfg(test)]
mod tests;
