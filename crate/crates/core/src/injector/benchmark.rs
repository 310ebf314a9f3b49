//! Stratified benchmark construction and per-type coverage.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{InjectError, InjectedCase, InjectionRecipe, Site};
use crate::artifact::AuditTuple;
use crate::taxonomy::{LabelPath, TaxonomyRegistry};

/// Metadata key naming a seed's stratum.
pub const STRATUM_KEY: &str = "benchmark_family";
const DEFAULT_STRATUM: &str = "default";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverageStatus {
    /// Target reached.
    Full,
    /// At least one case, fewer than the target.
    Partial,
    /// No case.
    Shortage,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub label: LabelPath,
    pub cases: usize,
    pub status: CoverageStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Benchmark {
    pub cases: Vec<InjectedCase>,
    /// One row per taxonomy type, in registry order.
    pub coverage: Vec<CoverageRow>,
}

impl Benchmark {
    /// Line-delimited case documents.
    pub fn to_jsonl(&self) -> String {
        self.cases.iter().map(|c| crate::artifact::serialize_case(&c.case) + "\n").collect()
    }
}

/// Per-recipe seed, so each recipe's sample is independent of the others.
fn sub_seed(rng_seed: u64, code: &str) -> u64 {
    let digest = Sha256::digest(format!("{rng_seed}:{code}").as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

fn stratum(t: &AuditTuple) -> String {
    t.metadata.get(STRATUM_KEY).and_then(|v| v.as_str()).unwrap_or(DEFAULT_STRATUM).to_string()
}

/// Samples up to `per_type` (seed, site) pairs per recipe: shuffled within
/// each stratum, then drawn round-robin over strata in name order.
pub fn build_benchmark(
    seeds: &[AuditTuple],
    recipes: &[InjectionRecipe],
    per_type: usize,
    rng_seed: u64,
    reg: &TaxonomyRegistry,
) -> Result<Benchmark, InjectError> {
    if per_type == 0 {
        return Err(InjectError::InvalidTarget);
    }
    let mut cases = Vec::new();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for recipe in recipes {
        let seed = sub_seed(rng_seed, recipe.code());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut strata: BTreeMap<String, Vec<(usize, Site)>> = BTreeMap::new();
        for (i, t) in seeds.iter().enumerate() {
            for site in recipe.applicable(t, reg) {
                strata.entry(stratum(t)).or_default().push((i, site));
            }
        }
        let mut queues: Vec<std::vec::IntoIter<(usize, Site)>> = strata
            .into_values()
            .map(|mut v| {
                v.shuffle(&mut rng);
                v.into_iter()
            })
            .collect();
        let mut picked = Vec::new();
        'draw: loop {
            let mut any = false;
            for q in &mut queues {
                if picked.len() == per_type {
                    break 'draw;
                }
                if let Some(x) = q.next() {
                    picked.push(x);
                    any = true;
                }
            }
            if !any {
                break;
            }
        }
        for (i, site) in picked {
            cases.push(recipe.inject_at(&seeds[i], &site, seed)?);
        }
        counts.insert(recipe.code().to_string(), cases.iter().filter(|c| c.provenance.recipe == recipe.code()).count());
    }
    let coverage = reg
        .labels()
        .map(|label| {
            let (cases, note) = match counts.get(&label.numeric_code) {
                Some(n) => (*n, None),
                None => (0, Some("no recipe".to_string())),
            };
            let status = match cases {
                0 => CoverageStatus::Shortage,
                n if n >= per_type => CoverageStatus::Full,
                _ => CoverageStatus::Partial,
            };
            CoverageRow { label: label.clone(), cases, status, note }
        })
        .collect();
    Ok(Benchmark { cases, coverage })
}
