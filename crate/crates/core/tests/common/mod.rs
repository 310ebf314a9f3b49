#![allow(dead_code)]

use std::path::{Path, PathBuf};

use optaudit_core::artifact::parse_case;
use optaudit_core::AuditTuple;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

/// Clean seed cases, sorted by file name.
pub fn seeds() -> Vec<AuditTuple> {
    let mut paths: Vec<PathBuf> =
        std::fs::read_dir(fixtures().join("seeds")).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    paths.iter().map(|p| parse_case(&std::fs::read_to_string(p).unwrap()).unwrap()).collect()
}

pub fn seed(id: &str) -> AuditTuple {
    seeds().into_iter().find(|t| t.case_id == id).unwrap()
}

use optaudit_core::artifact::{ArtifactKind, ElementKind};
use optaudit_core::finding::{Severity, Verdict};
use optaudit_core::{CandidateFinding, ElementRef, TaxonomyRegistry};
use rand::Rng;

/// Random finding over a small element and label pool so merges and ties occur.
pub fn random_finding(rng: &mut impl Rng, id: u32) -> CandidateFinding {
    let reg = TaxonomyRegistry::bundled();
    let codes = ["1.1.1", "1.2.1", "2.2.1", "2.2.4", "3.2.3", "3.7.1", "4.1.1", "4.1.2"];
    let label = reg.by_code(codes[rng.random_range(0..codes.len())]).unwrap().clone();
    let ids = ["x", "y", "c1", "objective"];
    let kinds = [ElementKind::Variable, ElementKind::Constraint, ElementKind::Objective];
    let element = ElementRef::new(
        ArtifactKind::Model,
        kinds[rng.random_range(0..kinds.len())],
        ids[rng.random_range(0..ids.len())],
    );
    let issues = ["sense reversed", "Sense reversed!", "bound missing", "relation flipped"];
    let verdicts = [Verdict::Hallucinated, Verdict::Hallucinated, Verdict::NeedsReview, Verdict::Grounded];
    let severities = [Severity::Low, Severity::Medium, Severity::High];
    CandidateFinding {
        id,
        element,
        label,
        verdict: verdicts[rng.random_range(0..verdicts.len())],
        support: f64::from(rng.random_range(0..=20u32)) / 20.0,
        evidence: vec![format!("e{}", rng.random_range(0..3))],
        canonical_issue: issues[rng.random_range(0..issues.len())].to_string(),
        is_root_cause: rng.random_bool(0.7),
        duplicate_of: if id > 1 && rng.random_bool(0.15) { Some(rng.random_range(1..id)) } else { None },
        severity: severities[rng.random_range(0..severities.len())],
        repair: "fix".into(),
        source: "test".into(),
    }
}
