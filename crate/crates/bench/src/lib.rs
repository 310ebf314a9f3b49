//! Shared inputs for the criterion benches.

use std::path::Path;

use optaudit_core::artifact::parse_case;
use optaudit_core::{build_benchmark, AuditTuple, InjectionRecipe, TaxonomyRegistry};

/// The clean seed cases shipped with the core crate, sorted by file name.
pub fn seeds() -> Vec<AuditTuple> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/seeds");
    let mut paths: Vec<_> =
        std::fs::read_dir(dir).expect("seed fixtures").map(|e| e.expect("dir entry").path()).collect();
    paths.sort();
    paths.iter().map(|p| parse_case(&std::fs::read_to_string(p).expect("readable seed")).expect("valid seed")).collect()
}

/// Injected cases from every recipe, at most `per_type` each.
pub fn injected(per_type: usize) -> Vec<AuditTuple> {
    let reg = TaxonomyRegistry::bundled();
    let bench = build_benchmark(&seeds(), &InjectionRecipe::all(reg), per_type, 1, reg).expect("benchmark builds");
    bench.cases.into_iter().map(|c| c.case).collect()
}
