use super::*;
use crate::artifact::parse_case;

fn seeds() -> Vec<AuditTuple> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/seeds");
    let mut paths: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    paths.iter().map(|p| parse_case(&std::fs::read_to_string(p).unwrap()).unwrap()).collect()
}

fn reg() -> &'static TaxonomyRegistry {
    TaxonomyRegistry::bundled()
}

#[test]
fn seeds_are_clean() {
    for t in seeds() {
        let schema = t.problem.schema.clone().unwrap();
        for f in FamilyId::ALL {
            assert!(discrepancies(f, &t, &schema).is_empty(), "{} {f}", t.case_id);
        }
        let report = check_tuple(&t, &ContractConfig::default(), reg());
        assert!(!report.has_fail(), "{}: {:?}", t.case_id, report.fails().collect::<Vec<_>>());
    }
}

#[test]
fn every_recipe_has_a_site() {
    let seeds = seeds();
    for r in InjectionRecipe::all(reg()) {
        let n: usize = seeds.iter().map(|t| r.applicable(t, reg()).len()).sum();
        assert!(n > 0, "recipe {} has no site", r.code());
    }
}

#[test]
fn round_trip_and_single_site() {
    for t in seeds() {
        for r in InjectionRecipe::all(reg()) {
            for site in r.applicable(&t, reg()) {
                let inj = r.inject_at(&t, &site, 7).unwrap();
                assert_eq!(inj.touched_sites(), 1, "{}", inj.case.case_id);
                assert!(same_case(&inj.inverse().unwrap(), &t), "{}", inj.case.case_id);
                assert_eq!(inj.case.problem, t.problem);
            }
        }
    }
}

#[test]
fn inject_is_seeded() {
    let t = seeds().into_iter().find(|t| t.case_id == "diet_blend").unwrap();
    let r = InjectionRecipe::new("3.7.1", reg()).unwrap();
    assert_eq!(r.inject(&t, 3, reg()).unwrap(), r.inject(&t, 3, reg()).unwrap());
}

#[test]
fn inapplicable_recipe_errors() {
    let t = seeds().into_iter().find(|t| t.case_id == "production_mix").unwrap();
    let r = InjectionRecipe::new("2.2.1", reg()).unwrap();
    assert!(r.applicable(&t, reg()).is_empty());
    assert!(matches!(r.inject(&t, 0, reg()), Err(InjectError::NotApplicable { .. })));
    assert!(matches!(InjectionRecipe::new("1.2.2", reg()), Err(InjectError::UnknownRecipe(_))));
}

#[test]
fn benchmark_is_deterministic_and_reports_coverage() {
    let seeds = seeds();
    let recipes = InjectionRecipe::all(reg());
    let a = build_benchmark(&seeds, &recipes, 30, 11, reg()).unwrap();
    let b = build_benchmark(&seeds, &recipes, 30, 11, reg()).unwrap();
    assert_eq!(a.to_jsonl(), b.to_jsonl());
    assert_eq!(a.coverage.len(), reg().len());
    let sense = a.coverage.iter().find(|r| r.label.numeric_code == "1.1.1").unwrap();
    assert_eq!((sense.cases, sense.status), (seeds.len(), CoverageStatus::Partial));
    let other = a.coverage.iter().find(|r| r.label.numeric_code == "1.2.2").unwrap();
    assert_eq!(other.status, CoverageStatus::Shortage);
    assert!(matches!(build_benchmark(&seeds, &recipes, 0, 11, reg()), Err(InjectError::InvalidTarget)));
}

#[test]
fn coverage_counts_match_recomputed_applicability() {
    let seeds = seeds();
    let recipes = InjectionRecipe::all(reg());
    for per_type in [1, 5, 30] {
        let b = build_benchmark(&seeds, &recipes, per_type, 2, reg()).unwrap();
        for r in &recipes {
            let available: usize = seeds.iter().map(|t| r.applicable(t, reg()).len()).sum();
            let row = b.coverage.iter().find(|row| row.label == r.label).unwrap();
            assert_eq!(row.cases, available.min(per_type), "{} at {per_type}", r.code());
            let emitted = b.cases.iter().filter(|c| c.gold == r.label).count();
            assert_eq!(emitted, row.cases);
        }
    }
}
