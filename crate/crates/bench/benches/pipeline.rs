use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use optaudit_bench::{injected, seeds};
use optaudit_core::artifact::{build_dependency_graph, ArtifactKind, ElementKind};
use optaudit_core::config::Config;
use optaudit_core::consolidate::consolidate;
use optaudit_core::contract::check_tuple;
use optaudit_core::detector::{Cue, CueId, RoutingDecision};
use optaudit_core::finding::{Severity, Verdict};
use optaudit_core::pipeline::{audit_case, run_bench, Auditor, DetectorKind};
use optaudit_core::{build_benchmark, CandidateFinding, ElementRef, FamilyId, InjectionRecipe, TaxonomyRegistry};

fn pool(n: u32) -> Vec<CandidateFinding> {
    let reg = TaxonomyRegistry::bundled();
    let labels: Vec<_> = reg.labels().cloned().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    (1..=n)
        .map(|id| CandidateFinding {
            id,
            element: ElementRef::new(
                ArtifactKind::Model,
                ElementKind::Constraint,
                format!("c{}", rng.random_range(0..6)),
            ),
            label: labels[rng.random_range(0..labels.len())].clone(),
            verdict: if rng.random_bool(0.1) { Verdict::Grounded } else { Verdict::Hallucinated },
            support: rng.random_range(0.0..1.0),
            evidence: vec!["e".into()],
            canonical_issue: format!("issue {}", rng.random_range(0..4)),
            is_root_cause: rng.random_bool(0.5),
            duplicate_of: None,
            severity: Severity::Medium,
            repair: "fix".into(),
            source: "bench".into(),
        })
        .collect()
}

fn bench_consolidate(c: &mut Criterion) {
    let t = &seeds()[0];
    let deps = build_dependency_graph(t);
    let routing = RoutingDecision {
        active_branches: vec![FamilyId::Constraint],
        cues: vec![Cue { id: CueId::ContractFail, evidence: String::new() }],
        rescue_pass: false,
    };
    for n in [8u32, 64] {
        let p = pool(n);
        c.bench_function(&format!("consolidate/{n}"), |b| {
            b.iter(|| consolidate(black_box(&p), &deps, &routing, 0.5, 3))
        });
    }
}

fn bench_injector(c: &mut Criterion) {
    let reg = TaxonomyRegistry::bundled();
    let seeds = seeds();
    let recipes = InjectionRecipe::all(reg);
    c.bench_function("build_benchmark/per_type_5", |b| {
        b.iter(|| build_benchmark(black_box(&seeds), &recipes, 5, 7, reg).expect("builds"))
    });
}

fn bench_audit(c: &mut Criterion) {
    let auditor = Auditor::heuristic(Config::default());
    let ctx = auditor.context();
    let seeds = seeds();
    let cases = injected(2);
    c.bench_function("contract/check_tuple", |b| {
        b.iter(|| check_tuple(black_box(&seeds[0]), &auditor.config.contract, auditor.registry))
    });
    c.bench_function("audit_case/heuristic", |b| {
        b.iter(|| audit_case(black_box(&cases[0]), &ctx, DetectorKind::MultiAgent).expect("audit"))
    });
    c.bench_function("run_bench/heuristic_injected", |b| {
        b.iter(|| run_bench(black_box(&cases), &ctx, DetectorKind::MultiAgent))
    });
}

criterion_group!(benches, bench_consolidate, bench_injector, bench_audit);
criterion_main!(benches);
