use optaudit_bench::{injected, seeds};

#[test]
fn bench_inputs_load() {
    assert_eq!(seeds().len(), 12);
    let cases = injected(1);
    assert!(cases.len() >= 17, "{} cases", cases.len());
    assert!(cases.iter().all(|c| c.gold.is_some()));
}
