//! Property tests over the consolidation and scoring invariants.

mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use optaudit_core::artifact::build_dependency_graph;
use optaudit_core::consolidate::{consolidate, score};
use optaudit_core::detector::{Cue, CueId, RoutingDecision};
use optaudit_core::evaluator::{parse_predictions, predictions_to_jsonl, PredictedFinding, Prediction};
use optaudit_core::finding::Verdict;
use optaudit_core::{score_injected, CandidateFinding, FamilyId, LabelPath, TaxonomyRegistry};

fn pool(seed: u64, size: u32) -> Vec<CandidateFinding> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (1..=size).map(|i| common::random_finding(&mut rng, i)).collect()
}

fn routing(mask: u8) -> RoutingDecision {
    let active: Vec<FamilyId> = FamilyId::ALL.into_iter().filter(|f| mask & (1 << f.index()) != 0).collect();
    RoutingDecision {
        active_branches: if active.is_empty() { vec![FamilyId::Objective] } else { active },
        cues: vec![Cue { id: CueId::ContractFail, evidence: String::new() }],
        rescue_pass: false,
    }
}

fn label(code: &str) -> LabelPath {
    TaxonomyRegistry::bundled().by_code(code).unwrap().clone()
}

const CODES: [&str; 6] = ["1.1.1", "1.2.1", "2.2.1", "3.7.1", "3.7.2", "4.1.1"];

fn predictions(seed: u64, n: usize) -> (Vec<Prediction>, BTreeMap<String, LabelPath>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut preds = Vec::new();
    let mut golds = BTreeMap::new();
    for i in 0..n {
        let id = format!("case{i:02}");
        let k = rng.random_range(0..3);
        let findings = (0..k)
            .map(|_| {
                let l = label(CODES[rng.random_range(0..CODES.len())]);
                PredictedFinding {
                    family: l.family,
                    subcategory: l.subcategory.clone(),
                    specific: l.specific.clone(),
                    code: l.numeric_code.clone(),
                    support: 0.75,
                }
            })
            .collect();
        preds.push(Prediction { case_id: id.clone(), findings });
        golds.insert(id, label(CODES[rng.random_range(0..CODES.len())]));
    }
    (preds, golds)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn consolidation_conserves_and_orders(seed in any::<u64>(), size in 0u32..14, mask in 0u8..16, tau_step in 0u32..=10, cap in 1usize..5) {
        let t = common::seed("diet_blend");
        let deps = build_dependency_graph(&t);
        let pool = pool(seed, size);
        let r = routing(mask);
        let tau = f64::from(tau_step) / 10.0;
        let d = consolidate(&pool, &deps, &r, tau, cap);

        let mut seen: Vec<u32> = d.findings.iter().map(|f| f.id).chain(d.suppressed.iter().map(|s| s.id)).collect();
        seen.sort_unstable();
        let all: Vec<u32> = (1..=size).collect();
        prop_assert_eq!(seen, all);
        prop_assert!(d.findings.len() <= cap);
        prop_assert_eq!(d.abstained, d.findings.is_empty());
        for f in &d.findings {
            prop_assert!(f.support >= tau);
            prop_assert!(f.verdict != Verdict::Grounded);
        }
        for w in d.findings.windows(2) {
            prop_assert!(score(&w[0], &r) >= score(&w[1], &r));
        }
    }

    #[test]
    fn consolidation_ignores_pool_order(seed in any::<u64>(), size in 0u32..14, mask in 0u8..16) {
        let deps = build_dependency_graph(&common::seed("transport_lp"));
        let pool = pool(seed, size);
        let r = routing(mask);
        let mut shuffled = pool.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eed));
        prop_assert_eq!(consolidate(&pool, &deps, &r, 0.4, 3), consolidate(&shuffled, &deps, &r, 0.4, 3));
    }

    #[test]
    fn injected_scores_are_nested_and_order_free(seed in any::<u64>(), n in 1usize..20) {
        let (preds, golds) = predictions(seed, n);
        let a = score_injected(&preds, &golds).unwrap();
        let mut rev = preds.clone();
        rev.reverse();
        prop_assert_eq!(&a, &score_injected(&rev, &golds).unwrap());
        let major = a.get("Top1MajorCategoryHit").unwrap();
        let sub = a.get("Top1SubcategoryHit").unwrap();
        let spec = a.get("Top1SpecificTypeHit").unwrap();
        prop_assert!(spec <= sub && sub <= major);
    }

    #[test]
    fn correcting_a_top1_never_lowers_hits(seed in any::<u64>(), n in 1usize..20, pick in any::<prop::sample::Index>()) {
        let (mut preds, golds) = predictions(seed, n);
        let before = score_injected(&preds, &golds).unwrap();
        let p = &mut preds[pick.index(n)];
        let g = &golds[&p.case_id];
        p.findings.insert(0, PredictedFinding {
            family: g.family,
            subcategory: g.subcategory.clone(),
            specific: g.specific.clone(),
            code: g.numeric_code.clone(),
            support: 1.0,
        });
        let after = score_injected(&preds, &golds).unwrap();
        for m in ["Top1MajorCategoryHit", "Top1SubcategoryHit", "Top1SpecificTypeHit"] {
            prop_assert!(after.get(m).unwrap() >= before.get(m).unwrap(), "{} dropped", m);
        }
    }

    #[test]
    fn predictions_round_trip_through_jsonl(seed in any::<u64>(), n in 0usize..12) {
        let (preds, _) = predictions(seed, n);
        let text = predictions_to_jsonl(&preds);
        prop_assert_eq!(parse_predictions(&text).unwrap(), preds);
    }
}

#[test]
fn routing_masks_cover_every_family() {
    let seen: BTreeSet<FamilyId> = (0u8..16).flat_map(|m| routing(m).active_branches).collect();
    assert_eq!(seen.len(), 4);
}
