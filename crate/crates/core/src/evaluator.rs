//! Benchmark metrics, computed in exact rational arithmetic.
//!
//! Three benchmark kinds are scored: clean cases (abstention and report
//! length), injected cases (nested top-1 hits against one gold label) and
//! natural cases (per-family and artifact-level F1).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::artifact::AuditTuple;
use crate::consolidate::RankedDiagnosis;
use crate::taxonomy::{hit_level, FamilyId, HitLevel, LabelPath};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("nothing to score")]
    EmptySet,
    #[error("no gold label for case {0}")]
    MissingGold(String),
    #[error("duplicate case_id {0}")]
    DuplicateCase(String),
    #[error("objective values must be finite")]
    NonFinite,
    #[error("gold file holds {found} labels but the {expected} scorer was requested")]
    KindMismatch { expected: BenchmarkKind, found: BenchmarkKind },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkKind {
    Clean,
    Injected,
    Natural,
}

impl std::fmt::Display for BenchmarkKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BenchmarkKind::Clean => "clean",
            BenchmarkKind::Injected => "injected",
            BenchmarkKind::Natural => "natural",
        })
    }
}

/// One emitted finding, as stored in a prediction file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictedFinding {
    pub family: FamilyId,
    pub subcategory: String,
    pub specific: String,
    pub code: String,
    pub support: f64,
}

impl PredictedFinding {
    pub fn label(&self) -> LabelPath {
        LabelPath {
            family: self.family,
            subcategory: self.subcategory.clone(),
            specific: self.specific.clone(),
            numeric_code: self.code.clone(),
        }
    }
}

/// Final ranked findings of one case, in emission order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub case_id: String,
    pub findings: Vec<PredictedFinding>,
}

impl Prediction {
    pub fn from_diagnosis(case_id: &str, d: &RankedDiagnosis) -> Prediction {
        Prediction {
            case_id: case_id.to_string(),
            findings: d
                .findings
                .iter()
                .map(|f| PredictedFinding {
                    family: f.label.family,
                    subcategory: f.label.subcategory.clone(),
                    specific: f.label.specific.clone(),
                    code: f.label.numeric_code.clone(),
                    support: f.support,
                })
                .collect(),
        }
    }
}

/// Expert labels of one natural artifact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NaturalGold {
    pub case_id: String,
    pub is_incorrect: bool,
    /// Missing families count as negative.
    #[serde(default)]
    pub category_positives: BTreeMap<FamilyId, bool>,
}

impl NaturalGold {
    pub fn positive(&self, f: FamilyId) -> bool {
        self.category_positives.get(&f).copied().unwrap_or(false)
    }
}

/// Gold labels of a case set, keyed by case id.
#[derive(Clone, Debug, PartialEq)]
pub enum GoldSet {
    Clean(BTreeSet<String>),
    Injected(BTreeMap<String, LabelPath>),
    Natural(BTreeMap<String, NaturalGold>),
}

impl GoldSet {
    pub fn kind(&self) -> BenchmarkKind {
        match self {
            GoldSet::Clean(_) => BenchmarkKind::Clean,
            GoldSet::Injected(_) => BenchmarkKind::Injected,
            GoldSet::Natural(_) => BenchmarkKind::Natural,
        }
    }

    /// Classifies each nonblank line: a `gold` block means injected,
    /// `is_incorrect` means natural, anything else is a clean case. Mixed
    /// files are rejected.
    pub fn parse_jsonl(text: &str) -> Result<GoldSet, EvalError> {
        let mut kind = None;
        let mut clean = BTreeSet::new();
        let mut injected = BTreeMap::new();
        let mut natural = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let err = |message: String| EvalError::Parse { line: i + 1, message };
            let v: Value = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
            let this = if v.get("gold").is_some_and(|g| !g.is_null()) {
                BenchmarkKind::Injected
            } else if v.get("is_incorrect").is_some() {
                BenchmarkKind::Natural
            } else {
                BenchmarkKind::Clean
            };
            match kind {
                None => kind = Some(this),
                Some(k) if k != this => {
                    return Err(err(format!("{this} record in a {k} gold file")));
                }
                _ => {}
            }
            let id = v.get("case_id").and_then(Value::as_str).ok_or_else(|| err("missing case_id".into()))?.to_string();
            let fresh = match this {
                BenchmarkKind::Clean => clean.insert(id.clone()),
                BenchmarkKind::Injected => {
                    let t: AuditTuple = serde_json::from_value(v).map_err(|e| err(e.to_string()))?;
                    let g = t.gold.expect("checked above");
                    let label = LabelPath {
                        family: g.family,
                        subcategory: g.subcategory,
                        specific: g.specific,
                        numeric_code: g.numeric_code,
                    };
                    injected.insert(id.clone(), label).is_none()
                }
                BenchmarkKind::Natural => {
                    let g: NaturalGold = serde_json::from_value(v).map_err(|e| err(e.to_string()))?;
                    natural.insert(id.clone(), g).is_none()
                }
            };
            if !fresh {
                return Err(EvalError::DuplicateCase(id));
            }
        }
        Ok(match kind {
            Some(BenchmarkKind::Injected) => GoldSet::Injected(injected),
            Some(BenchmarkKind::Natural) => GoldSet::Natural(natural),
            _ => GoldSet::Clean(clean),
        })
    }
}

/// Parses a prediction file (one [`Prediction`] per line).
pub fn parse_predictions(text: &str) -> Result<Vec<Prediction>, EvalError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| EvalError::Parse { line: i + 1, message: e.to_string() }))
        .collect()
}

pub fn predictions_to_jsonl(predictions: &[Prediction]) -> String {
    predictions.iter().map(|p| serde_json::to_string(p).expect("predictions serialize") + "\n").collect()
}

/// One named metric, exact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    /// Reduced `p/q`.
    pub exact: String,
    #[serde(skip)]
    pub value: Rational64,
}

/// Confusion counts of one F1 channel.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ChannelCounts {
    fn add(&mut self, gold: bool, pred: bool) {
        match (gold, pred) {
            (true, true) => self.tp += 1,
            (false, true) => self.fp += 1,
            (true, false) => self.fn_ += 1,
            (false, false) => {}
        }
    }

    /// `2TP / (2TP + FP + FN)`, and 1 for an all-zero channel.
    pub fn f1(&self) -> Rational64 {
        let den = 2 * self.tp + self.fp + self.fn_;
        if den == 0 {
            Rational64::from_integer(1)
        } else {
            Rational64::new(2 * self.tp as i64, den as i64)
        }
    }

    pub fn gold_positives(&self) -> u64 {
        self.tp + self.fn_
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub benchmark_kind: BenchmarkKind,
    pub cases: usize,
    pub metrics: Vec<Metric>,
    /// Per-channel counts; natural benchmark only.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub supports: BTreeMap<String, ChannelCounts>,
}

impl MetricReport {
    fn new(kind: BenchmarkKind, cases: usize) -> MetricReport {
        MetricReport { benchmark_kind: kind, cases, metrics: Vec::new(), supports: BTreeMap::new() }
    }

    fn push(&mut self, name: &str, value: Rational64) {
        self.metrics.push(Metric { name: name.to_string(), exact: value.to_string(), value });
    }

    pub fn get(&self, name: &str) -> Option<Rational64> {
        self.metrics.iter().find(|m| m.name == name).map(|m| m.value)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.get(name).and_then(|r| r.to_f64())
    }

    /// JSON document; every metric carries its exact and float value.
    pub fn to_json(&self) -> Value {
        let metrics: serde_json::Map<String, Value> = self
            .metrics
            .iter()
            .map(|m| (m.name.clone(), serde_json::json!({"value": m.value.to_f64(), "exact": m.exact})))
            .collect();
        serde_json::json!({
            "benchmark_kind": self.benchmark_kind,
            "cases": self.cases,
            "metrics": metrics,
            "supports": self.supports,
        })
    }

    pub fn table(&self) -> String {
        let width = self.metrics.iter().map(|m| m.name.len()).max().unwrap_or(6).max(6);
        let mut s = format!("{} benchmark, {} cases\n", self.benchmark_kind, self.cases);
        let _ = writeln!(s, "{:<width$}  {:>8}  exact", "metric", "value");
        for m in &self.metrics {
            let _ = writeln!(s, "{:<width$}  {:>8.4}  {}", m.name, m.value.to_f64().unwrap_or(f64::NAN), m.exact);
        }
        for (name, c) in &self.supports {
            let _ = writeln!(s, "support {name}: tp={} fp={} fn={}", c.tp, c.fp, c.fn_);
        }
        s
    }
}

fn ratio(num: usize, den: usize) -> Rational64 {
    Rational64::new(num as i64, den as i64)
}

fn check_unique(predictions: &[Prediction]) -> Result<(), EvalError> {
    let mut seen = BTreeSet::new();
    for p in predictions {
        if !seen.insert(p.case_id.as_str()) {
            return Err(EvalError::DuplicateCase(p.case_id.clone()));
        }
    }
    Ok(())
}

fn mean_findings(predictions: &[Prediction]) -> Rational64 {
    ratio(predictions.iter().map(|p| p.findings.len()).sum(), predictions.len())
}

pub fn score_clean(predictions: &[Prediction]) -> Result<MetricReport, EvalError> {
    if predictions.is_empty() {
        return Err(EvalError::EmptySet);
    }
    check_unique(predictions)?;
    let mut r = MetricReport::new(BenchmarkKind::Clean, predictions.len());
    r.push("EmptyReportRate", ratio(predictions.iter().filter(|p| p.findings.is_empty()).count(), predictions.len()));
    r.push("MeanFindings", mean_findings(predictions));
    Ok(r)
}

/// Nested top-1 hits. Empty reports miss at every level.
pub fn score_injected(
    predictions: &[Prediction],
    golds: &BTreeMap<String, LabelPath>,
) -> Result<MetricReport, EvalError> {
    if predictions.is_empty() {
        return Err(EvalError::EmptySet);
    }
    check_unique(predictions)?;
    let mut hits = [0usize; 3];
    for p in predictions {
        let gold = golds.get(&p.case_id).ok_or_else(|| EvalError::MissingGold(p.case_id.clone()))?;
        let level = p.findings.first().map_or(HitLevel::None, |f| hit_level(&f.label(), gold));
        for (slot, need) in hits.iter_mut().zip([HitLevel::Family, HitLevel::Subcategory, HitLevel::Specific]) {
            if level >= need {
                *slot += 1;
            }
        }
    }
    let n = predictions.len();
    let mut r = MetricReport::new(BenchmarkKind::Injected, n);
    r.push("Top1MajorCategoryHit", ratio(hits[0], n));
    r.push("Top1SubcategoryHit", ratio(hits[1], n));
    r.push("Top1SpecificTypeHit", ratio(hits[2], n));
    r.push("MeanFindings", mean_findings(predictions));
    Ok(r)
}

fn channel_name(f: FamilyId) -> &'static str {
    match f {
        FamilyId::Objective => "Objective-F1",
        FamilyId::Variable => "Variable-F1",
        FamilyId::Constraint => "Constraint-F1",
        FamilyId::Implementation => "Implementation-F1",
    }
}

/// Per-family, artifact-level, macro and micro F1.
pub fn score_natural(
    predictions: &[Prediction],
    golds: &BTreeMap<String, NaturalGold>,
) -> Result<MetricReport, EvalError> {
    if predictions.is_empty() {
        return Err(EvalError::EmptySet);
    }
    check_unique(predictions)?;
    let mut fam = [ChannelCounts::default(); 4];
    let mut hall = ChannelCounts::default();
    for p in predictions {
        let gold = golds.get(&p.case_id).ok_or_else(|| EvalError::MissingGold(p.case_id.clone()))?;
        let mut any_gold = false;
        let mut any_pred = false;
        for f in FamilyId::ALL {
            let y = gold.positive(f);
            let yhat = p.findings.iter().any(|x| x.family == f);
            fam[f.index()].add(y, yhat);
            any_gold |= y;
            any_pred |= yhat;
        }
        hall.add(gold.is_incorrect || any_gold, any_pred);
    }
    let mut r = MetricReport::new(BenchmarkKind::Natural, predictions.len());
    r.push("Halluc-F1", hall.f1());
    for f in FamilyId::ALL {
        r.push(channel_name(f), fam[f.index()].f1());
    }
    let macro_f1 =
        fam.iter().map(ChannelCounts::f1).fold(Rational64::zero(), |a, b| a + b) / Rational64::from_integer(4);
    let pooled = fam.iter().fold(ChannelCounts::default(), |a, c| ChannelCounts {
        tp: a.tp + c.tp,
        fp: a.fp + c.fp,
        fn_: a.fn_ + c.fn_,
    });
    r.push("MajorCategoryMacro-F1", macro_f1);
    r.push("MajorCategoryMicro-F1", pooled.f1());
    r.supports.insert("hallucination".into(), hall);
    for f in FamilyId::ALL {
        r.supports.insert(f.as_str().into(), fam[f.index()]);
    }
    Ok(r)
}

/// Dispatches on the gold kind; `expected` guards against scoring a gold
/// file with the wrong scorer.
pub fn score(
    predictions: &[Prediction],
    golds: &GoldSet,
    expected: Option<BenchmarkKind>,
) -> Result<MetricReport, EvalError> {
    if let Some(k) = expected.filter(|k| *k != golds.kind()) {
        return Err(EvalError::KindMismatch { expected: k, found: golds.kind() });
    }
    match golds {
        GoldSet::Clean(ids) => {
            if let Some(p) = predictions.iter().find(|p| !ids.contains(&p.case_id)) {
                return Err(EvalError::MissingGold(p.case_id.clone()));
            }
            score_clean(predictions)
        }
        GoldSet::Injected(g) => score_injected(predictions, g),
        GoldSet::Natural(g) => score_natural(predictions, g),
    }
}

/// Relative agreement of two reported objective values.
pub fn objective_match(a: f64, b: f64, tolerance: f64) -> Result<bool, EvalError> {
    if !a.is_finite() || !b.is_finite() || !tolerance.is_finite() {
        return Err(EvalError::NonFinite);
    }
    Ok((a - b).abs() <= tolerance * b.abs().max(1.0))
}

pub const DEFAULT_OBJECTIVE_TOLERANCE: f64 = 1e-6;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::TaxonomyRegistry;

    fn pred(id: &str, codes: &[&str]) -> Prediction {
        let reg = TaxonomyRegistry::bundled();
        Prediction {
            case_id: id.into(),
            findings: codes
                .iter()
                .map(|c| {
                    let l = reg.by_code(c).unwrap();
                    PredictedFinding {
                        family: l.family,
                        subcategory: l.subcategory.clone(),
                        specific: l.specific.clone(),
                        code: l.numeric_code.clone(),
                        support: 1.0,
                    }
                })
                .collect(),
        }
    }

    #[test]
    fn clean_formula() {
        let r = score_clean(&[pred("a", &[]), pred("b", &[]), pred("c", &["1.1.1"])]).unwrap();
        assert_eq!(r.get("EmptyReportRate"), Some(Rational64::new(2, 3)));
        assert_eq!(r.get("MeanFindings"), Some(Rational64::new(1, 3)));
        assert_eq!(score_clean(&[]), Err(EvalError::EmptySet));
    }

    #[test]
    fn injected_levels_nest() {
        let reg = TaxonomyRegistry::bundled();
        let gold: BTreeMap<String, LabelPath> = [("a", "1.1.1"), ("b", "1.2.1"), ("c", "1.1.1")]
            .iter()
            .map(|(k, c)| (k.to_string(), reg.by_code(c).unwrap().clone()))
            .collect();
        let r = score_injected(&[pred("a", &["1.1.1"]), pred("b", &["1.3.2"]), pred("c", &[])], &gold).unwrap();
        assert_eq!(r.get("Top1MajorCategoryHit"), Some(Rational64::new(2, 3)));
        assert_eq!(r.get("Top1SubcategoryHit"), Some(Rational64::new(1, 3)));
        assert_eq!(r.get("Top1SpecificTypeHit"), Some(Rational64::new(1, 3)));
        assert!(matches!(score_injected(&[pred("z", &[])], &gold), Err(EvalError::MissingGold(_))));
    }

    #[test]
    fn natural_lifts_hallucination_channel() {
        let g = NaturalGold { case_id: "a".into(), is_incorrect: true, category_positives: BTreeMap::new() };
        let r = score_natural(&[pred("a", &[])], &BTreeMap::from([("a".to_string(), g)])).unwrap();
        assert_eq!(r.supports["hallucination"], ChannelCounts { tp: 0, fp: 0, fn_: 1 });
        assert_eq!(r.get("Halluc-F1"), Some(Rational64::zero()));
        assert_eq!(r.get("Objective-F1"), Some(Rational64::from_integer(1)));
    }

    #[test]
    fn f1_formula() {
        assert_eq!(ChannelCounts { tp: 2, fp: 1, fn_: 1 }.f1(), Rational64::new(2, 3));
    }

    #[test]
    fn objective_tolerance() {
        assert_eq!(objective_match(10.0, 10.0, 1e-6), Ok(true));
        assert_eq!(objective_match(10.0, -10.0, 1e-6), Ok(false));
        assert_eq!(objective_match(100.0000005, 100.0, 1e-6), Ok(true));
        assert_eq!(objective_match(f64::NAN, 1.0, 1e-6), Err(EvalError::NonFinite));
    }
}
