//! Taxonomy-grounded auditing of LLM-generated optimization models.
//!
//! An audit takes a (problem, symbolic model, solver plan) tuple, routes it
//! through family specialists, merges and orders their findings,
//! and abstains when nothing survives. The crate also ships
//! a single-error injector for building labeled benchmarks and the metric
//! formulas used to score them.

pub mod artifact;
pub mod config;
pub mod consolidate;
pub mod contract;
pub mod detector;
pub mod evaluator;
pub mod finding;
pub mod gateway;
pub mod injector;
pub mod pipeline;
pub mod prompts;
pub mod report;
pub mod taxonomy;

pub use artifact::{parse_case, parse_case_set, serialize_case, AuditTuple, ElementRef};
pub use config::Config;
pub use consolidate::{consolidate, RankedDiagnosis};
pub use detector::{AuditContext, AuditOutcome, RoutingDecision};
pub use evaluator::{score_clean, score_injected, score_natural, MetricReport, Prediction};
pub use finding::CandidateFinding;
pub use gateway::{Gateway, UsageRecord};
pub use injector::{build_benchmark, InjectedCase, InjectionRecipe};
pub use pipeline::{audit_case, run_bench, Auditor, CaseAudit, DetectorKind};
pub use taxonomy::{FamilyId, LabelPath, TaxonomyRegistry};
