//! Candidate findings and dependency notes exchanged between specialists,
//! the consolidation stage and the report.

use serde::{Deserialize, Serialize};

use crate::artifact::ElementRef;
use crate::taxonomy::{FamilyId, LabelPath};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Grounded,
    NeedsReview,
    Hallucinated,
}

impl Verdict {
    pub fn parse(s: &str) -> Option<Verdict> {
        match crate::taxonomy::normalize_key(&s.replace(['_', '-'], " ")).as_str() {
            "grounded" => Some(Verdict::Grounded),
            "needs review" => Some(Verdict::NeedsReview),
            "hallucinated" => Some(Verdict::Hallucinated),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Low,
    #[default]
    Medium,
    High,
}

impl Severity {
    /// 1 for low, 2 for medium, 3 for high.
    pub fn rank(self) -> u32 {
        self as u32 + 1
    }

    pub fn parse(s: &str) -> Option<Severity> {
        match s.trim().to_ascii_lowercase().as_str() {
            "low" => Some(Severity::Low),
            "medium" | "med" | "moderate" => Some(Severity::Medium),
            "high" | "critical" => Some(Severity::High),
            _ => None,
        }
    }
}

/// One specialist claim: element, label, verdict, support and evidence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateFinding {
    pub id: u32,
    pub element: ElementRef,
    pub label: LabelPath,
    pub verdict: Verdict,
    pub support: f64,
    pub evidence: Vec<String>,
    pub canonical_issue: String,
    pub is_root_cause: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duplicate_of: Option<u32>,
    pub severity: Severity,
    pub repair: String,
    /// Producer tag, e.g. `objective`, `contract:SENSE` or `single_agent`.
    pub source: String,
}

impl CandidateFinding {
    pub fn family(&self) -> FamilyId {
        self.label.family
    }
}

/// Unresolved cross-family dependency raised by a specialist.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyNote {
    pub from_family: FamilyId,
    pub to_family: FamilyId,
    pub description: String,
    #[serde(default)]
    pub elements: Vec<ElementRef>,
}
