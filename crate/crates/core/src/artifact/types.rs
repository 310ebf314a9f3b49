use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::coef::{Coef, ExtNum};
use crate::taxonomy::FamilyId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Minimize,
    Maximize,
}

impl Sense {
    pub fn flipped(self) -> Sense {
        match self {
            Sense::Minimize => Sense::Maximize,
            Sense::Maximize => Sense::Minimize,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sense::Minimize => "minimize",
            Sense::Maximize => "maximize",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }

    pub fn reversed(self) -> Relation {
        match self {
            Relation::Le => Relation::Ge,
            Relation::Eq => Relation::Eq,
            Relation::Ge => Relation::Le,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Continuous,
    Integer,
    Binary,
}

impl Domain {
    pub fn is_discrete(self) -> bool {
        !matches!(self, Domain::Continuous)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Domain::Continuous => "continuous",
            Domain::Integer => "integer",
            Domain::Binary => "binary",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SignRestriction {
    Nonneg,
    Nonpos,
    #[default]
    Free,
}

/// One index position of a term. `members = None` spans the whole set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexBinding {
    pub set: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub members: Option<Vec<String>>,
}

/// `coefficient * param[..] * variable[..]`; unquantified sets are summed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Term {
    pub coefficient: Coef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param: Option<String>,
    pub variable: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub index: Vec<IndexBinding>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Objective {
    pub sense: Sense,
    pub terms: Vec<Term>,
    /// Opaque notes for structure outside the linear IR.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub annotations: Vec<String>,
}

fn neg_inf() -> ExtNum {
    ExtNum::NegInf
}
fn pos_inf() -> ExtNum {
    ExtNum::PosInf
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableDecl {
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub index_sets: Vec<String>,
    pub domain: Domain,
    #[serde(default = "neg_inf", skip_serializing_if = "ExtNum::is_neg_inf")]
    pub lower: ExtNum,
    #[serde(default = "pos_inf", skip_serializing_if = "ExtNum::is_pos_inf")]
    pub upper: ExtNum,
    #[serde(default)]
    pub sign: SignRestriction,
}

impl VariableDecl {
    /// Bounds implied jointly by declared bounds, sign and domain.
    pub fn effective_bounds(&self) -> (ExtNum, ExtNum) {
        let mut lo = self.lower;
        let mut hi = self.upper;
        match self.sign {
            SignRestriction::Nonneg => lo = lo.max(ExtNum::int(0)),
            SignRestriction::Nonpos => hi = hi.min(ExtNum::int(0)),
            SignRestriction::Free => {}
        }
        if self.domain == Domain::Binary {
            lo = lo.max(ExtNum::int(0));
            hi = hi.min(ExtNum::int(1));
        }
        (lo, hi)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Rhs {
    Value(Coef),
    Param { param: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintDecl {
    pub id: String,
    pub lhs: Vec<Term>,
    pub relation: Relation,
    pub rhs: Rhs,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub quantified_over: Vec<String>,
}

impl ConstraintDecl {
    /// `Some((var, coef, rhs))` when the row is a scalar bound on one variable.
    pub fn as_single_bound(&self) -> Option<(&str, Coef, Coef)> {
        match (&self.lhs[..], &self.rhs) {
            ([t], Rhs::Value(r)) if t.param.is_none() && !t.coefficient.is_zero() => {
                Some((t.variable.as_str(), t.coefficient, *r))
            }
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetDecl {
    pub name: String,
    pub members: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamDecl {
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub index_sets: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<serde_json::Value>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Aux {
    #[serde(default)]
    pub sets: Vec<SetDecl>,
    #[serde(default)]
    pub parameters: Vec<ParamDecl>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolicModel {
    pub objective: Objective,
    pub variables: Vec<VariableDecl>,
    pub constraints: Vec<ConstraintDecl>,
    #[serde(default)]
    pub aux: Aux,
}

impl SymbolicModel {
    pub fn variable(&self, name: &str) -> Option<&VariableDecl> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn constraint(&self, id: &str) -> Option<&ConstraintDecl> {
        self.constraints.iter().find(|c| c.id == id)
    }

    pub fn set(&self, name: &str) -> Option<&SetDecl> {
        self.aux.sets.iter().find(|s| s.name == name)
    }

    pub fn param(&self, name: &str) -> Option<&ParamDecl> {
        self.aux.parameters.iter().find(|p| p.name == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequirementKind {
    ObjectiveSense,
    ObjectiveTerm,
    Domain,
    Relation,
    Coverage,
    Bound,
}

impl RequirementKind {
    /// Family whose specialist owns this kind of requirement.
    pub fn family(self) -> FamilyId {
        match self {
            RequirementKind::ObjectiveSense | RequirementKind::ObjectiveTerm => FamilyId::Objective,
            RequirementKind::Domain | RequirementKind::Bound => FamilyId::Variable,
            RequirementKind::Relation | RequirementKind::Coverage => FamilyId::Constraint,
        }
    }
}

/// Machine-readable hard requirement.
///
/// - `objective_sense`: `sense`.
/// - `objective_term`: `target` variable must appear over its full index range;
///   `value` fixes the expected coefficient.
/// - `domain`: `domain` and/or `sign` of the `target` variable.
/// - `bound`: `target` variable satisfies `relation value`.
/// - `relation`: constraint `target` exists with `relation`, optionally `value`
///   as rhs; `pooled` marks a joint total over the variables in `over`.
/// - `coverage`: constraint `target` exists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequirementSpec {
    pub kind: RequirementKind,
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relation: Option<Relation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<Coef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sense: Option<Sense>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Domain>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign: Option<SignRestriction>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub over: Vec<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub pooled: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quantity {
    pub name: String,
    pub value: Coef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitNote {
    pub target: String,
    pub unit: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct SemanticSchema {
    #[serde(default)]
    pub entities: Vec<String>,
    #[serde(default)]
    pub quantities: Vec<Quantity>,
    #[serde(default)]
    pub index_sets: Vec<SetDecl>,
    #[serde(default)]
    pub hard_requirements: Vec<RequirementSpec>,
    #[serde(default)]
    pub soft_preferences: Vec<String>,
    #[serde(default)]
    pub units: Vec<UnitNote>,
}

impl SemanticSchema {
    pub fn requirements(&self, kind: RequirementKind) -> impl Iterator<Item = &RequirementSpec> {
        self.hard_requirements.iter().filter(move |r| r.kind == kind)
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty() && self.hard_requirements.is_empty() && self.quantities.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Problem {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<SemanticSchema>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisteredVariable {
    pub name: String,
    pub api_domain: Domain,
    #[serde(default = "neg_inf", skip_serializing_if = "ExtNum::is_neg_inf")]
    pub api_lower: ExtNum,
    #[serde(default = "pos_inf", skip_serializing_if = "ExtNum::is_pos_inf")]
    pub api_upper: ExtNum,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coverage {
    Full,
    Partial(Vec<Vec<String>>),
    Absent,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaterializedConstraint {
    pub id: String,
    pub coverage: Coverage,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientSource {
    Direct,
    Negated,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanObjective {
    pub api_sense: Sense,
    pub coefficient_source: CoefficientSource,
    #[serde(default)]
    pub readout_sign_correction: bool,
}

impl PlanObjective {
    /// Sense the code actually optimizes in model terms.
    pub fn effective_sense(&self) -> Sense {
        match self.coefficient_source {
            CoefficientSource::Direct => self.api_sense,
            CoefficientSource::Negated => self.api_sense.flipped(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveReadout {
    SolvedValue,
    NegatedSolvedValue,
    Stale,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Readout {
    pub reported_variables: Vec<String>,
    pub objective_readout: ObjectiveReadout,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawCode {
    pub language: String,
    pub text: String,
}

/// Structured account of what the solver program registers, builds and reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaterializationPlan {
    pub registered_variables: Vec<RegisteredVariable>,
    pub materialized_constraints: Vec<MaterializedConstraint>,
    pub objective: PlanObjective,
    pub solver_backend: String,
    pub readout: Readout,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_code: Option<RawCode>,
}

impl MaterializationPlan {
    pub fn registration(&self, name: &str) -> Option<&RegisteredVariable> {
        self.registered_variables.iter().find(|v| v.name == name)
    }

    pub fn materialization(&self, id: &str) -> Option<&MaterializedConstraint> {
        self.materialized_constraints.iter().find(|c| c.id == id)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed_case_id: String,
    pub recipe: String,
    pub site: String,
    pub rng_seed: u64,
}

/// Gold label carried by an injected case.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldBlock {
    pub family: FamilyId,
    pub subcategory: String,
    pub specific: String,
    pub numeric_code: String,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditTuple {
    pub case_id: String,
    pub problem: Problem,
    pub model: SymbolicModel,
    pub plan: MaterializationPlan,
    #[serde(default)]
    pub metadata: BTreeMap<String, serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<GoldBlock>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArtifactKind {
    Problem,
    Model,
    Plan,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    Objective,
    Variable,
    Constraint,
    CodeObject,
    ExpectedMissing,
}

/// Address of one element, rendered as `artifact/kind/local_id`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElementRef {
    pub artifact: ArtifactKind,
    pub kind: ElementKind,
    pub local_id: String,
}

impl ElementRef {
    pub fn new(artifact: ArtifactKind, kind: ElementKind, local_id: impl Into<String>) -> ElementRef {
        ElementRef { artifact, kind, local_id: local_id.into() }
    }

    pub fn model(kind: ElementKind, local_id: impl Into<String>) -> ElementRef {
        ElementRef::new(ArtifactKind::Model, kind, local_id)
    }

    pub fn plan(kind: ElementKind, local_id: impl Into<String>) -> ElementRef {
        ElementRef::new(ArtifactKind::Plan, kind, local_id)
    }
}

impl fmt::Display for ElementRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = match self.artifact {
            ArtifactKind::Problem => "problem",
            ArtifactKind::Model => "model",
            ArtifactKind::Plan => "plan",
        };
        let k = match self.kind {
            ElementKind::Objective => "objective",
            ElementKind::Variable => "variable",
            ElementKind::Constraint => "constraint",
            ElementKind::CodeObject => "code_object",
            ElementKind::ExpectedMissing => "expected_missing",
        };
        write!(f, "{a}/{k}/{}", self.local_id)
    }
}

impl std::str::FromStr for ElementRef {
    type Err = String;

    fn from_str(s: &str) -> Result<ElementRef, String> {
        let mut parts = s.splitn(3, '/');
        let (a, k, id) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(k), Some(id)) if !id.is_empty() => (a, k, id),
            _ => return Err(format!("element ref {s:?} is not artifact/kind/id")),
        };
        let artifact = match a {
            "problem" => ArtifactKind::Problem,
            "model" => ArtifactKind::Model,
            "plan" => ArtifactKind::Plan,
            _ => return Err(format!("unknown artifact {a:?}")),
        };
        let kind = match k {
            "objective" => ElementKind::Objective,
            "variable" => ElementKind::Variable,
            "constraint" => ElementKind::Constraint,
            "code_object" => ElementKind::CodeObject,
            "expected_missing" => ElementKind::ExpectedMissing,
            _ => return Err(format!("unknown element kind {k:?}")),
        };
        Ok(ElementRef::new(artifact, kind, id))
    }
}

impl Serialize for ElementRef {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ElementRef {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<ElementRef, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
