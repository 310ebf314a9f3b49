//! Site enumeration and transforms for each recipe.
//!
//! Every predicate is structural: the site must exist and the gold schema
//! must pin the edited element, so the corruption is a defensible error
//! against the problem rather than a harmless rewrite.

use std::fmt;

use crate::artifact::{
    AuditTuple, Coverage, Domain, ExtNum, ObjectiveReadout, Relation, RequirementKind, RequirementSpec, Rhs,
    SemanticSchema, SignRestriction, SymbolicModel,
};
use crate::contract::row_bound;

/// Recipe codes, in taxonomy order.
pub const RECIPE_CODES: [&str; 17] = [
    "1.1.1", "1.2.1", "1.2.4", "1.3.2", "2.2.1", "2.2.2", "2.2.3", "2.2.4", "3.2.3", "3.4.1", "3.7.1", "3.7.2",
    "4.1.1", "4.1.2", "4.1.3", "4.3.2", "4.5.2",
];

/// One edit location.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Site {
    Objective,
    Term(usize),
    TermBinding(usize, usize),
    Variable(String),
    Constraint(String),
    /// `(lower row, upper row)` of a two-sided band.
    Band(String, String),
    Materialization(String),
    Registration(String),
    PlanSense,
    Readout,
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Site::Objective => f.write_str("objective"),
            Site::Term(i) => write!(f, "term{i}"),
            Site::TermBinding(i, j) => write!(f, "term{i}.bind{j}"),
            Site::Variable(v) => write!(f, "var:{v}"),
            Site::Constraint(c) => write!(f, "con:{c}"),
            Site::Band(a, b) => write!(f, "band:{a}+{b}"),
            Site::Materialization(c) => write!(f, "mat:{c}"),
            Site::Registration(v) => write!(f, "reg:{v}"),
            Site::PlanSense => f.write_str("api_sense"),
            Site::Readout => f.write_str("readout"),
        }
    }
}

fn schema(t: &AuditTuple) -> Option<&SemanticSchema> {
    t.problem.schema.as_ref()
}

fn reqs(t: &AuditTuple, kind: RequirementKind) -> Vec<&RequirementSpec> {
    schema(t).map(|s| s.requirements(kind).collect()).unwrap_or_default()
}

fn term_required<'a>(t: &'a AuditTuple, var: &str) -> Option<&'a RequirementSpec> {
    reqs(t, RequirementKind::ObjectiveTerm).into_iter().find(|r| r.target == var)
}

fn relation_req<'a>(t: &'a AuditTuple, id: &str) -> Option<&'a RequirementSpec> {
    reqs(t, RequirementKind::Relation).into_iter().find(|r| r.target == id)
}

/// Single-variable rows that carry a bound or sign requirement of their variable.
fn carries_variable_requirement(t: &AuditTuple, id: &str) -> bool {
    let m = &t.model;
    let Some(c) = m.constraint(id) else { return false };
    let Some((var, _, _)) = row_bound(m, c) else { return false };
    reqs(t, RequirementKind::Bound).iter().any(|r| r.target == var)
        || reqs(t, RequirementKind::Domain).iter().any(|r| r.target == var && r.sign.is_some())
}

fn has_row_bound(m: &SymbolicModel, var: &str, rels: &[Relation]) -> bool {
    m.constraints.iter().any(|c| row_bound(m, c).is_some_and(|(v, r, _)| v == var && rels.contains(&r)))
}

fn band_pairs(t: &AuditTuple) -> Vec<(String, String)> {
    let m = &t.model;
    let rs = reqs(t, RequirementKind::Relation);
    let mut out = Vec::new();
    for a in &rs {
        for b in &rs {
            let (Some(Relation::Ge), Some(Relation::Le), Some(lo), Some(hi)) =
                (a.relation, b.relation, a.value, b.value)
            else {
                continue;
            };
            let (Some(ca), Some(cb)) = (m.constraint(&a.target), m.constraint(&b.target)) else { continue };
            if ca.id != cb.id
                && ca.lhs == cb.lhs
                && ca.quantified_over == cb.quantified_over
                && lo != hi
                && ca.relation == Relation::Ge
                && cb.relation == Relation::Le
                && ca.rhs == Rhs::Value(lo)
                && cb.rhs == Rhs::Value(hi)
            {
                out.push((ca.id.clone(), cb.id.clone()));
            }
        }
    }
    out
}

/// Index tuples a quantified row expands to.
pub fn quantified_tuples(m: &SymbolicModel, sets: &[String]) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = vec![Vec::new()];
    for s in sets {
        let members = m.set(s).map(|x| x.members.clone()).unwrap_or_default();
        out = out
            .into_iter()
            .flat_map(|prefix| {
                members.iter().map(move |x| {
                    let mut p = prefix.clone();
                    p.push(x.clone());
                    p
                })
            })
            .collect();
    }
    out
}

/// Candidate sites before collision screening.
pub fn candidate_sites(code: &str, t: &AuditTuple) -> Vec<Site> {
    let m = &t.model;
    let p = &t.plan;
    let terms = &m.objective.terms;
    match code {
        "1.1.1" => vec![Site::Objective],
        "1.2.1" => (0..terms.len())
            .filter(|&i| {
                let v = &terms[i].variable;
                terms.len() >= 2
                    && terms.iter().filter(|x| &x.variable == v).count() == 1
                    && term_required(t, v).is_some()
            })
            .map(Site::Term)
            .collect(),
        "1.2.4" => (0..terms.len())
            .filter(|&i| {
                let x = &terms[i];
                !x.coefficient.is_zero() && term_required(t, &x.variable).and_then(|r| r.value) == Some(x.coefficient)
            })
            .map(Site::Term)
            .collect(),
        "1.3.2" => {
            let mut out = Vec::new();
            for (i, x) in terms.iter().enumerate() {
                if term_required(t, &x.variable).is_none() {
                    continue;
                }
                for (j, b) in x.index.iter().enumerate() {
                    if b.members.is_none() && m.set(&b.set).is_some_and(|s| s.members.len() >= 2) {
                        out.push(Site::TermBinding(i, j));
                    }
                }
            }
            out
        }
        "2.2.1" | "2.2.2" => m
            .variables
            .iter()
            .filter(|v| (code == "2.2.1") == v.domain.is_discrete())
            .filter(|v| {
                reqs(t, RequirementKind::Domain).iter().any(|r| r.target == v.name && r.domain == Some(v.domain))
            })
            .map(|v| Site::Variable(v.name.clone()))
            .collect(),
        "2.2.3" => m
            .variables
            .iter()
            .filter(|v| v.upper.is_finite() && v.domain != Domain::Binary)
            .filter(|v| !has_row_bound(m, &v.name, &[Relation::Le, Relation::Eq]))
            .filter(|v| {
                reqs(t, RequirementKind::Bound).iter().any(|r| {
                    r.target == v.name
                        && r.relation == Some(Relation::Le)
                        && r.value.map(ExtNum::Finite) == Some(v.upper)
                })
            })
            .map(|v| Site::Variable(v.name.clone()))
            .collect(),
        "2.2.4" => m
            .variables
            .iter()
            .filter(|v| v.sign == SignRestriction::Nonneg && v.lower.is_neg_inf() && v.domain != Domain::Binary)
            .filter(|v| !has_row_bound(m, &v.name, &[Relation::Ge, Relation::Eq]))
            .filter(|v| {
                reqs(t, RequirementKind::Domain)
                    .iter()
                    .any(|r| r.target == v.name && r.sign == Some(SignRestriction::Nonneg))
            })
            .map(|v| Site::Variable(v.name.clone()))
            .collect(),
        "3.2.3" => m
            .constraints
            .iter()
            .filter(|c| !carries_variable_requirement(t, &c.id))
            .filter(|c| {
                relation_req(t, &c.id).is_some_and(|r| !r.pooled)
                    || reqs(t, RequirementKind::Coverage).iter().any(|r| r.target == c.id && !r.pooled)
            })
            .map(|c| Site::Constraint(c.id.clone()))
            .collect(),
        "3.4.1" | "3.7.1" => m
            .constraints
            .iter()
            .filter(|c| !carries_variable_requirement(t, &c.id))
            .filter(|c| {
                let want = relation_req(t, &c.id).and_then(|r| r.relation);
                want == Some(c.relation) && ((code == "3.4.1") == (c.relation == Relation::Eq))
            })
            .map(|c| Site::Constraint(c.id.clone()))
            .collect(),
        "3.7.2" => band_pairs(t)
            .into_iter()
            .filter(|(a, b)| !carries_variable_requirement(t, a) && !carries_variable_requirement(t, b))
            .map(|(a, b)| Site::Band(a, b))
            .collect(),
        "4.1.1" => vec![Site::PlanSense],
        "4.1.2" => p
            .materialized_constraints
            .iter()
            .filter(|e| e.coverage == Coverage::Full)
            .filter(|e| m.constraint(&e.id).is_some_and(|c| row_bound(m, c).is_none()))
            .map(|e| Site::Materialization(e.id.clone()))
            .collect(),
        "4.1.3" => p
            .registered_variables
            .iter()
            .filter(|r| m.variable(&r.name).is_some())
            .map(|r| Site::Registration(r.name.clone()))
            .collect(),
        "4.3.2" => p
            .materialized_constraints
            .iter()
            .filter(|e| e.coverage == Coverage::Full)
            .filter(|e| {
                m.constraint(&e.id).is_some_and(|c| {
                    !c.quantified_over.is_empty()
                        && row_bound(m, c).is_none()
                        && quantified_tuples(m, &c.quantified_over).len() >= 2
                })
            })
            .map(|e| Site::Materialization(e.id.clone()))
            .collect(),
        "4.5.2" => match p.readout.objective_readout {
            ObjectiveReadout::Stale => Vec::new(),
            _ => vec![Site::Readout],
        },
        _ => Vec::new(),
    }
}

/// Applies the recipe at `site`. Returns `None` when the site does not fit.
pub fn transform(code: &str, t: &AuditTuple, site: &Site) -> Option<AuditTuple> {
    let mut out = t.clone();
    let m = &mut out.model;
    let p = &mut out.plan;
    match (code, site) {
        ("1.1.1", Site::Objective) => m.objective.sense = m.objective.sense.flipped(),
        ("1.2.1", Site::Term(i)) => {
            m.objective.terms.get(*i)?;
            m.objective.terms.remove(*i);
        }
        ("1.2.4", Site::Term(i)) => {
            let x = m.objective.terms.get_mut(*i)?;
            x.coefficient = -x.coefficient;
        }
        ("1.3.2", Site::TermBinding(i, j)) => {
            let set = m.objective.terms.get(*i)?.index.get(*j)?.set.clone();
            let mut members = m.set(&set)?.members.clone();
            members.pop();
            m.objective.terms[*i].index[*j].members = Some(members);
        }
        ("2.2.1", Site::Variable(v)) => m.variables.iter_mut().find(|x| &x.name == v)?.domain = Domain::Continuous,
        ("2.2.2", Site::Variable(v)) => m.variables.iter_mut().find(|x| &x.name == v)?.domain = Domain::Integer,
        ("2.2.3", Site::Variable(v)) => m.variables.iter_mut().find(|x| &x.name == v)?.upper = ExtNum::PosInf,
        ("2.2.4", Site::Variable(v)) => m.variables.iter_mut().find(|x| &x.name == v)?.sign = SignRestriction::Free,
        ("3.2.3", Site::Constraint(c)) => {
            let i = m.constraints.iter().position(|x| &x.id == c)?;
            m.constraints.remove(i);
        }
        ("3.4.1", Site::Constraint(c)) => m.constraints.iter_mut().find(|x| &x.id == c)?.relation = Relation::Le,
        ("3.7.1", Site::Constraint(c)) => {
            let x = m.constraints.iter_mut().find(|x| &x.id == c)?;
            x.relation = x.relation.reversed();
        }
        ("3.7.2", Site::Band(a, b)) => {
            let ia = m.constraints.iter().position(|x| &x.id == a)?;
            let ib = m.constraints.iter().position(|x| &x.id == b)?;
            let ra = m.constraints[ia].rhs.clone();
            m.constraints[ia].rhs = std::mem::replace(&mut m.constraints[ib].rhs, ra);
        }
        ("4.1.1", Site::PlanSense) => p.objective.api_sense = p.objective.api_sense.flipped(),
        ("4.1.2", Site::Materialization(c)) => {
            let i = p.materialized_constraints.iter().position(|x| &x.id == c)?;
            p.materialized_constraints.remove(i);
        }
        ("4.1.3", Site::Registration(v)) => {
            let i = p.registered_variables.iter().position(|x| &x.name == v)?;
            p.registered_variables.remove(i);
        }
        ("4.3.2", Site::Materialization(c)) => {
            let sets = m.constraint(c)?.quantified_over.clone();
            let mut tuples = quantified_tuples(m, &sets);
            tuples.pop();
            p.materialized_constraints.iter_mut().find(|x| &x.id == c)?.coverage = Coverage::Partial(tuples);
        }
        ("4.5.2", Site::Readout) => {
            p.readout.objective_readout = match p.readout.objective_readout {
                ObjectiveReadout::SolvedValue => ObjectiveReadout::NegatedSolvedValue,
                ObjectiveReadout::NegatedSolvedValue => ObjectiveReadout::SolvedValue,
                ObjectiveReadout::Stale => return None,
            }
        }
        _ => return None,
    }
    Some(out)
}

/// Plain-language repair for a recipe at a site.
pub fn repair_text(code: &str, site: &Site) -> String {
    match code {
        "1.1.1" => "restore the original objective sense".into(),
        "1.2.1" => format!("reinsert the objective term removed at {site}"),
        "1.2.4" => format!("negate the objective coefficient at {site} again"),
        "1.3.2" => format!("sum the objective binding at {site} over its full set"),
        "2.2.1" | "2.2.2" => format!("restore the declared domain of {site}"),
        "2.2.3" => format!("restore the finite upper bound of {site}"),
        "2.2.4" => format!("restore the nonnegativity of {site}"),
        "3.2.3" => format!("reinsert constraint {site}"),
        "3.4.1" => format!("turn {site} back into an equality"),
        "3.7.1" => format!("flip the relation of {site} back"),
        "3.7.2" => format!("swap the right-hand sides of {site} back"),
        "4.1.1" => "restore the solver API sense".into(),
        "4.1.2" => format!("materialize {site} in code again"),
        "4.1.3" => format!("register {site} with the solver again"),
        "4.3.2" => format!("expand {site} over every index tuple"),
        _ => "restore the objective readout sign".into(),
    }
}
