use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::types::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Mentions,
    Realizes,
    Constrains,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub source: ElementRef,
    pub target: ElementRef,
    pub kind: EdgeKind,
}

/// Cross-artifact links; edges are sorted and unique.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DependencyGraph {
    pub edges: Vec<Edge>,
}

impl DependencyGraph {
    /// Elements adjacent to `e` in either direction, optionally filtered by kind.
    pub fn neighbors<'a>(
        &'a self,
        e: &'a ElementRef,
        kind: Option<EdgeKind>,
    ) -> impl Iterator<Item = &'a ElementRef> + 'a {
        self.edges.iter().filter(move |x| kind.is_none_or(|k| x.kind == k)).filter_map(move |x| {
            if &x.source == e {
                Some(&x.target)
            } else if &x.target == e {
                Some(&x.source)
            } else {
                None
            }
        })
    }

    /// True when `a` and `b` share one edge of the given kind.
    pub fn linked(&self, a: &ElementRef, b: &ElementRef, kind: EdgeKind) -> bool {
        self.edges
            .iter()
            .any(|x| x.kind == kind && ((&x.source == a && &x.target == b) || (&x.source == b && &x.target == a)))
    }

    pub fn expected_missing(&self) -> impl Iterator<Item = &ElementRef> {
        self.edges.iter().flat_map(|e| [&e.source, &e.target]).filter(|r| r.kind == ElementKind::ExpectedMissing)
    }
}

/// Model element that a requirement targets, when it exists.
pub(crate) fn requirement_subject(m: &SymbolicModel, r: &RequirementSpec) -> Option<ElementRef> {
    match r.kind {
        RequirementKind::ObjectiveSense | RequirementKind::ObjectiveTerm => {
            Some(ElementRef::model(ElementKind::Objective, "objective"))
        }
        RequirementKind::Domain | RequirementKind::Bound => {
            m.variable(&r.target).map(|v| ElementRef::model(ElementKind::Variable, v.name.clone()))
        }
        RequirementKind::Relation | RequirementKind::Coverage => {
            m.constraint(&r.target).map(|c| ElementRef::model(ElementKind::Constraint, c.id.clone()))
        }
    }
}

pub(crate) fn requirement_source(r: &RequirementSpec) -> ElementRef {
    let kind = match r.kind.family() {
        crate::taxonomy::FamilyId::Objective => ElementKind::Objective,
        crate::taxonomy::FamilyId::Variable => ElementKind::Variable,
        _ => ElementKind::Constraint,
    };
    ElementRef::new(ArtifactKind::Problem, kind, r.target.clone())
}

pub fn build_dependency_graph(t: &AuditTuple) -> DependencyGraph {
    let m = &t.model;
    let p = &t.plan;
    let mut edges = BTreeSet::new();

    for c in &m.constraints {
        let src = ElementRef::model(ElementKind::Constraint, c.id.clone());
        let dst = match p.materialization(&c.id) {
            Some(_) => ElementRef::plan(ElementKind::CodeObject, c.id.clone()),
            None => ElementRef::plan(ElementKind::ExpectedMissing, c.id.clone()),
        };
        edges.insert(Edge { source: src.clone(), target: dst, kind: EdgeKind::Realizes });
        for term in &c.lhs {
            edges.insert(Edge {
                source: src.clone(),
                target: ElementRef::model(ElementKind::Variable, term.variable.clone()),
                kind: EdgeKind::Constrains,
            });
        }
    }
    for v in &m.variables {
        let dst = match p.registration(&v.name) {
            Some(_) => ElementRef::plan(ElementKind::CodeObject, v.name.clone()),
            None => ElementRef::plan(ElementKind::ExpectedMissing, v.name.clone()),
        };
        edges.insert(Edge {
            source: ElementRef::model(ElementKind::Variable, v.name.clone()),
            target: dst,
            kind: EdgeKind::Realizes,
        });
    }
    edges.insert(Edge {
        source: ElementRef::model(ElementKind::Objective, "objective"),
        target: ElementRef::plan(ElementKind::CodeObject, "objective"),
        kind: EdgeKind::Realizes,
    });

    if let Some(schema) = &t.problem.schema {
        for r in &schema.hard_requirements {
            let target = requirement_subject(m, r)
                .unwrap_or_else(|| ElementRef::model(ElementKind::ExpectedMissing, r.target.clone()));
            edges.insert(Edge { source: requirement_source(r), target, kind: EdgeKind::Mentions });
        }
    }

    DependencyGraph { edges: edges.into_iter().collect() }
}
