//! Deterministic plain-text algebra for prompts and reports.

use super::types::*;

fn index_symbol(set: &str) -> String {
    set.to_lowercase()
}

/// One term without its sign.
fn term_body(m: Option<&SymbolicModel>, t: &Term, quantified: &[String]) -> String {
    let mut factors = Vec::new();
    let abs = t.coefficient.abs();
    if abs != super::Coef::one() {
        factors.push(abs.to_string());
    }
    let idx: Vec<String> = t.index.iter().map(|b| index_symbol(&b.set)).collect();
    let sub = if idx.is_empty() { String::new() } else { format!("[{}]", idx.join(",")) };
    if let Some(p) = &t.param {
        let p_sets = m.and_then(|m| m.param(p)).map(|d| d.index_sets.clone()).unwrap_or_default();
        if p_sets.is_empty() {
            factors.push(p.clone());
        } else {
            let ps: Vec<String> = p_sets.iter().map(|s| index_symbol(s)).collect();
            factors.push(format!("{p}[{}]", ps.join(",")));
        }
    }
    factors.push(format!("{}{sub}", t.variable));
    let body = factors.join("*");

    let mut sums = Vec::new();
    for b in &t.index {
        if quantified.contains(&b.set) && b.members.is_none() {
            continue;
        }
        let sym = index_symbol(&b.set);
        match &b.members {
            None => sums.push(format!("sum_{{{sym} in {}}}", b.set)),
            Some(ms) => sums.push(format!("sum_{{{sym} in {{{}}}}}", ms.join(","))),
        }
    }
    if sums.is_empty() {
        body
    } else {
        format!("{} {body}", sums.join(" "))
    }
}

fn render_terms(m: Option<&SymbolicModel>, terms: &[Term], quantified: &[String]) -> String {
    if terms.is_empty() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, t) in terms.iter().enumerate() {
        let body = term_body(m, t, quantified);
        match (i, t.coefficient.is_negative()) {
            (0, false) => out.push_str(&body),
            (0, true) => {
                out.push_str("- ");
                out.push_str(&body);
            }
            (_, false) => {
                out.push_str(" + ");
                out.push_str(&body);
            }
            (_, true) => {
                out.push_str(" - ");
                out.push_str(&body);
            }
        }
    }
    out
}

/// Renders a single term with its sign, e.g. `- 3*x`.
pub fn render_term(t: &Term) -> String {
    render_terms(None, std::slice::from_ref(t), &[])
}

pub fn render_objective(m: &SymbolicModel) -> String {
    format!("{} {}", m.objective.sense.as_str(), render_terms(Some(m), &m.objective.terms, &[]))
}

pub fn render_constraint(m: &SymbolicModel, c: &ConstraintDecl) -> String {
    let lhs = render_terms(Some(m), &c.lhs, &c.quantified_over);
    let rhs = match &c.rhs {
        Rhs::Value(v) => v.to_string(),
        Rhs::Param { param } => {
            let sets = m.param(param).map(|p| p.index_sets.clone()).unwrap_or_default();
            if sets.is_empty() {
                param.clone()
            } else {
                let s: Vec<String> = sets.iter().map(|s| index_symbol(s)).collect();
                format!("{param}[{}]", s.join(","))
            }
        }
    };
    let mut out = format!("{lhs} {} {rhs}", c.relation.symbol());
    if !c.quantified_over.is_empty() {
        let q: Vec<String> = c.quantified_over.iter().map(|s| format!("{} in {s}", index_symbol(s))).collect();
        out.push_str(&format!(" for all {}", q.join(", ")));
    }
    out
}

fn render_bounds(lo: super::ExtNum, hi: super::ExtNum) -> String {
    match (lo.is_finite(), hi.is_finite()) {
        (false, false) => String::new(),
        (true, false) => format!(", >= {lo}"),
        (false, true) => format!(", <= {hi}"),
        (true, true) => format!(", in [{lo}, {hi}]"),
    }
}

/// Full model listing: objective, constraints, variables, sets, parameters.
pub fn render_model_text(m: &SymbolicModel) -> String {
    let mut out = String::new();
    out.push_str(&render_objective(m));
    out.push('\n');
    if !m.objective.annotations.is_empty() {
        for a in &m.objective.annotations {
            out.push_str(&format!("  note: {a}\n"));
        }
    }
    out.push_str("subject to\n");
    for c in &m.constraints {
        out.push_str(&format!("  {}: {}\n", c.id, render_constraint(m, c)));
    }
    out.push_str("variables\n");
    for v in &m.variables {
        let idx = if v.index_sets.is_empty() { String::new() } else { format!("[{}]", v.index_sets.join(",")) };
        let sign = match v.sign {
            SignRestriction::Nonneg => ", nonneg",
            SignRestriction::Nonpos => ", nonpos",
            SignRestriction::Free => ", free",
        };
        out.push_str(&format!("  {}{idx}: {}{sign}{}\n", v.name, v.domain.as_str(), render_bounds(v.lower, v.upper)));
    }
    if !m.aux.sets.is_empty() {
        out.push_str("sets\n");
        for s in &m.aux.sets {
            out.push_str(&format!("  {} = {{{}}}\n", s.name, s.members.join(", ")));
        }
    }
    if !m.aux.parameters.is_empty() {
        out.push_str("parameters\n");
        for p in &m.aux.parameters {
            let idx = if p.index_sets.is_empty() { String::new() } else { format!("[{}]", p.index_sets.join(",")) };
            match &p.values {
                Some(v) => out.push_str(&format!("  {}{idx} = {v}\n", p.name)),
                None => out.push_str(&format!("  {}{idx}\n", p.name)),
            }
        }
    }
    out
}

/// Plan listing used when no raw code is available.
pub fn render_plan_text(p: &MaterializationPlan) -> String {
    let mut out = format!("backend: {}\n", p.solver_backend);
    out.push_str(&format!(
        "objective: api_sense={} coefficients={} readout_sign_correction={}\n",
        p.objective.api_sense.as_str(),
        match p.objective.coefficient_source {
            CoefficientSource::Direct => "direct",
            CoefficientSource::Negated => "negated",
        },
        p.objective.readout_sign_correction
    ));
    out.push_str("variables\n");
    for r in &p.registered_variables {
        out.push_str(&format!("  {}: {}{}\n", r.name, r.api_domain.as_str(), render_bounds(r.api_lower, r.api_upper)));
    }
    out.push_str("constraints\n");
    for c in &p.materialized_constraints {
        let cov = match &c.coverage {
            Coverage::Full => "full".to_string(),
            Coverage::Absent => "absent".to_string(),
            Coverage::Partial(tuples) => {
                let ts: Vec<String> = tuples.iter().map(|t| format!("({})", t.join(","))).collect();
                format!("partial {}", ts.join(" "))
            }
        };
        out.push_str(&format!("  {}: {cov}\n", c.id));
    }
    out.push_str(&format!(
        "readout: variables [{}], objective {}\n",
        p.readout.reported_variables.join(", "),
        match p.readout.objective_readout {
            ObjectiveReadout::SolvedValue => "solved_value",
            ObjectiveReadout::NegatedSolvedValue => "negated_solved_value",
            ObjectiveReadout::Stale => "stale",
        }
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::super::Coef;
    use super::*;

    fn term(c: i64, v: &str) -> Term {
        Term { coefficient: Coef::int(c), param: None, variable: v.into(), index: vec![] }
    }

    fn var(n: &str) -> VariableDecl {
        VariableDecl {
            name: n.into(),
            index_sets: vec![],
            domain: Domain::Continuous,
            lower: super::super::ExtNum::NegInf,
            upper: super::super::ExtNum::PosInf,
            sign: SignRestriction::Nonneg,
        }
    }

    fn model(terms: Vec<Term>, cons: Vec<ConstraintDecl>) -> SymbolicModel {
        SymbolicModel {
            objective: Objective { sense: Sense::Minimize, terms, annotations: vec![] },
            variables: vec![var("x"), var("y")],
            constraints: cons,
            aux: Aux::default(),
        }
    }

    #[test]
    fn objective_text() {
        let m = model(vec![term(2, "x"), term(3, "y")], vec![]);
        assert_eq!(render_objective(&m), "minimize 2*x + 3*y");
    }

    #[test]
    fn constraint_text() {
        let c = ConstraintDecl {
            id: "c1".into(),
            lhs: vec![term(1, "x"), term(1, "y")],
            relation: Relation::Eq,
            rhs: Rhs::Value(Coef::int(10)),
            quantified_over: vec![],
        };
        let m = model(vec![], vec![c.clone()]);
        assert_eq!(render_constraint(&m, &c), "x + y = 10");
    }

    #[test]
    fn negative_leading_and_inner() {
        let m = model(vec![term(-1, "x"), term(-4, "y")], vec![]);
        let s = render_objective(&m);
        assert_eq!(s, "minimize - x - 4*y");
        assert!(!s.contains("+-") && !s.contains("+ -"));
    }
}
