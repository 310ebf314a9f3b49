use super::types::*;

/// Faithful plan for `model`: every element registered and fully built with
/// the model's own domains, bounds and sense. Raw code is not produced.
pub fn materialize(model: &SymbolicModel, solver_backend: &str) -> MaterializationPlan {
    MaterializationPlan {
        registered_variables: model
            .variables
            .iter()
            .map(|v| {
                let (lo, hi) = v.effective_bounds();
                RegisteredVariable { name: v.name.clone(), api_domain: v.domain, api_lower: lo, api_upper: hi }
            })
            .collect(),
        materialized_constraints: model
            .constraints
            .iter()
            .map(|c| MaterializedConstraint { id: c.id.clone(), coverage: Coverage::Full })
            .collect(),
        objective: PlanObjective {
            api_sense: model.objective.sense,
            coefficient_source: CoefficientSource::Direct,
            readout_sign_correction: false,
        },
        solver_backend: solver_backend.to_string(),
        readout: Readout {
            reported_variables: model.variables.iter().map(|v| v.name.clone()).collect(),
            objective_readout: ObjectiveReadout::SolvedValue,
        },
        raw_code: None,
    }
}
