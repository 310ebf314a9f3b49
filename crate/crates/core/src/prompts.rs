//! Prompt templates, one file per role. The bundled set is compiled in; a
//! directory override replaces any file it contains.

use std::path::Path;

use crate::taxonomy::FamilyId;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PromptSet {
    pub conductor: String,
    pub conductor_review: String,
    pub objective: String,
    pub variable: String,
    pub constraint: String,
    pub implementation: String,
    pub final_judge: String,
    pub visualization: String,
    pub single_agent_system: String,
    pub single_agent_user: String,
}

const FILES: [&str; 10] = [
    "conductor",
    "conductor_review",
    "objective",
    "variable",
    "constraint",
    "implementation",
    "final_judge",
    "visualization",
    "single_agent_system",
    "single_agent_user",
];

impl PromptSet {
    pub fn bundled() -> PromptSet {
        PromptSet {
            conductor: include_str!("../prompts/conductor.txt").to_string(),
            conductor_review: include_str!("../prompts/conductor_review.txt").to_string(),
            objective: include_str!("../prompts/objective.txt").to_string(),
            variable: include_str!("../prompts/variable.txt").to_string(),
            constraint: include_str!("../prompts/constraint.txt").to_string(),
            implementation: include_str!("../prompts/implementation.txt").to_string(),
            final_judge: include_str!("../prompts/final_judge.txt").to_string(),
            visualization: include_str!("../prompts/visualization.txt").to_string(),
            single_agent_system: include_str!("../prompts/single_agent_system.txt").to_string(),
            single_agent_user: include_str!("../prompts/single_agent_user.txt").to_string(),
        }
    }

    /// Bundled prompts with `<dir>/<role>.txt` overrides applied.
    pub fn load(dir: Option<&Path>) -> std::io::Result<PromptSet> {
        let mut set = PromptSet::bundled();
        let Some(dir) = dir else { return Ok(set) };
        for name in FILES {
            let path = dir.join(format!("{name}.txt"));
            if path.is_file() {
                *set.slot(name) = std::fs::read_to_string(&path)?;
            }
        }
        Ok(set)
    }

    fn slot(&mut self, name: &str) -> &mut String {
        match name {
            "conductor" => &mut self.conductor,
            "conductor_review" => &mut self.conductor_review,
            "objective" => &mut self.objective,
            "variable" => &mut self.variable,
            "constraint" => &mut self.constraint,
            "implementation" => &mut self.implementation,
            "final_judge" => &mut self.final_judge,
            "visualization" => &mut self.visualization,
            "single_agent_system" => &mut self.single_agent_system,
            _ => &mut self.single_agent_user,
        }
    }

    pub fn specialist(&self, family: FamilyId) -> &str {
        match family {
            FamilyId::Objective => &self.objective,
            FamilyId::Variable => &self.variable,
            FamilyId::Constraint => &self.constraint,
            FamilyId::Implementation => &self.implementation,
        }
    }
}

/// Replaces each `{key}` with its value. Unknown braces are left alone.
pub fn fill(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = template.to_string();
    for (k, v) in vars {
        out = out.replace(&format!("{{{k}}}"), v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn specialist_templates_have_placeholders() {
        let p = PromptSet::bundled();
        for f in FamilyId::ALL {
            let t = p.specialist(f);
            assert!(t.contains("{taxonomy_block}") && t.contains("{max_findings}"), "{f}");
        }
        assert!(p.single_agent_system.contains("{taxonomy_tree}"));
        assert!(p.single_agent_user.contains("{problem_text}"));
    }

    #[test]
    fn override_directory() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("objective.txt"), "custom {max_findings}").unwrap();
        let p = PromptSet::load(Some(dir.path())).unwrap();
        assert_eq!(fill(&p.objective, &[("max_findings", "2")]), "custom 2");
        assert_eq!(p.variable, PromptSet::bundled().variable);
    }
}
