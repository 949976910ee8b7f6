use super::{Scenario, ScenarioError};

const BUILTINS: &[(&str, &str)] = &[
    ("fig3a", include_str!("../../scenarios/fig3a.toml")),
    ("fig3b", include_str!("../../scenarios/fig3b.toml")),
    ("fig4", include_str!("../../scenarios/fig4.toml")),
    ("baseline_ccn", include_str!("../../scenarios/baseline_ccn.toml")),
];

pub fn builtin_names() -> impl Iterator<Item = &'static str> {
    BUILTINS.iter().map(|(n, _)| *n)
}

/// TOML source of a built-in scenario.
pub fn builtin(name: &str) -> Option<&'static str> {
    BUILTINS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn load_builtin(name: &str) -> Result<Scenario, ScenarioError> {
    let text = builtin(name).ok_or_else(|| ScenarioError::UnknownBuiltin(name.to_string()))?;
    Scenario::from_toml(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_builtins_validate() {
        for name in builtin_names() {
            let s = load_builtin(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(s.name, name);
        }
    }

    #[test]
    fn fig4_shape() {
        let s = load_builtin("fig4").unwrap();
        assert_eq!(s.nodes.len(), 6);
        assert!(s.links.iter().all(|l| !l.schedule.is_empty()));
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(load_builtin("fig9"), Err(ScenarioError::UnknownBuiltin(_))));
    }
}
