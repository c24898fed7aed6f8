//! Flat concrete automata and composed system configurations.

use std::collections::{BTreeMap, BTreeSet};

use crate::diag::{Code, Diagnostic};
use crate::formula::Formula;
use crate::signal::SignalId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcreteState {
    /// Identifier with rendered indices, e.g. `s[2]`.
    pub name: String,
    pub emits: BTreeSet<SignalId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcreteTransition {
    pub source: String,
    pub guard: Formula,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcreteAutomaton {
    /// Qualified `instance.automaton` name.
    pub name: String,
    pub states: Vec<ConcreteState>,
    pub initial: String,
    pub transitions: Vec<ConcreteTransition>,
}

impl ConcreteAutomaton {
    pub fn state(&self, name: &str) -> Option<&ConcreteState> {
        self.states.iter().find(|s| s.name == name)
    }

    pub fn outgoing<'a>(&'a self, state: &'a str) -> impl Iterator<Item = &'a ConcreteTransition> {
        self.transitions.iter().filter(move |t| t.source == state)
    }
}

/// Check the structural invariants of a concrete automaton. An empty list
/// means the automaton is well formed.
pub fn validate_automaton(a: &ConcreteAutomaton) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut seen = BTreeSet::new();
    for s in &a.states {
        if !seen.insert(s.name.as_str()) {
            diags.push(Diagnostic::error(
                Code::E_DUP_STATE,
                None,
                &s.name,
                format!("duplicate state `{}` in automaton `{}`", s.name, a.name),
            ));
        }
    }
    if !seen.contains(a.initial.as_str()) {
        diags.push(Diagnostic::error(
            Code::E_UNKNOWN_STATE,
            None,
            &a.initial,
            format!("initial state `{}` is not declared in automaton `{}`", a.initial, a.name),
        ));
    }
    for t in &a.transitions {
        for end in [&t.source, &t.target] {
            if !seen.contains(end.as_str()) {
                diags.push(Diagnostic::error(
                    Code::E_UNKNOWN_STATE,
                    None,
                    end,
                    format!("transition endpoint `{}` is not declared in automaton `{}`", end, a.name),
                ));
            }
        }
        if !t.guard.is_shortcut_free() {
            diags.push(Diagnostic::error(
                Code::E_INTERNAL,
                None,
                &t.source,
                format!("guard `{}` still contains a shortcut", t.guard),
            ));
        }
    }
    diags
}

/// A composed system: expanded automata plus the declared external inputs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SystemConfig {
    pub automata: Vec<ConcreteAutomaton>,
    pub externals: BTreeSet<SignalId>,
    /// Attribute lists attached to actual signals; metadata only.
    pub signal_attrs: BTreeMap<SignalId, Vec<String>>,
    /// Declared `alias: instance.automaton` pairs.
    pub aliases: Vec<(String, String)>,
}

impl SystemConfig {
    pub fn automaton(&self, name: &str) -> Option<&ConcreteAutomaton> {
        self.automata.iter().find(|a| a.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn aut() -> ConcreteAutomaton {
        ConcreteAutomaton {
            name: "T.A".into(),
            states: vec![
                ConcreteState { name: "S0".into(), emits: BTreeSet::new() },
                ConcreteState { name: "S1".into(), emits: BTreeSet::new() },
            ],
            initial: "S0".into(),
            transitions: vec![ConcreteTransition {
                source: "S0".into(),
                guard: Formula::True,
                target: "S1".into(),
            }],
        }
    }

    #[test]
    fn well_formed_is_clean() {
        assert!(validate_automaton(&aut()).is_empty());
    }

    #[test]
    fn unknown_endpoint_reported() {
        let mut a = aut();
        a.transitions[0].target = "X".into();
        let diags = validate_automaton(&a);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, Code::E_UNKNOWN_STATE);
        assert_eq!(diags[0].subject, "X");
    }

    #[test]
    fn duplicate_state_reported() {
        let mut a = aut();
        a.states.push(ConcreteState { name: "S0".into(), emits: BTreeSet::new() });
        let diags = validate_automaton(&a);
        assert_eq!(diags[0].code, Code::E_DUP_STATE);
        assert_eq!(diags[0].subject, "S0");
    }
}
