//! Randomized invariants: formula evaluation laws, determinism analysis
//! against a brute-force oracle, and round-trip/renaming stability of the
//! expander across the whole builtin library.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use proptest::prelude::*;

use csm::analyze::{check_determinism, emit_flat};
use csm::automaton::{validate_automaton, ConcreteAutomaton, ConcreteState, ConcreteTransition};
use csm::expand::{convenience_system, expand_system};
use csm::parser::parse_flat;
use csm::signal::{SignalId, Valuation};
use csm::stdlib::load_builtin;
use csm::Formula;

fn sig(i: usize) -> SignalId {
    SignalId::scalar(format!("s{}", i))
}

fn formula_strategy() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        Just(Formula::True),
        Just(Formula::False),
        (0usize..4).prop_map(|i| Formula::Ref(sig(i))),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            prop::collection::vec(inner.clone(), 0..3).prop_map(Formula::and),
            prop::collection::vec(inner, 0..3).prop_map(Formula::or),
        ]
    })
}

fn valuation_strategy() -> impl Strategy<Value = Valuation> {
    prop::collection::btree_set((0usize..4).prop_map(sig as fn(usize) -> SignalId), 0..4)
        .prop_map(|asserted| Valuation { asserted })
}

proptest! {
    #[test]
    fn negation_flips_evaluation(f in formula_strategy(), v in valuation_strategy()) {
        let plain = f.eval(&v).unwrap();
        let negated = Formula::not(f).eval(&v).unwrap();
        prop_assert_eq!(negated, !plain);
    }

    #[test]
    fn de_morgan(f in formula_strategy(), g in formula_strategy(), v in valuation_strategy()) {
        let lhs = Formula::not(Formula::and(vec![f.clone(), g.clone()])).eval(&v).unwrap();
        let rhs = Formula::or(vec![Formula::not(f), Formula::not(g)]).eval(&v).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn rendering_round_trips_signals(f in formula_strategy()) {
        // The precedence-aware renderer must mention exactly the signals the
        // formula references (True/False render as `1`/`0`).
        let text = f.to_string();
        for s in f.signals() {
            prop_assert!(text.contains(&s.to_string()), "{} missing from `{}`", s, text);
        }
    }
}

fn automaton_strategy() -> impl Strategy<Value = ConcreteAutomaton> {
    let trans = (0usize..3, formula_strategy(), 0usize..3)
        .prop_map(|(a, g, b)| ConcreteTransition { source: format!("Q{}", a), guard: g, target: format!("Q{}", b) });
    prop::collection::vec(trans, 0..7).prop_map(|transitions| ConcreteAutomaton {
        name: "P.A".into(),
        states: (0..3).map(|i| ConcreteState { name: format!("Q{}", i), emits: BTreeSet::new() }).collect(),
        initial: "Q0".into(),
        transitions,
    })
}

/// All 16 valuations over the four-signal pool used by the strategies.
fn all_valuations() -> Vec<Valuation> {
    (0u32..16)
        .map(|mask| (0..4).filter(|i| mask & (1 << i) != 0).map(sig).collect())
        .collect()
}

proptest! {
    #[test]
    fn determinism_matches_bruteforce(a in automaton_strategy()) {
        let report = check_determinism(&a).unwrap();
        // Each reported witness really satisfies both guards.
        for o in &report.overlaps {
            let first = &a.transitions[o.first];
            let second = &a.transitions[o.second];
            prop_assert_eq!(&first.source, &o.state);
            prop_assert_eq!(&second.source, &o.state);
            prop_assert_ne!(&first.target, &second.target);
            prop_assert!(first.guard.eval(&o.witness).unwrap());
            prop_assert!(second.guard.eval(&o.witness).unwrap());
        }
        // The set of reported pairs equals exhaustive enumeration over the
        // full signal pool.
        let reported: BTreeSet<(usize, usize)> =
            report.overlaps.iter().map(|o| (o.first, o.second)).collect();
        let mut expected = BTreeSet::new();
        for i in 0..a.transitions.len() {
            for j in i + 1..a.transitions.len() {
                let (t, u) = (&a.transitions[i], &a.transitions[j]);
                if t.source != u.source || t.target == u.target {
                    continue;
                }
                if all_valuations()
                    .iter()
                    .any(|v| t.guard.eval(v).unwrap() && u.guard.eval(v).unwrap())
                {
                    expected.insert((i, j));
                }
            }
        }
        prop_assert_eq!(reported, expected);
    }
}

fn builtin_cases() -> Vec<(&'static str, i64)> {
    let full = ["COUNTER", "NEW_COUNTER", "SET_COUNTER", "DETERMINISTIC_COUNTER", "ARBITER", "SWITCH"];
    let mut cases = Vec::new();
    for name in full {
        // SWITCH needs at least two clients: its release guard quantifies
        // over rq[1..N-1], which is empty at N=1.
        let lo = if name == "SWITCH" { 2 } else { 1 };
        for n in lo..=8 {
            cases.push((name, n));
        }
    }
    cases
}

fn expand_instance(name: &str, n: i64, instance: &str) -> csm::SystemConfig {
    let m = load_builtin(name).unwrap();
    let numeric = BTreeMap::from([("N".to_string(), n)]);
    let sys = convenience_system(&m, &numeric, instance, None).unwrap();
    expand_system(&sys, std::slice::from_ref(&m)).unwrap()
}

#[test]
fn builtins_expand_cleanly_across_sizes() {
    for (name, n) in builtin_cases() {
        let cfg = expand_instance(name, n, "I");
        for a in &cfg.automata {
            let diags = validate_automaton(a);
            assert!(diags.is_empty(), "{}(N={}): {:?}", name, n, diags);
            assert!(a.transitions.iter().all(|t| t.guard.is_shortcut_free()));
        }
    }
}

#[test]
fn flat_round_trip_is_a_fixpoint_for_all_builtins() {
    for (name, n) in builtin_cases() {
        let cfg = expand_instance(name, n, "I");
        let first = emit_flat(&cfg);
        let reparsed = parse_flat(&first).unwrap_or_else(|d| panic!("{}(N={}): {:?}", name, n, d));
        let second = emit_flat(&reparsed);
        assert_eq!(first, second, "{}(N={})", name, n);
    }
}

#[test]
fn expansion_commutes_with_instance_renaming() {
    // Expanding under instance name B must equal expanding under A with the
    // instance prefix (qualified automaton names, internal-signal prefixes)
    // textually substituted.
    for (name, n) in builtin_cases() {
        let a = emit_flat(&expand_instance(name, n, "A"));
        let b = emit_flat(&expand_instance(name, n, "B"));
        let renamed = a.replace("A.", "B.").replace("A__", "B__");
        assert_eq!(renamed, b, "{}(N={})", name, n);
    }
}
