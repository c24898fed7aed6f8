//! Embedded, normalized sources of the standard library modules, plus
//! independent reference oracles used by the test suite.

use std::collections::BTreeSet;

use crate::ast::ModuleAst;
use crate::diag::{Code, Diagnostic};
use crate::parser::parse_library;
use crate::signal::{SignalId, Valuation};

/// One embedded library module.
#[derive(Debug, Clone, Copy)]
pub struct BuiltinEntry {
    pub name: &'static str,
    pub source: &'static str,
    /// Erratum fixes applied to the published table, if any.
    pub notes: &'static [&'static str],
    /// Interface stub without transition tables; loadable but not
    /// expandable.
    pub header_only: bool,
}

const HEADERS: &str = include_str!("../stdlib/headers.csml");

pub const BUILTINS: &[BuiltinEntry] = &[
    BuiltinEntry {
        name: "COUNTER",
        source: include_str!("../stdlib/counter.csml"),
        notes: &["%-prefixes added to formal signals"],
        header_only: false,
    },
    BuiltinEntry {
        name: "NEW_COUNTER",
        source: include_str!("../stdlib/new_counter.csml"),
        notes: &[
            "%-prefixes added to formal signals",
            "implicit conjunction `inc¬dec` written as `inc*~dec`",
        ],
        header_only: false,
    },
    BuiltinEntry {
        name: "SET_COUNTER",
        source: include_str!("../stdlib/set_counter.csml"),
        notes: &[
            "%-prefixes added to formal signals",
            "stray `ERR--{1}-->ERR` line dropped (no ERR state or err output declared)",
            "implicit conjunction `inc¬dec` written as `inc*~dec`",
        ],
        header_only: false,
    },
    BuiltinEntry {
        name: "DETERMINISTIC_COUNTER",
        source: include_str!("../stdlib/deterministic_counter.csml"),
        notes: &[
            "%-prefixes added to formal signals",
            "`ε(s[l=0..N-1])` in the decrement guard read as `ε(set[l=0..N-1])` like every sibling rule",
            "state indices made consistent with their range binders (`s[l]` under `[i=...]` read as `s[i]`)",
        ],
        header_only: false,
    },
    BuiltinEntry {
        name: "ARBITER",
        source: include_str!("../stdlib/arbiter.csml"),
        notes: &[
            "%-prefixes added to formal signals",
            "hold rule `GT[j] --{ ¬rel[l] }--> GT[l]` read as the self-loop `GT[l]` (the only reading with all indices bound)",
            "trailing `*` dropped from the release guard `rel[l]*`",
        ],
        header_only: false,
    },
    BuiltinEntry {
        name: "SWITCH",
        source: include_str!("../stdlib/switch.csml"),
        notes: &[
            "%-prefixes added to formal signals",
            "release guard `ε(rq[j=1..N-1])` kept verbatim although the 1 looks like a typo for 0",
        ],
        header_only: false,
    },
    BuiltinEntry { name: "X", source: HEADERS, notes: &[], header_only: true },
    BuiltinEntry { name: "IL", source: HEADERS, notes: &[], header_only: true },
    BuiltinEntry { name: "ID", source: HEADERS, notes: &[], header_only: true },
    BuiltinEntry { name: "IB", source: HEADERS, notes: &[], header_only: true },
];

pub fn builtin_entry(name: &str) -> Option<&'static BuiltinEntry> {
    BUILTINS.iter().find(|b| b.name == name)
}

/// Parse one builtin module. Header-only entries load fine here; the
/// expander rejects them with E_HEADER_ONLY.
pub fn load_builtin(name: &str) -> Result<ModuleAst, Diagnostic> {
    let entry = builtin_entry(name).ok_or_else(|| {
        Diagnostic::error(Code::E_UNKNOWN_BUILTIN, None, name, format!("unknown builtin module `{}`", name))
    })?;
    let modules = parse_library(entry.source).map_err(|ds| {
        Diagnostic::error(
            Code::E_INTERNAL,
            None,
            name,
            format!("embedded source for `{}` failed to parse: {}", name, ds[0]),
        )
    })?;
    modules
        .into_iter()
        .find(|m| m.name == name)
        .ok_or_else(|| Diagnostic::error(Code::E_INTERNAL, None, name, format!("builtin `{}` missing from its source", name)))
}

/// All builtin modules, parsed, in registry order.
pub fn builtin_library() -> Vec<ModuleAst> {
    let mut out = Vec::new();
    for entry in BUILTINS {
        let m = load_builtin(entry.name).expect("embedded builtins parse");
        if !out.iter().any(|x: &ModuleAst| x.name == m.name) {
            out.push(m);
        }
    }
    out
}

/// Abstract counter state for the reference oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CounterState {
    Val(i64),
    Under,
    Over,
}

impl CounterState {
    /// The concrete state name this abstract state corresponds to.
    pub fn state_name(&self) -> String {
        match self {
            CounterState::Val(v) => format!("s[{}]", v),
            CounterState::Under => "UNDER".to_string(),
            CounterState::Over => "OVER".to_string(),
        }
    }
}

/// Direct integer semantics of COUNTER: start at 0; inc alone increments
/// (N-1 overflows), dec alone decrements (0 underflows), both or neither
/// leave the value unchanged; UNDER and OVER absorb everything.
pub fn counter_oracle(n: i64, trace: &[Valuation]) -> Vec<CounterState> {
    assert!(n >= 1);
    let inc = SignalId::scalar("inc");
    let dec = SignalId::scalar("dec");
    let mut cur = CounterState::Val(0);
    let mut out = Vec::with_capacity(trace.len());
    for inputs in trace {
        cur = match cur {
            CounterState::Under | CounterState::Over => cur,
            CounterState::Val(v) => match (inputs.contains(&inc), inputs.contains(&dec)) {
                (true, false) => {
                    if v == n - 1 {
                        CounterState::Over
                    } else {
                        CounterState::Val(v + 1)
                    }
                }
                (false, true) => {
                    if v == 0 {
                        CounterState::Under
                    } else {
                        CounterState::Val(v - 1)
                    }
                }
                _ => cur,
            },
        };
        out.push(cur);
    }
    out
}

/// Abstract arbiter state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ArbState {
    Idle,
    Gt(i64),
}

impl ArbState {
    pub fn state_name(&self) -> String {
        match self {
            ArbState::Idle => "IDLE".to_string(),
            ArbState::Gt(i) => format!("GT[{}]", i),
        }
    }
}

/// Set-valued arbiter semantics: from IDLE any requested index may be
/// granted; a grant holds until its release, which returns to IDLE. The
/// result lists the set of possible states after each step.
pub fn arbiter_oracle(n: i64, trace: &[Valuation]) -> Vec<BTreeSet<ArbState>> {
    assert!(n >= 1);
    let mut frontier = BTreeSet::from([ArbState::Idle]);
    let mut out = Vec::with_capacity(trace.len());
    for inputs in trace {
        let requested: Vec<i64> = (0..n)
            .filter(|i| inputs.contains(&SignalId::indexed("rq", vec![*i])))
            .collect();
        let mut next = BTreeSet::new();
        for state in &frontier {
            match state {
                ArbState::Idle => {
                    if requested.is_empty() {
                        next.insert(ArbState::Idle);
                    } else {
                        next.extend(requested.iter().map(|i| ArbState::Gt(*i)));
                    }
                }
                ArbState::Gt(i) => {
                    if inputs.contains(&SignalId::indexed("rel", vec![*i])) {
                        next.insert(ArbState::Idle);
                    } else {
                        next.insert(ArbState::Gt(*i));
                    }
                }
            }
        }
        out.push(next.clone());
        frontier = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Shape;
    use crate::check::check_module;

    fn val(names: &[&str]) -> Valuation {
        names.iter().map(|n| SignalId::parse(n).unwrap()).collect()
    }

    #[test]
    fn all_builtins_load_and_check_clean() {
        for entry in BUILTINS {
            let m = load_builtin(entry.name).unwrap();
            assert_eq!(m.is_header_only(), entry.header_only, "{}", entry.name);
            let diags = check_module(&m);
            assert!(diags.is_empty(), "{}: {:?}", entry.name, diags);
        }
    }

    #[test]
    fn counter_shape_matches_published_header() {
        let m = load_builtin("COUNTER").unwrap();
        assert_eq!(m.numeric_params, vec!["N"]);
        let names: Vec<&str> = m.formal_signals.iter().map(|f| f.name.as_str()).collect();
        assert_eq!(names, vec!["inc", "dec", "under", "over", "c"]);
        assert!(matches!(m.formal("c").unwrap().shape, Shape::Vector(_)));
    }

    #[test]
    fn switch_has_five_rules() {
        let m = load_builtin("SWITCH").unwrap();
        assert_eq!(m.automata[0].transitions.len(), 5);
    }

    #[test]
    fn unknown_builtin() {
        assert_eq!(load_builtin("NOPE").unwrap_err().code, Code::E_UNKNOWN_BUILTIN);
    }

    #[test]
    fn counter_oracle_examples() {
        let states = counter_oracle(2, &[val(&["inc"]), val(&["inc"]), val(&["inc"])]);
        assert_eq!(states, vec![CounterState::Val(1), CounterState::Over, CounterState::Over]);
        assert_eq!(counter_oracle(3, &[val(&["inc", "dec"])]), vec![CounterState::Val(0)]);
        assert_eq!(counter_oracle(1, &[val(&["dec"])]), vec![CounterState::Under]);
    }

    #[test]
    fn arbiter_oracle_examples() {
        assert_eq!(arbiter_oracle(2, &[val(&["rq[0]"])]), vec![BTreeSet::from([ArbState::Gt(0)])]);
        assert_eq!(
            arbiter_oracle(2, &[val(&["rq[0]", "rq[1]"])]),
            vec![BTreeSet::from([ArbState::Gt(0), ArbState::Gt(1)])]
        );
        assert_eq!(arbiter_oracle(2, &[Valuation::new()]), vec![BTreeSet::from([ArbState::Idle])]);
    }
}
