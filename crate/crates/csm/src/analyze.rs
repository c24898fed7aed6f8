//! Execution and verification over expanded systems: synchronous stepping,
//! bounded exhaustive exploration, guard-determinism checking, and the DOT
//! and flat exporters.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::automaton::{ConcreteAutomaton, SystemConfig};
use crate::diag::{Code, Diagnostic};
use crate::signal::{SignalId, Valuation};

/// Per-automaton current state names, in the system's automaton order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SystemState(pub Vec<String>);

impl fmt::Display for SystemState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct StepResult {
    pub next: SystemState,
    /// Emissions of the next configuration.
    pub emitted: BTreeSet<SignalId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    /// First enabled transition in declaration order.
    Deterministic,
    /// Every combination of enabled choices.
    All,
}

pub fn initial_state(sys: &SystemConfig) -> SystemState {
    SystemState(sys.automata.iter().map(|a| a.initial.clone()).collect())
}

fn emissions_of(sys: &SystemConfig, state: &SystemState) -> BTreeSet<SignalId> {
    let mut out = BTreeSet::new();
    for (a, name) in sys.automata.iter().zip(&state.0) {
        if let Some(s) = a.state(name) {
            out.extend(s.emits.iter().cloned());
        }
    }
    out
}

/// One synchronous step: all automata move simultaneously under the
/// valuation formed by the external inputs plus the current states'
/// emissions. An automaton with no enabled transition stays in place.
pub fn step(
    sys: &SystemConfig,
    cur: &SystemState,
    inputs: &Valuation,
    policy: Policy,
) -> Result<Vec<StepResult>, Diagnostic> {
    for s in &inputs.asserted {
        if !sys.externals.contains(s) {
            return Err(Diagnostic::error(
                Code::E_NOT_EXTERNAL,
                None,
                s.to_string(),
                format!("input `{}` is not a declared EXTERNAL signal", s),
            ));
        }
    }
    let mut valuation = inputs.clone();
    valuation.asserted.extend(emissions_of(sys, cur));

    // per automaton, the set of possible next states
    let mut choices: Vec<Vec<String>> = Vec::new();
    for (a, name) in sys.automata.iter().zip(&cur.0) {
        let mut enabled = Vec::new();
        for t in a.outgoing(name) {
            if t.guard.eval(&valuation)? {
                match policy {
                    Policy::Deterministic => {
                        enabled.push(t.target.clone());
                        break;
                    }
                    Policy::All => {
                        if !enabled.contains(&t.target) {
                            enabled.push(t.target.clone());
                        }
                    }
                }
            }
        }
        if enabled.is_empty() {
            enabled.push(name.clone());
        }
        choices.push(enabled);
    }

    // Cartesian product over the per-automaton choices
    let mut nexts: Vec<Vec<String>> = vec![Vec::new()];
    for c in &choices {
        let mut grown = Vec::with_capacity(nexts.len() * c.len());
        for prefix in &nexts {
            for target in c {
                let mut v = prefix.clone();
                v.push(target.clone());
                grown.push(v);
            }
        }
        nexts = grown;
    }

    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for v in nexts {
        let next = SystemState(v);
        if seen.insert(next.clone()) {
            let emitted = emissions_of(sys, &next);
            out.push(StepResult { next, emitted });
        }
    }
    Ok(out)
}

/// Fold deterministic steps over an input trace from the initial
/// configuration.
pub fn simulate(sys: &SystemConfig, trace: &[Valuation]) -> Result<Vec<StepResult>, Diagnostic> {
    let mut cur = initial_state(sys);
    let mut out = Vec::new();
    for inputs in trace {
        let mut results = step(sys, &cur, inputs, Policy::Deterministic)?;
        let r = results.pop().expect("deterministic step yields one result");
        cur = r.next.clone();
        out.push(r);
    }
    Ok(out)
}

pub const DEFAULT_BUDGET: usize = 1_000_000;

/// Bounded reachability graph rooted at the initial configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachGraph {
    pub root: SystemState,
    /// Node -> depth at which it was first reached.
    pub nodes: BTreeMap<SystemState, u32>,
    pub edges: BTreeSet<(SystemState, BTreeSet<SignalId>, SystemState)>,
    pub depth: u32,
}

/// Breadth-first closure over all subsets of the external alphabet and
/// all nondeterministic choices, up to `depth` steps. Nodes plus edges are
/// capped by `budget`.
pub fn explore(sys: &SystemConfig, depth: u32, budget: usize) -> Result<ReachGraph, Diagnostic> {
    let alphabet: Vec<SignalId> = sys.externals.iter().cloned().collect();
    let root = initial_state(sys);
    let mut nodes = BTreeMap::new();
    nodes.insert(root.clone(), 0u32);
    let mut edges: BTreeSet<(SystemState, BTreeSet<SignalId>, SystemState)> = BTreeSet::new();
    let mut frontier = vec![root.clone()];
    for d in 0..depth {
        if frontier.is_empty() {
            break;
        }
        let mut next_frontier = Vec::new();
        for cur in &frontier {
            for mask in 0u64..(1u64 << alphabet.len()) {
                let inputs: Valuation = alphabet
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, s)| s.clone())
                    .collect();
                for r in step(sys, cur, &inputs, Policy::All)? {
                    edges.insert((cur.clone(), inputs.asserted.clone(), r.next.clone()));
                    if !nodes.contains_key(&r.next) {
                        nodes.insert(r.next.clone(), d + 1);
                        next_frontier.push(r.next);
                    }
                    if nodes.len() + edges.len() > budget {
                        return Err(Diagnostic::error(
                            Code::E_BUDGET_EXCEEDED,
                            None,
                            budget.to_string(),
                            format!("exploration exceeded the budget of {} nodes and edges", budget),
                        ));
                    }
                }
            }
        }
        frontier = next_frontier;
    }
    Ok(ReachGraph { root, nodes, edges, depth })
}

/// Line-oriented exploration report: `STATE <tuple>` then
/// `EDGE <from> --<inputs>--> <to>` lines, canonically ordered.
pub fn render_reach(g: &ReachGraph) -> String {
    let mut out = String::new();
    for node in g.nodes.keys() {
        out.push_str(&format!("STATE {}\n", node));
    }
    for (from, inputs, to) in &g.edges {
        let names: Vec<String> = inputs.iter().map(|s| s.to_string()).collect();
        out.push_str(&format!("EDGE {} --{{{}}}--> {}\n", from, names.join(", "), to));
    }
    out
}

/// A jointly satisfiable pair of outgoing guards with different targets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Overlap {
    pub state: String,
    /// Indices into the automaton's transition list.
    pub first: usize,
    pub second: usize,
    pub witness: Valuation,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OverlapReport {
    pub overlaps: Vec<Overlap>,
}

impl OverlapReport {
    pub fn is_empty(&self) -> bool {
        self.overlaps.is_empty()
    }
}

const SIGNAL_CAP: usize = 20;

/// Report every unordered pair of outgoing transitions of one state that
/// lead to different targets yet are satisfied by a common valuation.
/// Pairs with the same target are not overlaps: whichever fires, the
/// automaton ends up in the same place.
pub fn check_determinism(a: &ConcreteAutomaton) -> Result<OverlapReport, Diagnostic> {
    let mut report = OverlapReport::default();
    for s in &a.states {
        let outgoing: Vec<usize> = a
            .transitions
            .iter()
            .enumerate()
            .filter(|(_, t)| t.source == s.name)
            .map(|(i, _)| i)
            .collect();
        let mut union = BTreeSet::new();
        for &i in &outgoing {
            union.extend(a.transitions[i].guard.signals());
        }
        if union.len() > SIGNAL_CAP {
            return Err(Diagnostic::error(
                Code::E_TOO_MANY_SIGNALS,
                None,
                &s.name,
                format!(
                    "state `{}` guards reference {} signals, above the enumeration cap of {}",
                    s.name,
                    union.len(),
                    SIGNAL_CAP
                ),
            ));
        }
        for (k, &i) in outgoing.iter().enumerate() {
            for &j in &outgoing[k + 1..] {
                let (ti, tj) = (&a.transitions[i], &a.transitions[j]);
                if ti.target == tj.target {
                    continue;
                }
                let mut signals: Vec<SignalId> = ti.guard.signals().into_iter().collect();
                for extra in tj.guard.signals() {
                    if !signals.contains(&extra) {
                        signals.push(extra);
                    }
                }
                signals.sort();
                if let Some(witness) = joint_witness(ti, tj, &signals)? {
                    report.overlaps.push(Overlap { state: s.name.clone(), first: i, second: j, witness });
                }
            }
        }
    }
    Ok(report)
}

fn joint_witness(
    ti: &crate::automaton::ConcreteTransition,
    tj: &crate::automaton::ConcreteTransition,
    signals: &[SignalId],
) -> Result<Option<Valuation>, Diagnostic> {
    for mask in 0u64..(1u64 << signals.len()) {
        let v: Valuation = signals
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, s)| s.clone())
            .collect();
        if ti.guard.eval(&v)? && tj.guard.eval(&v)? {
            return Ok(Some(v));
        }
    }
    Ok(None)
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz DOT for a whole system: states as nodes labeled
/// `name / emissions`, guards as edge labels, the initial state marked by
/// an arrow from a point node.
pub fn emit_dot(sys: &SystemConfig) -> String {
    let mut out = String::from("digraph {\n");
    if !sys.automata.is_empty() {
        out.push_str("  rankdir=LR;\n");
    }
    for a in &sys.automata {
        let node_id = |state: &str| format!("{}/{}", a.name, state);
        for s in &a.states {
            let mut label = s.name.clone();
            if !s.emits.is_empty() {
                let emits: Vec<String> = s.emits.iter().map(|e| e.to_string()).collect();
                label.push_str(&format!(" / {}", emits.join(", ")));
            }
            out.push_str(&format!("  \"{}\" [label=\"{}\"];\n", dot_escape(&node_id(&s.name)), dot_escape(&label)));
        }
        let init_id = format!("{}/__init", a.name);
        out.push_str(&format!("  \"{}\" [shape=point, label=\"\"];\n", dot_escape(&init_id)));
        out.push_str(&format!("  \"{}\" -> \"{}\";\n", dot_escape(&init_id), dot_escape(&node_id(&a.initial))));
        for t in &a.transitions {
            out.push_str(&format!(
                "  \"{}\" -> \"{}\" [label=\"{}\"];\n",
                dot_escape(&node_id(&t.source)),
                dot_escape(&node_id(&t.target)),
                dot_escape(&t.guard.to_string())
            ));
        }
    }
    out.push_str("}\n");
    out
}

/// Canonical flat listing, re-parseable by `parser::parse_flat` and
/// byte-stable across runs. States are listed sorted by name; transitions
/// keep expansion order.
pub fn emit_flat(sys: &SystemConfig) -> String {
    let mut out = String::new();
    if !sys.externals.is_empty() {
        let names: Vec<String> = sys.externals.iter().map(|s| s.to_string()).collect();
        out.push_str(&format!("EXTERNAL {}\n", names.join(", ")));
    }
    for a in &sys.automata {
        out.push_str(&format!("AUTOMATON {}\n", a.name));
        let mut states = a.states.clone();
        states.sort_by(|x, y| x.name.cmp(&y.name));
        let rendered: Vec<String> = states
            .iter()
            .map(|s| {
                let mut line = s.name.clone();
                if !s.emits.is_empty() {
                    let emits: Vec<String> = s.emits.iter().map(|e| e.to_string()).collect();
                    line.push_str(&format!("/{}", emits.join(",")));
                }
                line
            })
            .collect();
        // a single STATES group is ambiguous when emitting and bare states
        // mix (a bare element after an emitting one would read as another
        // emission), so fall back to one group per state in that case
        let emitting = states.iter().filter(|s| !s.emits.is_empty()).count();
        if emitting == 0 || emitting == states.len() {
            out.push_str(&format!("STATES ({})\n", rendered.join(", ")));
        } else {
            for line in &rendered {
                out.push_str(&format!("STATES ({})\n", line));
            }
        }
        out.push_str(&format!("init {}\n", a.initial));
        out.push_str("TRANS\n");
        for t in &a.transitions {
            out.push_str(&format!("{} --{{ {} }}--> {}\n", t.source, t.guard, t.target));
        }
        out.push_str("END\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expand::{convenience_system, expand_system};
    use crate::parser::{parse_flat, parse_library};
    use std::collections::BTreeMap;

    const COUNTER: &str = "\
MODULE COUNTER(%[N], in %dec, in %inc, out %under, out %over, out %c[0..N-1])
AUTOMATON A
STATES [l=0..N-1] (s[l]/c[l], UNDER/under, OVER/over)
init s[0]
TRANS
[l=0..N-2] s[l] --{ inc*~dec }--> s[l+1]
[l=1..N-1] s[l] --{ dec*~inc }--> s[l-1]
[l=0..N-1] s[l] --{ inc*dec + ~inc*~dec }--> s[l]
s[0] --{ dec*~inc }--> UNDER
s[N-1] --{ inc*~dec }--> OVER
UNDER --{ 1 }--> UNDER
OVER --{ 1 }--> OVER
END
END
";

    fn counter_config(n: i64) -> SystemConfig {
        let m = &parse_library(COUNTER).unwrap()[0];
        let numeric = BTreeMap::from([("N".to_string(), n)]);
        let sys = convenience_system(m, &numeric, "C", None).unwrap();
        expand_system(&sys, std::slice::from_ref(m)).unwrap()
    }

    fn inputs(names: &[&str]) -> Valuation {
        names.iter().map(|n| SignalId::scalar(*n)).collect()
    }

    #[test]
    fn counter_sizes_match_hand_expansion() {
        let sys = counter_config(3);
        let a = &sys.automata[0];
        assert_eq!(a.name, "C.A");
        assert_eq!(a.states.len(), 5);
        assert_eq!(a.transitions.len(), 11);
        assert_eq!(a.initial, "s[0]");
    }

    #[test]
    fn simulate_counter_to_overflow() {
        // hand trace: s[0] -> s[1] -> OVER -> OVER
        let sys = counter_config(2);
        let trace = vec![inputs(&["inc"]), inputs(&["inc"]), inputs(&["inc"])];
        let states: Vec<String> = simulate(&sys, &trace).unwrap().into_iter().map(|r| r.next.0[0].clone()).collect();
        assert_eq!(states, vec!["s[1]", "OVER", "OVER"]);
    }

    #[test]
    fn simultaneous_inc_dec_stays_put() {
        let sys = counter_config(3);
        let results = simulate(&sys, &[inputs(&["inc"]), inputs(&["inc", "dec"])]).unwrap();
        assert_eq!(results[1].next.0[0], "s[1]");
    }

    #[test]
    fn step_emits_next_state_outputs() {
        let sys = counter_config(3);
        let cur = SystemState(vec!["s[1]".into()]);
        let r = step(&sys, &cur, &inputs(&["inc"]), Policy::Deterministic).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].next.0[0], "s[2]");
        assert!(r[0].emitted.contains(&SignalId::indexed("c", vec![2])));
    }

    #[test]
    fn undeclared_input_rejected() {
        let sys = counter_config(2);
        let err = step(&sys, &initial_state(&sys), &inputs(&["bogus"]), Policy::Deterministic).unwrap_err();
        assert_eq!(err.code, Code::E_NOT_EXTERNAL);
    }

    #[test]
    fn explore_reaches_all_counter_states() {
        let sys = counter_config(2);
        let g = explore(&sys, 6, DEFAULT_BUDGET).unwrap();
        let names: BTreeSet<&str> = g.nodes.keys().map(|n| n.0[0].as_str()).collect();
        assert_eq!(names, BTreeSet::from(["OVER", "UNDER", "s[0]", "s[1]"]));
    }

    #[test]
    fn explore_depth_zero_is_just_the_root() {
        let sys = counter_config(2);
        let g = explore(&sys, 0, DEFAULT_BUDGET).unwrap();
        assert_eq!(g.nodes.len(), 1);
        assert!(g.edges.is_empty());
    }

    #[test]
    fn explore_budget_enforced() {
        let sys = counter_config(2);
        let err = explore(&sys, 6, 3).unwrap_err();
        assert_eq!(err.code, Code::E_BUDGET_EXCEEDED);
    }

    #[test]
    fn counter_is_deterministic() {
        let sys = counter_config(3);
        let report = check_determinism(&sys.automata[0]).unwrap();
        assert!(report.is_empty(), "unexpected overlaps: {:?}", report.overlaps);
    }

    #[test]
    fn overlapping_guards_found_with_witness() {
        use crate::automaton::{ConcreteState, ConcreteTransition};
        use crate::formula::Formula;
        let a = ConcreteAutomaton {
            name: "T.A".into(),
            states: vec![
                ConcreteState { name: "P".into(), emits: BTreeSet::new() },
                ConcreteState { name: "Q".into(), emits: BTreeSet::new() },
                ConcreteState { name: "R".into(), emits: BTreeSet::new() },
            ],
            initial: "P".into(),
            transitions: vec![
                ConcreteTransition { source: "P".into(), guard: Formula::r(SignalId::scalar("x")), target: "Q".into() },
                ConcreteTransition { source: "P".into(), guard: Formula::r(SignalId::scalar("y")), target: "R".into() },
            ],
        };
        let report = check_determinism(&a).unwrap();
        assert_eq!(report.overlaps.len(), 1);
        let o = &report.overlaps[0];
        assert_eq!((o.first, o.second), (0, 1));
        // first witness in enumeration order asserts both signals
        assert!(o.witness.contains(&SignalId::scalar("x")));
        assert!(o.witness.contains(&SignalId::scalar("y")));
    }

    #[test]
    fn same_target_pairs_are_not_overlaps() {
        use crate::automaton::{ConcreteState, ConcreteTransition};
        use crate::formula::Formula;
        let a = ConcreteAutomaton {
            name: "T.A".into(),
            states: vec![
                ConcreteState { name: "P".into(), emits: BTreeSet::new() },
                ConcreteState { name: "Q".into(), emits: BTreeSet::new() },
            ],
            initial: "P".into(),
            transitions: vec![
                ConcreteTransition { source: "P".into(), guard: Formula::r(SignalId::scalar("x")), target: "Q".into() },
                ConcreteTransition { source: "P".into(), guard: Formula::True, target: "Q".into() },
            ],
        };
        assert!(check_determinism(&a).unwrap().is_empty());
    }

    #[test]
    fn dot_output_shape() {
        let sys = counter_config(1);
        let dot = emit_dot(&sys);
        // N=1: 3 states, 5 transitions, plus one init point node and arrow
        assert_eq!(dot.matches("[label=\"").count(), 3 + 5);
        assert_eq!(dot.matches("shape=point").count(), 1);
        assert!(dot.starts_with("digraph {\n"));
        assert!(dot.ends_with("}\n"));
        assert_eq!(emit_dot(&SystemConfig::default()), "digraph {\n}\n");
    }

    #[test]
    fn flat_output_is_a_reparse_fixpoint() {
        let sys = counter_config(2);
        let flat = emit_flat(&sys);
        let reparsed = parse_flat(&flat).unwrap();
        assert_eq!(emit_flat(&reparsed), flat);
        // byte-stable across runs
        assert_eq!(emit_flat(&counter_config(2)), flat);
    }

    #[test]
    fn reach_report_format() {
        let sys = counter_config(2);
        let g = explore(&sys, 1, DEFAULT_BUDGET).unwrap();
        let report = render_reach(&g);
        assert!(report.contains("STATE (s[0])\n"));
        assert!(report.contains("EDGE (s[0]) --{inc}--> (s[1])\n"));
    }
}
