//! The macro generator: binds actuals to formals, evaluates index ranges,
//! expands state vectors and ranged transitions, rewrites shortcut
//! formulas, and renames internal signals per instance.

use std::collections::{BTreeMap, BTreeSet};

use crate::ast::*;
use crate::automaton::{ConcreteAutomaton, ConcreteState, ConcreteTransition, SystemConfig};
use crate::diag::{Code, Diagnostic, Pos};
use crate::formula::Formula;
use crate::signal::SignalId;

/// Stack of index bindings; later bindings shadow earlier ones.
#[derive(Debug, Clone, Default)]
pub struct IndexEnv {
    entries: Vec<(String, i64)>,
}

impl IndexEnv {
    pub fn new() -> Self {
        IndexEnv::default()
    }

    pub fn bind(&mut self, var: &str, value: i64) {
        self.entries.push((var.to_string(), value));
    }

    pub fn unbind(&mut self) {
        self.entries.pop();
    }

    pub fn get(&self, var: &str) -> Option<i64> {
        self.entries.iter().rev().find(|(v, _)| v == var).map(|(_, n)| *n)
    }
}

/// Evaluate `i`, `i+1`, `N-2`, or a literal under index and numeric bindings.
pub fn eval_index_expression(
    e: &IndexExpr,
    idx: &IndexEnv,
    numeric: &BTreeMap<String, i64>,
) -> Result<i64, Diagnostic> {
    let lookup = |v: &str| -> Result<i64, Diagnostic> {
        idx.get(v).or_else(|| numeric.get(v).copied()).ok_or_else(|| {
            Diagnostic::error(Code::E_UNBOUND_ID, None, v, format!("unbound identifier `{}` in index expression", v))
        })
    };
    match e {
        IndexExpr::Num(n) => Ok(*n),
        IndexExpr::Var(v) => lookup(v),
        IndexExpr::Add(v, n) => Ok(lookup(v)? + n),
        IndexExpr::Sub(v, n) => Ok(lookup(v)? - n),
    }
}

/// Expand a list of range binders and inequalities into the Cartesian
/// product of all ranges in declaration order, filtered by the
/// inequalities. Empty ranges contribute zero tuples.
pub fn expand_ranges(
    elems: &[RangeElem],
    outer: &IndexEnv,
    numeric: &BTreeMap<String, i64>,
) -> Result<Vec<IndexEnv>, Diagnostic> {
    let mut out = Vec::new();
    let mut env = outer.clone();
    go(elems, &mut env, numeric, &mut out)?;
    return Ok(out);

    fn go(
        elems: &[RangeElem],
        env: &mut IndexEnv,
        numeric: &BTreeMap<String, i64>,
        out: &mut Vec<IndexEnv>,
    ) -> Result<(), Diagnostic> {
        let Some((head, rest)) = elems.split_first() else {
            out.push(env.clone());
            return Ok(());
        };
        match head {
            RangeElem::Range { var, ranges, .. } => {
                for (lo, hi) in ranges {
                    let lo = eval_index_expression(lo, env, numeric)?;
                    let hi = eval_index_expression(hi, env, numeric)?;
                    for v in lo..=hi {
                        env.bind(var, v);
                        go(rest, env, numeric, out)?;
                        env.unbind();
                    }
                }
            }
            RangeElem::Ineq { var, rhs, pos } => {
                let lhs = env.get(var).ok_or_else(|| {
                    Diagnostic::error(
                        Code::E_UNBOUND_ID,
                        Some(*pos),
                        var,
                        format!("inequality over unbound index `{}`", var),
                    )
                })?;
                if lhs != eval_index_expression(rhs, env, numeric)? {
                    go(rest, env, numeric, out)?;
                }
            }
        }
        Ok(())
    }
}

/// One positional parameter slot after vector flattening.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub formal: String,
    /// `None` for scalar formals, the element index for vector slots.
    pub index: Option<i64>,
    pub qualifier: Qualifier,
    pub attr_count: usize,
}

/// Flatten a module's formal signals into positional slots under bound
/// numeric parameters. Vector formals contribute one slot per element.
pub fn flatten_slots(m: &ModuleAst, numeric: &BTreeMap<String, i64>) -> Result<Vec<Slot>, Diagnostic> {
    let mut slots = Vec::new();
    let empty = IndexEnv::new();
    for fs in &m.formal_signals {
        match &fs.shape {
            Shape::Scalar => slots.push(Slot {
                formal: fs.name.clone(),
                index: None,
                qualifier: fs.qualifier,
                attr_count: fs.attributes.len(),
            }),
            Shape::Vector(ranges) => {
                for (lo, hi) in ranges {
                    let lo = eval_index_expression(lo, &empty, numeric)?;
                    let hi = eval_index_expression(hi, &empty, numeric)?;
                    for i in lo..=hi {
                        slots.push(Slot {
                            formal: fs.name.clone(),
                            index: Some(i),
                            qualifier: fs.qualifier,
                            attr_count: 0,
                        });
                    }
                }
            }
        }
    }
    Ok(slots)
}

/// What a formal parameter slot is bound to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bound {
    Signal(SignalId),
    Const0,
    Const1,
    Dummy,
}

/// The formal-to-actual correspondence for one instance.
#[derive(Debug, Clone)]
pub struct BindingEnv {
    pub instance: String,
    pub numeric: BTreeMap<String, i64>,
    signals: BTreeMap<(String, Option<i64>), Bound>,
    formal_names: BTreeSet<String>,
    vector_formals: BTreeSet<String>,
    /// Formal attribute name -> actual attribute name.
    pub attr_map: BTreeMap<String, String>,
    /// Attribute lists carried on actual signals; metadata only.
    pub signal_attrs: BTreeMap<SignalId, Vec<String>>,
}

impl BindingEnv {
    /// Build the binding for a checked instantiation. Assumes
    /// `check_instantiation` has passed; violations surface as errors here
    /// all the same.
    pub fn build(m: &ModuleAst, decl: &InstanceDeclaration) -> Result<BindingEnv, Diagnostic> {
        let n = m.numeric_params.len();
        let arity_err = || {
            Diagnostic::error(
                Code::E_ARITY,
                Some(decl.pos),
                &decl.instance_name,
                format!("instance `{}` has wrong actual count for module `{}`", decl.instance_name, m.name),
            )
        };
        if decl.actuals.len() < n {
            return Err(arity_err());
        }
        let mut numeric = BTreeMap::new();
        for (p, a) in m.numeric_params.iter().zip(&decl.actuals) {
            match a {
                Actual::Number(v) => {
                    numeric.insert(p.clone(), *v);
                }
                other => {
                    return Err(Diagnostic::error(
                        Code::E_KIND,
                        Some(decl.pos),
                        other.to_string(),
                        format!("numeric parameter `{}` bound to non-number `{}`", p, other),
                    ))
                }
            }
        }
        let slots = flatten_slots(m, &numeric)?;
        let rest = &decl.actuals[n..];
        if rest.len() != slots.len() {
            return Err(arity_err());
        }
        let mut env = BindingEnv {
            instance: decl.instance_name.clone(),
            numeric,
            signals: BTreeMap::new(),
            formal_names: m.formal_signals.iter().map(|f| f.name.clone()).collect(),
            vector_formals: m
                .formal_signals
                .iter()
                .filter(|f| matches!(f.shape, Shape::Vector(_)))
                .map(|f| f.name.clone())
                .collect(),
            attr_map: BTreeMap::new(),
            signal_attrs: BTreeMap::new(),
        };
        for (slot, actual) in slots.iter().zip(rest) {
            let bound = match actual {
                Actual::Number(v) => {
                    return Err(Diagnostic::error(
                        Code::E_KIND,
                        Some(decl.pos),
                        v.to_string(),
                        format!("signal parameter `{}` bound to number `{}`", slot.formal, v),
                    ))
                }
                Actual::Const0 => Bound::Const0,
                Actual::Const1 => Bound::Const1,
                Actual::Dummy => Bound::Dummy,
                Actual::Signal { name, indices, attrs } => {
                    let sid = SignalId { name: name.clone(), indices: indices.clone() };
                    if !attrs.is_empty() {
                        env.signal_attrs.insert(sid.clone(), attrs.clone());
                    }
                    if let Some(fs) = m.formal(&slot.formal) {
                        for (fa, aa) in fs.attributes.iter().zip(attrs) {
                            env.attr_map.insert(fa.clone(), aa.clone());
                        }
                    }
                    Bound::Signal(sid)
                }
            };
            env.signals.insert((slot.formal.clone(), slot.index), bound);
        }
        Ok(env)
    }

    pub fn is_formal(&self, name: &str) -> bool {
        self.formal_names.contains(name)
    }

    pub fn is_vector_formal(&self, name: &str) -> bool {
        self.vector_formals.contains(name)
    }

    pub fn lookup(&self, name: &str, index: Option<i64>) -> Option<&Bound> {
        self.signals.get(&(name.to_string(), index))
    }

    /// Internal signals get an instance-unique name.
    pub fn rename_internal(&self, name: &str) -> String {
        format!("{}__{}", self.instance, name)
    }
}

fn eval_indices(
    indices: &[IndexExpr],
    idx: &IndexEnv,
    numeric: &BTreeMap<String, i64>,
    pos: Pos,
) -> Result<Vec<i64>, Diagnostic> {
    let mut out = Vec::new();
    for e in indices {
        let v = eval_index_expression(e, idx, numeric)?;
        if v < 0 {
            return Err(Diagnostic::error(
                Code::E_INDEX_OUT_OF_RANGE,
                Some(pos),
                e.to_string(),
                format!("index expression `{}` evaluates to negative {}", e, v),
            ));
        }
        out.push(v);
    }
    Ok(out)
}

/// Resolve a guard signal reference to a shortcut-free formula atom:
/// formals become their actuals (`_1` -> true, `_0` -> false, `dummy` ->
/// false), internal signals are renamed per instance.
fn resolve_ref(r: &SignalRefAst, idx: &IndexEnv, b: &BindingEnv) -> Result<Formula, Diagnostic> {
    if b.is_formal(&r.name) {
        let key = if b.is_vector_formal(&r.name) {
            let nums = eval_indices(&r.indices, idx, &b.numeric, r.pos)?;
            if nums.len() != 1 {
                return Err(Diagnostic::error(
                    Code::E_INDEX_OUT_OF_RANGE,
                    Some(r.pos),
                    &r.name,
                    format!("vector formal `{}` referenced with {} indices", r.name, nums.len()),
                ));
            }
            Some(nums[0])
        } else {
            None
        };
        let bound = b.lookup(&r.name, key).ok_or_else(|| {
            Diagnostic::error(
                Code::E_INDEX_OUT_OF_RANGE,
                Some(r.pos),
                &r.name,
                format!("`{}[{}]` is outside the declared range", r.name, key.unwrap_or_default()),
            )
        })?;
        Ok(match bound {
            Bound::Signal(sid) => Formula::Ref(sid.clone()),
            Bound::Const1 => Formula::True,
            // `dummy` discards the signal: a reference to it can never fire.
            Bound::Const0 | Bound::Dummy => Formula::False,
        })
    } else {
        let nums = eval_indices(&r.indices, idx, &b.numeric, r.pos)?;
        Ok(Formula::Ref(SignalId::indexed(b.rename_internal(&r.name), nums)))
    }
}

/// Rewrite one shortcut node into a shortcut-free formula under the given
/// index environment.
pub fn rewrite_shortcut(
    kind: AstShortcutKind,
    selector: Option<&IndexExpr>,
    set: &[SetElem],
    idx: &IndexEnv,
    b: &BindingEnv,
    pos: Pos,
) -> Result<Formula, Diagnostic> {
    let mut atoms = Vec::new();
    for elem in set {
        match elem {
            SetElem::Signal(r) => atoms.push(resolve_ref(r, idx, b)?),
            SetElem::Ranged { name, var, ranges, pos } => {
                let mut local = idx.clone();
                for (lo, hi) in ranges {
                    let lo = eval_index_expression(lo, idx, &b.numeric)?;
                    let hi = eval_index_expression(hi, idx, &b.numeric)?;
                    for v in lo..=hi {
                        local.bind(var, v);
                        let r = SignalRefAst {
                            name: name.clone(),
                            indices: vec![IndexExpr::Var(var.clone())],
                            pos: *pos,
                        };
                        atoms.push(resolve_ref(&r, &local, b)?);
                        local.unbind();
                    }
                }
            }
        }
    }
    if atoms.is_empty() {
        return Err(Diagnostic::error(
            Code::E_EMPTY_SHORTCUT_SET,
            Some(pos),
            kind.to_string(),
            format!("shortcut `{}` expands to an empty signal set", kind),
        ));
    }
    let single_term = |positive: usize| -> Formula {
        Formula::and(
            atoms
                .iter()
                .enumerate()
                .map(|(i, a)| if i == positive { a.clone() } else { Formula::not(a.clone()) })
                .collect(),
        )
    };
    match kind {
        AstShortcutKind::Eps => Ok(Formula::and(atoms.iter().cloned().map(Formula::not).collect())),
        AstShortcutKind::Any => Ok(Formula::or(atoms)),
        AstShortcutKind::All => Ok(Formula::and(atoms)),
        AstShortcutKind::Single => match selector {
            None => Ok(Formula::or((0..atoms.len()).map(single_term).collect())),
            Some(sel) => {
                let p = eval_index_expression(sel, idx, &b.numeric)?;
                if p < 0 || p as usize >= atoms.len() {
                    return Err(Diagnostic::error(
                        Code::E_INDEX_OUT_OF_RANGE,
                        Some(pos),
                        sel.to_string(),
                        format!("single[{}] selector outside the {}-element set", p, atoms.len()),
                    ));
                }
                Ok(single_term(p as usize))
            }
        },
    }
}

fn resolve_guard(g: &GuardAst, idx: &IndexEnv, b: &BindingEnv) -> Result<Formula, Diagnostic> {
    match g {
        GuardAst::True => Ok(Formula::True),
        GuardAst::False => Ok(Formula::False),
        GuardAst::Ref(r) => resolve_ref(r, idx, b),
        GuardAst::Not(inner) => Ok(Formula::not(resolve_guard(inner, idx, b)?)),
        GuardAst::And(gs) => Ok(Formula::and(
            gs.iter().map(|x| resolve_guard(x, idx, b)).collect::<Result<_, _>>()?,
        )),
        GuardAst::Or(gs) => Ok(Formula::or(
            gs.iter().map(|x| resolve_guard(x, idx, b)).collect::<Result<_, _>>()?,
        )),
        GuardAst::Shortcut { kind, selector, set, pos } => {
            rewrite_shortcut(*kind, selector.as_ref(), set, idx, b, *pos)
        }
    }
}

/// Map one emission through the binding: out formals become their actual
/// signal, `dummy` drops the emission, internal signals are renamed.
fn resolve_emission(
    r: &SignalRefAst,
    idx: &IndexEnv,
    b: &BindingEnv,
) -> Result<Option<SignalId>, Diagnostic> {
    if b.is_formal(&r.name) {
        let key = if b.is_vector_formal(&r.name) {
            let nums = eval_indices(&r.indices, idx, &b.numeric, r.pos)?;
            Some(*nums.first().ok_or_else(|| {
                Diagnostic::error(
                    Code::E_INDEX_OUT_OF_RANGE,
                    Some(r.pos),
                    &r.name,
                    format!("vector formal `{}` emitted without index", r.name),
                )
            })?)
        } else {
            None
        };
        let bound = b.lookup(&r.name, key).ok_or_else(|| {
            Diagnostic::error(
                Code::E_INDEX_OUT_OF_RANGE,
                Some(r.pos),
                &r.name,
                format!("emitted `{}[{}]` is outside the declared range", r.name, key.unwrap_or_default()),
            )
        })?;
        match bound {
            Bound::Signal(sid) => Ok(Some(sid.clone())),
            Bound::Dummy => Ok(None),
            Bound::Const0 | Bound::Const1 => Err(Diagnostic::error(
                Code::E_INTERNAL,
                Some(r.pos),
                &r.name,
                format!("output formal `{}` bound to a constant reached expansion", r.name),
            )),
        }
    } else {
        let nums = eval_indices(&r.indices, idx, &b.numeric, r.pos)?;
        Ok(Some(SignalId::indexed(b.rename_internal(&r.name), nums)))
    }
}

/// Expand state declarations: indexed states replicate once per index
/// tuple, non-indexed states in a ranged declaration appear exactly once.
pub fn expand_states(
    decls: &[(Vec<RangeElem>, Vec<StateDecl>)],
    b: &BindingEnv,
) -> Result<Vec<ConcreteState>, Diagnostic> {
    let mut out: Vec<ConcreteState> = Vec::new();
    let mut seen = BTreeSet::new();
    for (ranges, states) in decls {
        let envs = expand_ranges(ranges, &IndexEnv::new(), &b.numeric)?;
        for env in &envs {
            for decl in states {
                let nums = eval_indices(&decl.indices, env, &b.numeric, decl.pos)?;
                let name = SignalId::indexed(&decl.name, nums).to_string();
                if !seen.insert(name.clone()) {
                    continue;
                }
                let mut emits = BTreeSet::new();
                for e in &decl.emits {
                    if let Some(sid) = resolve_emission(e, env, b)? {
                        emits.insert(sid);
                    }
                }
                out.push(ConcreteState { name, emits });
            }
        }
    }
    Ok(out)
}

/// Expand ranged transition rules into concrete transitions; exact
/// duplicates (same source, guard, target) are merged.
pub fn expand_transitions(
    rules: &[TransitionAst],
    b: &BindingEnv,
    states: &[ConcreteState],
) -> Result<Vec<ConcreteTransition>, Diagnostic> {
    let names: BTreeSet<&str> = states.iter().map(|s| s.name.as_str()).collect();
    let state_name = |r: &StateRefAst, env: &IndexEnv| -> Result<String, Diagnostic> {
        let nums = eval_indices(&r.indices, env, &b.numeric, r.pos)?;
        let name = SignalId::indexed(&r.name, nums).to_string();
        if !names.contains(name.as_str()) {
            return Err(Diagnostic::error(
                Code::E_INDEX_OUT_OF_RANGE,
                Some(r.pos),
                &name,
                format!("transition endpoint `{}` is not a declared state", name),
            ));
        }
        Ok(name)
    };
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for rule in rules {
        let envs = expand_ranges(&rule.ranges, &IndexEnv::new(), &b.numeric)?;
        for env in &envs {
            let source = state_name(&rule.source, env)?;
            let target = state_name(&rule.target, env)?;
            let guard = resolve_guard(&rule.guard, env, b)?;
            if seen.insert((source.clone(), guard.clone(), target.clone())) {
                out.push(ConcreteTransition { source, guard, target });
            }
        }
    }
    Ok(out)
}

/// One expanded instance: its automata plus signal-attribute metadata.
#[derive(Debug, Clone)]
pub struct Instantiated {
    pub automata: Vec<ConcreteAutomaton>,
    pub signal_attrs: BTreeMap<SignalId, Vec<String>>,
}

/// Expand every automaton of a module under one instance declaration.
pub fn instantiate_module(m: &ModuleAst, decl: &InstanceDeclaration) -> Result<Instantiated, Vec<Diagnostic>> {
    if m.is_header_only() {
        return Err(vec![Diagnostic::error(
            Code::E_HEADER_ONLY,
            Some(decl.pos),
            &m.name,
            format!("module `{}` is header-only and cannot be expanded", m.name),
        )]);
    }
    let b = BindingEnv::build(m, decl).map_err(|d| vec![d])?;
    let mut automata = Vec::new();
    let mut diags = Vec::new();
    for a in &m.automata {
        if a.is_header_only() {
            diags.push(Diagnostic::error(
                Code::E_HEADER_ONLY,
                Some(a.pos),
                &a.name,
                format!("automaton `{}` has no transition table", a.name),
            ));
            continue;
        }
        match expand_automaton(a, &b, decl) {
            Ok(c) => automata.push(c),
            Err(d) => diags.push(d),
        }
    }
    if diags.is_empty() {
        Ok(Instantiated { automata, signal_attrs: b.signal_attrs })
    } else {
        Err(diags)
    }
}

fn expand_automaton(
    a: &AutomatonAst,
    b: &BindingEnv,
    decl: &InstanceDeclaration,
) -> Result<ConcreteAutomaton, Diagnostic> {
    let states = expand_states(&a.state_decls, b)?;
    let initial = match &a.initial {
        Some(r) => {
            let nums = eval_indices(&r.indices, &IndexEnv::new(), &b.numeric, r.pos)?;
            SignalId::indexed(&r.name, nums).to_string()
        }
        // without an explicit init the first declared state is initial
        None => {
            states
                .first()
                .ok_or_else(|| {
                    Diagnostic::error(
                        Code::E_HEADER_ONLY,
                        Some(a.pos),
                        &a.name,
                        format!("automaton `{}` expands to no states", a.name),
                    )
                })?
                .name
                .clone()
        }
    };
    let transitions = expand_transitions(&a.transitions, b, &states)?;
    Ok(ConcreteAutomaton {
        name: format!("{}.{}", decl.instance_name, a.name),
        states,
        initial,
        transitions,
    })
}

/// Expand a whole system file against a module library.
pub fn expand_system(sys: &SystemAst, lib: &[ModuleAst]) -> Result<SystemConfig, Vec<Diagnostic>> {
    let mut config = SystemConfig::default();
    let mut diags = Vec::new();
    for decl in &sys.instances {
        let Some(m) = lib.iter().find(|m| m.name == decl.module_name) else {
            diags.push(Diagnostic::error(
                Code::E_UNKNOWN_MODULE,
                Some(decl.pos),
                &decl.module_name,
                format!("unknown module `{}`", decl.module_name),
            ));
            continue;
        };
        match instantiate_module(m, decl) {
            Ok(inst) => {
                config.automata.extend(inst.automata);
                config.signal_attrs.extend(inst.signal_attrs);
            }
            Err(ds) => diags.extend(ds),
        }
    }
    config.externals = sys.external_signals.iter().cloned().collect();
    config.aliases = sys
        .automaton_aliases
        .iter()
        .map(|(a, t, _)| (a.clone(), t.clone()))
        .collect();
    if diags.is_empty() {
        Ok(config)
    } else {
        Err(diags)
    }
}

/// Build a synthetic single-instance system for one module, generating
/// actual names from the formals: scalar formals keep their name, vector
/// elements become indexed signals (`c[0]`, `c[1]`, ...). Externals are
/// the actuals bound to input formals.
pub fn convenience_system(
    m: &ModuleAst,
    numeric: &BTreeMap<String, i64>,
    instance_name: &str,
    signals: Option<&[SignalId]>,
) -> Result<SystemAst, Diagnostic> {
    let pos = Pos::new(0, 0);
    let mut actuals = Vec::new();
    for p in &m.numeric_params {
        let v = numeric.get(p).ok_or_else(|| {
            Diagnostic::error(Code::E_UNBOUND_ID, None, p, format!("numeric parameter `{}` needs a --bind", p))
        })?;
        actuals.push(Actual::Number(*v));
    }
    let slots = flatten_slots(m, numeric)?;
    if let Some(sigs) = signals {
        if sigs.len() != slots.len() {
            return Err(Diagnostic::error(
                Code::E_ARITY,
                None,
                &m.name,
                format!("module `{}` needs {} signal actuals, got {}", m.name, slots.len(), sigs.len()),
            ));
        }
    }
    let mut externals = Vec::new();
    for (i, slot) in slots.iter().enumerate() {
        let sid = match signals {
            Some(sigs) => sigs[i].clone(),
            None => SignalId {
                name: slot.formal.clone(),
                indices: slot.index.map(|x| vec![x]).unwrap_or_default(),
            },
        };
        if slot.qualifier == Qualifier::In {
            externals.push(sid.clone());
        }
        actuals.push(Actual::Signal { name: sid.name, indices: sid.indices, attrs: Vec::new() });
    }
    Ok(SystemAst {
        instances: vec![InstanceDeclaration {
            instance_name: instance_name.to_string(),
            actuals,
            module_name: m.name.clone(),
            synthetic: true,
            pos,
        }],
        automaton_aliases: Vec::new(),
        external_signals: externals,
    })
}
