//! Semantic checks on parsed modules and instantiations.
//!
//! `check_module` validates a library module in isolation; the checks on
//! index scoping mirror what the expander will evaluate, so anything that
//! passes here expands without unbound-identifier errors.

use std::collections::{BTreeMap, BTreeSet};

use crate::ast::*;
use crate::diag::{Code, Diagnostic};
use crate::expand::flatten_slots;

struct Scope<'a> {
    params: &'a [String],
    indices: Vec<String>,
}

impl<'a> Scope<'a> {
    fn new(params: &'a [String]) -> Self {
        Scope { params, indices: Vec::new() }
    }

    fn has(&self, id: &str) -> bool {
        self.indices.iter().any(|v| v == id) || self.params.iter().any(|p| p == id)
    }

    fn has_index(&self, id: &str) -> bool {
        self.indices.iter().any(|v| v == id)
    }
}

fn check_expr(e: &IndexExpr, scope: &Scope, pos: crate::diag::Pos, diags: &mut Vec<Diagnostic>) {
    if let Some(v) = e.var() {
        if !scope.has(v) {
            diags.push(Diagnostic::error(
                Code::E_UNKNOWN_EXPR_ID,
                Some(pos),
                v,
                format!("unknown identifier `{}` in index expression `{}`", v, e),
            ));
        }
    }
}

/// Validate a range-elem list, pushing each bound index into the scope.
fn check_range_elems(elems: &[RangeElem], scope: &mut Scope, diags: &mut Vec<Diagnostic>) {
    for elem in elems {
        match elem {
            RangeElem::Range { var, ranges, pos } => {
                for (lo, hi) in ranges {
                    check_expr(lo, scope, *pos, diags);
                    check_expr(hi, scope, *pos, diags);
                }
                if scope.has(var) {
                    diags.push(Diagnostic::error(
                        Code::E_DUP_INDEX,
                        Some(*pos),
                        var,
                        format!("index `{}` is already bound", var),
                    ));
                }
                scope.indices.push(var.clone());
            }
            RangeElem::Ineq { var, rhs, pos } => {
                if !scope.has_index(var) {
                    diags.push(Diagnostic::error(
                        Code::E_INEQ_BEFORE_RANGE,
                        Some(*pos),
                        var,
                        format!("inequality over `{}` before its range binder", var),
                    ));
                }
                check_expr(rhs, scope, *pos, diags);
            }
        }
    }
}

/// How a module's names partition: formal parameters versus internal
/// signals generated by some state in the module.
struct Names<'a> {
    module: &'a ModuleAst,
    /// Internal (non-formal) signal names emitted anywhere in the module.
    internal: BTreeSet<&'a str>,
    state_names: BTreeMap<&'a str, BTreeSet<&'a str>>,
}

impl<'a> Names<'a> {
    fn collect(m: &'a ModuleAst) -> Self {
        let mut internal = BTreeSet::new();
        let mut state_names: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for a in &m.automata {
            let names = state_names.entry(a.name.as_str()).or_default();
            for (_, decls) in &a.state_decls {
                for d in decls {
                    names.insert(d.name.as_str());
                    for e in &d.emits {
                        if m.formal(&e.name).is_none() {
                            internal.insert(e.name.as_str());
                        }
                    }
                }
            }
        }
        Names { module: m, internal, state_names }
    }
}

fn check_guard_ref(
    r: &SignalRefAst,
    scope: &Scope,
    names: &Names,
    used_inputs: &mut BTreeSet<String>,
    diags: &mut Vec<Diagnostic>,
) {
    for e in &r.indices {
        check_expr(e, scope, r.pos, diags);
    }
    match names.module.formal(&r.name) {
        Some(fs) => {
            if fs.qualifier == Qualifier::In {
                used_inputs.insert(fs.name.clone());
            }
            let is_vector = matches!(fs.shape, Shape::Vector(_));
            if is_vector && r.indices.is_empty() {
                diags.push(Diagnostic::error(
                    Code::E_UNKNOWN_SIGNAL,
                    Some(r.pos),
                    &r.name,
                    format!("vector formal `{}` referenced without an index", r.name),
                ));
            } else if !is_vector && !r.indices.is_empty() {
                diags.push(Diagnostic::error(
                    Code::E_UNKNOWN_SIGNAL,
                    Some(r.pos),
                    &r.name,
                    format!("scalar formal `{}` referenced with an index", r.name),
                ));
            }
        }
        None => {
            if !names.internal.contains(r.name.as_str()) {
                diags.push(Diagnostic::error(
                    Code::E_UNKNOWN_SIGNAL,
                    Some(r.pos),
                    &r.name,
                    format!("`{}` is neither a formal signal nor generated in this module", r.name),
                ));
            }
        }
    }
}

fn check_guard(
    g: &GuardAst,
    scope: &Scope,
    names: &Names,
    used_inputs: &mut BTreeSet<String>,
    diags: &mut Vec<Diagnostic>,
) {
    match g {
        GuardAst::True | GuardAst::False => {}
        GuardAst::Ref(r) => check_guard_ref(r, scope, names, used_inputs, diags),
        GuardAst::Not(inner) => check_guard(inner, scope, names, used_inputs, diags),
        GuardAst::And(gs) | GuardAst::Or(gs) => {
            for x in gs {
                check_guard(x, scope, names, used_inputs, diags);
            }
        }
        GuardAst::Shortcut { selector, set, pos, .. } => {
            if let Some(sel) = selector {
                check_expr(sel, scope, *pos, diags);
            }
            for elem in set {
                match elem {
                    SetElem::Signal(r) => check_guard_ref(r, scope, names, used_inputs, diags),
                    SetElem::Ranged { name, var, ranges, pos } => {
                        for (lo, hi) in ranges {
                            check_expr(lo, scope, *pos, diags);
                            check_expr(hi, scope, *pos, diags);
                        }
                        // the set binder opens a nested scope and may
                        // shadow an outer index of the same name
                        let mut inner = Scope { params: scope.params, indices: scope.indices.clone() };
                        inner.indices.push(var.clone());
                        let r = SignalRefAst {
                            name: name.clone(),
                            indices: vec![IndexExpr::Var(var.clone())],
                            pos: *pos,
                        };
                        check_guard_ref(&r, &inner, names, used_inputs, diags);
                    }
                }
            }
        }
    }
}

/// Check one library module. Diagnostics come back in source order; an
/// empty list means the module is well formed.
pub fn check_module(m: &ModuleAst) -> Vec<Diagnostic> {
    let mut diags = Vec::new();

    // formal namespace: numeric parameters, signal formals, attributes
    let mut formal_names = BTreeSet::new();
    for p in &m.numeric_params {
        if !formal_names.insert(p.clone()) {
            diags.push(Diagnostic::error(
                Code::E_DUP_FORMAL,
                Some(m.pos),
                p,
                format!("duplicate formal `{}` in module `{}`", p, m.name),
            ));
        }
    }
    let param_scope = Scope::new(&m.numeric_params);
    for fs in &m.formal_signals {
        if !formal_names.insert(fs.name.clone()) {
            diags.push(Diagnostic::error(
                Code::E_DUP_FORMAL,
                Some(fs.pos),
                &fs.name,
                format!("duplicate formal `{}` in module `{}`", fs.name, m.name),
            ));
        }
        for attr in &fs.attributes {
            if !formal_names.insert(attr.clone()) {
                diags.push(Diagnostic::error(
                    Code::E_DUP_FORMAL,
                    Some(fs.pos),
                    attr,
                    format!("duplicate formal `{}` in module `{}`", attr, m.name),
                ));
            }
        }
        if let Shape::Vector(ranges) = &fs.shape {
            for (lo, hi) in ranges {
                check_expr(lo, &param_scope, fs.pos, &mut diags);
                check_expr(hi, &param_scope, fs.pos, &mut diags);
            }
        }
    }

    let mut automaton_names = BTreeSet::new();
    for a in &m.automata {
        if !automaton_names.insert(a.name.as_str()) {
            diags.push(Diagnostic::error(
                Code::E_DUP_AUTOMATON,
                Some(a.pos),
                &a.name,
                format!("duplicate automaton `{}` in module `{}`", a.name, m.name),
            ));
        }
    }

    let names = Names::collect(m);
    let mut used_inputs = BTreeSet::new();
    let mut emitted_formals = BTreeSet::new();

    for a in &m.automata {
        let state_names = &names.state_names[a.name.as_str()];
        for (ranges, decls) in &a.state_decls {
            let mut scope = Scope::new(&m.numeric_params);
            check_range_elems(ranges, &mut scope, &mut diags);
            for d in decls {
                for e in &d.indices {
                    check_expr(e, &scope, d.pos, &mut diags);
                }
                for emit in &d.emits {
                    for e in &emit.indices {
                        check_expr(e, &scope, emit.pos, &mut diags);
                    }
                    match m.formal(&emit.name) {
                        Some(fs) => {
                            emitted_formals.insert(fs.name.clone());
                            if fs.qualifier == Qualifier::In {
                                diags.push(Diagnostic::error(
                                    Code::E_INPUT_GENERATED,
                                    Some(emit.pos),
                                    &emit.name,
                                    format!("input formal `{}` is generated by state `{}`", emit.name, d.name),
                                ));
                            } else if matches!(fs.shape, Shape::Vector(_)) && emit.indices.is_empty() {
                                diags.push(Diagnostic::error(
                                    Code::E_VECTOR_EMIT_SCALAR,
                                    Some(emit.pos),
                                    &emit.name,
                                    format!("vector formal `{}` emitted without an index", emit.name),
                                ));
                            } else if matches!(fs.shape, Shape::Scalar) && !emit.indices.is_empty() {
                                diags.push(Diagnostic::error(
                                    Code::E_UNKNOWN_SIGNAL,
                                    Some(emit.pos),
                                    &emit.name,
                                    format!("scalar formal `{}` emitted with an index", emit.name),
                                ));
                            }
                        }
                        None => {} // internal signal; any name is fine
                    }
                }
            }
        }
        if let Some(init) = &a.initial {
            if !state_names.contains(init.name.as_str()) {
                diags.push(Diagnostic::error(
                    Code::E_UNKNOWN_STATE,
                    Some(init.pos),
                    &init.name,
                    format!("initial state `{}` is not declared in automaton `{}`", init.name, a.name),
                ));
            }
            for e in &init.indices {
                check_expr(e, &param_scope, init.pos, &mut diags);
            }
        }
        for t in &a.transitions {
            let mut scope = Scope::new(&m.numeric_params);
            check_range_elems(&t.ranges, &mut scope, &mut diags);
            for end in [&t.source, &t.target] {
                if !state_names.contains(end.name.as_str()) {
                    diags.push(Diagnostic::error(
                        Code::E_UNKNOWN_STATE,
                        Some(end.pos),
                        &end.name,
                        format!("state `{}` is not declared in automaton `{}`", end.name, a.name),
                    ));
                }
                for e in &end.indices {
                    check_expr(e, &scope, end.pos, &mut diags);
                }
            }
            check_guard(&t.guard, &scope, &names, &mut used_inputs, &mut diags);
        }
    }

    // usage checks are meaningless for interface stubs
    if !m.is_header_only() {
        for fs in &m.formal_signals {
            match fs.qualifier {
                Qualifier::In => {
                    if !used_inputs.contains(&fs.name) {
                        let msg = format!("input formal `{}` is never referenced by a guard", fs.name);
                        // an unused vector input may legitimately be sliced
                        // away for small parameter values, so only warn
                        if matches!(fs.shape, Shape::Vector(_)) {
                            diags.push(Diagnostic::warning(Code::E_INPUT_UNUSED, Some(fs.pos), &fs.name, msg));
                        } else {
                            diags.push(Diagnostic::error(Code::E_INPUT_UNUSED, Some(fs.pos), &fs.name, msg));
                        }
                    }
                }
                Qualifier::Out => {
                    if !emitted_formals.contains(&fs.name) {
                        diags.push(Diagnostic::error(
                            Code::E_OUTPUT_NOT_GENERATED,
                            Some(fs.pos),
                            &fs.name,
                            format!("output formal `{}` is never generated by a state", fs.name),
                        ));
                    }
                }
            }
        }
    }

    diags
}

/// Check every instance declaration of a system against the library.
pub fn check_instantiation(sys: &SystemAst, lib: &[ModuleAst]) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    for decl in &sys.instances {
        check_instance(decl, lib, &mut diags);
    }
    let instance_names: BTreeSet<&str> = sys.instances.iter().map(|i| i.instance_name.as_str()).collect();
    for (alias, target, pos) in &sys.automaton_aliases {
        let Some((inst, auto)) = target.split_once('.') else {
            diags.push(Diagnostic::error(
                Code::E_PARSE,
                Some(*pos),
                target,
                format!("alias `{}` target `{}` is not of the form instance.automaton", alias, target),
            ));
            continue;
        };
        if !instance_names.contains(inst) {
            diags.push(Diagnostic::error(
                Code::E_UNKNOWN_MODULE,
                Some(*pos),
                inst,
                format!("alias `{}` refers to undeclared instance `{}`", alias, inst),
            ));
            continue;
        }
        let module = sys
            .instances
            .iter()
            .find(|i| i.instance_name == inst)
            .and_then(|i| lib.iter().find(|m| m.name == i.module_name));
        if let Some(m) = module {
            if !m.automata.iter().any(|a| a.name == auto) {
                diags.push(Diagnostic::error(
                    Code::E_UNKNOWN_MODULE,
                    Some(*pos),
                    auto,
                    format!("alias `{}` refers to unknown automaton `{}` of module `{}`", alias, auto, m.name),
                ));
            }
        }
    }
    diags
}

fn check_instance(decl: &InstanceDeclaration, lib: &[ModuleAst], diags: &mut Vec<Diagnostic>) {
    let Some(m) = lib.iter().find(|m| m.name == decl.module_name) else {
        diags.push(Diagnostic::error(
            Code::E_UNKNOWN_MODULE,
            Some(decl.pos),
            &decl.module_name,
            format!("unknown module `{}`", decl.module_name),
        ));
        return;
    };
    let n = m.numeric_params.len();
    if decl.actuals.len() < n {
        diags.push(Diagnostic::error(
            Code::E_ARITY,
            Some(decl.pos),
            &decl.instance_name,
            format!(
                "instance `{}` supplies {} actuals but module `{}` has {} numeric parameters",
                decl.instance_name,
                decl.actuals.len(),
                m.name,
                n
            ),
        ));
        return;
    }
    let mut numeric = BTreeMap::new();
    let mut bad_numeric = false;
    for (p, a) in m.numeric_params.iter().zip(&decl.actuals) {
        match a {
            Actual::Number(v) => {
                numeric.insert(p.clone(), *v);
            }
            other => {
                diags.push(Diagnostic::error(
                    Code::E_KIND,
                    Some(decl.pos),
                    other.to_string(),
                    format!("numeric parameter `{}` bound to non-number `{}`", p, other),
                ));
                bad_numeric = true;
            }
        }
    }
    if bad_numeric {
        return; // slot layout depends on the numeric parameters
    }
    let slots = match flatten_slots(m, &numeric) {
        Ok(s) => s,
        Err(d) => {
            diags.push(d);
            return;
        }
    };
    let rest = &decl.actuals[n..];
    if rest.len() != slots.len() {
        diags.push(Diagnostic::error(
            Code::E_ARITY,
            Some(decl.pos),
            &decl.instance_name,
            format!(
                "instance `{}` supplies {} signal actuals but module `{}` has {} parameter slots",
                decl.instance_name,
                rest.len(),
                m.name,
                slots.len()
            ),
        ));
        return;
    }
    let mut seen_signals: BTreeSet<(String, Vec<i64>)> = BTreeSet::new();
    for (slot, actual) in slots.iter().zip(rest) {
        match actual {
            Actual::Number(v) => diags.push(Diagnostic::error(
                Code::E_KIND,
                Some(decl.pos),
                v.to_string(),
                format!("signal parameter `{}` bound to number `{}`", slot.formal, v),
            )),
            Actual::Const0 | Actual::Const1 => {
                if slot.qualifier == Qualifier::Out {
                    diags.push(Diagnostic::error(
                        Code::E_CONST_FOR_OUTPUT,
                        Some(decl.pos),
                        actual.to_string(),
                        format!("output parameter `{}` bound to constant `{}`", slot.formal, actual),
                    ));
                }
            }
            Actual::Dummy => {
                if slot.qualifier == Qualifier::In {
                    diags.push(Diagnostic::error(
                        Code::E_DUMMY_FOR_INPUT,
                        Some(decl.pos),
                        &slot.formal,
                        format!("input parameter `{}` bound to `dummy`", slot.formal),
                    ));
                }
            }
            Actual::Signal { name, indices, attrs } => {
                if !indices.is_empty() && !decl.synthetic {
                    diags.push(Diagnostic::error(
                        Code::E_VECTOR_ACTUAL,
                        Some(decl.pos),
                        name,
                        format!("actual `{}` carries an index; actual signals must be plain names", actual),
                    ));
                }
                if attrs.len() != slot.attr_count {
                    diags.push(Diagnostic::error(
                        Code::E_ATTR_ARITY,
                        Some(decl.pos),
                        name,
                        format!(
                            "actual `{}` carries {} attributes but formal `{}` declares {}",
                            name,
                            attrs.len(),
                            slot.formal,
                            slot.attr_count
                        ),
                    ));
                }
                if !seen_signals.insert((name.clone(), indices.clone())) {
                    diags.push(Diagnostic::error(
                        Code::E_DUP_ACTUAL,
                        Some(decl.pos),
                        name,
                        format!("signal `{}` is bound to more than one parameter of instance `{}`", name, decl.instance_name),
                    ));
                }
            }
        }
    }
}
