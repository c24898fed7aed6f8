//! ASTs for library-module and system files, plus a canonical renderer.

use std::fmt;

use crate::diag::Pos;

/// Index expression: `i`, `i+1`, `N-2`, or a literal number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IndexExpr {
    Num(i64),
    Var(String),
    Add(String, i64),
    Sub(String, i64),
}

impl IndexExpr {
    /// The identifier this expression depends on, if any.
    pub fn var(&self) -> Option<&str> {
        match self {
            IndexExpr::Num(_) => None,
            IndexExpr::Var(v) | IndexExpr::Add(v, _) | IndexExpr::Sub(v, _) => Some(v),
        }
    }
}

impl fmt::Display for IndexExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexExpr::Num(n) => write!(f, "{}", n),
            IndexExpr::Var(v) => write!(f, "{}", v),
            IndexExpr::Add(v, n) => write!(f, "{}+{}", v, n),
            IndexExpr::Sub(v, n) => write!(f, "{}-{}", v, n),
        }
    }
}

/// `lo..hi` bounds; a range list may hold several segments.
pub type Range = (IndexExpr, IndexExpr);

pub fn render_ranges(ranges: &[Range]) -> String {
    ranges
        .iter()
        .map(|(lo, hi)| format!("{}..{}", lo, hi))
        .collect::<Vec<_>>()
        .join(",")
}

/// One element of an index-range list on a state declaration or transition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RangeElem {
    /// `[i=0..N-1]`
    Range { var: String, ranges: Vec<Range>, pos: Pos },
    /// `[i/=j]`
    Ineq { var: String, rhs: IndexExpr, pos: Pos },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalRefAst {
    pub name: String,
    pub indices: Vec<IndexExpr>,
    pub pos: Pos,
}

impl fmt::Display for SignalRefAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)?;
        if !self.indices.is_empty() {
            let parts: Vec<String> = self.indices.iter().map(|i| i.to_string()).collect();
            write!(f, "[{}]", parts.join(","))?;
        }
        Ok(())
    }
}

pub type StateRefAst = SignalRefAst;

/// Element of a shortcut's signal-set specifier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SetElem {
    /// `set[j]` or a plain signal.
    Signal(SignalRefAst),
    /// `set[l=0..N-1]`: the vector slice bound by a local index.
    Ranged { name: String, var: String, ranges: Vec<Range>, pos: Pos },
}

impl fmt::Display for SetElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetElem::Signal(s) => write!(f, "{}", s),
            SetElem::Ranged { name, var, ranges, .. } => {
                write!(f, "{}[{}={}]", name, var, render_ranges(ranges))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AstShortcutKind {
    Eps,
    Any,
    All,
    Single,
}

impl fmt::Display for AstShortcutKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AstShortcutKind::Eps => write!(f, "eps"),
            AstShortcutKind::Any => write!(f, "any"),
            AstShortcutKind::All => write!(f, "all"),
            AstShortcutKind::Single => write!(f, "single"),
        }
    }
}

/// Guard formula as parsed: may contain shortcuts and index expressions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GuardAst {
    True,
    False,
    Ref(SignalRefAst),
    Not(Box<GuardAst>),
    And(Vec<GuardAst>),
    Or(Vec<GuardAst>),
    Shortcut {
        kind: AstShortcutKind,
        /// Selector of `single[j](...)`.
        selector: Option<IndexExpr>,
        set: Vec<SetElem>,
        pos: Pos,
    },
}

impl GuardAst {
    pub fn not(g: GuardAst) -> GuardAst {
        GuardAst::Not(Box::new(g))
    }

    pub fn and(mut parts: Vec<GuardAst>) -> GuardAst {
        let mut flat = Vec::new();
        for p in parts.drain(..) {
            match p {
                GuardAst::And(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            1 => flat.pop().unwrap(),
            _ => GuardAst::And(flat),
        }
    }

    pub fn or(mut parts: Vec<GuardAst>) -> GuardAst {
        let mut flat = Vec::new();
        for p in parts.drain(..) {
            match p {
                GuardAst::Or(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            1 => flat.pop().unwrap(),
            _ => GuardAst::Or(flat),
        }
    }

    fn prec(&self) -> u8 {
        match self {
            GuardAst::Or(_) => 1,
            GuardAst::And(_) => 2,
            GuardAst::Not(_) => 3,
            _ => 4,
        }
    }

    fn render_at(&self, min: u8, out: &mut String) {
        let parens = self.prec() < min;
        if parens {
            out.push('(');
        }
        match self {
            GuardAst::True => out.push('1'),
            GuardAst::False => out.push('0'),
            GuardAst::Ref(s) => out.push_str(&s.to_string()),
            GuardAst::Not(g) => {
                out.push('~');
                g.render_at(3, out);
            }
            GuardAst::And(gs) => {
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        out.push('*');
                    }
                    g.render_at(3, out);
                }
            }
            GuardAst::Or(gs) => {
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        out.push_str(" + ");
                    }
                    g.render_at(2, out);
                }
            }
            GuardAst::Shortcut { kind, selector, set, .. } => {
                out.push_str(&kind.to_string());
                if let Some(sel) = selector {
                    out.push_str(&format!("[{}]", sel));
                }
                out.push('(');
                for (i, e) in set.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    out.push_str(&e.to_string());
                }
                out.push(')');
            }
        }
        if parens {
            out.push(')');
        }
    }
}

impl fmt::Display for GuardAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.render_at(0, &mut s);
        write!(f, "{}", s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Qualifier {
    In,
    Out,
}

impl fmt::Display for Qualifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Qualifier::In => write!(f, "in"),
            Qualifier::Out => write!(f, "out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Shape {
    Scalar,
    Vector(Vec<Range>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormalSignal {
    pub qualifier: Qualifier,
    /// The `%`-stripped formal identifier.
    pub name: String,
    pub shape: Shape,
    /// Attribute identifiers; scalar formals only.
    pub attributes: Vec<String>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateDecl {
    pub name: String,
    pub indices: Vec<IndexExpr>,
    pub emits: Vec<SignalRefAst>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionAst {
    pub ranges: Vec<RangeElem>,
    pub source: StateRefAst,
    pub guard: GuardAst,
    pub target: StateRefAst,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutomatonAst {
    pub name: String,
    /// Each `STATES` line: its range binders and state declarations.
    pub state_decls: Vec<(Vec<RangeElem>, Vec<StateDecl>)>,
    pub initial: Option<StateRefAst>,
    pub transitions: Vec<TransitionAst>,
    pub pos: Pos,
}

impl AutomatonAst {
    /// No states and no transitions: an interface stub from a header-only
    /// library entry.
    pub fn is_header_only(&self) -> bool {
        self.state_decls.is_empty() && self.transitions.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleAst {
    pub name: String,
    /// Identifiers of `%[N]` parameters, in header order.
    pub numeric_params: Vec<String>,
    pub formal_signals: Vec<FormalSignal>,
    pub automata: Vec<AutomatonAst>,
    pub pos: Pos,
}

impl ModuleAst {
    pub fn formal(&self, name: &str) -> Option<&FormalSignal> {
        self.formal_signals.iter().find(|f| f.name == name)
    }

    pub fn is_header_only(&self) -> bool {
        self.automata.iter().all(AutomatonAst::is_header_only)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Actual {
    Number(i64),
    Signal {
        name: String,
        /// Indices are rejected by the instantiation check for user-written
        /// declarations; synthetic convenience instances use them.
        indices: Vec<i64>,
        attrs: Vec<String>,
    },
    Const0,
    Const1,
    Dummy,
}

impl fmt::Display for Actual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Actual::Number(n) => write!(f, "{}", n),
            Actual::Signal { name, indices, attrs } => {
                write!(f, "{}", name)?;
                if !indices.is_empty() {
                    let parts: Vec<String> = indices.iter().map(|i| i.to_string()).collect();
                    write!(f, "[{}]", parts.join(","))?;
                }
                if !attrs.is_empty() {
                    write!(f, "({})", attrs.join(","))?;
                }
                Ok(())
            }
            Actual::Const0 => write!(f, "_0"),
            Actual::Const1 => write!(f, "_1"),
            Actual::Dummy => write!(f, "dummy"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceDeclaration {
    pub instance_name: String,
    pub actuals: Vec<Actual>,
    pub module_name: String,
    /// Set for generated convenience instances, which may bind vector
    /// slots to indexed signal names.
    pub synthetic: bool,
    pub pos: Pos,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SystemAst {
    pub instances: Vec<InstanceDeclaration>,
    /// `alias: instance.automaton` lines.
    pub automaton_aliases: Vec<(String, String, Pos)>,
    pub external_signals: Vec<crate::signal::SignalId>,
}

/// Render a module back to source form. Parsing the result yields a
/// token-equivalent AST; used by the round-trip tests.
pub fn render_module(m: &ModuleAst) -> String {
    let mut out = String::new();
    out.push_str("MODULE ");
    out.push_str(&m.name);
    if !m.numeric_params.is_empty() || !m.formal_signals.is_empty() {
        let mut parts = Vec::new();
        for p in &m.numeric_params {
            parts.push(format!("%[{}]", p));
        }
        for fs in &m.formal_signals {
            let mut s = format!("{} %{}", fs.qualifier, fs.name);
            match &fs.shape {
                Shape::Scalar => {
                    if !fs.attributes.is_empty() {
                        let attrs: Vec<String> = fs.attributes.iter().map(|a| format!("%{}", a)).collect();
                        s.push_str(&format!("({})", attrs.join(", ")));
                    }
                }
                Shape::Vector(ranges) => s.push_str(&format!("[{}]", render_ranges(ranges))),
            }
            parts.push(s);
        }
        out.push_str(&format!("({})", parts.join(", ")));
    }
    out.push('\n');
    for a in &m.automata {
        out.push_str(&format!("AUTOMATON {}\n", a.name));
        for (ranges, decls) in &a.state_decls {
            out.push_str("STATES ");
            out.push_str(&render_range_elems(ranges));
            let states: Vec<String> = decls
                .iter()
                .map(|d| {
                    let mut s = SignalRefAst {
                        name: d.name.clone(),
                        indices: d.indices.clone(),
                        pos: d.pos,
                    }
                    .to_string();
                    if !d.emits.is_empty() {
                        let emits: Vec<String> = d.emits.iter().map(|e| e.to_string()).collect();
                        s.push_str(&format!("/{}", emits.join(",")));
                    }
                    s
                })
                .collect();
            out.push_str(&format!("({})\n", states.join(", ")));
        }
        if let Some(init) = &a.initial {
            out.push_str(&format!("init {}\n", init));
        }
        if !a.transitions.is_empty() {
            out.push_str("TRANS\n");
            for t in &a.transitions {
                out.push_str(&render_range_elems(&t.ranges));
                out.push_str(&format!("{} --{{ {} }}--> {}\n", t.source, t.guard, t.target));
            }
        }
        out.push_str("END\n");
    }
    out.push_str("END\n");
    out
}

fn render_range_elems(elems: &[RangeElem]) -> String {
    let mut out = String::new();
    for e in elems {
        match e {
            RangeElem::Range { var, ranges, .. } => {
                out.push_str(&format!("[{}={}]", var, render_ranges(ranges)));
            }
            RangeElem::Ineq { var, rhs, .. } => {
                out.push_str(&format!("[{}/={}]", var, rhs));
            }
        }
    }
    if !out.is_empty() {
        out.push(' ');
    }
    out
}
