//! Boolean guard formulas over signals.
//!
//! Canonical text forms: `*` conjunction, `+` disjunction, `~` negation,
//! `1`/`0` constants. And/Or are n-ary and flattened on construction.

use std::collections::BTreeSet;
use std::fmt;

use crate::diag::{Code, Diagnostic};
use crate::signal::{SignalId, Valuation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ShortcutKind {
    /// ε: no signal of the set is asserted.
    Eps,
    /// At least one signal of the set is asserted.
    Any,
    /// All signals of the set are asserted.
    All,
    /// Exactly one signal of the set is asserted.
    Single,
    /// Only the signal at the given position in the set is asserted.
    SingleAt(usize),
}

impl fmt::Display for ShortcutKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShortcutKind::Eps => write!(f, "eps"),
            ShortcutKind::Any => write!(f, "any"),
            ShortcutKind::All => write!(f, "all"),
            ShortcutKind::Single => write!(f, "single"),
            ShortcutKind::SingleAt(j) => write!(f, "single[{}]", j),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Ref(SignalId),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    /// An unexpanded shortcut over a concrete signal set. Never present in
    /// expanded (shortcut-free) formulas.
    Shortcut(ShortcutKind, Vec<SignalId>),
}

impl Formula {
    pub fn r(s: SignalId) -> Formula {
        Formula::Ref(s)
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    /// n-ary conjunction; flattens nested And, collapses trivial arities.
    pub fn and(parts: Vec<Formula>) -> Formula {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                Formula::And(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Formula::True,
            1 => flat.pop().unwrap(),
            _ => Formula::And(flat),
        }
    }

    /// n-ary disjunction; flattens nested Or, collapses trivial arities.
    pub fn or(parts: Vec<Formula>) -> Formula {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                Formula::Or(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Formula::False,
            1 => flat.pop().unwrap(),
            _ => Formula::Or(flat),
        }
    }

    pub fn is_shortcut_free(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Ref(_) => true,
            Formula::Not(f) => f.is_shortcut_free(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().all(Formula::is_shortcut_free),
            Formula::Shortcut(..) => false,
        }
    }

    /// Evaluate a shortcut-free formula under a valuation. A shortcut node
    /// means expansion went wrong and is reported as an internal error.
    pub fn eval(&self, v: &Valuation) -> Result<bool, Diagnostic> {
        match self {
            Formula::True => Ok(true),
            Formula::False => Ok(false),
            Formula::Ref(s) => Ok(v.contains(s)),
            Formula::Not(f) => Ok(!f.eval(v)?),
            Formula::And(fs) => {
                for f in fs {
                    if !f.eval(v)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Formula::Or(fs) => {
                for f in fs {
                    if f.eval(v)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Formula::Shortcut(kind, _) => Err(Diagnostic::error(
                Code::E_INTERNAL,
                None,
                kind.to_string(),
                format!("unexpanded shortcut `{}` reached evaluation", kind),
            )),
        }
    }

    /// All signals referenced anywhere in the formula, shortcut sets included.
    pub fn signals(&self) -> BTreeSet<SignalId> {
        let mut out = BTreeSet::new();
        self.collect_signals(&mut out);
        out
    }

    fn collect_signals(&self, out: &mut BTreeSet<SignalId>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Ref(s) => {
                out.insert(s.clone());
            }
            Formula::Not(f) => f.collect_signals(out),
            Formula::And(fs) | Formula::Or(fs) => {
                for f in fs {
                    f.collect_signals(out);
                }
            }
            Formula::Shortcut(_, set) => out.extend(set.iter().cloned()),
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Formula::Or(_) => 1,
            Formula::And(_) => 2,
            Formula::Not(_) => 3,
            _ => 4,
        }
    }

    fn render_at(&self, min: u8, out: &mut String) {
        let parens = self.prec() < min;
        if parens {
            out.push('(');
        }
        match self {
            Formula::True => out.push('1'),
            Formula::False => out.push('0'),
            Formula::Ref(s) => out.push_str(&s.to_string()),
            Formula::Not(f) => {
                out.push('~');
                f.render_at(3, out);
            }
            Formula::And(fs) => {
                for (i, f) in fs.iter().enumerate() {
                    if i > 0 {
                        out.push('*');
                    }
                    f.render_at(3, out);
                }
            }
            Formula::Or(fs) => {
                for (i, f) in fs.iter().enumerate() {
                    if i > 0 {
                        out.push_str(" + ");
                    }
                    f.render_at(2, out);
                }
            }
            Formula::Shortcut(kind, set) => {
                out.push_str(&kind.to_string());
                out.push('(');
                for (i, s) in set.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    out.push_str(&s.to_string());
                }
                out.push(')');
            }
        }
        if parens {
            out.push(')');
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.render_at(0, &mut s);
        write!(f, "{}", s)
    }
}
