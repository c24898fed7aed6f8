//! Diagnostics shared by every pipeline stage.

use std::fmt;

/// Source position, 1-based line and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl Pos {
    pub fn new(line: u32, col: u32) -> Self {
        Pos { line, col }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Closed set of diagnostic codes. Variant names are the rendered codes.
#[allow(non_camel_case_types)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Code {
    // lexing / parsing
    E_LEX,
    E_PARSE,
    // concrete automaton validation
    E_DUP_STATE,
    E_UNKNOWN_STATE,
    // module-level semantic checks
    E_DUP_FORMAL,
    E_DUP_AUTOMATON,
    E_INPUT_GENERATED,
    E_INPUT_UNUSED,
    E_OUTPUT_NOT_GENERATED,
    E_DUP_INDEX,
    E_UNKNOWN_EXPR_ID,
    E_INEQ_BEFORE_RANGE,
    E_UNKNOWN_SIGNAL,
    E_VECTOR_EMIT_SCALAR,
    // instantiation checks
    E_UNKNOWN_MODULE,
    E_ARITY,
    E_KIND,
    E_ATTR_ARITY,
    E_DUP_ACTUAL,
    E_CONST_FOR_OUTPUT,
    E_DUMMY_FOR_INPUT,
    E_VECTOR_ACTUAL,
    // expansion
    E_UNBOUND_ID,
    E_INDEX_OUT_OF_RANGE,
    E_EMPTY_SHORTCUT_SET,
    E_HEADER_ONLY,
    // analysis
    E_NOT_EXTERNAL,
    E_BUDGET_EXCEEDED,
    E_TOO_MANY_SIGNALS,
    // stdlib
    E_UNKNOWN_BUILTIN,
    // invariant violations that indicate a bug upstream
    E_INTERNAL,
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: Code,
    pub severity: Severity,
    pub message: String,
    pub pos: Option<Pos>,
    /// Offending identifier, when there is one.
    pub subject: String,
}

impl Diagnostic {
    pub fn error(code: Code, pos: Option<Pos>, subject: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            code,
            severity: Severity::Error,
            message: message.into(),
            pos,
            subject: subject.into(),
        }
    }

    pub fn warning(code: Code, pos: Option<Pos>, subject: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            ..Diagnostic::error(code, pos, subject, message)
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// Render as `FILE:LINE:COL: CODE: message`.
    pub fn render(&self, file: &str) -> String {
        match self.pos {
            Some(p) => format!("{}:{}: {}: {}", file, p, self.code, self.message),
            None => format!("{}: {}: {}", file, self.code, self.message),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pos {
            Some(p) => write!(f, "{}: {}: {}", p, self.code, self.message),
            None => write!(f, "{}: {}", self.code, self.message),
        }
    }
}

/// True if any diagnostic in the list is an error.
pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}
