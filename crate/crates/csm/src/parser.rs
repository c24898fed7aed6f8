//! Recursive-descent parser for library files (.csml), system files
//! (.csms) and the restricted flat format (.csmf).

use std::collections::BTreeSet;

use crate::ast::*;
use crate::automaton::{ConcreteAutomaton, ConcreteState, ConcreteTransition, SystemConfig};
use crate::diag::{Code, Diagnostic, Pos};
use crate::formula::Formula;
use crate::lexer::{tokenize, Tok, Token};
use crate::signal::SignalId;

struct Parser<'a> {
    toks: &'a [Token],
    i: usize,
    diags: Vec<Diagnostic>,
}

type PResult<T> = Result<T, ()>;

impl<'a> Parser<'a> {
    fn new(toks: &'a [Token]) -> Self {
        Parser { toks, i: 0, diags: Vec::new() }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn peek_at(&self, off: usize) -> &Tok {
        let j = (self.i + off).min(self.toks.len() - 1);
        &self.toks[j].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].pos
    }

    fn bump(&mut self) -> &Token {
        let t = &self.toks[self.i];
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn err<T>(&mut self, expected: &str) -> PResult<T> {
        let pos = self.pos();
        let got = self.peek().clone();
        self.diags.push(Diagnostic::error(
            Code::E_PARSE,
            Some(pos),
            got.to_string(),
            format!("expected {}, found {}", expected, got),
        ));
        Err(())
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> PResult<()> {
        if self.eat(&tok) {
            Ok(())
        } else {
            self.err(expected)
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek() {
            Tok::Ident(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.err(what),
        }
    }

    /// Identifier, allowing framing keywords to double as names.
    fn name(&mut self, what: &str) -> PResult<String> {
        match self.peek().as_name() {
            Some(s) => {
                let s = s.to_string();
                self.bump();
                Ok(s)
            }
            None => self.err(what),
        }
    }

    fn number(&mut self, what: &str) -> PResult<i64> {
        match self.peek() {
            Tok::Number(n) => {
                let n = *n;
                self.bump();
                Ok(n)
            }
            _ => self.err(what),
        }
    }

    // ---- expressions and ranges ----

    fn expr(&mut self) -> PResult<IndexExpr> {
        match self.peek().clone() {
            Tok::Number(n) => {
                self.bump();
                Ok(IndexExpr::Num(n))
            }
            Tok::Ident(v) => {
                self.bump();
                if self.eat(&Tok::Plus) {
                    let n = self.number("number after `+`")?;
                    Ok(IndexExpr::Add(v, n))
                } else if self.eat(&Tok::Minus) {
                    let n = self.number("number after `-`")?;
                    Ok(IndexExpr::Sub(v, n))
                } else {
                    Ok(IndexExpr::Var(v))
                }
            }
            _ => self.err("index expression"),
        }
    }

    fn range_list(&mut self) -> PResult<Vec<Range>> {
        let mut out = Vec::new();
        loop {
            let lo = self.expr()?;
            self.expect(Tok::DotDot, "`..` in range")?;
            let hi = self.expr()?;
            out.push((lo, hi));
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(out)
    }

    /// Zero or more `[i=..]` / `[i/=e]` groups. Stops before `[` groups
    /// that are index lists rather than binders.
    fn range_elems(&mut self) -> PResult<Vec<RangeElem>> {
        let mut out = Vec::new();
        while self.peek() == &Tok::LBrack && self.is_binder_group() {
            let pos = self.pos();
            self.bump(); // [
            let var = self.ident("index identifier")?;
            if self.eat(&Tok::Eq) {
                let ranges = self.range_list()?;
                self.expect(Tok::RBrack, "`]`")?;
                out.push(RangeElem::Range { var, ranges, pos });
            } else if self.eat(&Tok::NotEq) {
                let rhs = self.expr()?;
                self.expect(Tok::RBrack, "`]`")?;
                out.push(RangeElem::Ineq { var, rhs, pos });
            } else {
                return self.err("`=` or `/=` in index range");
            }
        }
        Ok(out)
    }

    /// `[ ident =` or `[ ident /=` ahead?
    fn is_binder_group(&self) -> bool {
        matches!(self.peek_at(1), Tok::Ident(_))
            && matches!(self.peek_at(2), Tok::Eq | Tok::NotEq)
    }

    /// `name` or `name[e1,e2]`; does not consume binder groups.
    fn signal_ref(&mut self) -> PResult<SignalRefAst> {
        let pos = self.pos();
        let name = self.ident("signal or state name")?;
        let mut indices = Vec::new();
        if self.peek() == &Tok::LBrack && !self.is_binder_group() {
            self.bump();
            loop {
                indices.push(self.expr()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RBrack, "`]`")?;
        }
        Ok(SignalRefAst { name, indices, pos })
    }

    // ---- formulas ----

    fn formula(&mut self) -> PResult<GuardAst> {
        let mut terms = vec![self.term()?];
        while self.eat(&Tok::Plus) {
            terms.push(self.term()?);
        }
        Ok(GuardAst::or(terms))
    }

    fn term(&mut self) -> PResult<GuardAst> {
        let mut factors = vec![self.factor()?];
        while self.eat(&Tok::Star) {
            factors.push(self.factor()?);
        }
        Ok(GuardAst::and(factors))
    }

    fn factor(&mut self) -> PResult<GuardAst> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Tilde => {
                self.bump();
                Ok(GuardAst::not(self.factor()?))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Number(1) => {
                self.bump();
                Ok(GuardAst::True)
            }
            Tok::Number(0) => {
                self.bump();
                Ok(GuardAst::False)
            }
            Tok::Number(_) => self.err("`0` or `1` (the only constants in formulas)"),
            Tok::KwEps => {
                self.bump();
                self.shortcut(AstShortcutKind::Eps, None, pos)
            }
            Tok::KwAny => {
                self.bump();
                self.shortcut(AstShortcutKind::Any, None, pos)
            }
            Tok::KwAll => {
                self.bump();
                self.shortcut(AstShortcutKind::All, None, pos)
            }
            Tok::KwSingle => {
                self.bump();
                let selector = if self.eat(&Tok::LBrack) {
                    let e = self.expr()?;
                    self.expect(Tok::RBrack, "`]`")?;
                    Some(e)
                } else {
                    None
                };
                self.shortcut(AstShortcutKind::Single, selector, pos)
            }
            Tok::Ident(_) => Ok(GuardAst::Ref(self.signal_ref()?)),
            _ => self.err("formula factor"),
        }
    }

    fn shortcut(
        &mut self,
        kind: AstShortcutKind,
        selector: Option<IndexExpr>,
        pos: Pos,
    ) -> PResult<GuardAst> {
        self.expect(Tok::LParen, "`(` after shortcut")?;
        let mut set = Vec::new();
        loop {
            set.push(self.set_elem()?);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::RParen, "`)` closing shortcut set")?;
        Ok(GuardAst::Shortcut { kind, selector, set, pos })
    }

    fn set_elem(&mut self) -> PResult<SetElem> {
        if self.peek_at(1) == &Tok::LBrack
            && matches!(self.peek_at(2), Tok::Ident(_))
            && self.peek_at(3) == &Tok::Eq
        {
            let pos = self.pos();
            let name = self.ident("signal name")?;
            self.bump(); // [
            let var = self.ident("index identifier")?;
            self.bump(); // =
            let ranges = self.range_list()?;
            self.expect(Tok::RBrack, "`]`")?;
            Ok(SetElem::Ranged { name, var, ranges, pos })
        } else {
            Ok(SetElem::Signal(self.signal_ref()?))
        }
    }

    // ---- library modules ----

    fn module(&mut self) -> PResult<ModuleAst> {
        let pos = self.pos();
        self.expect(Tok::KwModule, "`MODULE`")?;
        let name = self.ident("module name")?;
        let mut numeric_params = Vec::new();
        let mut formal_signals = Vec::new();
        if self.eat(&Tok::LParen) {
            loop {
                if self.peek() == &Tok::PercentLBrack {
                    let pos = self.pos();
                    self.bump();
                    let p = self.ident("numeric parameter name")?;
                    self.expect(Tok::RBrack, "`]`")?;
                    if !formal_signals.is_empty() {
                        self.diags.push(Diagnostic::error(
                            Code::E_PARSE,
                            Some(pos),
                            &p,
                            "numeric parameters must precede signal parameters",
                        ));
                        return Err(());
                    }
                    numeric_params.push(p);
                } else {
                    formal_signals.push(self.formal_signal()?);
                }
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RParen, "`)` closing formal list")?;
        }
        let mut automata = Vec::new();
        while self.peek() == &Tok::KwAutomaton {
            automata.push(self.automaton()?);
        }
        self.expect(Tok::KwEnd, "`AUTOMATON` or `END`")?;
        Ok(ModuleAst { name, numeric_params, formal_signals, automata, pos })
    }

    fn formal_signal(&mut self) -> PResult<FormalSignal> {
        let pos = self.pos();
        let qualifier = if self.eat(&Tok::KwIn) {
            Qualifier::In
        } else if self.eat(&Tok::KwOut) {
            Qualifier::Out
        } else {
            return self.err("`in` or `out`");
        };
        self.expect(Tok::Percent, "`%` before formal identifier")?;
        let name = self.ident("formal identifier")?;
        if self.eat(&Tok::LBrack) {
            let ranges = self.range_list()?;
            self.expect(Tok::RBrack, "`]`")?;
            Ok(FormalSignal { qualifier, name, shape: Shape::Vector(ranges), attributes: Vec::new(), pos })
        } else {
            let mut attributes = Vec::new();
            if self.eat(&Tok::LParen) {
                loop {
                    self.expect(Tok::Percent, "`%` before attribute identifier")?;
                    attributes.push(self.ident("attribute identifier")?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RParen, "`)` closing attribute list")?;
            }
            Ok(FormalSignal { qualifier, name, shape: Shape::Scalar, attributes, pos })
        }
    }

    fn automaton(&mut self) -> PResult<AutomatonAst> {
        let pos = self.pos();
        self.expect(Tok::KwAutomaton, "`AUTOMATON`")?;
        let name = self.name("automaton name")?;
        let mut state_decls = Vec::new();
        while self.peek() == &Tok::KwStates {
            self.bump();
            let ranges = self.range_elems()?;
            self.expect(Tok::LParen, "`(` opening state list")?;
            let decls = self.state_list()?;
            state_decls.push((ranges, decls));
        }
        let initial = if self.eat(&Tok::KwInit) {
            Some(self.signal_ref()?)
        } else {
            None
        };
        let mut transitions = Vec::new();
        if self.eat(&Tok::KwTrans) {
            while self.peek() != &Tok::KwEnd && self.peek() != &Tok::Eof {
                transitions.push(self.transition()?);
            }
        }
        self.expect(Tok::KwEnd, "`END` closing automaton")?;
        Ok(AutomatonAst { name, state_decls, initial, transitions, pos })
    }

    /// Comma-separated states, each optionally `/ emissions`. The surface
    /// grammar is ambiguous here (an emission list and the state list share
    /// the comma); after a comma we start a new state when the element is
    /// followed by `/`, or when the previous state had no emissions.
    fn state_list(&mut self) -> PResult<Vec<StateDecl>> {
        let mut out = Vec::new();
        loop {
            let pos = self.pos();
            let head = self.signal_ref()?;
            let mut emits = Vec::new();
            if self.eat(&Tok::Slash) {
                emits.push(self.signal_ref()?);
                while self.peek() == &Tok::Comma && !self.next_elem_is_state() {
                    self.bump();
                    emits.push(self.signal_ref()?);
                }
            }
            out.push(StateDecl { name: head.name, indices: head.indices, emits, pos });
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::RParen, "`)` closing state list")?;
        Ok(out)
    }

    /// After a comma inside a state list: does `ident indices?` lead to `/`?
    fn next_elem_is_state(&self) -> bool {
        let at = |j: usize| &self.toks[j.min(self.toks.len() - 1)].tok;
        let mut j = self.i + 1; // past the comma
        if !matches!(at(j), Tok::Ident(_)) {
            return false;
        }
        j += 1;
        if at(j) == &Tok::LBrack {
            while at(j) != &Tok::RBrack && at(j) != &Tok::Eof {
                j += 1;
            }
            j += 1;
        }
        at(j) == &Tok::Slash
    }

    fn transition(&mut self) -> PResult<TransitionAst> {
        let pos = self.pos();
        let ranges = self.range_elems()?;
        let source = self.signal_ref()?;
        self.expect(Tok::ArrowOpen, "`--{`")?;
        let guard = self.formula()?;
        self.expect(Tok::ArrowClose, "`}-->`")?;
        let target = self.signal_ref()?;
        Ok(TransitionAst { ranges, source, guard, target, pos })
    }

    // ---- system files ----

    fn system(&mut self) -> PResult<SystemAst> {
        self.expect(Tok::KwSystem, "`SYSTEM`")?;
        // optional system name; an alias line is distinguished by its `:`
        if matches!(self.peek(), Tok::Ident(_)) && self.peek_at(1) != &Tok::Colon {
            self.bump();
        }
        let mut sys = SystemAst::default();
        loop {
            match self.peek().clone() {
                Tok::KwEnd => {
                    self.bump();
                    break;
                }
                Tok::KwInstance => {
                    self.bump();
                    sys.instances.push(self.instance()?);
                }
                Tok::KwExternal => {
                    self.bump();
                    loop {
                        sys.external_signals.push(self.concrete_signal()?);
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                }
                Tok::Ident(alias) => {
                    let pos = self.pos();
                    self.bump();
                    self.expect(Tok::Colon, "`:` in automaton alias")?;
                    let inst = self.ident("instance name")?;
                    self.expect(Tok::Dot, "`.` in automaton alias")?;
                    let auto = self.name("automaton name")?;
                    sys.automaton_aliases.push((alias, format!("{}.{}", inst, auto), pos));
                }
                _ => return self.err("`INSTANCE`, `EXTERNAL`, an alias, or `END`"),
            }
        }
        Ok(sys)
    }

    fn instance(&mut self) -> PResult<InstanceDeclaration> {
        let pos = self.pos();
        let instance_name = self.ident("instance name")?;
        let mut actuals = Vec::new();
        if self.eat(&Tok::LParen) {
            loop {
                actuals.push(self.actual()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RParen, "`)` closing actual list")?;
        }
        self.expect(Tok::Colon, "`:` before module name")?;
        let module_name = self.ident("module name")?;
        Ok(InstanceDeclaration { instance_name, actuals, module_name, synthetic: false, pos })
    }

    fn actual(&mut self) -> PResult<Actual> {
        match self.peek().clone() {
            Tok::Number(n) => {
                self.bump();
                Ok(Actual::Number(n))
            }
            Tok::Const0 => {
                self.bump();
                Ok(Actual::Const0)
            }
            Tok::Const1 => {
                self.bump();
                Ok(Actual::Const1)
            }
            Tok::KwDummy => {
                self.bump();
                Ok(Actual::Dummy)
            }
            Tok::Ident(name) => {
                self.bump();
                let mut indices = Vec::new();
                if self.eat(&Tok::LBrack) {
                    loop {
                        indices.push(self.number("numeric index")?);
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    self.expect(Tok::RBrack, "`]`")?;
                }
                let mut attrs = Vec::new();
                if self.eat(&Tok::LParen) {
                    loop {
                        attrs.push(self.ident("attribute name")?);
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    self.expect(Tok::RParen, "`)` closing attribute list")?;
                }
                Ok(Actual::Signal { name, indices, attrs })
            }
            _ => self.err("actual parameter"),
        }
    }

    fn concrete_signal(&mut self) -> PResult<SignalId> {
        let name = self.ident("signal name")?;
        let mut indices = Vec::new();
        if self.eat(&Tok::LBrack) {
            loop {
                indices.push(self.number("numeric index")?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RBrack, "`]`")?;
        }
        Ok(SignalId { name, indices })
    }
}

fn lex_checked(text: &str) -> Result<Vec<Token>, Vec<Diagnostic>> {
    let toks = tokenize(text);
    let lex_errors: Vec<Diagnostic> = toks
        .iter()
        .filter_map(|t| match t.tok {
            Tok::Error(c) => Some(Diagnostic::error(
                Code::E_LEX,
                Some(t.pos),
                c.to_string(),
                format!("illegal character `{}`", c),
            )),
            _ => None,
        })
        .collect();
    if lex_errors.is_empty() {
        Ok(toks)
    } else {
        Err(lex_errors)
    }
}

/// Parse a library file. Recovers at the next `MODULE` keyword after an
/// error, so one bad module does not hide diagnostics in the others.
pub fn parse_library(text: &str) -> Result<Vec<ModuleAst>, Vec<Diagnostic>> {
    let toks = lex_checked(text)?;
    let mut p = Parser::new(&toks);
    let mut modules = Vec::new();
    while p.peek() != &Tok::Eof {
        match p.module() {
            Ok(m) => modules.push(m),
            Err(()) => {
                // skip to the next MODULE keyword
                p.bump();
                while p.peek() != &Tok::KwModule && p.peek() != &Tok::Eof {
                    p.bump();
                }
            }
        }
    }
    if p.diags.is_empty() {
        Ok(modules)
    } else {
        Err(p.diags)
    }
}

/// Parse a system (instantiation) file.
pub fn parse_system(text: &str) -> Result<SystemAst, Vec<Diagnostic>> {
    let toks = lex_checked(text)?;
    let mut p = Parser::new(&toks);
    match p.system() {
        Ok(sys) if p.diags.is_empty() => Ok(sys),
        _ => Err(p.diags),
    }
}

/// Parse the canonical flat format emitted by the analyzer: concrete
/// automata only, numeric indices, shortcut-free guards, no ranges.
pub fn parse_flat(text: &str) -> Result<SystemConfig, Vec<Diagnostic>> {
    let toks = lex_checked(text)?;
    let mut p = Parser::new(&toks);
    match flat_system(&mut p) {
        Ok(sys) if p.diags.is_empty() => Ok(sys),
        _ => Err(p.diags),
    }
}

fn flat_system(p: &mut Parser) -> PResult<SystemConfig> {
    let mut sys = SystemConfig::default();
    if p.eat(&Tok::KwExternal) {
        loop {
            let s = p.concrete_signal()?;
            sys.externals.insert(s);
            if !p.eat(&Tok::Comma) {
                break;
            }
        }
    }
    while p.eat(&Tok::KwAutomaton) {
        let mut name = p.name("automaton name")?;
        while p.eat(&Tok::Dot) {
            name.push('.');
            name.push_str(&p.name("automaton name")?);
        }
        let mut states = Vec::new();
        while p.peek() == &Tok::KwStates {
            p.bump();
            p.expect(Tok::LParen, "`(` opening state list")?;
            for decl in p.state_list()? {
                let pos = decl.pos;
                let sname = flat_state_name(p, &decl.name, &decl.indices, pos)?;
                let mut emits = BTreeSet::new();
                for e in &decl.emits {
                    emits.insert(flat_signal(p, e)?);
                }
                states.push(ConcreteState { name: sname, emits });
            }
        }
        p.expect(Tok::KwInit, "`init`")?;
        let init_ref = p.signal_ref()?;
        let pos = init_ref.pos;
        let initial = flat_state_name(p, &init_ref.name, &init_ref.indices, pos)?;
        let mut transitions = Vec::new();
        p.expect(Tok::KwTrans, "`TRANS`")?;
        while p.peek() != &Tok::KwEnd && p.peek() != &Tok::Eof {
            let t = p.transition()?;
            if !t.ranges.is_empty() {
                p.diags.push(Diagnostic::error(
                    Code::E_PARSE,
                    Some(t.pos),
                    &t.source.name,
                    "index ranges are not allowed in flat transitions",
                ));
                return Err(());
            }
            let source = flat_state_name(p, &t.source.name, &t.source.indices, t.pos)?;
            let target = flat_state_name(p, &t.target.name, &t.target.indices, t.pos)?;
            let guard = flat_guard(p, &t.guard, t.pos)?;
            transitions.push(ConcreteTransition { source, guard, target });
        }
        p.expect(Tok::KwEnd, "`END` closing automaton")?;
        sys.automata.push(ConcreteAutomaton { name, states, initial, transitions });
    }
    if p.peek() != &Tok::Eof {
        return p.err("`AUTOMATON` or end of input");
    }
    Ok(sys)
}

fn flat_indices(p: &mut Parser, indices: &[IndexExpr], pos: Pos) -> PResult<Vec<i64>> {
    let mut out = Vec::new();
    for e in indices {
        match e {
            IndexExpr::Num(n) => out.push(*n),
            other => {
                p.diags.push(Diagnostic::error(
                    Code::E_PARSE,
                    Some(pos),
                    other.to_string(),
                    format!("flat format requires numeric indices, found `{}`", other),
                ));
                return Err(());
            }
        }
    }
    Ok(out)
}

fn flat_state_name(p: &mut Parser, name: &str, indices: &[IndexExpr], pos: Pos) -> PResult<String> {
    let nums = flat_indices(p, indices, pos)?;
    Ok(SignalId::indexed(name, nums).to_string())
}

fn flat_signal(p: &mut Parser, r: &SignalRefAst) -> PResult<SignalId> {
    let nums = flat_indices(p, &r.indices, r.pos)?;
    Ok(SignalId::indexed(&r.name, nums))
}

fn flat_guard(p: &mut Parser, g: &GuardAst, pos: Pos) -> PResult<Formula> {
    match g {
        GuardAst::True => Ok(Formula::True),
        GuardAst::False => Ok(Formula::False),
        GuardAst::Ref(r) => Ok(Formula::Ref(flat_signal(p, r)?)),
        GuardAst::Not(inner) => Ok(Formula::not(flat_guard(p, inner, pos)?)),
        GuardAst::And(gs) => {
            let parts: PResult<Vec<Formula>> = gs.iter().map(|x| flat_guard(p, x, pos)).collect();
            Ok(Formula::and(parts?))
        }
        GuardAst::Or(gs) => {
            let parts: PResult<Vec<Formula>> = gs.iter().map(|x| flat_guard(p, x, pos)).collect();
            Ok(Formula::or(parts?))
        }
        GuardAst::Shortcut { kind, pos, .. } => {
            p.diags.push(Diagnostic::error(
                Code::E_PARSE,
                Some(*pos),
                kind.to_string(),
                format!("shortcut `{}` is not allowed in flat guards", kind),
            ));
            Err(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const COUNTER_SRC: &str = r#"
MODULE COUNTER(%[N], in %inc, in %dec, out %under, out %over, out %c[0..N-1])
AUTOMATON AUTOMATON
STATES [l=0..N-1] (UNDER/under, s[l]/c[l], OVER/over)
init s[0]
TRANS
UNDER --{ 1 }--> UNDER
s[0] --{ dec*~inc }--> UNDER
[l=0..N-2] s[l] --{ inc*~dec }--> s[l+1]
s[N-1] --{ inc*~dec }--> OVER
[l=1..N-1] s[l] --{ dec*~inc }--> s[l-1]
OVER --{ 1 }--> OVER
[i=0..N-1] s[i] --{ inc*dec + ~inc*~dec }--> s[i]
END
END
"#;

    #[test]
    fn counter_shape() {
        let modules = parse_library(COUNTER_SRC).unwrap();
        assert_eq!(modules.len(), 1);
        let m = &modules[0];
        assert_eq!(m.name, "COUNTER");
        assert_eq!(m.numeric_params, vec!["N"]);
        assert_eq!(m.formal_signals.len(), 5);
        assert!(matches!(m.formal_signals[4].shape, Shape::Vector(_)));
        assert_eq!(m.formal_signals[4].name, "c");
        assert_eq!(m.automata.len(), 1);
        assert_eq!(m.automata[0].transitions.len(), 7);
        assert_eq!(m.automata[0].initial.as_ref().unwrap().name, "s");
    }

    #[test]
    fn empty_formal_list_rejected() {
        let err = parse_library("MODULE M()\nEND\n").unwrap_err();
        assert!(err.iter().any(|d| d.code == Code::E_PARSE));
    }

    #[test]
    fn instance_with_attributes() {
        let sys = parse_system("SYSTEM\nINSTANCE LM(s1(a11,a12),s2(a2),s3):LIBRARY_MODULE\nEND\n").unwrap();
        assert_eq!(sys.instances.len(), 1);
        let inst = &sys.instances[0];
        assert_eq!(inst.instance_name, "LM");
        assert_eq!(inst.module_name, "LIBRARY_MODULE");
        match &inst.actuals[..] {
            [Actual::Signal { name: n1, attrs: a1, .. }, Actual::Signal { name: n2, attrs: a2, .. }, Actual::Signal { name: n3, attrs: a3, .. }] =>
            {
                assert_eq!((n1.as_str(), a1.len()), ("s1", 2));
                assert_eq!((n2.as_str(), a2.len()), ("s2", 1));
                assert_eq!((n3.as_str(), a3.len()), ("s3", 0));
            }
            other => panic!("unexpected actuals: {:?}", other),
        }
    }

    #[test]
    fn positional_actuals() {
        let sys = parse_system("SYSTEM\nINSTANCE C(2, i, d, u, o, c0, c1):COUNTER\nEND\n").unwrap();
        let inst = &sys.instances[0];
        assert_eq!(inst.actuals.len(), 7);
        assert_eq!(inst.actuals[0], Actual::Number(2));
        assert!(matches!(inst.actuals[1], Actual::Signal { .. }));
    }

    #[test]
    fn dummy_and_const_actuals() {
        let sys = parse_system("SYSTEM\nINSTANCE X(dummy, _1):M\nEND\n").unwrap();
        assert_eq!(sys.instances[0].actuals, vec![Actual::Dummy, Actual::Const1]);
    }

    #[test]
    fn aliases_and_externals() {
        let sys = parse_system(
            "SYSTEM\nINSTANCE C(1, i, d, u, o, c0):COUNTER\nCNT:C.AUTOMATON\nEXTERNAL i, d\nEND\n",
        )
        .unwrap();
        assert_eq!(sys.automaton_aliases.len(), 1);
        assert_eq!(sys.automaton_aliases[0].1, "C.AUTOMATON");
        assert_eq!(sys.external_signals.len(), 2);
    }

    #[test]
    fn diagnostics_carry_positions() {
        let err = parse_library("MODULE COUNTER(%[N], in %inc\nAUTOMATON A END\nEND\n").unwrap_err();
        assert!(err.iter().all(|d| d.pos.is_some()));
    }

    #[test]
    fn render_parse_fixpoint() {
        let modules = parse_library(COUNTER_SRC).unwrap();
        let rendered = render_module(&modules[0]);
        let reparsed = parse_library(&rendered).unwrap();
        assert_eq!(render_module(&reparsed[0]), rendered);
    }

    #[test]
    fn state_list_ambiguity_rules() {
        // each state has emissions: comma starts new state when `/` follows
        let m = &parse_library("MODULE M(in %x)\nAUTOMATON A\nSTATES (A/p, B/q)\nTRANS\nA --{ x }--> B\nEND\nEND\n").unwrap()[0];
        let decls = &m.automata[0].state_decls[0].1;
        assert_eq!(decls.len(), 2);
        // bare states split on commas
        let m = &parse_library("MODULE M(in %x)\nAUTOMATON A\nSTATES (S0, S1)\nTRANS\nS0 --{ x }--> S1\nEND\nEND\n").unwrap()[0];
        assert_eq!(m.automata[0].state_decls[0].1.len(), 2);
        // multi-emission states keep consuming signals without `/` ahead
        let m = &parse_library("MODULE M(in %x)\nAUTOMATON A\nSTATES (S0/p,q, S1/r)\nTRANS\nS0 --{ x }--> S1\nEND\nEND\n").unwrap()[0];
        let decls = &m.automata[0].state_decls[0].1;
        assert_eq!(decls.len(), 2);
        assert_eq!(decls[0].emits.len(), 2);
    }

    #[test]
    fn header_only_module() {
        let m = &parse_library("MODULE X(in %do, out %end, out %m(%y1), out %ack(%y2))\nAUTOMATON M\nEND\nAUTOMATON S\nEND\nEND\n").unwrap()[0];
        assert!(m.is_header_only());
        assert_eq!(m.automata.len(), 2);
    }

    #[test]
    fn flat_round_trip_shape() {
        let flat = "EXTERNAL inc, dec\nAUTOMATON C.AUTOMATON\nSTATES (A/x[1], B/y)\ninit A\nTRANS\nA --{ inc*~dec }--> B\nB --{ 1 }--> B\nEND\n";
        let sys = parse_flat(flat).unwrap();
        assert_eq!(sys.automata.len(), 1);
        assert_eq!(sys.automata[0].states.len(), 2);
        assert_eq!(sys.automata[0].transitions.len(), 2);
        assert_eq!(sys.externals.len(), 2);
    }
}
