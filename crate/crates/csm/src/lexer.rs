//! Tokenizer for library (.csml), system (.csms) and flat (.csmf) files.
//!
//! Whitespace is insignificant; `#` starts a comment to end of line. The
//! transition arrow is lexed as the two compound tokens `--{` and `}-->`.

use std::fmt;

use crate::diag::Pos;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Number(i64),
    Percent,        // %
    PercentLBrack,  // %[
    LBrack,
    RBrack,
    LParen,
    RParen,
    Comma,
    Dot,
    DotDot,
    Colon,
    Eq,
    NotEq, // /=
    Slash,
    Star,
    Plus,
    Minus,
    Tilde, // ~ or ¬
    ArrowOpen,  // --{
    ArrowClose, // }-->
    Const0, // _0
    Const1, // _1
    KwIn,
    KwOut,
    KwInit,
    KwDummy,
    KwEps, // eps or ε
    KwAny,
    KwAll,
    KwSingle,
    KwModule,
    KwAutomaton,
    KwStates,
    KwTrans,
    KwEnd,
    KwSystem,
    KwInstance,
    KwExternal,
    Error(char),
    Eof,
}

impl Tok {
    /// Identifier text for tokens usable as names. Framing keywords double
    /// as names where the grammar is unambiguous (the builtin COUNTER
    /// automaton is literally named AUTOMATON).
    pub fn as_name(&self) -> Option<&str> {
        match self {
            Tok::Ident(s) => Some(s),
            Tok::KwModule => Some("MODULE"),
            Tok::KwAutomaton => Some("AUTOMATON"),
            Tok::KwStates => Some("STATES"),
            Tok::KwTrans => Some("TRANS"),
            Tok::KwSystem => Some("SYSTEM"),
            Tok::KwInstance => Some("INSTANCE"),
            Tok::KwExternal => Some("EXTERNAL"),
            _ => None,
        }
    }
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{}`", s),
            Tok::Number(n) => write!(f, "`{}`", n),
            Tok::Percent => write!(f, "`%`"),
            Tok::PercentLBrack => write!(f, "`%[`"),
            Tok::LBrack => write!(f, "`[`"),
            Tok::RBrack => write!(f, "`]`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::DotDot => write!(f, "`..`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Eq => write!(f, "`=`"),
            Tok::NotEq => write!(f, "`/=`"),
            Tok::Slash => write!(f, "`/`"),
            Tok::Star => write!(f, "`*`"),
            Tok::Plus => write!(f, "`+`"),
            Tok::Minus => write!(f, "`-`"),
            Tok::Tilde => write!(f, "`~`"),
            Tok::ArrowOpen => write!(f, "`--{{`"),
            Tok::ArrowClose => write!(f, "`}}-->`"),
            Tok::Const0 => write!(f, "`_0`"),
            Tok::Const1 => write!(f, "`_1`"),
            Tok::KwIn => write!(f, "`in`"),
            Tok::KwOut => write!(f, "`out`"),
            Tok::KwInit => write!(f, "`init`"),
            Tok::KwDummy => write!(f, "`dummy`"),
            Tok::KwEps => write!(f, "`eps`"),
            Tok::KwAny => write!(f, "`any`"),
            Tok::KwAll => write!(f, "`all`"),
            Tok::KwSingle => write!(f, "`single`"),
            Tok::KwModule => write!(f, "`MODULE`"),
            Tok::KwAutomaton => write!(f, "`AUTOMATON`"),
            Tok::KwStates => write!(f, "`STATES`"),
            Tok::KwTrans => write!(f, "`TRANS`"),
            Tok::KwEnd => write!(f, "`END`"),
            Tok::KwSystem => write!(f, "`SYSTEM`"),
            Tok::KwInstance => write!(f, "`INSTANCE`"),
            Tok::KwExternal => write!(f, "`EXTERNAL`"),
            Tok::Error(c) => write!(f, "illegal character `{}`", c),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

fn keyword(s: &str) -> Option<Tok> {
    Some(match s {
        "in" => Tok::KwIn,
        "out" => Tok::KwOut,
        "init" => Tok::KwInit,
        "dummy" => Tok::KwDummy,
        "eps" => Tok::KwEps,
        "any" => Tok::KwAny,
        "all" => Tok::KwAll,
        "single" => Tok::KwSingle,
        "MODULE" => Tok::KwModule,
        "AUTOMATON" => Tok::KwAutomaton,
        "STATES" => Tok::KwStates,
        "TRANS" => Tok::KwTrans,
        "END" => Tok::KwEnd,
        "SYSTEM" => Tok::KwSystem,
        "INSTANCE" => Tok::KwInstance,
        "EXTERNAL" => Tok::KwExternal,
        _ => return None,
    })
}

/// Tokenize UTF-8 input. Never fails: illegal characters become
/// `Tok::Error` tokens carrying their position. A final `Eof` token is
/// always appended.
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1u32;
    let mut col = 1u32;

    macro_rules! push {
        ($tok:expr, $pos:expr) => {
            out.push(Token { tok: $tok, pos: $pos })
        };
    }

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos::new(line, col);
        let advance = |i: &mut usize, col: &mut u32, n: usize| {
            *i += n;
            *col += n as u32;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => advance(&mut i, &mut col, 1),
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '%' => {
                if chars.get(i + 1) == Some(&'[') {
                    push!(Tok::PercentLBrack, pos);
                    advance(&mut i, &mut col, 2);
                } else {
                    push!(Tok::Percent, pos);
                    advance(&mut i, &mut col, 1);
                }
            }
            '[' => {
                push!(Tok::LBrack, pos);
                advance(&mut i, &mut col, 1);
            }
            ']' => {
                push!(Tok::RBrack, pos);
                advance(&mut i, &mut col, 1);
            }
            '(' => {
                push!(Tok::LParen, pos);
                advance(&mut i, &mut col, 1);
            }
            ')' => {
                push!(Tok::RParen, pos);
                advance(&mut i, &mut col, 1);
            }
            ',' => {
                push!(Tok::Comma, pos);
                advance(&mut i, &mut col, 1);
            }
            ':' => {
                push!(Tok::Colon, pos);
                advance(&mut i, &mut col, 1);
            }
            '=' => {
                push!(Tok::Eq, pos);
                advance(&mut i, &mut col, 1);
            }
            '*' => {
                push!(Tok::Star, pos);
                advance(&mut i, &mut col, 1);
            }
            '+' => {
                push!(Tok::Plus, pos);
                advance(&mut i, &mut col, 1);
            }
            '~' | '¬' => {
                push!(Tok::Tilde, pos);
                advance(&mut i, &mut col, 1);
            }
            'ε' => {
                push!(Tok::KwEps, pos);
                advance(&mut i, &mut col, 1);
            }
            '.' => {
                if chars.get(i + 1) == Some(&'.') {
                    push!(Tok::DotDot, pos);
                    advance(&mut i, &mut col, 2);
                } else {
                    push!(Tok::Dot, pos);
                    advance(&mut i, &mut col, 1);
                }
            }
            '/' => {
                if chars.get(i + 1) == Some(&'=') {
                    push!(Tok::NotEq, pos);
                    advance(&mut i, &mut col, 2);
                } else {
                    push!(Tok::Slash, pos);
                    advance(&mut i, &mut col, 1);
                }
            }
            '-' => {
                if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'{') {
                    push!(Tok::ArrowOpen, pos);
                    advance(&mut i, &mut col, 3);
                } else {
                    push!(Tok::Minus, pos);
                    advance(&mut i, &mut col, 1);
                }
            }
            '}' => {
                if chars.get(i + 1) == Some(&'-')
                    && chars.get(i + 2) == Some(&'-')
                    && chars.get(i + 3) == Some(&'>')
                {
                    push!(Tok::ArrowClose, pos);
                    advance(&mut i, &mut col, 4);
                } else {
                    push!(Tok::Error('}'), pos);
                    advance(&mut i, &mut col, 1);
                }
            }
            '_' => {
                match chars.get(i + 1) {
                    Some('0') => {
                        push!(Tok::Const0, pos);
                        advance(&mut i, &mut col, 2);
                    }
                    Some('1') => {
                        push!(Tok::Const1, pos);
                        advance(&mut i, &mut col, 2);
                    }
                    _ => {
                        push!(Tok::Error('_'), pos);
                        advance(&mut i, &mut col, 1);
                    }
                }
            }
            c if c.is_ascii_digit() => {
                let mut n = 0usize;
                while i + n < chars.len() && chars[i + n].is_ascii_digit() {
                    n += 1;
                }
                let num: String = chars[i..i + n].iter().collect();
                push!(Tok::Number(num.parse().unwrap()), pos);
                advance(&mut i, &mut col, n);
            }
            c if c.is_ascii_alphabetic() => {
                let mut n = 0usize;
                while i + n < chars.len()
                    && (chars[i + n].is_ascii_alphanumeric() || chars[i + n] == '_')
                {
                    n += 1;
                }
                let word: String = chars[i..i + n].iter().collect();
                let tok = keyword(&word).unwrap_or(Tok::Ident(word));
                push!(tok, pos);
                advance(&mut i, &mut col, n);
            }
            other => {
                push!(Tok::Error(other), pos);
                advance(&mut i, &mut col, 1);
            }
        }
    }
    out.push(Token { tok: Tok::Eof, pos: Pos::new(line, col) });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn module_parameter() {
        let toks = tokenize("%[N]");
        let kinds: Vec<&Tok> = toks.iter().map(|t| &t.tok).collect();
        assert_eq!(
            kinds,
            vec![&Tok::PercentLBrack, &Tok::Ident("N".into()), &Tok::RBrack, &Tok::Eof]
        );
    }

    #[test]
    fn transition_line_token_count() {
        // s [ 0 ] --{ dec * ~ inc }--> UNDER Eof = 12 tokens
        let toks = tokenize("s[0] --{ dec*~inc }--> UNDER");
        assert_eq!(toks.len(), 12);
        assert_eq!(toks[toks.len() - 2].tok, Tok::Ident("UNDER".into()));
        assert_eq!(toks[4].tok, Tok::ArrowOpen);
        assert_eq!(toks[9].tok, Tok::ArrowClose);
    }

    #[test]
    fn illegal_character() {
        let toks = tokenize("@");
        assert_eq!(toks[0].tok, Tok::Error('@'));
        assert_eq!(toks[0].pos, Pos::new(1, 1));
    }

    #[test]
    fn unicode_aliases() {
        let toks = tokenize("¬a*ε(b)");
        assert_eq!(toks[0].tok, Tok::Tilde);
        assert_eq!(toks[3].tok, Tok::KwEps);
    }

    #[test]
    fn comments_and_positions() {
        let toks = tokenize("a # comment\nb");
        assert_eq!(toks[1].tok, Tok::Ident("b".into()));
        assert_eq!(toks[1].pos, Pos::new(2, 1));
    }
}
