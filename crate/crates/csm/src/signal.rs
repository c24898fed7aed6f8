//! Signal identifiers and valuations.

use std::collections::BTreeSet;
use std::fmt;

use crate::diag::{Code, Diagnostic};

/// A concrete signal: an identifier plus optional non-negative indices,
/// rendered canonically as `name[i,j]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SignalId {
    pub name: String,
    pub indices: Vec<i64>,
}

impl SignalId {
    pub fn scalar(name: impl Into<String>) -> Self {
        SignalId { name: name.into(), indices: Vec::new() }
    }

    pub fn indexed(name: impl Into<String>, indices: Vec<i64>) -> Self {
        SignalId { name: name.into(), indices }
    }

    /// Parse the canonical rendering back into a signal id.
    pub fn parse(text: &str) -> Result<SignalId, Diagnostic> {
        let bad = |m: &str| Diagnostic::error(Code::E_PARSE, None, text, format!("bad signal `{}`: {}", text, m));
        let (name, rest) = match text.find('[') {
            None => (text, ""),
            Some(i) => (&text[..i], &text[i..]),
        };
        if name.is_empty() || !name.chars().next().unwrap().is_ascii_alphabetic() {
            return Err(bad("identifier must start with a letter"));
        }
        if !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(bad("illegal character in identifier"));
        }
        if rest.is_empty() {
            return Ok(SignalId::scalar(name));
        }
        let inner = rest
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| bad("unterminated index list"))?;
        let mut indices = Vec::new();
        for part in inner.split(',') {
            let n: i64 = part.trim().parse().map_err(|_| bad("index is not a number"))?;
            if n < 0 {
                return Err(bad("negative index"));
            }
            indices.push(n);
        }
        if indices.is_empty() {
            return Err(bad("empty index list"));
        }
        Ok(SignalId::indexed(name, indices))
    }
}

impl fmt::Display for SignalId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)?;
        if !self.indices.is_empty() {
            let parts: Vec<String> = self.indices.iter().map(|i| i.to_string()).collect();
            write!(f, "[{}]", parts.join(","))?;
        }
        Ok(())
    }
}

/// The set of signals asserted at one step; anything absent is false.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Valuation {
    pub asserted: BTreeSet<SignalId>,
}

impl Valuation {
    pub fn new() -> Self {
        Valuation::default()
    }

    pub fn contains(&self, s: &SignalId) -> bool {
        self.asserted.contains(s)
    }

    pub fn insert(&mut self, s: SignalId) {
        self.asserted.insert(s);
    }
}

impl FromIterator<SignalId> for Valuation {
    fn from_iter<T: IntoIterator<Item = SignalId>>(iter: T) -> Self {
        Valuation { asserted: iter.into_iter().collect() }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.asserted.iter().map(|s| s.to_string()).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_round_trips() {
        for s in [
            SignalId::scalar("inc"),
            SignalId::indexed("set", vec![1]),
            SignalId::indexed("x", vec![0, 3]),
            SignalId::scalar("MES_G__rdy"),
        ] {
            assert_eq!(SignalId::parse(&s.to_string()).unwrap(), s);
        }
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(SignalId::parse("1abc").is_err());
        assert!(SignalId::parse("a[").is_err());
        assert!(SignalId::parse("a[x]").is_err());
        assert!(SignalId::parse("a[-1]").is_err());
    }
}
