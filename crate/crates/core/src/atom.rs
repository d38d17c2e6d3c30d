use std::fmt;
use std::sync::Arc;

/// Name reserved for the end-of-trace marker.
pub const LAST: &str = "last";

/// A propositional variable.
///
/// Atoms are cheap to clone; equality and ordering follow the name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom(Arc<str>);

impl Atom {
    /// Builds an atom, checking the identifier shape. `last` is rejected.
    pub fn new(name: &str) -> Result<Atom, AtomError> {
        if name == LAST {
            return Err(AtomError::Reserved);
        }
        if !is_identifier(name) {
            return Err(AtomError::Malformed(name.to_string()));
        }
        Ok(Atom(Arc::from(name)))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AtomError {
    #[error("`last` is reserved for the end-of-trace marker")]
    Reserved,
    #[error("malformed atom name `{0}` (expected a lowercase-leading identifier)")]
    Malformed(String),
}

/// Lowercase-leading, then alphanumerics or underscores.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A letter position in the automaton alphabet: a user atom or the `last` marker.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Atom(Atom),
    Last,
}

impl Symbol {
    pub fn name(&self) -> &str {
        match self {
            Symbol::Atom(a) => a.name(),
            Symbol::Last => LAST,
        }
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl From<Atom> for Symbol {
    fn from(a: Atom) -> Symbol {
        Symbol::Atom(a)
    }
}
