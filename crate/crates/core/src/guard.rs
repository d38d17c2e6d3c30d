use std::collections::BTreeMap;
use std::fmt;

use crate::atom::Symbol;
use crate::trace::Letter;

/// A consistent conjunction of literals over atoms and `last`.
///
/// `true` in the map means the symbol must be in the letter, `false` that it
/// must be absent. The empty guard matches every letter.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Guard(BTreeMap<Symbol, bool>);

impl Guard {
    pub fn top() -> Guard {
        Guard::default()
    }

    pub fn literal(s: Symbol, positive: bool) -> Guard {
        Guard(BTreeMap::from([(s, positive)]))
    }

    pub fn from_literals(lits: impl IntoIterator<Item = (Symbol, bool)>) -> Option<Guard> {
        let mut g = Guard::top();
        for (s, v) in lits {
            if !g.insert(s, v) {
                return None;
            }
        }
        Some(g)
    }

    /// Adds a literal; false if it contradicts one already present.
    pub fn insert(&mut self, s: Symbol, positive: bool) -> bool {
        match self.0.get(&s) {
            Some(&v) => v == positive,
            None => {
                self.0.insert(s, positive);
                true
            }
        }
    }

    /// Conjunction, or `None` when contradictory.
    pub fn and(&self, other: &Guard) -> Option<Guard> {
        let mut g = self.clone();
        for (s, &v) in &other.0 {
            if !g.insert(s.clone(), v) {
                return None;
            }
        }
        Some(g)
    }

    pub fn literals(&self) -> impl Iterator<Item = (&Symbol, bool)> {
        self.0.iter().map(|(s, v)| (s, *v))
    }

    pub fn get(&self, s: &Symbol) -> Option<bool> {
        self.0.get(s).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// No literal of `self` is contradicted by `other`.
    pub fn compatible(&self, other: &Guard) -> bool {
        let (small, large) = if self.0.len() <= other.0.len() { (self, other) } else { (other, self) };
        small.0.iter().all(|(s, v)| large.0.get(s).is_none_or(|w| w == v))
    }

    /// Every literal of `self` also occurs in `other`.
    pub fn implied_by(&self, other: &Guard) -> bool {
        self.0.iter().all(|(s, v)| other.0.get(s) == Some(v))
    }

    pub fn matches(&self, letter: &Letter) -> bool {
        self.0.iter().all(|(s, &v)| letter.holds(s) == v)
    }

    pub fn mentions_last(&self) -> bool {
        self.0.contains_key(&Symbol::Last)
    }

    /// The guard without its `last` literal.
    /// `{"in": [...], "out": [...]}` with symbol names.
    pub fn to_json(&self) -> serde_json::Value {
        let names = |positive: bool| -> Vec<String> {
            self.literals()
                .filter(|(_, p)| *p == positive)
                .map(|(s, _)| s.name().to_string())
                .collect()
        };
        serde_json::json!({ "in": names(true), "out": names(false) })
    }

    pub fn without_last(&self) -> Guard {
        let mut g = self.clone();
        g.0.remove(&Symbol::Last);
        g
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("true");
        }
        for (i, (s, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" & ")?;
            }
            if !v {
                f.write_str("!")?;
            }
            f.write_str(s.name())?;
        }
        Ok(())
    }
}

impl fmt::Debug for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atom::Atom;

    fn sym(n: &str) -> Symbol {
        Symbol::Atom(Atom::new(n).unwrap())
    }

    #[test]
    fn conjunction_detects_contradictions() {
        let a = Guard::literal(sym("a"), true);
        let not_a = Guard::literal(sym("a"), false);
        assert_eq!(a.and(&not_a), None);
        let g = a.and(&Guard::literal(Symbol::Last, false)).unwrap();
        assert_eq!(g.to_string(), "a & !last");
        assert!(a.implied_by(&g));
        assert!(!g.implied_by(&a));
        assert_eq!(Guard::top().to_string(), "true");
    }
}
