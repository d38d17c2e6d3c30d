//! Finite traces and their letters.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::Rng;
use serde_json::Value;

use crate::atom::{Atom, Symbol};
use crate::facts::{parse_facts, schema, Fact, FactsError, SymbolTable, Term};
use crate::formula::Pos;

/// Largest alphabet accepted by [`enumerate_traces`].
pub const MAX_ENUM_ATOMS: usize = 16;

/// A non-empty sequence of atom sets over a declared alphabet.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Trace {
    states: Vec<BTreeSet<Atom>>,
    alphabet: BTreeSet<Atom>,
}

/// The atoms true at one position, plus the end marker on the final one.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Letter {
    pub atoms: BTreeSet<Atom>,
    pub last: bool,
}

impl Letter {
    pub fn holds(&self, s: &Symbol) -> bool {
        match s {
            Symbol::Atom(a) => self.atoms.contains(a),
            Symbol::Last => self.last,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TraceError {
    #[error("traces must have at least one state")]
    Empty,
    #[error("atom `{atom}` at position {index} is not in the alphabet")]
    NotInAlphabet { index: usize, atom: String },
    #[error("position {index} is outside a trace of length {len}")]
    OutOfRange { index: usize, len: usize },
    #[error("alphabet of {0} atoms is too large to enumerate (limit {MAX_ENUM_ATOMS})")]
    AlphabetTooLarge(usize),
    #[error("{pos}: {message}")]
    Malformed { pos: Pos, message: String },
}

impl From<FactsError> for TraceError {
    fn from(e: FactsError) -> TraceError {
        match e {
            FactsError::Syntax { pos, message } | FactsError::Schema { pos, message } => {
                TraceError::Malformed { pos, message }
            }
        }
    }
}

impl Trace {
    pub fn new(states: Vec<BTreeSet<Atom>>, alphabet: BTreeSet<Atom>) -> Result<Trace, TraceError> {
        if states.is_empty() {
            return Err(TraceError::Empty);
        }
        for (index, s) in states.iter().enumerate() {
            if let Some(a) = s.iter().find(|a| !alphabet.contains(*a)) {
                return Err(TraceError::NotInAlphabet {
                    index,
                    atom: a.name().to_string(),
                });
            }
        }
        Ok(Trace { states, alphabet })
    }

    /// Alphabet inferred as the atoms that occur.
    pub fn from_states(states: Vec<BTreeSet<Atom>>) -> Result<Trace, TraceError> {
        let alphabet = states.iter().flatten().cloned().collect();
        Trace::new(states, alphabet)
    }

    /// Builds a trace from atom names; panics on bad names. For tests.
    pub fn from_names(states: &[&[&str]]) -> Trace {
        let states = states
            .iter()
            .map(|s| s.iter().map(|n| Atom::new(n).expect("valid atom")).collect())
            .collect();
        Trace::from_states(states).expect("non-empty trace")
    }

    pub fn with_alphabet(mut self, extra: impl IntoIterator<Item = Atom>) -> Trace {
        self.alphabet.extend(extra);
        self
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    /// Always false: traces are non-empty by construction.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn states(&self) -> &[BTreeSet<Atom>] {
        &self.states
    }

    pub fn alphabet(&self) -> &BTreeSet<Atom> {
        &self.alphabet
    }

    pub fn holds(&self, i: usize, a: &Atom) -> bool {
        self.states[i].contains(a)
    }

    pub fn letter_at(&self, i: usize) -> Result<Letter, TraceError> {
        let state = self.states.get(i).ok_or(TraceError::OutOfRange {
            index: i,
            len: self.len(),
        })?;
        Ok(Letter {
            atoms: state.clone(),
            last: i + 1 == self.len(),
        })
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.len()).map(|i| self.letter_at(i).expect("index in range"))
    }

    /// JSON list of lists of atom names, e.g. `[["b"],["a","b"]]`.
    pub fn to_json(&self) -> String {
        let v = Value::Array(
            self.states
                .iter()
                .map(|s| Value::Array(s.iter().map(|a| Value::String(a.name().to_string())).collect()))
                .collect(),
        );
        v.to_string()
    }

    /// JSON object that also records the alphabet.
    pub fn to_json_object(&self) -> String {
        let names = |s: &BTreeSet<Atom>| {
            Value::Array(s.iter().map(|a| Value::String(a.name().to_string())).collect())
        };
        let mut obj = serde_json::Map::new();
        obj.insert("alphabet".into(), names(&self.alphabet));
        obj.insert(
            "states".into(),
            Value::Array(self.states.iter().map(names).collect()),
        );
        Value::Object(obj).to_string()
    }

    /// Accepts the list form or `{"alphabet": [...], "states": [[...], ...]}`.
    pub fn from_json(text: &str) -> Result<Trace, TraceError> {
        let v: Value = serde_json::from_str(text).map_err(|e| TraceError::Malformed {
            pos: Pos {
                line: e.line(),
                column: e.column(),
            },
            message: e.to_string(),
        })?;
        from_value(&v, Pos { line: 1, column: 1 })
    }

    /// `trace(ID,STEP).` for every true atom, with `last` on the final step.
    pub fn to_facts(&self, table: &SymbolTable) -> Result<Vec<Fact>, TraceError> {
        let mut out = Vec::new();
        for (i, letter) in self.letters().enumerate() {
            let mut ids: Vec<usize> = Vec::new();
            for a in &letter.atoms {
                let id = table.id(&Symbol::Atom(a.clone())).ok_or_else(|| TraceError::NotInAlphabet {
                    index: i,
                    atom: a.name().to_string(),
                })?;
                ids.push(id);
            }
            if letter.last {
                ids.push(table.last_id());
            }
            ids.sort_unstable();
            for id in ids {
                out.push(Fact::new("trace", vec![Term::Int(id as i64), Term::Int(i as i64)]));
            }
        }
        Ok(out)
    }

    /// Inverse of [`Trace::to_facts`]. The symbol table comes from `prop/2`
    /// facts in the same text unless one is supplied. The `last` marker
    /// fixes the length.
    pub fn from_facts(text: &str, table: Option<&SymbolTable>) -> Result<Trace, TraceError> {
        let facts = parse_facts(text)?;
        let owned;
        let table = match table {
            Some(t) => t,
            None => {
                owned = SymbolTable::from_facts(&facts)?;
                &owned
            }
        };
        let mut steps: BTreeMap<usize, BTreeSet<Atom>> = BTreeMap::new();
        let mut last_at: Option<(usize, Pos)> = None;
        let mut first_pos = None;
        for f in facts.iter().filter(|f| f.is("trace", 2)) {
            first_pos.get_or_insert(f.pos);
            let id = f.index(0)?;
            let step = f.index(1)?;
            match table.symbol(id) {
                Some(Symbol::Last) => {
                    if last_at.is_some_and(|(s, _)| s != step) {
                        return Err(schema(f.pos, "`last` holds at more than one step").into());
                    }
                    last_at = Some((step, f.pos));
                }
                Some(Symbol::Atom(a)) => {
                    steps.entry(step).or_default().insert(a);
                }
                None => return Err(schema(f.pos, format!("unknown prop id {id}")).into()),
            }
        }
        let (final_step, pos) = last_at.ok_or_else(|| {
            TraceError::from(schema(
                first_pos.unwrap_or(Pos { line: 1, column: 1 }),
                "missing trace fact for `last`",
            ))
        })?;
        if let Some((&s, _)) = steps.iter().next_back() {
            if s > final_step {
                return Err(schema(pos, format!("step {s} lies after the `last` step {final_step}")).into());
            }
        }
        let states = (0..=final_step)
            .map(|i| steps.remove(&i).unwrap_or_default())
            .collect();
        Trace::new(states, table.atoms().iter().cloned().collect())
    }
}

fn from_value(v: &Value, pos: Pos) -> Result<Trace, TraceError> {
    let bad = |message: &str| TraceError::Malformed {
        pos,
        message: message.to_string(),
    };
    let names = |v: &Value| -> Result<BTreeSet<Atom>, TraceError> {
        let arr = v.as_array().ok_or_else(|| bad("expected a list of atom names"))?;
        arr.iter()
            .map(|x| {
                let s = x.as_str().ok_or_else(|| bad("atom names must be strings"))?;
                Atom::new(s).map_err(|e| bad(&e.to_string()))
            })
            .collect()
    };
    match v {
        Value::Array(items) => {
            let states = items.iter().map(names).collect::<Result<Vec<_>, _>>()?;
            Trace::from_states(states)
        }
        Value::Object(obj) => {
            let states = obj
                .get("states")
                .and_then(Value::as_array)
                .ok_or_else(|| bad("object traces need a `states` list"))?
                .iter()
                .map(names)
                .collect::<Result<Vec<_>, _>>()?;
            let alphabet = match obj.get("alphabet") {
                Some(a) => names(a)?,
                None => states.iter().flatten().cloned().collect(),
            };
            Trace::new(states, alphabet)
        }
        _ => Err(bad("expected a list of states or an object")),
    }
}

/// One trace per non-blank line.
pub fn read_json_lines(text: &str) -> Result<Vec<Trace>, TraceError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v: Value = serde_json::from_str(line).map_err(|e| TraceError::Malformed {
            pos: Pos {
                line: i + 1,
                column: e.column(),
            },
            message: e.to_string(),
        })?;
        out.push(from_value(&v, Pos { line: i + 1, column: 1 })?);
    }
    Ok(out)
}

pub fn write_json_lines(traces: &[Trace]) -> String {
    traces.iter().map(|t| t.to_json() + "\n").collect()
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.states.iter().enumerate() {
            if i > 0 {
                f.write_str("·")?;
            }
            f.write_str("{")?;
            for (j, a) in s.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                f.write_str(a.name())?;
            }
            f.write_str("}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Every trace of length `1..=max_len` over `alphabet`, shortest first and
/// lexicographic within a length (subsets numbered by bitmask over the
/// sorted alphabet, first position most significant).
pub fn enumerate_traces(
    alphabet: &BTreeSet<Atom>,
    max_len: usize,
) -> Result<impl Iterator<Item = Trace>, TraceError> {
    if alphabet.len() > MAX_ENUM_ATOMS {
        return Err(TraceError::AlphabetTooLarge(alphabet.len()));
    }
    let atoms: Vec<Atom> = alphabet.iter().cloned().collect();
    let subsets: Vec<BTreeSet<Atom>> = (0..1usize << atoms.len())
        .map(|mask| {
            atoms
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, a)| a.clone())
                .collect()
        })
        .collect();
    let alphabet = alphabet.clone();
    Ok((1..=max_len).flat_map(move |len| {
        let subsets = subsets.clone();
        let alphabet = alphabet.clone();
        let mut digits = vec![0usize; len];
        let mut done = false;
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            let t = Trace {
                states: digits.iter().map(|&d| subsets[d].clone()).collect(),
                alphabet: alphabet.clone(),
            };
            // Increment the counter, last position fastest.
            done = true;
            for d in digits.iter_mut().rev() {
                *d += 1;
                if *d < subsets.len() {
                    done = false;
                    break;
                }
                *d = 0;
            }
            Some(t)
        })
    }))
}

/// Number of traces [`enumerate_traces`] yields.
pub fn trace_count(alphabet_size: usize, max_len: usize) -> u128 {
    let letters = 1u128 << alphabet_size;
    (1..=max_len as u32).map(|n| letters.pow(n)).sum()
}

/// A uniformly random length in `1..=max_len` and uniformly random states.
pub fn random_trace<R: Rng + ?Sized>(rng: &mut R, alphabet: &BTreeSet<Atom>, max_len: usize) -> Trace {
    let len = rng.gen_range(1..=max_len.max(1));
    let states = (0..len)
        .map(|_| alphabet.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect())
        .collect();
    Trace {
        states,
        alphabet: alphabet.clone(),
    }
}

/// `{"a","b",...}` as an alphabet; panics on bad names. For tests and fixtures.
pub fn alphabet(names: &[&str]) -> BTreeSet<Atom> {
    names.iter().map(|n| Atom::new(n).expect("valid atom")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn last_marks_final_letter() {
        let t = Trace::from_names(&[&["b"], &["a", "b"], &["b"]]);
        let l = t.letter_at(2).unwrap();
        assert!(l.last);
        assert_eq!(l.atoms, alphabet(&["b"]));
        assert!(!t.letter_at(1).unwrap().last);
        assert!(matches!(t.letter_at(3), Err(TraceError::OutOfRange { .. })));
        let single = Trace::new(vec![BTreeSet::new()], BTreeSet::new()).unwrap();
        assert!(single.letter_at(0).unwrap().last);
    }

    #[test]
    fn empty_traces_are_rejected() {
        assert_eq!(Trace::from_states(vec![]), Err(TraceError::Empty));
        assert!(matches!(
            Trace::new(vec![alphabet(&["a"])], alphabet(&["b"])),
            Err(TraceError::NotInAlphabet { .. })
        ));
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_traces(&alphabet(&["a"]), 1).unwrap().count(), 2);
        assert_eq!(enumerate_traces(&alphabet(&["a", "b"]), 2).unwrap().count(), 20);
        assert_eq!(enumerate_traces(&alphabet(&["a", "b"]), 3).unwrap().count(), 84);
        assert_eq!(trace_count(2, 3), 84);
        let first: Vec<Trace> = enumerate_traces(&alphabet(&["a"]), 1).unwrap().collect();
        assert_eq!(first[0].states()[0], BTreeSet::new());
        assert_eq!(first[1].states()[0], alphabet(&["a"]));
        let names: Vec<&str> = (0..17).map(|i| ["a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "l", "m", "n", "o", "p", "q"][i]).collect();
        assert!(matches!(
            enumerate_traces(&alphabet(&names), 1),
            Err(TraceError::AlphabetTooLarge(17))
        ));
    }

    #[test]
    fn json_forms() {
        let t = Trace::from_names(&[&["b"], &["a", "b"]]);
        assert_eq!(t.to_json(), r#"[["b"],["a","b"]]"#);
        assert_eq!(Trace::from_json(&t.to_json()).unwrap(), t);
        let wide = t.clone().with_alphabet(alphabet(&["c"]));
        assert_eq!(Trace::from_json(&wide.to_json_object()).unwrap(), wide);
        let err = Trace::from_json("[[\"b\"],\n [\"A\"]]").unwrap_err();
        assert!(matches!(err, TraceError::Malformed { .. }));
        let err = Trace::from_json("[[\"b\"],\n [").unwrap_err();
        assert!(matches!(err, TraceError::Malformed { pos: Pos { line: 2, .. }, .. }));
    }

    #[test]
    fn facts_round_trip() {
        let t = Trace::from_names(&[&["b"], &["a", "b"], &["b"]]);
        let table = SymbolTable::new(t.alphabet().iter().cloned());
        let mut facts = table.facts();
        facts.extend(t.to_facts(&table).unwrap());
        let text = crate::facts::render(&facts);
        assert!(text.contains("trace(2,2)."));
        assert!(text.contains("trace(0,1)."));
        assert_eq!(Trace::from_facts(&text, None).unwrap(), t);
        let trailing_empty = Trace::new(vec![alphabet(&["a"]), BTreeSet::new()], alphabet(&["a"])).unwrap();
        let table = SymbolTable::new(alphabet(&["a"]));
        let text = crate::facts::render(&trailing_empty.to_facts(&table).unwrap());
        assert_eq!(Trace::from_facts(&text, Some(&table)).unwrap(), trailing_empty);
    }
}
