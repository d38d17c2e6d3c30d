//! The bundled formula corpus.

use std::collections::BTreeSet;

use crate::atom::Atom;
use crate::formula::{parse, Dialect, Formula, ParseError};

/// Source text of the corpus: `name: formula` lines in Canonical syntax.
pub const CORPUS_TEXT: &str = include_str!("../corpus/corpus.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub name: String,
    pub text: String,
    pub formula: Formula,
}

/// Parses a corpus file. `%` starts a comment; blank lines are skipped.
pub fn parse_corpus(text: &str) -> Result<Vec<Entry>, (usize, ParseError)> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('%').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (name, body) = match line.split_once(':') {
            Some((n, b)) if !n.trim().contains(char::is_whitespace) => (n.trim().to_string(), b.trim()),
            _ => (format!("line{}", i + 1), line),
        };
        let formula = parse(body, Dialect::Canonical).map_err(|e| (i + 1, e))?;
        out.push(Entry {
            name,
            text: body.to_string(),
            formula,
        });
    }
    Ok(out)
}

/// The bundled corpus.
pub fn corpus() -> Vec<Entry> {
    parse_corpus(CORPUS_TEXT).expect("bundled corpus parses")
}

/// An alphabet of exactly `n` atoms for exhaustive checks: the formula's
/// atoms in name order, truncated or padded with `a`, `b`, `c`, ...
pub fn small_alphabet(f: &Formula, n: usize) -> BTreeSet<Atom> {
    let mut out: BTreeSet<Atom> = f.atoms().into_iter().take(n).collect();
    let mut pad = (b'a'..=b'z').map(|c| Atom::new(&(c as char).to_string()).expect("letter atom"));
    while out.len() < n {
        out.insert(pad.next().expect("at most 26 padding atoms"));
    }
    out
}
