//! Ground ASP facts: a tiny reader/writer and the shared symbol table.

use std::collections::BTreeSet;
use std::fmt;

use crate::atom::{Atom, Symbol, LAST};
use crate::formula::Pos;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Int(i64),
    Const(String),
    Str(String),
}

impl Term {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            Term::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_const(&self) -> Option<&str> {
        match self {
            Term::Const(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Int(i) => write!(f, "{i}"),
            Term::Const(s) => f.write_str(s),
            Term::Str(s) => write!(f, "\"{}\"", escape(s)),
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fact {
    pub pred: String,
    pub args: Vec<Term>,
    pub pos: Pos,
}

impl Fact {
    pub fn new(pred: &str, args: Vec<Term>) -> Fact {
        Fact {
            pred: pred.to_string(),
            args,
            pos: Pos { line: 0, column: 0 },
        }
    }

    pub fn is(&self, pred: &str, arity: usize) -> bool {
        self.pred == pred && self.args.len() == arity
    }

    pub fn int(&self, i: usize) -> Result<i64, FactsError> {
        self.args[i].as_int().ok_or_else(|| FactsError::Schema {
            pos: self.pos,
            message: format!("argument {} of {}/{} must be an integer", i + 1, self.pred, self.args.len()),
        })
    }

    pub fn index(&self, i: usize) -> Result<usize, FactsError> {
        let v = self.int(i)?;
        usize::try_from(v).map_err(|_| FactsError::Schema {
            pos: self.pos,
            message: format!("argument {} of {}/{} must be non-negative", i + 1, self.pred, self.args.len()),
        })
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pred)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        f.write_str(".")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FactsError {
    #[error("{pos}: {message}")]
    Syntax { pos: Pos, message: String },
    #[error("{pos}: {message}")]
    Schema { pos: Pos, message: String },
}

pub(crate) fn schema(pos: Pos, message: impl Into<String>) -> FactsError {
    FactsError::Schema {
        pos,
        message: message.into(),
    }
}

/// Parses a sequence of ground facts `pred(t1,...,tn).`; `%` starts a comment.
pub fn parse_facts(text: &str) -> Result<Vec<Fact>, FactsError> {
    let mut r = Reader {
        chars: text.chars().collect(),
        at: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    loop {
        r.skip_blank();
        if r.peek().is_none() {
            return Ok(out);
        }
        out.push(r.fact()?);
    }
}

struct Reader {
    chars: Vec<char>,
    at: usize,
    line: usize,
    col: usize,
}

impl Reader {
    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            column: self.col,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.at).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.at += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_blank(&mut self) {
        while let Some(c) = self.peek() {
            if c == '%' {
                while self.peek().is_some_and(|c| c != '\n') {
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn error(&self, message: impl Into<String>) -> FactsError {
        FactsError::Syntax {
            pos: self.pos(),
            message: message.into(),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), FactsError> {
        self.skip_blank();
        match self.peek() {
            Some(d) if d == c => {
                self.bump();
                Ok(())
            }
            Some(d) => Err(self.error(format!("expected `{c}`, found `{d}`"))),
            None => Err(self.error(format!("expected `{c}`, found end of input"))),
        }
    }

    fn ident(&mut self) -> Result<String, FactsError> {
        let mut s = String::new();
        match self.peek() {
            Some(c) if c.is_ascii_lowercase() || c == '_' => {}
            Some(c) => return Err(self.error(format!("expected a predicate or constant, found `{c}`"))),
            None => return Err(self.error("unexpected end of input")),
        }
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        Ok(s)
    }

    fn fact(&mut self) -> Result<Fact, FactsError> {
        let pos = self.pos();
        let pred = self.ident()?;
        let mut args = Vec::new();
        self.skip_blank();
        if self.peek() == Some('(') {
            self.bump();
            loop {
                self.skip_blank();
                args.push(self.term()?);
                self.skip_blank();
                match self.peek() {
                    Some(',') => {
                        self.bump();
                    }
                    Some(')') => {
                        self.bump();
                        break;
                    }
                    _ => return Err(self.error("expected `,` or `)`")),
                }
            }
        }
        self.expect('.')?;
        Ok(Fact { pred, args, pos })
    }

    fn term(&mut self) -> Result<Term, FactsError> {
        match self.peek() {
            Some('"') => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        Some('"') => return Ok(Term::Str(s)),
                        Some('\\') => match self.bump() {
                            Some(c) => s.push(c),
                            None => return Err(self.error("unterminated string")),
                        },
                        Some(c) => s.push(c),
                        None => return Err(self.error("unterminated string")),
                    }
                }
            }
            Some(c) if c.is_ascii_digit() || c == '-' => {
                let mut s = String::new();
                s.push(c);
                self.bump();
                while let Some(d) = self.peek().filter(|d| d.is_ascii_digit()) {
                    s.push(d);
                    self.bump();
                }
                s.parse()
                    .map(Term::Int)
                    .map_err(|_| self.error(format!("malformed integer `{s}`")))
            }
            _ => self.ident().map(Term::Const),
        }
    }
}

/// Integer ids for the alphabet of an automaton: user atoms from 0 in name
/// order, then `last`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SymbolTable {
    atoms: Vec<Atom>,
}

impl SymbolTable {
    pub fn new(atoms: impl IntoIterator<Item = Atom>) -> SymbolTable {
        let set: BTreeSet<Atom> = atoms.into_iter().collect();
        SymbolTable {
            atoms: set.into_iter().collect(),
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn last_id(&self) -> usize {
        self.atoms.len()
    }

    pub fn id(&self, s: &Symbol) -> Option<usize> {
        match s {
            Symbol::Last => Some(self.last_id()),
            Symbol::Atom(a) => self.atoms.binary_search(a).ok(),
        }
    }

    pub fn symbol(&self, id: usize) -> Option<Symbol> {
        if id == self.last_id() {
            Some(Symbol::Last)
        } else {
            self.atoms.get(id).cloned().map(Symbol::Atom)
        }
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.atoms
            .iter()
            .cloned()
            .map(Symbol::Atom)
            .chain(std::iter::once(Symbol::Last))
    }

    /// `prop(ID,name).` for every symbol, `last` included.
    pub fn facts(&self) -> Vec<Fact> {
        self.symbols()
            .enumerate()
            .map(|(i, s)| Fact::new("prop", vec![Term::Int(i as i64), Term::Const(s.name().to_string())]))
            .collect()
    }

    /// Rebuilds a table from `prop/2` facts, checking the id layout.
    pub fn from_facts(facts: &[Fact]) -> Result<SymbolTable, FactsError> {
        let mut entries: Vec<(usize, String, Pos)> = Vec::new();
        for f in facts.iter().filter(|f| f.is("prop", 2)) {
            let id = f.index(0)?;
            let name = match &f.args[1] {
                Term::Const(s) | Term::Str(s) => s.clone(),
                Term::Int(_) => return Err(schema(f.pos, "prop/2 name must be a constant")),
            };
            entries.push((id, name, f.pos));
        }
        entries.sort();
        let mut atoms = Vec::new();
        let mut saw_last = false;
        for (i, (id, name, pos)) in entries.iter().enumerate() {
            if *id != i {
                return Err(schema(*pos, format!("prop/2 ids must be 0..n without gaps, found {id}")));
            }
            if name == LAST {
                if i + 1 != entries.len() {
                    return Err(schema(*pos, "`last` must carry the highest prop/2 id"));
                }
                saw_last = true;
            } else {
                let atom = Atom::new(name).map_err(|e| schema(*pos, e.to_string()))?;
                atoms.push(atom);
            }
        }
        if !entries.is_empty() && !saw_last {
            return Err(schema(entries[0].2, "missing prop/2 entry for `last`"));
        }
        if atoms.windows(2).any(|w| w[0] >= w[1]) {
            let pos = entries.first().map(|e| e.2).unwrap_or(Pos { line: 1, column: 1 });
            return Err(schema(pos, "prop/2 atoms must be numbered in name order"));
        }
        Ok(SymbolTable { atoms })
    }
}

pub fn render(facts: &[Fact]) -> String {
    let mut out = String::new();
    for f in facts {
        out.push_str(&f.to_string());
        out.push('\n');
    }
    out
}
