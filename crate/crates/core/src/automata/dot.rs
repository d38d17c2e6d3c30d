//! A small DOT reader and the DFA import built on it.
//!
//! Supported: `digraph NAME { ... }` with node statements, edge statements
//! (chains allowed), `node [...]` / `edge [...]` defaults, graph attributes
//! `key = value`, quoted or bare identifiers, and `//`, `/* */`, `#`
//! comments. Subgraphs and ports are not.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::tree;
use super::{AutomataError, Dfa};
use crate::atom::{Atom, Symbol, LAST};
use crate::facts::SymbolTable;
use crate::formula::Pos;
use crate::guard::Guard;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DotNode {
    pub name: String,
    pub attrs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DotEdge {
    pub from: String,
    pub to: String,
    pub attrs: BTreeMap<String, String>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DotGraph {
    pub name: Option<String>,
    /// Nodes in order of first mention, with attributes resolved against
    /// the defaults in force at that point.
    pub nodes: Vec<DotNode>,
    pub edges: Vec<DotEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Id(String),
    LBrace,
    RBrace,
    LBrack,
    RBrack,
    Eq,
    Semi,
    Comma,
    Arrow,
}

fn err(pos: Pos, message: impl Into<String>) -> AutomataError {
    AutomataError::Dot {
        pos,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, AutomataError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, c: char| {
        *i += 1;
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, c);
            continue;
        }
        if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                { let d = chars[i]; advance(&mut i, &mut line, &mut col, d); }
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            advance(&mut i, &mut line, &mut col, '/');
            advance(&mut i, &mut line, &mut col, '*');
            loop {
                if i >= chars.len() {
                    return Err(err(pos, "unterminated comment"));
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    advance(&mut i, &mut line, &mut col, '*');
                    advance(&mut i, &mut line, &mut col, '/');
                    break;
                }
                { let d = chars[i]; advance(&mut i, &mut line, &mut col, d); }
            }
            continue;
        }
        if c == '"' {
            advance(&mut i, &mut line, &mut col, c);
            let mut s = String::new();
            loop {
                let Some(&d) = chars.get(i) else {
                    return Err(err(pos, "unterminated string"));
                };
                advance(&mut i, &mut line, &mut col, d);
                match d {
                    '"' => break,
                    '\\' => {
                        let Some(&e) = chars.get(i) else {
                            return Err(err(pos, "unterminated string"));
                        };
                        advance(&mut i, &mut line, &mut col, e);
                        if e != '"' && e != '\\' {
                            s.push('\\');
                        }
                        s.push(e);
                    }
                    _ => s.push(d),
                }
            }
            out.push((Tok::Id(s), pos));
            continue;
        }
        if c.is_alphanumeric() || c == '_' || c == '.' || c == '-' && chars.get(i + 1) != Some(&'>') {
            let mut s = String::new();
            while let Some(&d) = chars.get(i) {
                if d.is_alphanumeric() || d == '_' || d == '.' || (d == '-' && s.is_empty()) {
                    s.push(d);
                    advance(&mut i, &mut line, &mut col, d);
                } else {
                    break;
                }
            }
            out.push((Tok::Id(s), pos));
            continue;
        }
        let (tok, width) = match (c, chars.get(i + 1)) {
            ('-', Some('>')) => (Tok::Arrow, 2),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            ('[', _) => (Tok::LBrack, 1),
            (']', _) => (Tok::RBrack, 1),
            ('=', _) => (Tok::Eq, 1),
            (';', _) => (Tok::Semi, 1),
            (',', _) => (Tok::Comma, 1),
            _ => return Err(err(pos, format!("unexpected character `{c}`"))),
        };
        for _ in 0..width {
            { let d = chars[i]; advance(&mut i, &mut line, &mut col, d); }
        }
        out.push((tok, pos));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    end: Pos,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.0)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.at).map(|t| t.1).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|t| t.0.clone());
        self.at += 1;
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn id(&mut self) -> Result<String, AutomataError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Id(s)) => Ok(s),
            Some(t) => Err(err(pos, format!("expected an identifier, found {t:?}"))),
            None => Err(err(pos, "expected an identifier, found end of input")),
        }
    }

    fn attr_list(&mut self) -> Result<BTreeMap<String, String>, AutomataError> {
        let mut attrs = BTreeMap::new();
        while self.eat(&Tok::LBrack) {
            while !self.eat(&Tok::RBrack) {
                let k = self.id()?;
                if !self.eat(&Tok::Eq) {
                    return Err(err(self.pos(), "expected `=` in attribute list"));
                }
                let v = self.id()?;
                attrs.insert(k, v);
                let _ = self.eat(&Tok::Comma) || self.eat(&Tok::Semi);
            }
        }
        Ok(attrs)
    }
}

pub fn parse_dot(text: &str) -> Result<DotGraph, AutomataError> {
    let toks = lex(text)?;
    let end = Pos {
        line: text.lines().count().max(1),
        column: 1,
    };
    let mut p = Parser { toks, at: 0, end };
    let mut g = DotGraph::default();
    if p.peek() == Some(&Tok::Id("strict".into())) {
        p.bump();
    }
    match p.bump() {
        Some(Tok::Id(k)) if k == "digraph" => {}
        _ => return Err(err(Pos { line: 1, column: 1 }, "expected `digraph`")),
    }
    if let Some(Tok::Id(_)) = p.peek() {
        g.name = Some(p.id()?);
    }
    if !p.eat(&Tok::LBrace) {
        return Err(err(p.pos(), "expected `{`"));
    }
    let mut node_defaults: BTreeMap<String, String> = BTreeMap::new();
    let mut edge_defaults: BTreeMap<String, String> = BTreeMap::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut touch = |g: &mut DotGraph, name: &str, defaults: &BTreeMap<String, String>| -> usize {
        *index.entry(name.to_string()).or_insert_with(|| {
            g.nodes.push(DotNode {
                name: name.to_string(),
                attrs: defaults.clone(),
            });
            g.nodes.len() - 1
        })
    };
    loop {
        if p.eat(&Tok::RBrace) {
            break;
        }
        if p.eat(&Tok::Semi) {
            continue;
        }
        let pos = p.pos();
        let first = match p.peek() {
            Some(Tok::Id(_)) => p.id()?,
            None => return Err(err(pos, "expected `}`, found end of input")),
            Some(t) => return Err(err(pos, format!("unexpected {t:?}"))),
        };
        match first.as_str() {
            "node" | "edge" | "graph" if p.peek() == Some(&Tok::LBrack) => {
                let attrs = p.attr_list()?;
                match first.as_str() {
                    "node" => node_defaults.extend(attrs),
                    "edge" => edge_defaults.extend(attrs),
                    _ => {}
                }
            }
            _ if p.peek() == Some(&Tok::Eq) => {
                p.bump();
                p.id()?;
            }
            _ if p.peek() == Some(&Tok::Arrow) => {
                let mut chain = vec![first];
                while p.eat(&Tok::Arrow) {
                    chain.push(p.id()?);
                }
                let mut attrs = edge_defaults.clone();
                attrs.extend(p.attr_list()?);
                for name in &chain {
                    touch(&mut g, name, &node_defaults);
                }
                for w in chain.windows(2) {
                    g.edges.push(DotEdge {
                        from: w[0].clone(),
                        to: w[1].clone(),
                        attrs: attrs.clone(),
                        pos,
                    });
                }
            }
            _ => {
                let attrs = p.attr_list()?;
                let i = touch(&mut g, &first, &node_defaults);
                g.nodes[i].attrs.extend(attrs);
            }
        }
    }
    if p.peek().is_some() {
        return Err(err(p.pos(), "trailing input after the graph"));
    }
    Ok(g)
}

fn is_marker(n: &DotNode) -> bool {
    let name = n.name.as_str();
    name == "init"
        || name == "start"
        || name.starts_with("__start")
        || matches!(
            n.attrs.get("shape").map(String::as_str),
            Some("plaintext" | "point" | "none" | "plain")
        )
}

/// Parses an edge label into a guard; `None` for a catch-all edge.
fn parse_label(label: &str, pos: Pos) -> Result<Option<Guard>, AutomataError> {
    let text = label.trim();
    if text.is_empty() || text == "true" || text == "⊤" {
        return Ok(None);
    }
    let normalized = text.replace("&&", "&").replace('∧', "&");
    let mut g = Guard::top();
    for part in normalized.split('&') {
        let mut lit = part.trim();
        let mut positive = true;
        while let Some(rest) = lit.strip_prefix(['!', '~', '¬']) {
            positive = !positive;
            lit = rest.trim_start();
        }
        if lit == LAST {
            return Err(err(pos, "DFA edge labels may not mention `last`"));
        }
        let atom = Atom::new(lit).map_err(|e| err(pos, format!("bad literal `{}`: {e}", part.trim())))?;
        if !g.insert(Symbol::Atom(atom), positive) {
            return Err(err(pos, format!("label `{text}` is contradictory")));
        }
    }
    Ok(Some(g))
}

/// Imports a DFA from DOT.
///
/// Final states carry `shape=doublecircle`. The initial state is the target
/// of the edge leaving an `init`/`start`/`__start*` node or a node drawn as
/// plaintext, point or none. Unlabeled edges (or `true`) catch every letter
/// not matched by a labeled edge of the same source; letters matched by no
/// edge go to an added rejecting sink.
pub fn dfa_from_dot(text: &str) -> Result<Dfa, AutomataError> {
    let g = parse_dot(text)?;
    let markers: BTreeSet<&str> = g.nodes.iter().filter(|n| is_marker(n)).map(|n| n.name.as_str()).collect();
    let mut ids: HashMap<&str, usize> = HashMap::new();
    let mut labels = Vec::new();
    for n in g.nodes.iter().filter(|n| !markers.contains(n.name.as_str())) {
        ids.insert(n.name.as_str(), labels.len());
        labels.push(n.name.clone());
    }
    let mut initial = None;
    let mut labeled: Vec<Vec<(Guard, usize, Pos)>> = vec![Vec::new(); labels.len()];
    let mut fallback: Vec<Option<usize>> = vec![None; labels.len()];
    let mut atoms = BTreeSet::new();
    for e in &g.edges {
        if markers.contains(e.from.as_str()) {
            let t = *ids.get(e.to.as_str()).ok_or_else(|| err(e.pos, "initial edge must reach a state"))?;
            if initial.replace(t).is_some_and(|old| old != t) {
                return Err(err(e.pos, "more than one initial state"));
            }
            continue;
        }
        let (Some(&s), Some(&t)) = (ids.get(e.from.as_str()), ids.get(e.to.as_str())) else {
            return Err(err(e.pos, "edges between states may not touch the start marker"));
        };
        match parse_label(e.attrs.get("label").map(String::as_str).unwrap_or(""), e.pos)? {
            None => {
                if fallback[s].replace(t).is_some_and(|old| old != t) {
                    return Err(err(e.pos, format!("state `{}` has two catch-all edges", labels[s])));
                }
            }
            Some(guard) => {
                atoms.extend(guard.literals().filter_map(|(sym, _)| match sym {
                    Symbol::Atom(a) => Some(a.clone()),
                    Symbol::Last => None,
                }));
                labeled[s].push((guard, t, e.pos));
            }
        }
    }
    let initial = initial.ok_or_else(|| err(Pos { line: 1, column: 1 }, "no initial state marker"))?;
    let symbols = SymbolTable::new(atoms);
    let atom_list = symbols.atoms().to_vec();
    let index = tree::MaskIndex::new(&atom_list);
    let masks: Vec<Vec<(u64, u64)>> = match &index {
        Some(ix) => labeled.iter().map(|es| es.iter().map(|(g, _, _)| ix.masks(g)).collect()).collect(),
        None => Vec::new(),
    };
    for (s, edges) in labeled.iter().enumerate() {
        for (i, (g1, t1, _)) in edges.iter().enumerate() {
            for (j, (g2, t2, pos)) in edges.iter().enumerate().skip(i + 1) {
                let overlap = match index {
                    Some(_) => tree::compatible(masks[s][i], masks[s][j]),
                    None => g1.and(g2).is_some(),
                };
                if t1 != t2 && overlap {
                    return Err(err(*pos, format!("labels `{g1}` and `{g2}` overlap with different targets")));
                }
            }
        }
    }
    let finals: BTreeSet<usize> = g
        .nodes
        .iter()
        .filter(|n| n.attrs.get("shape").map(String::as_str) == Some("doublecircle"))
        .filter_map(|n| ids.get(n.name.as_str()).copied())
        .collect();
    let sink = labels.len();
    let mut needs_sink = false;
    let mut transitions = Vec::new();
    for s in 0..labels.len() {
        let t = if index.is_some() {
            let m = &masks[s];
            tree::build_masked(atom_list.len(), m, &mut |pos, neg| {
                (0..m.len())
                    .find(|&e| m[e].0 & !pos == 0 && m[e].1 & !neg == 0)
                    .map(|e| labeled[s][e].1)
                    .or(fallback[s])
                    .unwrap_or(sink)
            })
        } else {
            let guards: Vec<Guard> = labeled[s].iter().map(|(g, _, _)| g.clone()).collect();
            tree::build(&atom_list, &guards, &mut |cube: &Guard| {
                labeled[s]
                    .iter()
                    .find(|(g, _, _)| g.implied_by(cube))
                    .map(|(_, t, _)| *t)
                    .or(fallback[s])
                    .unwrap_or(sink)
            })
        };
        let cubes = t.cubes(&atom_list);
        needs_sink |= cubes.iter().any(|(_, t)| *t == sink);
        transitions.push(cubes);
    }
    if needs_sink {
        labels.push("sink".to_string());
        transitions.push(vec![(Guard::top(), sink)]);
    }
    Ok(Dfa {
        symbols,
        labels,
        initial,
        transitions,
        finals,
    })
}
