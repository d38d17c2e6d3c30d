use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use super::nfa::Nfa;
use super::tree::{self, Tree};
use super::AutomataError;
use crate::afw::{conjunct_facts, dot_escape, read_conjuncts, Conjunct};
use crate::atom::{Atom, Symbol};
use crate::facts::{parse_facts, render, schema, Fact, FactsError, SymbolTable, Term};
use crate::guard::Guard;
use crate::trace::{Letter, Trace, TraceError};

/// Default bound on the number of states produced by determinization.
pub const DEFAULT_STATE_CAP: usize = 1_000_000;

/// Deterministic, complete automaton over letters of user atoms.
///
/// Guards never mention `last`: the end of the trace is handled by the
/// final-state check after the last letter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    pub symbols: SymbolTable,
    pub labels: Vec<String>,
    pub initial: usize,
    /// Per state, disjoint and exhaustive cubes with their targets.
    pub transitions: Vec<Vec<(Guard, usize)>>,
    pub finals: BTreeSet<usize>,
}

/// Subset construction. A DFA state records the NFA states reached so far
/// under non-final letters, and whether reading the previous letter as the
/// final one would have been accepted.
pub fn nfa_to_dfa(n: &Nfa, cap: usize) -> Result<Dfa, AutomataError> {
    type Key = (BTreeSet<usize>, bool);
    let atoms: Vec<Atom> = n.symbols.atoms().to_vec();
    let index = tree::MaskIndex::new(&atoms);
    let start: Key = (BTreeSet::from([n.initial]), n.finals.contains(&n.initial));
    let mut ids: HashMap<Key, usize> = HashMap::from([(start.clone(), 0)]);
    let mut keys = vec![start];
    let mut transitions = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let (set, _) = keys[i].clone();
        let edges: Vec<&(Guard, usize)> = set.iter().flat_map(|&s| n.transitions[s].iter()).collect();
        let step = |live: &mut dyn Iterator<Item = usize>| -> Key {
            let mut next = BTreeSet::new();
            let mut accept = false;
            for e in live {
                let (g, target) = edges[e];
                match g.get(&Symbol::Last) {
                    Some(true) => accept |= n.finals.contains(target),
                    Some(false) => {
                        next.insert(*target);
                    }
                    None => {
                        next.insert(*target);
                        accept |= n.finals.contains(target);
                    }
                }
            }
            (next, accept)
        };
        let t = if let Some(index) = &index {
            let masks: Vec<(u64, u64)> = edges.iter().map(|(g, _)| index.masks(g)).collect();
            tree::build_masked(atoms.len(), &masks, &mut |pos, neg| {
                step(&mut (0..masks.len()).filter(|&e| masks[e].0 & !pos == 0 && masks[e].1 & !neg == 0))
            })
        } else {
            let guards: Vec<Guard> = edges.iter().map(|(g, _)| g.without_last()).collect();
            tree::build(&atoms, &guards, &mut |cube: &Guard| {
                step(&mut (0..guards.len()).filter(|&e| guards[e].implied_by(cube)))
            })
        };
        let mut out = Vec::new();
        for (cube, key) in t.cubes(&atoms) {
            let j = match ids.get(&key) {
                Some(&j) => j,
                None => {
                    if keys.len() >= cap {
                        return Err(AutomataError::StateLimit { limit: cap });
                    }
                    ids.insert(key.clone(), keys.len());
                    keys.push(key);
                    queue.push_back(keys.len() - 1);
                    keys.len() - 1
                }
            };
            out.push((cube, j));
        }
        if transitions.len() <= i {
            transitions.resize(i + 1, Vec::new());
        }
        transitions[i] = out;
    }
    transitions.resize(keys.len(), Vec::new());
    let labels = keys
        .iter()
        .map(|(set, acc)| {
            let parts: Vec<String> = set.iter().map(|s| format!("n{s}")).collect();
            format!("{{{}}}{}", parts.join(","), if *acc { "+" } else { "" })
        })
        .collect();
    let finals = keys
        .iter()
        .enumerate()
        .filter(|(_, (_, acc))| *acc)
        .map(|(i, _)| i)
        .collect();
    Ok(Dfa {
        symbols: n.symbols.clone(),
        labels,
        initial: 0,
        transitions,
        finals,
    })
}

impl Dfa {
    pub fn num_states(&self) -> usize {
        self.transitions.len()
    }

    pub fn next(&self, state: usize, letter: &Letter) -> Option<usize> {
        self.transitions[state]
            .iter()
            .find(|(g, _)| g.without_last().matches(letter))
            .map(|(_, t)| *t)
    }

    pub fn accepts(&self, trace: &Trace) -> bool {
        let mut q = self.initial;
        for letter in trace.letters() {
            match self.next(q, &letter) {
                Some(t) => q = t,
                None => return false,
            }
        }
        self.finals.contains(&q)
    }

    /// Transition function of one state as a canonical tree over this
    /// automaton's atoms.
    fn tree_of(&self, q: usize) -> Tree<usize> {
        tree::from_cubes(self.symbols.atoms(), &self.transitions[q], usize::MAX)
    }

    /// Every letter over the atoms is matched by exactly one guard of every state.
    pub fn is_deterministic_and_complete(&self) -> bool {
        let atoms = self.symbols.atoms();
        if atoms.len() > 16 {
            return true;
        }
        (0..self.num_states()).all(|q| {
            (0..1usize << atoms.len()).all(|mask| {
                let letter = Letter {
                    atoms: atoms
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask >> i & 1 == 1)
                        .map(|(_, a)| a.clone())
                        .collect(),
                    last: false,
                };
                self.transitions[q].iter().filter(|(g, _)| g.matches(&letter)).count() == 1
            })
        })
    }

    fn reachable(&self) -> Vec<usize> {
        let mut seen = vec![false; self.num_states()];
        let mut order = vec![self.initial];
        seen[self.initial] = true;
        let mut i = 0;
        while i < order.len() {
            for (_, t) in &self.transitions[order[i]] {
                if !seen[*t] {
                    seen[*t] = true;
                    order.push(*t);
                }
            }
            i += 1;
        }
        order
    }

    /// Moore partition refinement on the reachable part. States of the
    /// result are numbered breadth-first from the initial state.
    pub fn minimize(&self) -> Dfa {
        let reach = self.reachable();
        let trees: HashMap<usize, Tree<usize>> = reach.iter().map(|&q| (q, self.tree_of(q))).collect();
        let mut class: HashMap<usize, usize> = reach
            .iter()
            .map(|&q| (q, usize::from(self.finals.contains(&q))))
            .collect();
        let mut count = class.values().collect::<BTreeSet<_>>().len();
        loop {
            let mut sigs: HashMap<(usize, Tree<usize>), usize> = HashMap::new();
            let mut next = HashMap::new();
            for &q in &reach {
                let t = trees[&q].map(&mut |s| class[s]).reduce();
                let n = sigs.len();
                let c = *sigs.entry((class[&q], t)).or_insert(n);
                next.insert(q, c);
            }
            let new_count = sigs.len();
            class = next;
            if new_count == count {
                break;
            }
            count = new_count;
        }
        // Renumber classes breadth-first and read transitions off the trees.
        let mut order: Vec<usize> = Vec::new();
        let mut number: HashMap<usize, usize> = HashMap::new();
        let mut rep: Vec<usize> = Vec::new();
        let mut queue = VecDeque::from([self.initial]);
        number.insert(class[&self.initial], 0);
        rep.push(self.initial);
        order.push(class[&self.initial]);
        let atoms = self.symbols.atoms();
        let mut transitions = Vec::new();
        while let Some(q) = queue.pop_front() {
            let t = trees[&q].map(&mut |s| class[s]).reduce();
            let mut out = Vec::new();
            for (cube, c) in t.cubes(atoms) {
                let id = match number.get(&c) {
                    Some(&id) => id,
                    None => {
                        let id = number.len();
                        number.insert(c, id);
                        let r = *reach.iter().find(|&&s| class[&s] == c).expect("class has a member");
                        rep.push(r);
                        queue.push_back(r);
                        id
                    }
                };
                out.push((cube, id));
            }
            transitions.push(out);
        }
        let finals = rep
            .iter()
            .enumerate()
            .filter(|(_, q)| self.finals.contains(q))
            .map(|(i, _)| i)
            .collect();
        Dfa {
            symbols: self.symbols.clone(),
            labels: (0..rep.len()).map(|i| format!("m{i}")).collect(),
            initial: 0,
            transitions,
            finals,
        }
    }

    pub fn facts(&self) -> Vec<Fact> {
        let int = |i: usize| Term::Int(i as i64);
        let mut out = self.symbols.facts();
        for (q, l) in self.labels.iter().enumerate() {
            out.push(Fact::new("state", vec![int(q), Term::Str(l.clone())]));
        }
        out.push(Fact::new("initial_state", vec![int(self.initial)]));
        for q in &self.finals {
            out.push(Fact::new("final_state", vec![int(*q)]));
        }
        for (q, ts) in self.transitions.iter().enumerate() {
            for (c, (g, t)) in ts.iter().enumerate() {
                let conj = Conjunct {
                    guard: g.clone(),
                    successors: BTreeSet::from([*t]),
                };
                out.extend(conjunct_facts(&self.symbols, q, c, &conj));
            }
        }
        out
    }

    pub fn to_facts(&self) -> String {
        render(&self.facts())
    }

    pub fn from_facts(text: &str) -> Result<Dfa, FactsError> {
        let facts = parse_facts(text)?;
        let symbols = SymbolTable::from_facts(&facts)?;
        let mut labels: BTreeMap<usize, String> = BTreeMap::new();
        let mut initial = None;
        let mut finals = BTreeSet::new();
        for f in &facts {
            if f.is("state", 2) {
                let label = match &f.args[1] {
                    Term::Str(s) | Term::Const(s) => s.clone(),
                    Term::Int(i) => i.to_string(),
                };
                labels.insert(f.index(0)?, label);
            } else if f.is("initial_state", 1) {
                if initial.replace(f.index(0)?).is_some() {
                    return Err(schema(f.pos, "more than one initial_state/1"));
                }
            } else if f.is("final_state", 1) {
                finals.insert(f.index(0)?);
            }
        }
        let n = labels.len();
        if labels.keys().copied().ne(0..n) {
            return Err(schema(Default::default(), "state ids must be 0..n"));
        }
        let initial = initial.ok_or_else(|| schema(Default::default(), "missing initial_state/1"))?;
        if initial >= n || finals.iter().any(|&q| q >= n) {
            return Err(schema(Default::default(), "initial or final state is undeclared"));
        }
        let mut transitions = Vec::new();
        for (q, cs) in read_conjuncts(&facts, &symbols, n)?.into_iter().enumerate() {
            let mut out = Vec::new();
            for (g, succ) in cs {
                if succ.len() != 1 || g.mentions_last() {
                    return Err(schema(
                        Default::default(),
                        format!("state {q}: DFA transitions need one successor and no `last` condition"),
                    ));
                }
                out.push((g, *succ.iter().next().unwrap()));
            }
            transitions.push(out);
        }
        Ok(Dfa {
            symbols,
            labels: labels.into_values().collect(),
            initial,
            transitions,
            finals,
        })
    }

    pub fn to_json(&self) -> String {
        super::nfa::machine_json("dfa", &self.symbols, self.labels.clone(), self.initial, &self.transitions, &self.finals)
    }

    /// DOT in the accepted import subset.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph dfa {\n  rankdir=LR;\n  node [shape=circle];\n");
        out.push_str("  init [shape=plaintext, label=\"\"];\n");
        for q in 0..self.num_states() {
            let shape = if self.finals.contains(&q) { "doublecircle" } else { "circle" };
            out.push_str(&format!("  {q} [shape={shape}];\n"));
        }
        out.push_str(&format!("  init -> {};\n", self.initial));
        for (q, ts) in self.transitions.iter().enumerate() {
            for (g, t) in ts {
                out.push_str(&format!("  {q} -> {t} [label=\"{}\"];\n", dot_escape(&g.to_string())));
            }
        }
        out.push_str("}\n");
        out
    }

    /// Flips every transition of `state` to `target`; used by mutation tests.
    pub fn redirect(&mut self, state: usize, target: usize) {
        for (_, t) in &mut self.transitions[state] {
            *t = target;
        }
    }
}

/// Language equality on all traces up to `max_len` over the union of both
/// alphabets; returns the first differing trace.
pub fn bounded_difference(a: &Dfa, b: &Dfa, max_len: usize) -> Result<Option<Trace>, TraceError> {
    let alphabet: BTreeSet<Atom> = a.symbols.atoms().iter().chain(b.symbols.atoms()).cloned().collect();
    Ok(crate::trace::enumerate_traces(&alphabet, max_len)?.find(|t| a.accepts(t) != b.accepts(t)))
}

/// Exact language comparison by a breadth-first walk of the product
/// automaton; returns a shortest trace accepted by exactly one side.
pub fn distinguishing_trace(a: &Dfa, b: &Dfa) -> Option<Trace> {
    let alphabet: BTreeSet<Atom> = a.symbols.atoms().iter().chain(b.symbols.atoms()).cloned().collect();
    type Pair = (usize, usize);
    let mut parent: HashMap<Pair, Option<(Pair, Guard)>> = HashMap::new();
    let mut queue = VecDeque::new();
    let atoms: Vec<Atom> = alphabet.iter().cloned().collect();
    let index = tree::MaskIndex::new(&atoms);
    let masks = |d: &Dfa| -> Vec<Vec<(u64, u64)>> {
        match &index {
            Some(ix) => d.transitions.iter().map(|ts| ts.iter().map(|(g, _)| ix.masks(g)).collect()).collect(),
            None => Vec::new(),
        }
    };
    let (ma, mb) = (masks(a), masks(b));
    let expand = |(p, q): (usize, usize)| -> Vec<(Guard, (usize, usize))> {
        let mut out = Vec::new();
        for (i, (g, p2)) in a.transitions[p].iter().enumerate() {
            for (j, (h, q2)) in b.transitions[q].iter().enumerate() {
                if index.is_some() && !tree::compatible(ma[p][i], mb[q][j]) {
                    continue;
                }
                if let Some(both) = g.without_last().and(&h.without_last()) {
                    out.push((both, (*p2, *q2)));
                }
            }
        }
        out
    };
    for (g, next) in expand((a.initial, b.initial)) {
        if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(next) {
            e.insert(Some(((usize::MAX, usize::MAX), g)));
            queue.push_back(next);
        }
    }
    while let Some(pair) = queue.pop_front() {
        if a.finals.contains(&pair.0) != b.finals.contains(&pair.1) {
            let mut cubes = Vec::new();
            let mut at = pair;
            while let Some(Some((prev, g))) = parent.get(&at) {
                cubes.push(g.clone());
                at = *prev;
            }
            cubes.reverse();
            let states = cubes
                .iter()
                .map(|g| {
                    g.literals()
                        .filter_map(|(s, on)| match s {
                            Symbol::Atom(x) if on => Some(x.clone()),
                            _ => None,
                        })
                        .collect()
                })
                .collect();
            return Some(Trace::new(states, alphabet).expect("cubes only mention automaton atoms"));
        }
        for (g, next) in expand(pair) {
            if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(next) {
                e.insert(Some((pair, g)));
                queue.push_back(next);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::afw::build_afw;
    use crate::automata::afw_to_nfa;
    use crate::formula::{running_example, Formula};

    fn dfa(f: &Formula) -> Dfa {
        nfa_to_dfa(&afw_to_nfa(&build_afw(f)), DEFAULT_STATE_CAP).unwrap()
    }

    #[test]
    fn running_example_has_four_states() {
        let d = dfa(&running_example());
        assert!(d.is_deterministic_and_complete());
        assert_eq!(d.minimize().num_states(), 4);
        assert!(d.accepts(&Trace::from_names(&[&["b"], &["a", "b"], &["b"]])));
        assert!(!d.accepts(&Trace::from_names(&[&["b"], &["a"], &["b"]])));
    }

    #[test]
    fn small_machines() {
        let top = dfa(&Formula::True).minimize();
        assert_eq!(top.num_states(), 1);
        assert!(top.finals.contains(&0));
        assert_eq!(dfa(&Formula::atom("a")).minimize().num_states(), 3);
    }

    #[test]
    fn product_walk_finds_shortest_difference() {
        let a = dfa(&Formula::atom("a"));
        let b = dfa(&Formula::atom("b"));
        let t = distinguishing_trace(&a, &b).unwrap();
        assert_eq!(t.len(), 1);
        assert_ne!(a.accepts(&t), b.accepts(&t));
        assert_eq!(distinguishing_trace(&a, &a.minimize()), None);
        assert_eq!(distinguishing_trace(&dfa(&running_example()), &dfa(&running_example()).minimize()), None);
    }

    #[test]
    fn minimization_is_idempotent() {
        let m = dfa(&running_example()).minimize();
        assert_eq!(m.minimize(), m);
    }

    #[test]
    fn state_cap_is_enforced() {
        let n = afw_to_nfa(&build_afw(&running_example()));
        assert_eq!(nfa_to_dfa(&n, 2), Err(AutomataError::StateLimit { limit: 2 }));
    }

    #[test]
    fn facts_round_trip() {
        let m = dfa(&running_example()).minimize();
        let text = m.to_facts();
        assert!(text.contains("final_state("));
        assert_eq!(Dfa::from_facts(&text).unwrap(), m);
    }
}
