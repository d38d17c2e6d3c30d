use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::afw::{conjunct_facts, Afw, Conjunct};
use crate::facts::{render, Fact, SymbolTable, Term};
use crate::formula::{print_canonical, Formula};
use crate::guard::Guard;
use crate::trace::Trace;

/// Nondeterministic automaton whose states are AFW obligation sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nfa {
    pub symbols: SymbolTable,
    /// Obligations (AFW state formulas) carried by each state.
    pub states: Vec<BTreeSet<Formula>>,
    pub initial: usize,
    /// Per source, guarded edges; guards of one source may overlap.
    pub transitions: Vec<Vec<(Guard, usize)>>,
    pub finals: BTreeSet<usize>,
}

/// AFW states whose transition is the single unconditional `tt` conjunct.
fn trivial_states(a: &Afw) -> BTreeSet<usize> {
    (0..a.num_states())
        .filter(|&q| {
            a.delta[q].len() == 1 && a.delta[q][0].guard.is_empty() && a.delta[q][0].successors.is_empty()
        })
        .collect()
}

/// Subset construction on the alternating automaton. States that accept
/// everything are dropped from obligation sets, so `tt` gets one state.
pub fn afw_to_nfa(a: &Afw) -> Nfa {
    let trivial = trivial_states(a);
    let strip = |s: &BTreeSet<usize>| -> BTreeSet<usize> { s.difference(&trivial).copied().collect() };
    let start = strip(&BTreeSet::from([a.initial]));
    let mut ids: HashMap<BTreeSet<usize>, usize> = HashMap::from([(start.clone(), 0)]);
    let mut sets = vec![start];
    let mut transitions: Vec<Vec<(Guard, usize)>> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let mut partial: Vec<(Guard, BTreeSet<usize>)> = vec![(Guard::top(), BTreeSet::new())];
        for &q in &sets[i].clone() {
            let mut next: Vec<(Guard, BTreeSet<usize>)> = Vec::new();
            for (g, p) in &partial {
                for c in &a.delta[q] {
                    let Some(g2) = g.and(&c.guard) else { continue };
                    let p2: BTreeSet<usize> = p.union(&strip(&c.successors)).copied().collect();
                    push_pruned(&mut next, g2, p2);
                }
            }
            partial = next;
        }
        let mut out = Vec::new();
        for (g, p) in partial {
            let j = *ids.entry(p.clone()).or_insert_with(|| {
                sets.push(p);
                queue.push_back(sets.len() - 1);
                sets.len() - 1
            });
            out.push((g, j));
        }
        if transitions.len() <= i {
            transitions.resize(i + 1, Vec::new());
        }
        transitions[i] = out;
    }
    transitions.resize(sets.len(), Vec::new());
    let finals = sets
        .iter()
        .enumerate()
        .filter(|(_, s)| s.is_empty())
        .map(|(i, _)| i)
        .collect();
    Nfa {
        symbols: a.symbols.clone(),
        states: sets
            .iter()
            .map(|s| s.iter().map(|q| a.states[*q].clone()).collect())
            .collect(),
        initial: 0,
        transitions,
        finals,
    }
}

/// Keeps a set of (guard, obligations) free of entries made redundant by a
/// weaker guard with fewer obligations.
fn push_pruned(v: &mut Vec<(Guard, BTreeSet<usize>)>, g: Guard, p: BTreeSet<usize>) {
    if v.iter().any(|(h, q)| h.implied_by(&g) && q.is_subset(&p)) {
        return;
    }
    v.retain(|(h, q)| !(g.implied_by(h) && p.is_subset(q)));
    v.push((g, p));
}

impl Nfa {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn accepts(&self, trace: &Trace) -> bool {
        let mut current = BTreeSet::from([self.initial]);
        for letter in trace.letters() {
            current = current
                .iter()
                .flat_map(|&s| self.transitions[s].iter())
                .filter(|(g, _)| g.matches(&letter))
                .map(|(_, t)| *t)
                .collect();
            if current.is_empty() {
                return false;
            }
        }
        current.iter().any(|s| self.finals.contains(s))
    }

    /// Label of a state: its obligations in canonical syntax.
    pub fn label(&self, i: usize) -> String {
        let parts: Vec<String> = self.states[i].iter().map(print_canonical).collect();
        format!("{{{}}}", parts.join(", "))
    }

    pub fn to_json(&self) -> String {
        let labels = (0..self.num_states()).map(|i| self.label(i)).collect();
        machine_json("nfa", &self.symbols, labels, self.initial, &self.transitions, &self.finals)
    }

    /// Facts in the automaton schema plus `final_state/1`; every edge is a
    /// conjunct with one successor.
    pub fn facts(&self) -> Vec<Fact> {
        let int = |i: usize| Term::Int(i as i64);
        let mut out = self.symbols.facts();
        for q in 0..self.num_states() {
            out.push(Fact::new("state", vec![int(q), Term::Str(self.label(q))]));
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

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph nfa {\n  rankdir=LR;\n  __start [shape=point];\n");
        for i in 0..self.num_states() {
            let shape = if self.finals.contains(&i) { "doublecircle" } else { "circle" };
            out.push_str(&format!(
                "  {i} [shape={shape}, label=\"{}\"];\n",
                crate::afw::dot_escape(&self.label(i))
            ));
        }
        out.push_str(&format!("  __start -> {};\n", self.initial));
        for (i, ts) in self.transitions.iter().enumerate() {
            for (g, j) in ts {
                out.push_str(&format!("  {i} -> {j} [label=\"{g}\"];\n"));
            }
        }
        out.push_str("}\n");
        out
    }
}


/// JSON document shared by the NFA and DFA writers.
pub(super) fn machine_json(
    kind: &str,
    symbols: &SymbolTable,
    labels: Vec<String>,
    initial: usize,
    transitions: &[Vec<(Guard, usize)>],
    finals: &BTreeSet<usize>,
) -> String {
    let states: Vec<serde_json::Value> = labels
        .into_iter()
        .zip(transitions)
        .enumerate()
        .map(|(q, (label, ts))| {
            let edges: Vec<serde_json::Value> = ts
                .iter()
                .map(|(g, t)| serde_json::json!({ "guard": g.to_json(), "target": t }))
                .collect();
            serde_json::json!({ "id": q, "label": label, "final": finals.contains(&q), "edges": edges })
        })
        .collect();
    let doc = serde_json::json!({
        "kind": kind,
        "atoms": symbols.atoms().iter().map(|a| a.name()).collect::<Vec<_>>(),
        "initial": initial,
        "states": states,
    });
    serde_json::to_string_pretty(&doc).unwrap() + "\n"
}
