//! Alternating automata built from the closure of an NNF formula.
//!
//! Transitions are kept symbolic: `delta(q)` is a disjunction of conjuncts,
//! each pairing a guard over atoms and `last` with the set of successor
//! states that must all accept the rest of the trace.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::sync::Arc;

use crate::atom::Symbol;
use crate::facts::{parse_facts, render, schema, Fact, FactsError, SymbolTable, Term};
use crate::formula::{desugar, is_test_only, nnf, parse_canonical, print_canonical, Formula, PathExpr};
use crate::guard::Guard;
use crate::trace::Trace;

/// One disjunct of a transition: a guard and the states it spawns.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Conjunct {
    pub guard: Guard,
    pub successors: BTreeSet<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Afw {
    pub symbols: SymbolTable,
    /// State id to the NNF formula it stands for.
    pub states: Vec<Formula>,
    pub initial: usize,
    pub delta: Vec<Vec<Conjunct>>,
}

/// A symbolic conjunct before successor formulas are numbered.
#[derive(Clone, PartialEq, Eq, Hash)]
struct Pending {
    guard: Guard,
    succ: BTreeSet<Formula>,
}

type Dnf = Vec<Pending>;

fn top() -> Dnf {
    vec![Pending {
        guard: Guard::top(),
        succ: BTreeSet::new(),
    }]
}

fn bottom() -> Dnf {
    Vec::new()
}

fn lit(s: Symbol, positive: bool, succ: Option<Formula>) -> Dnf {
    vec![Pending {
        guard: Guard::literal(s, positive),
        succ: succ.into_iter().collect(),
    }]
}

/// Drops duplicates and conjuncts subsumed by an earlier or later one,
/// keeping first-occurrence order.
fn simplify(d: Dnf) -> Dnf {
    let mut out: Dnf = Vec::new();
    for t in d {
        let subsumed = out
            .iter()
            .any(|u| u.guard.implied_by(&t.guard) && u.succ.is_subset(&t.succ));
        if subsumed {
            continue;
        }
        out.retain(|u| !(t.guard.implied_by(&u.guard) && t.succ.is_subset(&u.succ)));
        out.push(t);
    }
    out
}

fn or(mut l: Dnf, r: Dnf) -> Dnf {
    l.extend(r);
    simplify(l)
}

fn and(l: &Dnf, r: &Dnf) -> Dnf {
    let mut out = Vec::new();
    for a in l {
        for b in r {
            if let Some(guard) = a.guard.and(&b.guard) {
                out.push(Pending {
                    guard,
                    succ: a.succ.union(&b.succ).cloned().collect(),
                });
            }
        }
    }
    simplify(out)
}

/// Symbolic transition function with the unfolding stack used to cut
/// step-free cycles through nullable stars.
#[derive(Default)]
struct Delta {
    memo: HashMap<Formula, Dnf>,
    stack: Vec<Formula>,
    cut: bool,
}

impl Delta {
    fn of(&mut self, f: &Formula) -> Dnf {
        if let Some(d) = self.memo.get(f) {
            return d.clone();
        }
        if self.stack.contains(f) {
            // Re-entered without consuming a step: least fixpoint for
            // diamonds, greatest for boxes.
            self.cut = true;
            return if matches!(f, Formula::Box(..)) { top() } else { bottom() };
        }
        let outer_cut = std::mem::replace(&mut self.cut, false);
        self.stack.push(f.clone());
        let d = self.rules(f);
        self.stack.pop();
        if !self.cut {
            self.memo.insert(f.clone(), d.clone());
        }
        self.cut |= outer_cut;
        d
    }

    fn rules(&mut self, f: &Formula) -> Dnf {
        use Formula as F;
        match f {
            F::True => top(),
            F::False => bottom(),
            F::Prop(a) => lit(Symbol::Atom(a.clone()), true, None),
            F::Neg(g) => match g.as_ref() {
                F::Prop(a) => lit(Symbol::Atom(a.clone()), false, None),
                _ => {
                    let n = nnf(f);
                    self.of(&n)
                }
            },
            F::Diamond(p, g) => self.diamond(p, g),
            F::Box(p, g) => self.boxed(p, g),
            other => {
                let core = nnf(&desugar(other));
                self.of(&core)
            }
        }
    }

    fn diamond(&mut self, p: &Arc<PathExpr>, g: &Arc<Formula>) -> Dnf {
        let modal = |p: &Arc<PathExpr>, g: Formula| Formula::Diamond(p.clone(), Arc::new(g));
        match p.as_ref() {
            PathExpr::Step => lit(Symbol::Last, false, Some(g.as_ref().clone())),
            PathExpr::Test(psi) => {
                let l = self.of(psi);
                let r = self.of(g);
                and(&l, &r)
            }
            PathExpr::Choice(p1, p2) => {
                let l = self.of(&modal(p1, g.as_ref().clone()));
                let r = self.of(&modal(p2, g.as_ref().clone()));
                or(l, r)
            }
            PathExpr::Seq(p1, p2) => {
                let inner = modal(p2, g.as_ref().clone());
                self.of(&modal(p1, inner))
            }
            PathExpr::Star(q) => {
                let base = self.of(g);
                if is_test_only(q) {
                    return base;
                }
                let again = modal(p, g.as_ref().clone());
                let unfolded = self.of(&modal(q, again));
                or(base, unfolded)
            }
            PathExpr::Prop(_) => {
                let core = Formula::Diamond(Arc::new(crate::formula::desugar_path(p)), g.clone());
                self.of(&core)
            }
        }
    }

    fn boxed(&mut self, p: &Arc<PathExpr>, g: &Arc<Formula>) -> Dnf {
        let modal = |p: &Arc<PathExpr>, g: Formula| Formula::Box(p.clone(), Arc::new(g));
        match p.as_ref() {
            PathExpr::Step => {
                let mut d = lit(Symbol::Last, false, Some(g.as_ref().clone()));
                d.extend(lit(Symbol::Last, true, None));
                d
            }
            PathExpr::Test(psi) => {
                let l = self.of(&nnf(&Formula::Neg(psi.clone())));
                let r = self.of(g);
                or(l, r)
            }
            PathExpr::Choice(p1, p2) => {
                let l = self.of(&modal(p1, g.as_ref().clone()));
                let r = self.of(&modal(p2, g.as_ref().clone()));
                and(&l, &r)
            }
            PathExpr::Seq(p1, p2) => {
                let inner = modal(p2, g.as_ref().clone());
                self.of(&modal(p1, inner))
            }
            PathExpr::Star(q) => {
                let base = self.of(g);
                if is_test_only(q) {
                    return base;
                }
                let again = modal(p, g.as_ref().clone());
                let unfolded = self.of(&modal(q, again));
                and(&base, &unfolded)
            }
            PathExpr::Prop(_) => {
                let core = Formula::Box(Arc::new(crate::formula::desugar_path(p)), g.clone());
                self.of(&core)
            }
        }
    }
}

fn succ_order(a: &Formula, b: &Formula) -> std::cmp::Ordering {
    (a.size(), print_canonical(a)).cmp(&(b.size(), print_canonical(b)))
}

/// Compiles a formula (desugared and normalized first) into its AFW,
/// keeping only states reachable from the initial one.
pub fn build_afw(f: &Formula) -> Afw {
    let root = nnf(&desugar(f));
    let symbols = SymbolTable::new(root.atoms());
    let mut delta = Delta::default();
    let mut ids: HashMap<Formula, usize> = HashMap::new();
    let mut states = vec![root.clone()];
    ids.insert(root, 0);
    let mut raw: Vec<Dnf> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(q) = queue.pop_front() {
        let d = delta.of(&states[q].clone());
        for t in &d {
            let mut succ: Vec<&Formula> = t.succ.iter().collect();
            succ.sort_by(|a, b| succ_order(a, b));
            for s in succ {
                if !ids.contains_key(s) {
                    ids.insert(s.clone(), states.len());
                    queue.push_back(states.len());
                    states.push(s.clone());
                }
            }
        }
        if raw.len() <= q {
            raw.resize(q + 1, Vec::new());
        }
        raw[q] = d;
    }
    raw.resize(states.len(), Vec::new());
    let delta = raw
        .into_iter()
        .map(|d| {
            d.into_iter()
                .map(|t| Conjunct {
                    guard: t.guard,
                    successors: t.succ.iter().map(|s| ids[s]).collect(),
                })
                .collect()
        })
        .collect();
    Afw {
        symbols,
        states,
        initial: 0,
        delta,
    }
}

/// Minimal sets of states, no member a superset of another.
pub(crate) fn insert_antichain(frontier: &mut Vec<BTreeSet<usize>>, s: BTreeSet<usize>) {
    if frontier.iter().any(|t| t.is_subset(&s)) {
        return;
    }
    frontier.retain(|t| !s.is_subset(t));
    frontier.push(s);
}

impl Afw {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    /// Obligation sets reachable from `obligations` on one letter.
    pub fn step(&self, obligations: &BTreeSet<usize>, letter: &crate::trace::Letter) -> Vec<BTreeSet<usize>> {
        let mut partial: Vec<BTreeSet<usize>> = vec![BTreeSet::new()];
        for &q in obligations {
            let mut next = Vec::new();
            for c in self.delta[q].iter().filter(|c| c.guard.matches(letter)) {
                for p in &partial {
                    insert_antichain(&mut next, p.union(&c.successors).copied().collect());
                }
            }
            partial = next;
            if partial.is_empty() {
                break;
            }
        }
        partial
    }

    /// Whether some run tree on `trace` has all branches reach `tt`.
    pub fn accepts(&self, trace: &Trace) -> bool {
        let mut frontier = vec![BTreeSet::from([self.initial])];
        for letter in trace.letters() {
            let mut next = Vec::new();
            for s in &frontier {
                for t in self.step(s, &letter) {
                    insert_antichain(&mut next, t);
                }
            }
            frontier = next;
            if frontier.is_empty() {
                return false;
            }
        }
        frontier.iter().any(BTreeSet::is_empty)
    }

    pub fn to_facts(&self) -> String {
        render(&self.facts())
    }

    pub fn facts(&self) -> Vec<Fact> {
        let int = |i: usize| Term::Int(i as i64);
        let mut out = self.symbols.facts();
        for (q, f) in self.states.iter().enumerate() {
            out.push(Fact::new("state", vec![int(q), Term::Str(print_canonical(f))]));
        }
        out.push(Fact::new("initial_state", vec![int(self.initial)]));
        for (q, conj) in self.delta.iter().enumerate() {
            for (c, t) in conj.iter().enumerate() {
                out.extend(conjunct_facts(&self.symbols, q, c, t));
            }
        }
        out
    }

    /// Reads the output of [`Afw::to_facts`] back.
    pub fn from_facts(text: &str) -> Result<Afw, FactsError> {
        let facts = parse_facts(text)?;
        let symbols = SymbolTable::from_facts(&facts)?;
        let mut states: BTreeMap<usize, Formula> = BTreeMap::new();
        let mut initial = None;
        for f in &facts {
            if f.is("state", 2) {
                let q = f.index(0)?;
                let text = match &f.args[1] {
                    Term::Str(s) => s.clone(),
                    _ => return Err(schema(f.pos, "state/2 expects a quoted formula")),
                };
                let phi = parse_canonical(&text).map_err(|e| schema(f.pos, format!("bad state formula: {e}")))?;
                if states.insert(q, phi).is_some() {
                    return Err(schema(f.pos, format!("state {q} declared twice")));
                }
            } else if f.is("initial_state", 1) && initial.replace(f.index(0)?).is_some() {
                return Err(schema(f.pos, "more than one initial_state/1"));
            }
        }
        let n = states.len();
        if states.keys().copied().ne(0..n) {
            return Err(schema(facts.first().map(|f| f.pos).unwrap_or_default(), "state ids must be 0..n"));
        }
        let initial = initial.ok_or_else(|| schema(Default::default(), "missing initial_state/1"))?;
        if initial >= n {
            return Err(schema(Default::default(), format!("initial state {initial} is undeclared")));
        }
        let delta = read_conjuncts(&facts, &symbols, n)?
            .into_iter()
            .map(|cs| cs.into_iter().map(|(guard, successors)| Conjunct { guard, successors }).collect())
            .collect();
        Ok(Afw {
            symbols,
            states: states.into_values().collect(),
            initial,
            delta,
        })
    }

    /// Same shape up to renumbering of states and reordering of conjuncts;
    /// states are matched by their formulas.
    pub fn is_isomorphic(&self, other: &Afw) -> bool {
        type Shape = BTreeMap<Formula, BTreeSet<(Guard, BTreeSet<Formula>)>>;
        fn shape(a: &Afw) -> Shape {
            a.states
                .iter()
                .enumerate()
                .map(|(q, f)| {
                    let ts = a.delta[q]
                        .iter()
                        .map(|c| (c.guard.clone(), c.successors.iter().map(|s| a.states[*s].clone()).collect()))
                        .collect();
                    (f.clone(), ts)
                })
                .collect()
        }
        self.symbols == other.symbols
            && self.states.len() == other.states.len()
            && self.states[self.initial] == other.states[other.initial]
            && shape(self) == shape(other)
    }

    pub fn to_json(&self) -> String {
        let states: Vec<serde_json::Value> = self
            .states
            .iter()
            .zip(&self.delta)
            .enumerate()
            .map(|(q, (f, conj))| {
                let conjuncts: Vec<serde_json::Value> = conj
                    .iter()
                    .map(|c| serde_json::json!({ "guard": c.guard.to_json(), "successors": c.successors }))
                    .collect();
                serde_json::json!({ "id": q, "formula": print_canonical(f), "conjuncts": conjuncts })
            })
            .collect();
        let doc = serde_json::json!({
            "kind": "afw",
            "atoms": self.symbols.atoms().iter().map(|a| a.name()).collect::<Vec<_>>(),
            "initial": self.initial,
            "states": states,
        });
        serde_json::to_string_pretty(&doc).unwrap() + "\n"
    }

    /// DOT rendering; conjuncts with zero or several successors go through
    /// a `∀` node.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph afw {\n  rankdir=LR;\n");
        out.push_str("  __start [shape=point];\n");
        for (q, f) in self.states.iter().enumerate() {
            out.push_str(&format!(
                "  q{q} [shape=circle, label=\"{}\"];\n",
                dot_escape(&print_canonical(f))
            ));
        }
        out.push_str(&format!("  __start -> q{};\n", self.initial));
        for (q, conj) in self.delta.iter().enumerate() {
            for (c, t) in conj.iter().enumerate() {
                let label = dot_escape(&t.guard.to_string());
                if t.successors.len() == 1 {
                    let s = t.successors.iter().next().unwrap();
                    out.push_str(&format!("  q{q} -> q{s} [label=\"{label}\"];\n"));
                } else {
                    out.push_str(&format!("  q{q}_c{c} [shape=none, label=\"∀\"];\n"));
                    out.push_str(&format!("  q{q} -> q{q}_c{c} [label=\"{label}\"];\n"));
                    for s in &t.successors {
                        out.push_str(&format!("  q{q}_c{c} -> q{s};\n"));
                    }
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

pub(crate) fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

pub(crate) fn conjunct_facts(symbols: &SymbolTable, q: usize, c: usize, t: &Conjunct) -> Vec<Fact> {
    let int = |i: usize| Term::Int(i as i64);
    let mut out = vec![Fact::new("delta", vec![int(q), int(c)])];
    let mut lits: Vec<(usize, bool)> = t
        .guard
        .literals()
        .map(|(s, v)| (symbols.id(s).expect("guard symbol in table"), v))
        .collect();
    lits.sort_unstable();
    for (id, v) in lits {
        let tag = if v { "in" } else { "out" };
        out.push(Fact::new("delta", vec![int(q), int(c), Term::Const(tag.into()), int(id)]));
    }
    for s in &t.successors {
        out.push(Fact::new("delta", vec![int(q), int(c), int(*s)]));
    }
    out
}

/// Collects `delta/2,3,4` into per-state conjunct lists.
pub(crate) fn read_conjuncts(
    facts: &[Fact],
    symbols: &SymbolTable,
    n: usize,
) -> Result<Vec<Vec<(Guard, BTreeSet<usize>)>>, FactsError> {
    let mut table: BTreeMap<(usize, usize), (Guard, BTreeSet<usize>)> = BTreeMap::new();
    let mut declared: HashSet<(usize, usize)> = HashSet::new();
    let check_state = |f: &Fact, q: usize| {
        if q >= n {
            Err(schema(f.pos, format!("unknown state {q}")))
        } else {
            Ok(())
        }
    };
    for f in facts.iter().filter(|f| f.pred == "delta") {
        match f.args.len() {
            2 => {
                let key = (f.index(0)?, f.index(1)?);
                check_state(f, key.0)?;
                declared.insert(key);
                table.entry(key).or_default();
            }
            3 => {
                let key = (f.index(0)?, f.index(1)?);
                let s = f.index(2)?;
                check_state(f, key.0)?;
                check_state(f, s)?;
                table.entry(key).or_default().1.insert(s);
            }
            4 => {
                let key = (f.index(0)?, f.index(1)?);
                check_state(f, key.0)?;
                let positive = match f.args[2].as_const() {
                    Some("in") => true,
                    Some("out") => false,
                    _ => return Err(schema(f.pos, "delta/4 polarity must be `in` or `out`")),
                };
                let id = f.index(3)?;
                let sym = symbols
                    .symbol(id)
                    .ok_or_else(|| schema(f.pos, format!("unknown prop id {id}")))?;
                let entry = table.entry(key).or_default();
                if !entry.0.insert(sym, positive) {
                    return Err(schema(f.pos, "contradictory conditions in one conjunct"));
                }
            }
            _ => return Err(schema(f.pos, format!("unexpected delta/{}", f.args.len()))),
        }
    }
    if let Some(key) = table.keys().find(|k| !declared.contains(k)) {
        return Err(schema(Default::default(), format!("conjunct {:?} lacks its delta/2 fact", key)));
    }
    let mut out = vec![Vec::new(); n];
    for ((q, c), v) in table {
        if c != out[q].len() {
            return Err(schema(Default::default(), format!("conjunct ids of state {q} must be 0..k")));
        }
        out[q].push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::running_example;

    #[test]
    fn running_example_has_three_states() {
        let a = build_afw(&running_example());
        assert_eq!(a.num_states(), 3);
        assert_eq!(a.states[1], Formula::atom("a"));
        assert_eq!(
            a.states[2],
            Formula::boxed(PathExpr::star(PathExpr::Step), Formula::atom("b"))
        );
        assert_eq!(a.delta[0].len(), 1);
        assert_eq!(a.delta[0][0].guard.to_string(), "b & !last");
        assert_eq!(a.delta[0][0].successors, BTreeSet::from([1, 2]));
        assert_eq!(a.delta[2][0].successors, BTreeSet::from([2]));
        assert_eq!(a.delta[2][1].guard.to_string(), "b & last");
    }

    #[test]
    fn top_is_one_unconditional_conjunct() {
        let a = build_afw(&Formula::True);
        assert_eq!(a.num_states(), 1);
        assert_eq!(a.delta[0], vec![Conjunct { guard: Guard::top(), successors: BTreeSet::new() }]);
        assert_eq!(a.to_facts(), "prop(0,last).\nstate(0,\"tt\").\ninitial_state(0).\ndelta(0,0).\n");
    }

    #[test]
    fn accepts_and_rejects_example_traces() {
        let a = build_afw(&running_example());
        assert!(a.accepts(&Trace::from_names(&[&["b"], &["a", "b"], &["b"]])));
        assert!(!a.accepts(&Trace::from_names(&[&["b"], &["a"], &["b"]])));
        let next_top = build_afw(&Formula::diamond(PathExpr::Step, Formula::True));
        assert!(!next_top.accepts(&Trace::from_names(&[&["a"]])));
    }

    #[test]
    fn nullable_star_bodies_terminate() {
        let a = Formula::atom("a");
        let f = Formula::diamond(
            PathExpr::star(PathExpr::choice(PathExpr::test(a.clone()), PathExpr::Step)),
            Formula::atom("b"),
        );
        let afw = build_afw(&f);
        assert!(afw.num_states() >= 1);
        let g = Formula::boxed(
            PathExpr::star(PathExpr::star(PathExpr::seq(PathExpr::test(a), PathExpr::Step))),
            Formula::atom("b"),
        );
        assert!(build_afw(&g).num_states() >= 1);
    }

    #[test]
    fn facts_round_trip() {
        let a = build_afw(&running_example());
        let text = a.to_facts();
        assert!(text.contains("delta(0,0,in,1).\ndelta(0,0,out,2)."));
        let back = Afw::from_facts(&text).unwrap();
        assert_eq!(back, a);
        assert!(back.is_isomorphic(&a));
    }
}
