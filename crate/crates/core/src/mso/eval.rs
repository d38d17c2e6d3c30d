use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{FoVar, Mso, MsoError, SoVar};
use crate::trace::Trace;

/// Longest trace the plain enumeration accepts.
pub const PLAIN_MAX_LENGTH: usize = 6;
/// Most second-order variables the plain enumeration keeps open at once.
pub const PLAIN_MAX_OPEN_SO: usize = 12;
const PRUNED_MAX_LENGTH: usize = 63;

/// Values for the free variables of a formula. Atom predicates are taken
/// from the trace and need not be listed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment {
    pub fo: BTreeMap<FoVar, usize>,
    pub so: BTreeMap<String, BTreeSet<usize>>,
}

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    pub fn with_fo(mut self, var: &str, pos: usize) -> Assignment {
        self.fo.insert(FoVar::new(var), pos);
        self
    }

    pub fn with_so(mut self, var: &str, set: impl IntoIterator<Item = usize>) -> Assignment {
        self.so.insert(var.to_string(), set.into_iter().collect());
        self
    }
}

/// How second-order quantifiers are decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Every subset of positions, in increasing bitmask order.
    Plain,
    /// Positions are fixed one at a time, last position first, and a branch
    /// is cut as soon as the body's three-valued value is decided.
    #[default]
    Pruned,
}

/// Decides `T, assign ⊨ psi` with the default mode.
pub fn eval_mso(trace: &Trace, psi: &Mso, assign: &Assignment) -> Result<bool, MsoError> {
    eval_mso_with(trace, psi, assign, Mode::default())
}

pub fn eval_mso_with(trace: &Trace, psi: &Mso, assign: &Assignment, mode: Mode) -> Result<bool, MsoError> {
    let len = trace.len();
    let max = match mode {
        Mode::Plain => PLAIN_MAX_LENGTH,
        Mode::Pruned => PRUNED_MAX_LENGTH,
    };
    if len > max {
        return Err(MsoError::ResourceLimit(format!(
            "trace length {len} exceeds {max} for {mode:?} evaluation"
        )));
    }
    let expanded = psi.expand();
    let mut c = Compiler {
        trace,
        assign,
        fo_scope: HashMap::new(),
        so_scope: HashMap::new(),
        fo_init: Vec::new(),
        so_init: Vec::new(),
        memo_count: 0,
    };
    let (node, _, _) = c.compile(&expanded)?;
    if mode == Mode::Plain {
        let open = node.max_open_so();
        if open > PLAIN_MAX_OPEN_SO {
            return Err(MsoError::ResourceLimit(format!(
                "{open} nested second-order variables exceed {PLAIN_MAX_OPEN_SO} for plain evaluation"
            )));
        }
    }
    let mut st = State {
        len,
        full: (1u64 << len) - 1,
        fo: c.fo_init,
        so: c.so_init,
        memo: vec![HashMap::new(); c.memo_count],
        mode,
    };
    Ok(st.eval(&node).expect("all free variables are assigned"))
}

enum Node {
    Const(bool),
    Mem(usize, usize),
    Less(usize, usize),
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Implies(Box<Node>, Box<Node>),
    Iff(Box<Node>, Box<Node>),
    Fo {
        slot: usize,
        forall: bool,
        body: Box<Node>,
    },
    So {
        slots: Vec<usize>,
        forall: bool,
        body: Box<Node>,
        memo: usize,
        free_fo: Vec<usize>,
        free_so: Vec<usize>,
    },
}

impl Node {
    fn max_open_so(&self) -> usize {
        match self {
            Node::Const(_) | Node::Mem(..) | Node::Less(..) => 0,
            Node::Not(a) | Node::Fo { body: a, .. } => a.max_open_so(),
            Node::And(a, b) | Node::Or(a, b) | Node::Implies(a, b) | Node::Iff(a, b) => {
                a.max_open_so().max(b.max_open_so())
            }
            Node::So { slots, body, .. } => slots.len() + body.max_open_so(),
        }
    }
}

type Free = (BTreeSet<usize>, BTreeSet<usize>);

struct Compiler<'a> {
    trace: &'a Trace,
    assign: &'a Assignment,
    fo_scope: HashMap<FoVar, usize>,
    so_scope: HashMap<SoVar, usize>,
    fo_init: Vec<usize>,
    so_init: Vec<(u64, u64)>,
    memo_count: usize,
}

impl Compiler<'_> {
    fn fo_slot(&mut self, x: &FoVar) -> Result<usize, MsoError> {
        if let Some(&s) = self.fo_scope.get(x) {
            return Ok(s);
        }
        let pos = *self.assign.fo.get(x).ok_or_else(|| MsoError::Unassigned(x.0.clone()))?;
        if pos >= self.trace.len() {
            return Err(MsoError::OutOfRange {
                var: x.0.clone(),
                pos,
                len: self.trace.len(),
            });
        }
        self.fo_init.push(pos);
        let s = self.fo_init.len() - 1;
        self.fo_scope.insert(x.clone(), s);
        Ok(s)
    }

    fn so_slot(&mut self, x: &SoVar) -> Result<usize, MsoError> {
        if let Some(&s) = self.so_scope.get(x) {
            return Ok(s);
        }
        let full = (1u64 << self.trace.len()) - 1;
        let mask = match x {
            SoVar::Pred(a) => (0..self.trace.len())
                .filter(|&i| self.trace.holds(i, a))
                .fold(0u64, |m, i| m | 1 << i),
            SoVar::Var(name) => {
                let set = self.assign.so.get(name).ok_or_else(|| MsoError::Unassigned(name.clone()))?;
                let mut m = 0u64;
                for &i in set {
                    if i >= self.trace.len() {
                        return Err(MsoError::OutOfRange {
                            var: name.clone(),
                            pos: i,
                            len: self.trace.len(),
                        });
                    }
                    m |= 1 << i;
                }
                m
            }
        };
        self.so_init.push((full, mask));
        let s = self.so_init.len() - 1;
        self.so_scope.insert(x.clone(), s);
        Ok(s)
    }

    fn bin(&mut self, a: &Mso, b: &Mso) -> Result<(Box<Node>, Box<Node>, Free), MsoError> {
        let (na, fa, sa) = self.compile(a)?;
        let (nb, fb, sb) = self.compile(b)?;
        Ok((Box::new(na), Box::new(nb), (&fa | &fb, &sa | &sb)))
    }

    fn compile(&mut self, f: &Mso) -> Result<(Node, BTreeSet<usize>, BTreeSet<usize>), MsoError> {
        use Mso as M;
        Ok(match f {
            M::True => (Node::Const(true), BTreeSet::new(), BTreeSet::new()),
            M::False => (Node::Const(false), BTreeSet::new(), BTreeSet::new()),
            M::Member(s, x) => {
                let (s, x) = (self.so_slot(s)?, self.fo_slot(x)?);
                (Node::Mem(s, x), BTreeSet::from([x]), BTreeSet::from([s]))
            }
            M::Less(x, y) => {
                let (x, y) = (self.fo_slot(x)?, self.fo_slot(y)?);
                (Node::Less(x, y), BTreeSet::from([x, y]), BTreeSet::new())
            }
            M::Not(a) => {
                let (n, fo, so) = self.compile(a)?;
                (Node::Not(Box::new(n)), fo, so)
            }
            M::And(a, b) => {
                let (a, b, (fo, so)) = self.bin(a, b)?;
                (Node::And(a, b), fo, so)
            }
            M::Or(a, b) => {
                let (a, b, (fo, so)) = self.bin(a, b)?;
                (Node::Or(a, b), fo, so)
            }
            M::Implies(a, b) => {
                let (a, b, (fo, so)) = self.bin(a, b)?;
                (Node::Implies(a, b), fo, so)
            }
            M::Iff(a, b) => {
                let (a, b, (fo, so)) = self.bin(a, b)?;
                (Node::Iff(a, b), fo, so)
            }
            M::ExistsFo(x, body) | M::ForallFo(x, body) => {
                let slot = self.fo_init.len();
                self.fo_init.push(0);
                let saved = self.fo_scope.insert(x.clone(), slot);
                let (n, mut fo, so) = self.compile(body)?;
                restore(&mut self.fo_scope, x, saved);
                fo.remove(&slot);
                let forall = matches!(f, M::ForallFo(..));
                (
                    Node::Fo {
                        slot,
                        forall,
                        body: Box::new(n),
                    },
                    fo,
                    so,
                )
            }
            M::ExistsSo(..) | M::ForallSo(..) => {
                let forall = matches!(f, M::ForallSo(..));
                let mut vars = Vec::new();
                let mut cur = f;
                loop {
                    match (cur, forall) {
                        (M::ExistsSo(x, b), false) | (M::ForallSo(x, b), true) => {
                            vars.push(x);
                            cur = b;
                        }
                        _ => break,
                    }
                }
                let mut slots = Vec::new();
                let mut saved = Vec::new();
                for x in &vars {
                    let slot = self.so_init.len();
                    self.so_init.push((0, 0));
                    saved.push(self.so_scope.insert((*x).clone(), slot));
                    slots.push(slot);
                }
                let (n, fo, mut so) = self.compile(cur)?;
                for (x, s) in vars.iter().zip(saved).rev() {
                    restore(&mut self.so_scope, x, s);
                }
                for s in &slots {
                    so.remove(s);
                }
                let memo = self.memo_count;
                self.memo_count += 1;
                (
                    Node::So {
                        slots,
                        forall,
                        body: Box::new(n),
                        memo,
                        free_fo: fo.iter().copied().collect(),
                        free_so: so.iter().copied().collect(),
                    },
                    fo,
                    so,
                )
            }
            _ => unreachable!("macros are expanded before compilation"),
        })
    }
}

fn restore<K: std::hash::Hash + Eq + Clone>(scope: &mut HashMap<K, usize>, k: &K, saved: Option<usize>) {
    match saved {
        Some(s) => scope.insert(k.clone(), s),
        None => scope.remove(k),
    };
}

struct State {
    len: usize,
    full: u64,
    fo: Vec<usize>,
    /// Per second-order slot: (known positions, value at known positions).
    so: Vec<(u64, u64)>,
    memo: Vec<HashMap<Vec<u64>, Option<bool>>>,
    mode: Mode,
}

fn kleene_and(a: Option<bool>, b: impl FnOnce() -> Option<bool>) -> Option<bool> {
    if a == Some(false) {
        return Some(false);
    }
    match (a, b()) {
        (_, Some(false)) => Some(false),
        (Some(true), Some(true)) => Some(true),
        _ => None,
    }
}

fn kleene_or(a: Option<bool>, b: impl FnOnce() -> Option<bool>) -> Option<bool> {
    if a == Some(true) {
        return Some(true);
    }
    match (a, b()) {
        (_, Some(true)) => Some(true),
        (Some(false), Some(false)) => Some(false),
        _ => None,
    }
}

impl State {
    /// Three-valued: `None` when the value depends on unfixed positions.
    fn eval(&mut self, n: &Node) -> Option<bool> {
        match n {
            Node::Const(b) => Some(*b),
            Node::Mem(s, x) => {
                let (known, val) = self.so[*s];
                let bit = 1u64 << self.fo[*x];
                (known & bit != 0).then_some(val & bit != 0)
            }
            Node::Less(x, y) => Some(self.fo[*x] < self.fo[*y]),
            Node::Not(a) => self.eval(a).map(|b| !b),
            Node::And(a, b) => {
                let l = self.eval(a);
                kleene_and(l, || self.eval(b))
            }
            Node::Or(a, b) => {
                let l = self.eval(a);
                kleene_or(l, || self.eval(b))
            }
            Node::Implies(a, b) => {
                let l = self.eval(a).map(|v| !v);
                kleene_or(l, || self.eval(b))
            }
            Node::Iff(a, b) => {
                let l = self.eval(a)?;
                self.eval(b).map(|r| l == r)
            }
            Node::Fo { slot, forall, body } => {
                let stop = !*forall;
                let mut unknown = false;
                for d in 0..self.len {
                    self.fo[*slot] = d;
                    match self.eval(body) {
                        Some(v) if v == stop => return Some(stop),
                        None => unknown = true,
                        _ => {}
                    }
                }
                (!unknown).then_some(!stop)
            }
            Node::So {
                slots,
                forall,
                body,
                memo,
                free_fo,
                free_so,
            } => {
                let key: Vec<u64> = free_fo
                    .iter()
                    .map(|&s| self.fo[s] as u64)
                    .chain(free_so.iter().flat_map(|&s| [self.so[s].0, self.so[s].1]))
                    .collect();
                if let Some(&r) = self.memo[*memo].get(&key) {
                    return r;
                }
                let saved: Vec<(u64, u64)> = slots.iter().map(|&s| self.so[s]).collect();
                for &s in slots {
                    self.so[s] = (0, 0);
                }
                let stop = !*forall;
                let r = match self.mode {
                    Mode::Plain => self.plain(slots, 0, body, stop),
                    Mode::Pruned => {
                        let bits: Vec<(usize, usize)> = (0..self.len)
                            .rev()
                            .flat_map(|p| slots.iter().rev().map(move |&s| (s, p)))
                            .collect();
                        self.pruned(&bits, 0, body, stop)
                    }
                };
                for (&s, v) in slots.iter().zip(saved) {
                    self.so[s] = v;
                }
                self.memo[*memo].insert(key, r);
                r
            }
        }
    }

    /// `stop` is the value that decides the quantifier: true for ∃, false for ∀.
    fn plain(&mut self, slots: &[usize], i: usize, body: &Node, stop: bool) -> Option<bool> {
        if i == slots.len() {
            return self.eval(body);
        }
        let mut unknown = false;
        for mask in 0..=self.full {
            self.so[slots[i]] = (self.full, mask);
            match self.plain(slots, i + 1, body, stop) {
                Some(v) if v == stop => return Some(stop),
                None => unknown = true,
                _ => {}
            }
        }
        (!unknown).then_some(!stop)
    }

    fn pruned(&mut self, bits: &[(usize, usize)], i: usize, body: &Node, stop: bool) -> Option<bool> {
        let now = self.eval(body);
        if now.is_some() || i == bits.len() {
            return now;
        }
        let (s, p) = bits[i];
        let bit = 1u64 << p;
        let mut unknown = false;
        for value in [false, true] {
            let (k, v) = self.so[s];
            self.so[s] = (k | bit, if value { v | bit } else { v & !bit });
            let r = self.pruned(bits, i + 1, body, stop);
            let (k, v) = self.so[s];
            self.so[s] = (k & !bit, v & !bit);
            match r {
                Some(v) if v == stop => return Some(stop),
                None => unknown = true,
                _ => {}
            }
        }
        (!unknown).then_some(!stop)
    }
}
