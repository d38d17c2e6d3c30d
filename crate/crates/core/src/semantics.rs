//! Direct evaluation over total traces: the reference oracle.
//!
//! Truth values are computed for all positions at once. A path denotes a
//! relation on `[0, len)`, stored as a boolean matrix; stars are closed
//! by fixpoint iteration.

use std::collections::{BTreeSet, HashMap};

use crate::formula::{desugar, is_core, Formula, PathExpr};
use crate::trace::{Trace, TraceError};

/// The pairs `(k, i)` related by a path on one trace.
#[derive(Clone, PartialEq, Eq)]
pub struct AccessRelation {
    n: usize,
    bits: Vec<bool>,
}

impl AccessRelation {
    fn empty(n: usize) -> AccessRelation {
        AccessRelation {
            n,
            bits: vec![false; n * n],
        }
    }

    fn identity_on(n: usize, keep: impl Fn(usize) -> bool) -> AccessRelation {
        let mut r = AccessRelation::empty(n);
        for k in (0..n).filter(|&k| keep(k)) {
            r.set(k, k);
        }
        r
    }

    fn set(&mut self, k: usize, i: usize) {
        self.bits[k * self.n + i] = true;
    }

    pub fn contains(&self, k: usize, i: usize) -> bool {
        k < self.n && i < self.n && self.bits[k * self.n + i]
    }

    pub fn pairs(&self) -> BTreeSet<(usize, usize)> {
        (0..self.n)
            .flat_map(|k| (0..self.n).map(move |i| (k, i)))
            .filter(|&(k, i)| self.contains(k, i))
            .collect()
    }

    fn union(&self, other: &AccessRelation) -> AccessRelation {
        AccessRelation {
            n: self.n,
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| *a || *b).collect(),
        }
    }

    fn compose(&self, other: &AccessRelation) -> AccessRelation {
        let n = self.n;
        let mut r = AccessRelation::empty(n);
        for k in 0..n {
            for j in (0..n).filter(|&j| self.contains(k, j)) {
                for i in (0..n).filter(|&i| other.contains(j, i)) {
                    r.set(k, i);
                }
            }
        }
        r
    }
}

impl std::fmt::Debug for AccessRelation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.pairs()).finish()
    }
}

/// Evaluation context for one trace, with optional caching of subterm results.
pub struct Evaluator<'t> {
    trace: &'t Trace,
    memo: bool,
    truths: HashMap<usize, Vec<bool>>,
    rels: HashMap<usize, AccessRelation>,
}

impl<'t> Evaluator<'t> {
    pub fn new(trace: &'t Trace) -> Evaluator<'t> {
        Evaluator::with_memo(trace, true)
    }

    pub fn with_memo(trace: &'t Trace, memo: bool) -> Evaluator<'t> {
        Evaluator {
            trace,
            memo,
            truths: HashMap::new(),
            rels: HashMap::new(),
        }
    }

    /// Truth of a core formula at every position.
    ///
    /// Caches are keyed by node address, so they are only valid while the
    /// formula passed in stays alive; callers keep one evaluator per tree.
    pub fn truth(&mut self, f: &Formula) -> Vec<bool> {
        let key = f as *const Formula as usize;
        if self.memo {
            if let Some(v) = self.truths.get(&key) {
                return v.clone();
            }
        }
        let n = self.trace.len();
        let v = match f {
            Formula::True => vec![true; n],
            Formula::False => vec![false; n],
            Formula::Prop(a) => (0..n).map(|k| self.trace.holds(k, a)).collect(),
            Formula::Neg(g) => self.truth(g).into_iter().map(|b| !b).collect(),
            Formula::Diamond(p, g) => {
                let r = self.rel(p);
                let g = self.truth(g);
                (0..n).map(|k| (0..n).any(|i| r.contains(k, i) && g[i])).collect()
            }
            Formula::Box(p, g) => {
                let r = self.rel(p);
                let g = self.truth(g);
                (0..n).map(|k| (0..n).all(|i| !r.contains(k, i) || g[i])).collect()
            }
            other => panic!("evaluator expects core formulas, got {other}"),
        };
        if self.memo {
            self.truths.insert(key, v.clone());
        }
        v
    }

    pub fn rel(&mut self, p: &PathExpr) -> AccessRelation {
        let key = p as *const PathExpr as usize;
        if self.memo {
            if let Some(r) = self.rels.get(&key) {
                return r.clone();
            }
        }
        let n = self.trace.len();
        let r = match p {
            PathExpr::Step => {
                let mut r = AccessRelation::empty(n);
                for k in 1..n {
                    r.set(k - 1, k);
                }
                r
            }
            PathExpr::Test(f) => {
                let t = self.truth(f);
                AccessRelation::identity_on(n, |k| t[k])
            }
            PathExpr::Choice(l, r) => {
                let l = self.rel(l);
                l.union(&self.rel(r))
            }
            PathExpr::Seq(l, r) => {
                let l = self.rel(l);
                l.compose(&self.rel(r))
            }
            PathExpr::Star(q) => {
                let step = self.rel(q);
                let mut acc = AccessRelation::identity_on(n, |_| true);
                loop {
                    let next = acc.union(&acc.compose(&step));
                    if next == acc {
                        break acc;
                    }
                    acc = next;
                }
            }
            PathExpr::Prop(_) => panic!("evaluator expects core paths, got {p}"),
        };
        if self.memo {
            self.rels.insert(key, r.clone());
        }
        r
    }
}

fn core(f: &Formula) -> std::borrow::Cow<'_, Formula> {
    if is_core(f) {
        std::borrow::Cow::Borrowed(f)
    } else {
        std::borrow::Cow::Owned(desugar(f))
    }
}

/// Truth of `f` at position `k`; sugar is desugared first.
pub fn sat(trace: &Trace, k: usize, f: &Formula) -> Result<bool, TraceError> {
    if k >= trace.len() {
        return Err(TraceError::OutOfRange {
            index: k,
            len: trace.len(),
        });
    }
    Ok(truth_all(trace, f)[k])
}

/// Truth of `f` at every position.
pub fn truth_all(trace: &Trace, f: &Formula) -> Vec<bool> {
    let f = core(f);
    Evaluator::new(trace).truth(&f)
}

/// `sat` at position 0.
pub fn models(trace: &Trace, f: &Formula) -> bool {
    truth_all(trace, f)[0]
}

/// Relation denoted by a path; sugar is desugared first.
pub fn rel(p: &PathExpr, trace: &Trace) -> AccessRelation {
    let p = crate::formula::desugar_path(p);
    Evaluator::new(trace).rel(&p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::running_example;
    use crate::trace::{alphabet, enumerate_traces};

    fn pairs(v: &[(usize, usize)]) -> BTreeSet<(usize, usize)> {
        v.iter().copied().collect()
    }

    #[test]
    fn step_and_star_relations() {
        let t3 = Trace::from_names(&[&[], &[], &[]]);
        assert_eq!(rel(&PathExpr::Step, &t3).pairs(), pairs(&[(0, 1), (1, 2)]));
        let t2 = Trace::from_names(&[&[], &[]]);
        assert_eq!(
            rel(&PathExpr::star(PathExpr::Step), &t2).pairs(),
            pairs(&[(0, 0), (0, 1), (1, 1)])
        );
    }

    #[test]
    fn guarded_star_relation() {
        let t = Trace::from_names(&[&["b"], &[]]);
        let p = PathExpr::star(PathExpr::seq(PathExpr::test(Formula::atom("b")), PathExpr::Step));
        assert_eq!(rel(&p, &t).pairs(), pairs(&[(0, 0), (1, 1), (0, 1)]));
    }

    #[test]
    fn running_example_traces() {
        let accepted = Trace::from_names(&[&["b"], &["a", "b"], &["b"]]);
        let rejected = Trace::from_names(&[&["b"], &["a"], &["b"]]);
        assert!(models(&accepted, &running_example()));
        assert!(!models(&rejected, &running_example()));
        assert_eq!(sat(&accepted, 3, &Formula::True), Err(TraceError::OutOfRange { index: 3, len: 3 }));
    }

    #[test]
    fn six_short_models_of_running_example() {
        let count = enumerate_traces(&alphabet(&["a", "b"]), 3)
            .unwrap()
            .filter(|t| models(t, &running_example()))
            .count();
        assert_eq!(count, 6);
    }

    #[test]
    fn memo_is_transparent() {
        let f = desugar(&Formula::until(Formula::atom("a"), Formula::always(Formula::atom("b"))));
        for t in enumerate_traces(&alphabet(&["a", "b"]), 3).unwrap() {
            let on = Evaluator::with_memo(&t, true).truth(&f);
            let off = Evaluator::with_memo(&t, false).truth(&f);
            assert_eq!(on, off);
        }
    }
}
