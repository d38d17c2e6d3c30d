//! Monadic second-order logic of linear order over finite traces.
//!
//! Formulas carry first-order variables (positions) and second-order
//! variables (sets of positions). Atom predicates are second-order
//! variables fixed by the trace. Macro variants (`succ`, `first`, `bound`,
//! ...) expand into the core connectives via [`Mso::expand`].

mod eval;
mod mona;
mod translate;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

use crate::atom::Atom;

pub use eval::{eval_mso, eval_mso_with, Assignment, Mode, PLAIN_MAX_LENGTH, PLAIN_MAX_OPEN_SO};
pub use mona::{emit_mona, MONA_PREFIX};
pub use translate::{mso_enc, st_m, st_p, standard_translation, closure_encoding, without_nullable_stars};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FoVar(pub String);

impl FoVar {
    pub fn new(name: &str) -> FoVar {
        FoVar(name.to_string())
    }
}

impl fmt::Display for FoVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A second-order variable: an atom predicate or a quantifiable set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SoVar {
    Pred(Atom),
    Var(String),
}

impl SoVar {
    pub fn name(&self) -> &str {
        match self {
            SoVar::Pred(a) => a.name(),
            SoVar::Var(s) => s,
        }
    }
}

impl fmt::Display for SoVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Mso {
    True,
    False,
    /// `X(x)`
    Member(SoVar, FoVar),
    Less(FoVar, FoVar),
    Not(Box<Mso>),
    And(Box<Mso>, Box<Mso>),
    Or(Box<Mso>, Box<Mso>),
    Implies(Box<Mso>, Box<Mso>),
    Iff(Box<Mso>, Box<Mso>),
    ExistsFo(FoVar, Box<Mso>),
    ForallFo(FoVar, Box<Mso>),
    ExistsSo(SoVar, Box<Mso>),
    ForallSo(SoVar, Box<Mso>),
    Eq(FoVar, FoVar),
    Leq(FoVar, FoVar),
    Succ(FoVar, FoVar),
    /// `y = x+1`, fields in that order.
    Next(FoVar, FoVar),
    First(FoVar),
    Last(FoVar),
    /// Every member of `X` lies between `w` and `v`.
    Bound(SoVar, FoVar, FoVar),
    /// `x` and `y` are consecutive members of `X`.
    SuccIn(SoVar, FoVar, FoVar),
    Subset(SoVar, SoVar),
    SoEq(SoVar, SoVar),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MsoError {
    #[error("free variable `{0}` is not assigned")]
    Unassigned(String),
    #[error("position {pos} of `{var}` is outside a trace of length {len}")]
    OutOfRange { var: String, pos: usize, len: usize },
    #[error("resource limit: {0}")]
    ResourceLimit(String),
}

impl Mso {
    pub fn not(a: Mso) -> Mso {
        Mso::Not(Box::new(a))
    }

    pub fn and(a: Mso, b: Mso) -> Mso {
        Mso::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Mso, b: Mso) -> Mso {
        Mso::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Mso, b: Mso) -> Mso {
        Mso::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Mso, b: Mso) -> Mso {
        Mso::Iff(Box::new(a), Box::new(b))
    }

    pub fn exists_fo(x: FoVar, body: Mso) -> Mso {
        Mso::ExistsFo(x, Box::new(body))
    }

    pub fn forall_fo(x: FoVar, body: Mso) -> Mso {
        Mso::ForallFo(x, Box::new(body))
    }

    pub fn exists_so(x: SoVar, body: Mso) -> Mso {
        Mso::ExistsSo(x, Box::new(body))
    }

    pub fn forall_so(x: SoVar, body: Mso) -> Mso {
        Mso::ForallSo(x, Box::new(body))
    }

    pub fn member(x: SoVar, v: &FoVar) -> Mso {
        Mso::Member(x, v.clone())
    }

    /// Right-nested conjunction; `True` when empty.
    pub fn and_all(parts: impl IntoIterator<Item = Mso>) -> Mso {
        let mut parts: Vec<Mso> = parts.into_iter().collect();
        let Some(mut acc) = parts.pop() else {
            return Mso::True;
        };
        while let Some(p) = parts.pop() {
            acc = Mso::and(p, acc);
        }
        acc
    }

    pub fn size(&self) -> usize {
        match self {
            Mso::Not(a) | Mso::ExistsFo(_, a) | Mso::ForallFo(_, a) | Mso::ExistsSo(_, a) | Mso::ForallSo(_, a) => {
                1 + a.size()
            }
            Mso::And(a, b) | Mso::Or(a, b) | Mso::Implies(a, b) | Mso::Iff(a, b) => 1 + a.size() + b.size(),
            _ => 1,
        }
    }

    /// Replaces every macro by its definition over `<`, membership, the
    /// connectives and quantifiers. Introduced variables avoid every name
    /// already present in the formula.
    pub fn expand(&self) -> Mso {
        let mut names = HashSet::new();
        self.collect_names(&mut names);
        let mut gen = VarGen::avoiding(names);
        self.expand_with(&mut gen)
    }

    fn expand_with(&self, g: &mut VarGen) -> Mso {
        use Mso as M;
        let lt = |a: &FoVar, b: &FoVar| M::Less(a.clone(), b.clone());
        let leq = |a: &FoVar, b: &FoVar| M::not(M::Less(b.clone(), a.clone()));
        match self {
            M::True | M::False | M::Member(..) | M::Less(..) => self.clone(),
            M::Not(a) => M::not(a.expand_with(g)),
            M::And(a, b) => M::and(a.expand_with(g), b.expand_with(g)),
            M::Or(a, b) => M::or(a.expand_with(g), b.expand_with(g)),
            M::Implies(a, b) => M::implies(a.expand_with(g), b.expand_with(g)),
            M::Iff(a, b) => M::iff(a.expand_with(g), b.expand_with(g)),
            M::ExistsFo(x, a) => M::exists_fo(x.clone(), a.expand_with(g)),
            M::ForallFo(x, a) => M::forall_fo(x.clone(), a.expand_with(g)),
            M::ExistsSo(x, a) => M::exists_so(x.clone(), a.expand_with(g)),
            M::ForallSo(x, a) => M::forall_so(x.clone(), a.expand_with(g)),
            M::Leq(x, y) => leq(x, y),
            M::Eq(x, y) => M::and(leq(x, y), leq(y, x)),
            M::Succ(x, y) => {
                let z = g.fo("z");
                M::and(lt(x, y), M::not(M::exists_fo(z.clone(), M::and(lt(x, &z), lt(&z, y)))))
            }
            M::Next(y, x) => M::Succ(x.clone(), y.clone()).expand_with(g),
            M::First(x) => {
                let z = g.fo("z");
                M::not(M::exists_fo(z.clone(), lt(&z, x)))
            }
            M::Last(x) => {
                let z = g.fo("z");
                M::not(M::exists_fo(z.clone(), lt(x, &z)))
            }
            M::Bound(s, w, v) => {
                let r = g.fo("r");
                M::forall_fo(
                    r.clone(),
                    M::implies(M::member(s.clone(), &r), M::and(leq(w, &r), leq(&r, v))),
                )
            }
            M::SuccIn(s, x, y) => {
                let z = g.fo("z");
                M::and_all([
                    lt(x, y),
                    M::member(s.clone(), x),
                    M::member(s.clone(), y),
                    M::not(M::exists_fo(
                        z.clone(),
                        M::and_all([lt(x, &z), lt(&z, y), M::member(s.clone(), &z)]),
                    )),
                ])
            }
            M::Subset(a, b) => {
                let z = g.fo("z");
                M::forall_fo(z.clone(), M::implies(M::member(a.clone(), &z), M::member(b.clone(), &z)))
            }
            M::SoEq(a, b) => M::and(
                M::Subset(a.clone(), b.clone()).expand_with(g),
                M::Subset(b.clone(), a.clone()).expand_with(g),
            ),
        }
    }

    fn collect_names(&self, out: &mut HashSet<String>) {
        self.visit_vars(&mut |name, _| {
            out.insert(name.to_string());
        });
    }

    /// Calls `f(name, second_order)` for every variable occurrence, bound or free.
    fn visit_vars(&self, f: &mut impl FnMut(&str, bool)) {
        use Mso as M;
        match self {
            M::True | M::False => {}
            M::Member(s, x) => {
                f(s.name(), true);
                f(&x.0, false);
            }
            M::Less(x, y) | M::Eq(x, y) | M::Leq(x, y) | M::Succ(x, y) | M::Next(x, y) => {
                f(&x.0, false);
                f(&y.0, false);
            }
            M::First(x) | M::Last(x) => f(&x.0, false),
            M::Bound(s, x, y) | M::SuccIn(s, x, y) => {
                f(s.name(), true);
                f(&x.0, false);
                f(&y.0, false);
            }
            M::Subset(a, b) | M::SoEq(a, b) => {
                f(a.name(), true);
                f(b.name(), true);
            }
            M::Not(a) => a.visit_vars(f),
            M::And(a, b) | M::Or(a, b) | M::Implies(a, b) | M::Iff(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            M::ExistsFo(x, a) | M::ForallFo(x, a) => {
                f(&x.0, false);
                a.visit_vars(f);
            }
            M::ExistsSo(x, a) | M::ForallSo(x, a) => {
                f(x.name(), true);
                a.visit_vars(f);
            }
        }
    }

    /// Free first-order and second-order variables (atom predicates included).
    pub fn free_vars(&self) -> (BTreeSet<FoVar>, BTreeSet<SoVar>) {
        let mut fo = BTreeSet::new();
        let mut so = BTreeSet::new();
        self.free_into(&mut Vec::new(), &mut Vec::new(), &mut fo, &mut so);
        (fo, so)
    }

    fn free_into(
        &self,
        bfo: &mut Vec<FoVar>,
        bso: &mut Vec<SoVar>,
        fo: &mut BTreeSet<FoVar>,
        so: &mut BTreeSet<SoVar>,
    ) {
        use Mso as M;
        let mut see_fo = |x: &FoVar, bfo: &Vec<FoVar>| {
            if !bfo.contains(x) {
                fo.insert(x.clone());
            }
        };
        let mut see_so = |x: &SoVar, bso: &Vec<SoVar>| {
            if !bso.contains(x) {
                so.insert(x.clone());
            }
        };
        match self {
            M::True | M::False => {}
            M::Member(s, x) => {
                see_so(s, bso);
                see_fo(x, bfo);
            }
            M::Less(x, y) | M::Eq(x, y) | M::Leq(x, y) | M::Succ(x, y) | M::Next(x, y) => {
                see_fo(x, bfo);
                see_fo(y, bfo);
            }
            M::First(x) | M::Last(x) => see_fo(x, bfo),
            M::Bound(s, x, y) | M::SuccIn(s, x, y) => {
                see_so(s, bso);
                see_fo(x, bfo);
                see_fo(y, bfo);
            }
            M::Subset(a, b) | M::SoEq(a, b) => {
                see_so(a, bso);
                see_so(b, bso);
            }
            M::Not(a) => a.free_into(bfo, bso, fo, so),
            M::And(a, b) | M::Or(a, b) | M::Implies(a, b) | M::Iff(a, b) => {
                a.free_into(bfo, bso, fo, so);
                b.free_into(bfo, bso, fo, so);
            }
            M::ExistsFo(x, a) | M::ForallFo(x, a) => {
                bfo.push(x.clone());
                a.free_into(bfo, bso, fo, so);
                bfo.pop();
            }
            M::ExistsSo(x, a) | M::ForallSo(x, a) => {
                bso.push(x.clone());
                a.free_into(bfo, bso, fo, so);
                bso.pop();
            }
        }
    }

    /// Names bound by more than one quantifier, or bound while also free.
    pub fn rebound_names(&self) -> BTreeSet<String> {
        let mut bound: BTreeMap<String, usize> = BTreeMap::new();
        self.count_binders(&mut bound);
        let (fo, so) = self.free_vars();
        let free: BTreeSet<String> =
            fo.iter().map(|x| x.0.clone()).chain(so.iter().map(|s| s.name().to_string())).collect();
        bound
            .into_iter()
            .filter(|(n, c)| *c > 1 || free.contains(n))
            .map(|(n, _)| n)
            .collect()
    }

    fn count_binders(&self, out: &mut BTreeMap<String, usize>) {
        use Mso as M;
        match self {
            M::Not(a) => a.count_binders(out),
            M::And(a, b) | M::Or(a, b) | M::Implies(a, b) | M::Iff(a, b) => {
                a.count_binders(out);
                b.count_binders(out);
            }
            M::ExistsFo(x, a) | M::ForallFo(x, a) => {
                *out.entry(x.0.clone()).or_default() += 1;
                a.count_binders(out);
            }
            M::ExistsSo(x, a) | M::ForallSo(x, a) => {
                *out.entry(x.name().to_string()).or_default() += 1;
                a.count_binders(out);
            }
            _ => {}
        }
    }

    /// Equality up to consistent renaming of bound variables.
    pub fn alpha_eq(&self, other: &Mso) -> bool {
        alpha(self, other, &mut Vec::new(), &mut Vec::new())
    }
}

fn alpha(a: &Mso, b: &Mso, fo: &mut Vec<(FoVar, FoVar)>, so: &mut Vec<(SoVar, SoVar)>) -> bool {
    use Mso as M;
    let f = |x: &FoVar, y: &FoVar, fo: &Vec<(FoVar, FoVar)>| match fo.iter().rev().find(|(l, r)| l == x || r == y) {
        Some((l, r)) => l == x && r == y,
        None => x == y,
    };
    let s = |x: &SoVar, y: &SoVar, so: &Vec<(SoVar, SoVar)>| match so.iter().rev().find(|(l, r)| l == x || r == y) {
        Some((l, r)) => l == x && r == y,
        None => x == y,
    };
    match (a, b) {
        (M::True, M::True) | (M::False, M::False) => true,
        (M::Member(x, v), M::Member(y, w)) => s(x, y, so) && f(v, w, fo),
        (M::Less(a1, a2), M::Less(b1, b2))
        | (M::Eq(a1, a2), M::Eq(b1, b2))
        | (M::Leq(a1, a2), M::Leq(b1, b2))
        | (M::Succ(a1, a2), M::Succ(b1, b2))
        | (M::Next(a1, a2), M::Next(b1, b2)) => f(a1, b1, fo) && f(a2, b2, fo),
        (M::First(x), M::First(y)) | (M::Last(x), M::Last(y)) => f(x, y, fo),
        (M::Bound(x, a1, a2), M::Bound(y, b1, b2)) | (M::SuccIn(x, a1, a2), M::SuccIn(y, b1, b2)) => {
            s(x, y, so) && f(a1, b1, fo) && f(a2, b2, fo)
        }
        (M::Subset(a1, a2), M::Subset(b1, b2)) | (M::SoEq(a1, a2), M::SoEq(b1, b2)) => {
            s(a1, b1, so) && s(a2, b2, so)
        }
        (M::Not(x), M::Not(y)) => alpha(x, y, fo, so),
        (M::And(a1, a2), M::And(b1, b2))
        | (M::Or(a1, a2), M::Or(b1, b2))
        | (M::Implies(a1, a2), M::Implies(b1, b2))
        | (M::Iff(a1, a2), M::Iff(b1, b2)) => alpha(a1, b1, fo, so) && alpha(a2, b2, fo, so),
        (M::ExistsFo(x, p), M::ExistsFo(y, q)) | (M::ForallFo(x, p), M::ForallFo(y, q)) => {
            fo.push((x.clone(), y.clone()));
            let r = alpha(p, q, fo, so);
            fo.pop();
            r
        }
        (M::ExistsSo(x, p), M::ExistsSo(y, q)) | (M::ForallSo(x, p), M::ForallSo(y, q)) => {
            so.push((x.clone(), y.clone()));
            let r = alpha(p, q, fo, so);
            so.pop();
            r
        }
        _ => false,
    }
}

impl fmt::Display for Mso {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Mso as M;
        match self {
            M::True => f.write_str("⊤"),
            M::False => f.write_str("⊥"),
            M::Member(s, x) => write!(f, "{s}({x})"),
            M::Less(x, y) => write!(f, "{x} < {y}"),
            M::Not(a) => write!(f, "¬({a})"),
            M::And(a, b) => write!(f, "({a} ∧ {b})"),
            M::Or(a, b) => write!(f, "({a} ∨ {b})"),
            M::Implies(a, b) => write!(f, "({a} → {b})"),
            M::Iff(a, b) => write!(f, "({a} ↔ {b})"),
            M::ExistsFo(x, a) => write!(f, "∃{x} ({a})"),
            M::ForallFo(x, a) => write!(f, "∀{x} ({a})"),
            M::ExistsSo(x, a) => write!(f, "∃{x} ({a})"),
            M::ForallSo(x, a) => write!(f, "∀{x} ({a})"),
            M::Eq(x, y) => write!(f, "{x} = {y}"),
            M::Leq(x, y) => write!(f, "{x} ≤ {y}"),
            M::Succ(x, y) => write!(f, "succ({x},{y})"),
            M::Next(y, x) => write!(f, "{y} = {x}+1"),
            M::First(x) => write!(f, "first({x})"),
            M::Last(x) => write!(f, "last({x})"),
            M::Bound(s, w, v) => write!(f, "bound({s},{w},{v})"),
            M::SuccIn(s, x, y) => write!(f, "succ_{s}({x},{y})"),
            M::Subset(a, b) => write!(f, "{a} ⊆ {b}"),
            M::SoEq(a, b) => write!(f, "{a} = {b}"),
        }
    }
}

/// Fresh variable names, one counter per prefix.
#[derive(Debug, Clone, Default)]
pub struct VarGen {
    counters: BTreeMap<String, usize>,
    used: HashSet<String>,
}

impl VarGen {
    pub fn new() -> VarGen {
        VarGen::default()
    }

    /// A generator that never returns any of `names`.
    pub fn avoiding(names: impl IntoIterator<Item = String>) -> VarGen {
        VarGen {
            counters: BTreeMap::new(),
            used: names.into_iter().collect(),
        }
    }

    pub fn reserve(&mut self, name: &str) {
        self.used.insert(name.to_string());
    }

    fn fresh(&mut self, prefix: &str) -> String {
        let n = self.counters.entry(prefix.to_string()).or_default();
        loop {
            let name = format!("{prefix}{n}");
            *n += 1;
            if self.used.insert(name.clone()) {
                return name;
            }
        }
    }

    pub fn fo(&mut self, prefix: &str) -> FoVar {
        FoVar(self.fresh(prefix))
    }

    pub fn so(&mut self, prefix: &str) -> SoVar {
        SoVar::Var(self.fresh(prefix))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> FoVar {
        FoVar::new(n)
    }

    #[test]
    fn vargen_never_repeats() {
        let mut g = VarGen::avoiding(["v1".to_string()]);
        let names: Vec<String> = (0..4).map(|_| g.fo("v").0).collect();
        assert_eq!(names, vec!["v0", "v2", "v3", "v4"]);
    }

    #[test]
    fn expansion_uses_fresh_names() {
        let f = Mso::and(Mso::Succ(v("z0"), v("z1")), Mso::First(v("z0")));
        let e = f.expand();
        assert!(e.rebound_names().is_empty(), "{e}");
        let (fo, so) = e.free_vars();
        assert_eq!(fo, BTreeSet::from([v("z0"), v("z1")]));
        assert!(so.is_empty());
    }

    #[test]
    fn alpha_equivalence_respects_binding() {
        let x = SoVar::Var("X".into());
        let y = SoVar::Var("Y".into());
        let a = Mso::exists_so(x.clone(), Mso::member(x.clone(), &v("t")));
        let b = Mso::exists_so(y.clone(), Mso::member(y, &v("t")));
        let c = Mso::exists_so(x, Mso::member(SoVar::Var("Z".into()), &v("t")));
        assert!(a.alpha_eq(&b));
        assert!(!a.alpha_eq(&c));
    }
}
