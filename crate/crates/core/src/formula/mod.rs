//! Dynamic formulas and path expressions.
//!
//! The two types are mutually recursive: diamonds and boxes carry a path,
//! and tests embed a formula back into a path. Children are shared through
//! `Arc`, so cloning a formula is cheap and values can cross threads.

mod canonical;
mod closure;
mod theory;
mod transform;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::atom::Atom;

pub use canonical::{parse_canonical, print_canonical};
pub use closure::{closure, positive_closure};
pub use theory::{parse_theory, print_theory};
pub use transform::{desugar, desugar_path, is_core, is_nnf, is_test_only, nnf, nnf_path};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Prop(Atom),
    Neg(Arc<Formula>),
    Diamond(Arc<PathExpr>, Arc<Formula>),
    Box(Arc<PathExpr>, Arc<Formula>),
    And(Arc<Formula>, Arc<Formula>),
    Or(Arc<Formula>, Arc<Formula>),
    Implies(Arc<Formula>, Arc<Formula>),
    Next(Arc<Formula>),
    WeakNext(Arc<Formula>),
    Eventually(Arc<Formula>),
    Always(Arc<Formula>),
    Final,
    Until(Arc<Formula>, Arc<Formula>),
    Release(Arc<Formula>, Arc<Formula>),
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PathExpr {
    Step,
    Test(Arc<Formula>),
    Choice(Arc<PathExpr>, Arc<PathExpr>),
    Seq(Arc<PathExpr>, Arc<PathExpr>),
    Star(Arc<PathExpr>),
    /// A formula used as a path, standing for `φ? ; step`.
    Prop(Arc<Formula>),
}

impl Formula {
    pub fn prop(atom: Atom) -> Formula {
        Formula::Prop(atom)
    }

    /// Atom by name; panics on malformed names. Meant for tests and fixtures.
    pub fn atom(name: &str) -> Formula {
        Formula::Prop(Atom::new(name).expect("valid atom name"))
    }

    pub fn neg(f: Formula) -> Formula {
        Formula::Neg(Arc::new(f))
    }

    pub fn diamond(p: PathExpr, f: Formula) -> Formula {
        Formula::Diamond(Arc::new(p), Arc::new(f))
    }

    pub fn boxed(p: PathExpr, f: Formula) -> Formula {
        Formula::Box(Arc::new(p), Arc::new(f))
    }

    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::And(Arc::new(l), Arc::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::Or(Arc::new(l), Arc::new(r))
    }

    pub fn implies(l: Formula, r: Formula) -> Formula {
        Formula::Implies(Arc::new(l), Arc::new(r))
    }

    pub fn next(f: Formula) -> Formula {
        Formula::Next(Arc::new(f))
    }

    pub fn weak_next(f: Formula) -> Formula {
        Formula::WeakNext(Arc::new(f))
    }

    pub fn eventually(f: Formula) -> Formula {
        Formula::Eventually(Arc::new(f))
    }

    pub fn always(f: Formula) -> Formula {
        Formula::Always(Arc::new(f))
    }

    pub fn until(l: Formula, r: Formula) -> Formula {
        Formula::Until(Arc::new(l), Arc::new(r))
    }

    pub fn release(l: Formula, r: Formula) -> Formula {
        Formula::Release(Arc::new(l), Arc::new(r))
    }

    /// Number of formula and path nodes.
    pub fn size(&self) -> usize {
        use Formula as F;
        match self {
            F::True | F::False | F::Prop(_) | F::Final => 1,
            F::Neg(f)
            | F::Next(f)
            | F::WeakNext(f)
            | F::Eventually(f)
            | F::Always(f) => 1 + f.size(),
            F::Diamond(p, f) | F::Box(p, f) => 1 + p.size() + f.size(),
            F::And(l, r) | F::Or(l, r) | F::Implies(l, r) | F::Until(l, r) | F::Release(l, r) => {
                1 + l.size() + r.size()
            }
        }
    }

    /// Atoms occurring anywhere in the formula.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        use Formula as F;
        match self {
            F::True | F::False | F::Final => {}
            F::Prop(a) => {
                out.insert(a.clone());
            }
            F::Neg(f)
            | F::Next(f)
            | F::WeakNext(f)
            | F::Eventually(f)
            | F::Always(f) => f.collect_atoms(out),
            F::Diamond(p, f) | F::Box(p, f) => {
                p.collect_atoms(out);
                f.collect_atoms(out);
            }
            F::And(l, r) | F::Or(l, r) | F::Implies(l, r) | F::Until(l, r) | F::Release(l, r) => {
                l.collect_atoms(out);
                r.collect_atoms(out);
            }
        }
    }

    /// True for formulas without temporal or dynamic operators.
    pub fn is_propositional(&self) -> bool {
        use Formula as F;
        match self {
            F::True | F::False | F::Prop(_) => true,
            F::Neg(f) => f.is_propositional(),
            F::And(l, r) | F::Or(l, r) | F::Implies(l, r) => {
                l.is_propositional() && r.is_propositional()
            }
            _ => false,
        }
    }
}

impl PathExpr {
    pub fn test(f: Formula) -> PathExpr {
        PathExpr::Test(Arc::new(f))
    }

    pub fn choice(l: PathExpr, r: PathExpr) -> PathExpr {
        PathExpr::Choice(Arc::new(l), Arc::new(r))
    }

    pub fn seq(l: PathExpr, r: PathExpr) -> PathExpr {
        PathExpr::Seq(Arc::new(l), Arc::new(r))
    }

    pub fn star(p: PathExpr) -> PathExpr {
        PathExpr::Star(Arc::new(p))
    }

    pub fn prop(f: Formula) -> PathExpr {
        PathExpr::Prop(Arc::new(f))
    }

    pub fn size(&self) -> usize {
        match self {
            PathExpr::Step => 1,
            PathExpr::Test(f) | PathExpr::Prop(f) => 1 + f.size(),
            PathExpr::Choice(l, r) | PathExpr::Seq(l, r) => 1 + l.size() + r.size(),
            PathExpr::Star(p) => 1 + p.size(),
        }
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        match self {
            PathExpr::Step => {}
            PathExpr::Test(f) | PathExpr::Prop(f) => f.collect_atoms(out),
            PathExpr::Choice(l, r) | PathExpr::Seq(l, r) => {
                l.collect_atoms(out);
                r.collect_atoms(out);
            }
            PathExpr::Star(p) => p.collect_atoms(out),
        }
    }
}

/// Textual syntax selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Dialect {
    /// The native syntax: `<rho> phi`, `[rho] phi`, `tt`, `ff`, `X`, `U`, ...
    #[default]
    Canonical,
    /// The clingo theory-term syntax: `&true`, `&t`, `~`, `?`, `*`, `;;`, `.>?`, `.>*`.
    TheoryGrammar,
}

pub fn parse(text: &str, dialect: Dialect) -> Result<Formula, ParseError> {
    match dialect {
        Dialect::Canonical => parse_canonical(text),
        Dialect::TheoryGrammar => parse_theory(text),
    }
}

pub fn print(f: &Formula, dialect: Dialect) -> String {
    match dialect {
        Dialect::Canonical => print_canonical(f),
        Dialect::TheoryGrammar => print_theory(f),
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_canonical(self))
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_canonical(self))
    }
}

impl fmt::Display for PathExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&canonical::print_path(self))
    }
}

impl fmt::Debug for PathExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&canonical::print_path(self))
    }
}

/// 1-based source position.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{pos}: unexpected character `{found}`")]
    Lex { pos: Pos, found: char },
    #[error("{pos}: unexpected {found}, expected one of: {}", expected.join(", "))]
    Unexpected {
        pos: Pos,
        found: String,
        expected: Vec<String>,
    },
    #[error("{pos}: `last` is reserved and may not be used as an atom")]
    ReservedAtom { pos: Pos },
    #[error("{pos}: {message}")]
    Misplaced { pos: Pos, message: String },
}

impl ParseError {
    pub fn pos(&self) -> Pos {
        match self {
            ParseError::Lex { pos, .. }
            | ParseError::Unexpected { pos, .. }
            | ParseError::ReservedAtom { pos }
            | ParseError::Misplaced { pos, .. } => *pos,
        }
    }
}

/// The running example `<(([step*] b)?) ; step> a`, i.e. `[]b & X a`.
pub fn running_example() -> Formula {
    Formula::diamond(
        PathExpr::seq(
            PathExpr::test(Formula::boxed(
                PathExpr::star(PathExpr::Step),
                Formula::atom("b"),
            )),
            PathExpr::Step,
        ),
        Formula::atom("a"),
    )
}
