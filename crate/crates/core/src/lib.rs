//! LDLf formulas over finite traces, their automata and MSO encodings.

pub mod afw;
pub mod atom;
pub mod automata;
pub mod corpus;
pub mod facts;
pub mod formula;
pub mod guard;
pub mod mso;
pub mod semantics;
pub mod trace;
pub mod xcheck;

pub use atom::{Atom, AtomError, Symbol};
pub use formula::{Dialect, Formula, ParseError, PathExpr, Pos};
pub use trace::{Letter, Trace, TraceError};
