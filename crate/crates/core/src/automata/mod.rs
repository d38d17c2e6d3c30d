//! Nondeterministic and deterministic automata derived from the AFW.

mod dfa;
mod dot;
mod nfa;
pub mod tree;

use thiserror::Error;

use crate::facts::FactsError;
use crate::formula::Pos;

pub use dfa::{bounded_difference, distinguishing_trace, nfa_to_dfa, Dfa, DEFAULT_STATE_CAP};
pub use dot::{dfa_from_dot, parse_dot, DotEdge, DotGraph, DotNode};
pub use nfa::{afw_to_nfa, Nfa};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomataError {
    #[error("automaton exceeds the state limit of {limit}")]
    StateLimit { limit: usize },
    #[error("DOT error at {pos}: {message}")]
    Dot { pos: Pos, message: String },
    #[error(transparent)]
    Facts(#[from] FactsError),
}
