//! Runs every acceptance engine over enumerated traces and compares.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::afw::{build_afw, Afw};
use crate::atom::Atom;
use crate::automata::{afw_to_nfa, nfa_to_dfa, AutomataError, Dfa, Nfa};
use crate::formula::Formula;
use crate::mso::{closure_encoding, eval_mso, standard_translation, Assignment, Mso, MsoError};
use crate::semantics::sat;
use crate::trace::{enumerate_traces, Trace, TraceError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Engine {
    Direct,
    Afw,
    Nfa,
    Dfa,
    DfaMin,
    MsoSt,
    MsoEnc,
}

impl Engine {
    pub const ALL: [Engine; 7] = [
        Engine::Direct,
        Engine::Afw,
        Engine::Nfa,
        Engine::Dfa,
        Engine::DfaMin,
        Engine::MsoSt,
        Engine::MsoEnc,
    ];
    /// Engines without second-order brute force.
    pub const AUTOMATA: [Engine; 5] = [Engine::Direct, Engine::Afw, Engine::Nfa, Engine::Dfa, Engine::DfaMin];

    pub fn name(self) -> &'static str {
        match self {
            Engine::Direct => "direct",
            Engine::Afw => "afw",
            Engine::Nfa => "nfa",
            Engine::Dfa => "dfa",
            Engine::DfaMin => "dfa-min",
            Engine::MsoSt => "mso-st",
            Engine::MsoEnc => "mso-enc",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Engine, String> {
        Engine::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| format!("unknown engine `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum XcheckError {
    #[error(transparent)]
    Automata(#[from] AutomataError),
    #[error(transparent)]
    Mso(#[from] MsoError),
    #[error(transparent)]
    Trace(#[from] TraceError),
}

/// A formula with the artifacts each requested engine needs.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub formula: Formula,
    pub afw: Option<Afw>,
    pub nfa: Option<Nfa>,
    pub dfa: Option<Dfa>,
    pub dfa_min: Option<Dfa>,
    pub st: Option<Mso>,
    pub enc: Option<Mso>,
}

/// Free variable of the MSO translations.
const TIME: &str = "t";

impl Compiled {
    pub fn new(f: &Formula, engines: &[Engine], state_cap: usize) -> Result<Compiled, XcheckError> {
        let wants = |e: &[Engine]| engines.iter().any(|x| e.contains(x));
        let afw = wants(&[Engine::Afw, Engine::Nfa, Engine::Dfa, Engine::DfaMin]).then(|| build_afw(f));
        let nfa = match &afw {
            Some(a) if wants(&[Engine::Nfa, Engine::Dfa, Engine::DfaMin]) => Some(afw_to_nfa(a)),
            _ => None,
        };
        let dfa = match &nfa {
            Some(n) if wants(&[Engine::Dfa, Engine::DfaMin]) => Some(nfa_to_dfa(n, state_cap)?),
            _ => None,
        };
        let dfa_min = match &dfa {
            Some(d) if wants(&[Engine::DfaMin]) => Some(d.minimize()),
            _ => None,
        };
        Ok(Compiled {
            formula: f.clone(),
            afw,
            nfa,
            dfa,
            dfa_min,
            st: wants(&[Engine::MsoSt]).then(|| standard_translation(TIME, f)),
            enc: wants(&[Engine::MsoEnc]).then(|| closure_encoding(TIME, f)),
        })
    }

    /// Whether `engine` accepts `trace` (truth at the first position).
    pub fn accepts(&self, engine: Engine, trace: &Trace) -> Result<bool, XcheckError> {
        Ok(match engine {
            Engine::Direct => sat(trace, 0, &self.formula)?,
            Engine::Afw => need(&self.afw, engine).accepts(trace),
            Engine::Nfa => need(&self.nfa, engine).accepts(trace),
            Engine::Dfa => need(&self.dfa, engine).accepts(trace),
            Engine::DfaMin => need(&self.dfa_min, engine).accepts(trace),
            Engine::MsoSt => {
                let psi = need(&self.st, engine);
                eval_mso(trace, psi, &Assignment::new().with_fo(TIME, 0))?
            }
            Engine::MsoEnc => {
                let psi = need(&self.enc, engine);
                eval_mso(trace, psi, &Assignment::new().with_fo(TIME, 0))?
            }
        })
    }
}

fn need<T>(artifact: &Option<T>, engine: Engine) -> &T {
    artifact
        .as_ref()
        .unwrap_or_else(|| panic!("engine {engine} was not compiled"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub engines: Vec<Engine>,
    pub traces: usize,
    /// Accepted traces per engine.
    pub accepted: BTreeMap<Engine, usize>,
    pub disagreements: usize,
    /// The first disagreeing trace in enumeration order (shortest first),
    /// with each engine's verdict.
    pub counterexample: Option<(Trace, BTreeMap<Engine, bool>)>,
}

impl Report {
    pub fn unanimous(&self) -> bool {
        self.disagreements == 0
    }
}

/// Compiles `f` and compares `engines` on every trace over `alphabet` of
/// length at most `max_len`.
pub fn xcheck(
    f: &Formula,
    alphabet: &BTreeSet<Atom>,
    max_len: usize,
    engines: &[Engine],
    state_cap: usize,
) -> Result<Report, XcheckError> {
    let compiled = Compiled::new(f, engines, state_cap)?;
    xcheck_compiled(&compiled, alphabet, max_len, engines)
}

pub fn xcheck_compiled(
    c: &Compiled,
    alphabet: &BTreeSet<Atom>,
    max_len: usize,
    engines: &[Engine],
) -> Result<Report, XcheckError> {
    xcheck_traces(c, enumerate_traces(alphabet, max_len)?, engines)
}

/// Compares `engines` on the given traces; the counterexample is the first
/// disagreeing trace in iteration order.
pub fn xcheck_traces(
    c: &Compiled,
    traces: impl IntoIterator<Item = Trace>,
    engines: &[Engine],
) -> Result<Report, XcheckError> {
    let mut report = Report {
        engines: engines.to_vec(),
        traces: 0,
        accepted: engines.iter().map(|&e| (e, 0)).collect(),
        disagreements: 0,
        counterexample: None,
    };
    for trace in traces {
        report.traces += 1;
        let mut verdicts = BTreeMap::new();
        for &e in engines {
            let v = c.accepts(e, &trace)?;
            if v {
                *report.accepted.get_mut(&e).unwrap() += 1;
            }
            verdicts.insert(e, v);
        }
        let values: BTreeSet<bool> = verdicts.values().copied().collect();
        if values.len() > 1 {
            report.disagreements += 1;
            if report.counterexample.is_none() {
                report.counterexample = Some((trace, verdicts));
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::DEFAULT_STATE_CAP;
    use crate::formula::running_example;
    use crate::trace::alphabet;

    #[test]
    fn single_atom_counts() {
        let r = xcheck(&Formula::atom("a"), &alphabet(&["a"]), 2, &Engine::ALL, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(r.traces, 6);
        assert!(r.unanimous());
        assert_eq!(r.accepted[&Engine::Direct], 3);
    }

    #[test]
    fn corrupted_dfa_is_caught() {
        let f = running_example();
        let ab = alphabet(&["a", "b"]);
        let mut c = Compiled::new(&f, &Engine::AUTOMATA, DEFAULT_STATE_CAP).unwrap();
        let d = c.dfa.as_mut().unwrap();
        let accepting = *d.finals.iter().next().unwrap();
        d.finals.remove(&accepting);
        let r = xcheck_compiled(&c, &ab, 3, &Engine::AUTOMATA).unwrap();
        assert!(!r.unanimous());
        let (trace, verdicts) = r.counterexample.unwrap();
        assert_eq!(trace.len(), 2);
        assert!(verdicts[&Engine::Direct]);
        assert!(!verdicts[&Engine::Dfa]);
    }

    #[test]
    fn engine_names_round_trip() {
        for e in Engine::ALL {
            assert_eq!(e.name().parse::<Engine>().unwrap(), e);
        }
    }
}
