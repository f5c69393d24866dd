//! Regular expression matching with simultaneous finite automata.
//!
//! A pattern is compiled through a chain of automata:
//!
//! 1. [`regex::parse_regex`] produces a [`RegexAst`];
//! 2. [`nfa::build_nfa`] builds the position automaton;
//! 3. [`dfa::subset_construct`] determinizes it and [`minimize::minimize_dfa`]
//!    minimizes the result;
//! 4. [`sfa::correspondence_construct`] builds the simultaneous automaton,
//!    whose states are mappings from DFA states to DFA states.
//!
//! Reading a word in the simultaneous automaton from the identity mapping
//! yields the mapping `q ↦ δ̂(q, w)` for every state `q` at once. Since these
//! mappings compose associatively, an input can be split into chunks that
//! are scanned independently and then folded together, see [`engine`].

pub mod alphabet;
pub mod corpus;
pub mod dfa;
pub mod dot;
pub mod engine;
pub mod minimize;
pub mod nfa;
pub mod regex;
pub mod sfa;

use std::fmt;

pub use alphabet::{ByteClasses, ByteSet};
pub use dfa::{subset_construct, Dfa};
pub use engine::{
    make_chunk_plan, run_dfa_sequential, run_dfa_speculative, run_sfa_parallel, ChunkPlan, Dispatch, EngineKind,
    MatchOutcome, Reduction,
};
pub use minimize::minimize_dfa;
pub use nfa::{build_nfa, nfa_accepts, Nfa};
pub use regex::{parse_regex, RegexAst, RegexError};
pub use sfa::{compose, correspondence_construct, sfa_accept_state, Sfa, StateMapping};

/// Index of a state in an automaton.
pub type StateId = u32;

/// Default cap on the number of states of any constructed automaton.
pub const DEFAULT_STATE_CAP: usize = 1 << 20;

/// Pipeline stage, used to report where a limit was hit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Parse,
    Nfa,
    Dfa,
    Sfa,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Parse => "parse",
            Stage::Nfa => "nfa",
            Stage::Dfa => "dfa",
            Stage::Sfa => "sfa",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("{stage} construction exceeded the cap of {limit} states")]
pub struct CapacityError {
    pub stage: Stage,
    pub limit: usize,
}

/// State caps applied while compiling a pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_nfa_states: usize,
    pub max_dfa_states: usize,
    pub max_sfa_states: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_nfa_states: DEFAULT_STATE_CAP,
            max_dfa_states: DEFAULT_STATE_CAP,
            max_sfa_states: DEFAULT_STATE_CAP,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CompileError {
    #[error(transparent)]
    Regex(#[from] RegexError),
    #[error(transparent)]
    Capacity(#[from] CapacityError),
}

/// Every automaton built for one pattern.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub ast: RegexAst,
    pub nfa: Nfa,
    pub dfa: Dfa,
    pub min_dfa: Dfa,
    pub sfa: Sfa,
}

/// Runs the full pipeline: parse, position NFA, subset DFA, minimal DFA and
/// the simultaneous automaton of the minimal DFA.
pub fn compile(pattern: &str, limits: &Limits) -> Result<Compiled, CompileError> {
    let ast = regex::parse_regex_with_limit(pattern, limits.max_nfa_states as u64)?;
    let nfa = build_nfa(&ast, limits.max_nfa_states)?;
    let dfa = subset_construct(&nfa, limits.max_dfa_states)?;
    let min_dfa = minimize_dfa(&dfa);
    let sfa = sfa::construct_from_dfa(&min_dfa, limits.max_sfa_states)?;
    Ok(Compiled {
        ast,
        nfa,
        dfa,
        min_dfa,
        sfa,
    })
}

/// Wraps a pattern so whole-input matching finds it anywhere in the input.
pub fn substring_pattern(pattern: &str) -> String {
    format!(".*({pattern}).*")
}
