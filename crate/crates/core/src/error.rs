// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Construction and configuration errors for automata and systems.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("alphabet must declare at least one action")]
    EmptyAlphabet,
    #[error("action names must be non-empty")]
    EmptyActionName,
    #[error("alphabet has {0} actions, at most 64 are supported")]
    AlphabetTooLarge(usize),
    #[error("duplicate action `{0}`")]
    DuplicateAction(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("action #{0} cannot be mutually exclusive with itself")]
    ReflexiveMutex(usize),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("automaton has no states")]
    NoStates,
    #[error("transition label mentions actions outside the alphabet")]
    LabelOutsideAlphabet,
    #[error("automata are defined over different alphabets")]
    AlphabetMismatch,
    #[error("mutually exclusive action `{0}` may not be synchronised on")]
    MutexInSync(String),
    #[error("party composition deadlocks in {} reachable state(s): {}", .0.len(), .0.join(", "))]
    NotWellFormed(Vec<String>),
}

/// Refusals from the bounded semantic checks.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("alphabet of {size} actions exceeds the enumeration bound of {bound}")]
    SigmaBound { size: usize, bound: usize },
    #[error("enumeration bound {0} exceeds the supported maximum of 4")]
    UnsupportedBound(usize),
    #[error("contract automata are not structurally isomorphic")]
    NotIsomorphic,
    #[error(transparent)]
    Model(#[from] ModelError),
}
