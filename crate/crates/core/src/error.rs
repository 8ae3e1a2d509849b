use alloc::string::String;
use alloc::vec::Vec;

use crate::{Action, State};

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("state {state} out of range (system has {n_states} states)")]
    StateOutOfRange { state: usize, n_states: usize },
    #[error("action {action} out of range (system has {n_actions} actions)")]
    ActionOutOfRange { action: usize, n_actions: usize },
    #[error("invalid transition system: {0}")]
    InvalidSystem(String),
    #[error("action alphabets differ")]
    AlphabetMismatch,
    #[error("size mismatch: expected {expected} states, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("system carries no sensor labels")]
    Unlabeled,
    #[error("system has no initial state")]
    MissingInitial,
    #[error("state {unreachable} is not reachable from state {from}")]
    NotConnected { from: State, unreachable: State },
    #[error("partition is not sufficient: states {first} and {second} are split by action {action}")]
    NotSufficient { first: State, second: State, action: Action },
    #[error("partition joins states {first} and {second} that carry different labels")]
    LabelsNotRespected { first: State, second: State },
    #[error("map is not surjective: target state {missing} has no preimage")]
    NotSurjective { missing: State },
    #[error("partition is not closed under the map: states {first} and {second} share an image but not a block")]
    NotMapClosed { first: State, second: State },
    #[error("coupling is surprised; induced labels are not well-defined")]
    Surprised,
    #[error("{what} too large: {size} exceeds limit {limit}")]
    TooLarge { what: &'static str, size: usize, limit: usize },
    #[error("horizon {horizon} exceeds trie depth {depth}")]
    HorizonTooLarge { horizon: usize, depth: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("random generation failed after {0} rejections")]
    GenerationFailed(usize),
    #[error("arm free space is disconnected: {reached:?} cannot reach {unreached:?}")]
    DisconnectedFreeSpace { reached: Vec<usize>, unreached: Vec<usize> },
    #[error("internal consistency check failed: {0}")]
    TheoremViolation(&'static str),
}
