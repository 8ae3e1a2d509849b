//! Finite deterministic transition systems and the internal-model machinery
//! built on top of them.
//!
//! The crate is `no_std` (it only needs `alloc`). File formats, the CLI and
//! the acceptance runner live in the `dts-cli` companion crate.
//!
//! Module map:
//!
//! - [`system`]: the [`TransitionSystem`] type, [`StateMap`], action
//!   sequences, structural predicates and isomorphism.
//! - [`equiv`]: partitions, generated closures, pullback/pushforward,
//!   sufficiency, coarsest sufficient refinement (`msr`) and quotients.
//! - [`coupling`]: product of an environment with an internal system,
//!   surprise detection, induced labels and bisimulation.
//! - [`learner`]: history tries, bounded sensory indistinguishability and
//!   the oracle-driven learner.
//! - [`envs`]: environment generators (line, cycle, robot arm, seeded random).
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod coupling;
pub mod envs;
pub mod equiv;
mod error;
pub mod learner;
pub mod system;

pub use error::{Error, Result};
pub use equiv::Partition;
pub use system::{StateMap, TransitionSystem};

/// Index of a state in `0..n_states`.
pub type State = usize;
/// Index of an action in `0..n_actions`.
pub type Action = usize;
/// Index of a sensor label in `0..n_labels`.
pub type Label = usize;
