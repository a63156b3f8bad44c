//! Online active model selection with contextual expert advice.
//!
//! A stream of rounds arrives one at a time. Each round carries the
//! predictions of `k` fixed classifiers and the advice of `n` policies,
//! each a distribution over the classifiers. A learner recommends one
//! classifier per round and decides whether to pay for the true label.
//!
//! [`cams::CamsLearner`] is the main learner; [`baselines`] holds the
//! comparison methods, [`datagen`] synthetic streams, and [`harness`] the
//! experiment runner used by the `cams-bench` binary.

pub mod baselines;
pub mod cams;
pub mod cli;
pub mod datagen;
pub mod domain;
pub mod error;
pub mod harness;
pub mod learner;
pub mod seed;
pub mod select;

pub use error::{Error, Result};
