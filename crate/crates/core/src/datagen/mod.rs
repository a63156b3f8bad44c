//! Synthetic streams and stream files.
//!
//! Models are represented only by their per-round predictions: model `j`
//! is right with its (per-class) accuracy and otherwise predicts a uniformly
//! random wrong label. Policies come in four kinds:
//!
//! - `normal`: softmax of noisy per-model accuracy estimates for the instance's class
//! - `biased`: like normal, but the estimates are inverted on a set of classes
//! - `random`: a fresh uniform draw from the simplex every round
//! - `malicious`: softmax of the negated estimates, pointing at the worst models

mod io;
mod metadata;
pub mod presets;
mod spec;
mod synth;

use crate::domain::{RoundRecord, StreamMeta};

pub use io::{load_stream, read_stream, save_stream, write_stream, STREAM_SCHEMA};
pub use metadata::{argmax_probabilities, best_and_gap, expected_policy_losses};
pub use spec::{Accuracies, PolicyKind, PolicySpec, Segment, SpecRegime, SyntheticSpec, DEFAULT_ADVICE_NOISE};
pub use synth::{
    gen_adversarial, gen_stochastic, gen_stochastic_with, generate, realized_policy_losses, BACKGROUND_ACCURACY, DOMINANT_ACCURACY,
};

/// A header plus every round of a stream.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamFile {
    pub meta: StreamMeta,
    pub records: Vec<RoundRecord>,
}
