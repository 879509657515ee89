use alloc::string::String;

use crate::segment::Label;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("signal of {len} samples is shorter than one interval of {needed} samples")]
    SignalTooShort { len: usize, needed: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite input value at index {index}")]
    NonFinite { index: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("fusion error: {0}")]
    Fusion(String),

    #[error("class {class} has {have} training vectors, need at least {need}")]
    TooFewSamples { class: Label, have: usize, need: usize },

    #[error("no feasible component count in grid for the available data")]
    GridInfeasible,

    #[error("invalid split: {0}")]
    Split(String),

    #[error("empty confusion matrix")]
    EmptyConfusion,

    #[error("trial {trial} failed: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
}
