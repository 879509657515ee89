//! Spectral peak sequence (SPS) features for speech/music discrimination.
//!
//! The pipeline runs in two stages. Each frame of an analysis interval is
//! transformed to a half-spectrum magnitude, its strict local maxima are
//! ranked by amplitude and the `p` most prominent bin locations are kept,
//! sorted from high to low frequency. Stacking those columns yields the
//! `p × L` [`PeakSequenceMatrix`]; each row is one spectral peak sequence.
//! The second stage treats every row as a time series and derives
//! periodicity (SPS-P), zero-crossing rate (SPS-ZCR) and centroid / spread
//! / centroid-gradient statistics (SPS-SCG).
//!
//! On top of the features sit a diagonal-covariance Gaussian mixture
//! classifier ([`gmm`]) and a repeated stratified-split evaluation harness
//! ([`eval`]).
//!
//! The crate is `no_std` and only needs `alloc`. File decoding, on-disk
//! formats and the command-line tool live in the `striation` crate.

#![no_std]

extern crate alloc;

mod error;
pub mod eval;
pub mod features;
pub mod fft;
pub mod gmm;
pub mod peaks;
pub mod pipeline;
pub mod rng;
pub mod segment;
pub mod spectral;

pub use error::{Error, Result};
pub use features::{FeatureKind, FeatureVector, SpsAttributes};
pub use peaks::{PeakSequenceMatrix, PeakSet};
pub use pipeline::{Extractor, IntervalFeatures, PipelineConfig};
pub use segment::{AudioInterval, AudioSignal, Label};
pub use spectral::{FrameConfig, MagnitudeSpectrum, Window};
