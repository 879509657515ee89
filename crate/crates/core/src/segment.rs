//! Mono signals and fixed-length analysis intervals.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Speech,
    Music,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Speech, Label::Music];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Speech => "speech",
            Label::Music => "music",
        }
    }

    pub(crate) fn index(self) -> usize {
        match self {
            Label::Speech => 0,
            Label::Music => 1,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "speech" => Ok(Label::Speech),
            "music" => Ok(Label::Music),
            other => Err(Error::Config(alloc::format!("unknown label `{other}`"))),
        }
    }
}

/// A decoded mono signal at its native sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioSignal {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

/// One fixed-duration window of a source signal; the unit of classification.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioInterval {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
    pub source_id: String,
    pub index: usize,
    pub label: Option<Label>,
}

/// Number of samples in one interval of `interval_s` seconds.
pub fn interval_len(sample_rate: u32, interval_s: f64) -> Result<usize> {
    if !interval_s.is_finite() || interval_s <= 0.0 {
        return Err(Error::Config(alloc::format!("interval duration must be positive, got {interval_s}")));
    }
    if sample_rate == 0 {
        return Err(Error::Config("sample rate must be positive".into()));
    }
    let n = libm::round(interval_s * f64::from(sample_rate));
    if n < 1.0 {
        return Err(Error::Config(alloc::format!(
            "interval of {interval_s} s is less than one sample at {sample_rate} Hz"
        )));
    }
    Ok(n as usize)
}

/// Split `sig` into consecutive non-overlapping intervals; the trailing
/// partial interval is dropped.
pub fn segment_intervals(
    sig: &AudioSignal,
    interval_s: f64,
    source_id: &str,
    label: Option<Label>,
) -> Result<Vec<AudioInterval>> {
    let len = interval_len(sig.sample_rate, interval_s)?;
    if sig.samples.len() < len {
        return Err(Error::SignalTooShort { len: sig.samples.len(), needed: len });
    }
    Ok(sig
        .samples
        .chunks_exact(len)
        .enumerate()
        .map(|(index, chunk)| AudioInterval {
            samples: chunk.to_vec(),
            sample_rate: sig.sample_rate,
            source_id: source_id.into(),
            index,
            label,
        })
        .collect())
}
