//! RIFF/WAVE ingestion: 16-bit PCM or 32-bit float, mono or stereo.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};
use striation_core::AudioSignal;

use crate::error::{Error, Result};

const PCM16_SCALE: f64 = 32768.0;

fn decode_error(path: &Path, chunk: &'static str, msg: impl Into<String>) -> Error {
    Error::Decode { path: path.to_path_buf(), chunk, msg: msg.into() }
}

// The file itself opened fine, so read failures past this point mean the
// content ends early.
fn header_error(path: &Path, e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) => decode_error(path, "RIFF", format!("truncated header: {io}")),
        hound::Error::FormatError(msg) => decode_error(path, "RIFF", msg),
        hound::Error::Unsupported => decode_error(path, "fmt", "unsupported encoding"),
        other => decode_error(path, "fmt", other.to_string()),
    }
}

fn sample_error(path: &Path, e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) => decode_error(path, "data", format!("truncated: {io}")),
        other => decode_error(path, "data", other.to_string()),
    }
}

pub fn decode_wav(path: impl AsRef<Path>) -> Result<AudioSignal> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = WavReader::new(BufReader::new(file)).map_err(|e| header_error(path, e))?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if !(1..=2).contains(&channels) {
        return Err(decode_error(path, "fmt", format!("{channels} channels; only mono and stereo are supported")));
    }
    if spec.sample_rate == 0 {
        return Err(decode_error(path, "fmt", "sample rate is zero"));
    }
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| v as f64 / PCM16_SCALE))
            .collect::<Result<_, _>>()
            .map_err(|e| sample_error(path, e))?,
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<Result<_, _>>()
            .map_err(|e| sample_error(path, e))?,
        (format, bits) => {
            let kind = match format {
                SampleFormat::Int => "integer PCM",
                SampleFormat::Float => "float",
            };
            return Err(decode_error(path, "fmt", format!("{bits}-bit {kind} is not supported")));
        }
    };
    if !interleaved.len().is_multiple_of(channels) {
        return Err(decode_error(path, "data", "sample count is not a multiple of the channel count"));
    }
    let samples =
        if channels == 1 { interleaved } else { interleaved.chunks_exact(2).map(|lr| (lr[0] + lr[1]) / 2.0).collect() };
    if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
        return Err(decode_error(path, "data", format!("non-finite sample at {i}")));
    }
    Ok(AudioSignal { samples, sample_rate: spec.sample_rate })
}

/// Mono 16-bit PCM, clipping to the representable range.
pub fn write_pcm16(path: impl AsRef<Path>, samples: &[f64], sample_rate: u32) -> Result<()> {
    let path = path.as_ref();
    let spec = WavSpec { channels: 1, sample_rate, bits_per_sample: 16, sample_format: SampleFormat::Int };
    let wrap = |e: hound::Error| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::Input(format!("{}: {other}", path.display())),
    };
    let mut w = WavWriter::create(path, spec).map_err(wrap)?;
    for &s in samples {
        let v = (s * PCM16_SCALE).round().clamp(i16::MIN as f64, i16::MAX as f64) as i16;
        w.write_sample(v).map_err(wrap)?;
    }
    w.finalize().map_err(wrap)
}
