//! Labeled corpus ingestion from one directory per class.

use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use striation_core::segment::segment_intervals;
use striation_core::{AudioInterval, Label};

use crate::error::{Error, Result};
use crate::wav::decode_wav;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skipped {
    pub path: PathBuf,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScanReport {
    pub used_files: usize,
    pub skipped: Vec<Skipped>,
}

impl fmt::Display for ScanReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "files used: {}", self.used_files)?;
        writeln!(f, "files skipped: {}", self.skipped.len())?;
        for s in &self.skipped {
            writeln!(f, "  {}: {}", s.path.display(), s.reason)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub intervals: Vec<AudioInterval>,
    pub sample_rate: u32,
    pub report: ScanReport,
}

/// `.wav` files directly inside `dir`, sorted by file name.
pub fn wav_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_wav = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav"));
        if is_wav && path.is_file() {
            files.push(path);
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

/// A single file, or every `.wav` in a directory.
pub fn input_files(path: &Path) -> Result<Vec<PathBuf>> {
    let meta = std::fs::metadata(path).map_err(|e| Error::io(path, e))?;
    if meta.is_dir() {
        let files = wav_files(path)?;
        if files.is_empty() {
            return Err(Error::Input(format!("{}: no .wav files", path.display())));
        }
        Ok(files)
    } else {
        Ok(vec![path.to_path_buf()])
    }
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

struct Loaded {
    path: PathBuf,
    outcome: Result<(u32, Vec<AudioInterval>)>,
}

fn load(path: &Path, source_id: String, interval_s: f64, label: Option<Label>) -> Loaded {
    let outcome = decode_wav(path).and_then(|sig| {
        let rate = sig.sample_rate;
        Ok((rate, segment_intervals(&sig, interval_s, &source_id, label)?))
    });
    Loaded { path: path.to_path_buf(), outcome }
}

fn check_rate(rate: &mut Option<(u32, PathBuf)>, got: u32, path: &Path) -> Result<()> {
    match rate {
        None => *rate = Some((got, path.to_path_buf())),
        Some((want, first)) if *want != got => {
            return Err(Error::Input(format!(
                "mixed sample rates: {} is {want} Hz but {} is {got} Hz; resample the corpus to one rate",
                first.display(),
                path.display()
            )))
        }
        _ => {}
    }
    Ok(())
}

/// Every full interval of every decodable file in both directories.
/// Files that fail to decode, or are shorter than one interval, are
/// skipped and listed in the report.
pub fn scan_corpus(speech_dir: &Path, music_dir: &Path, interval_s: f64) -> Result<Corpus> {
    let mut jobs = Vec::new();
    for (label, dir) in [(Label::Speech, speech_dir), (Label::Music, music_dir)] {
        for path in wav_files(dir)? {
            jobs.push((label, path));
        }
    }
    let loaded: Vec<(Label, Loaded)> = jobs
        .par_iter()
        .map(|(label, path)| (*label, load(path, format!("{label}/{}", file_name(path)), interval_s, Some(*label))))
        .collect();

    let mut report = ScanReport::default();
    let mut intervals = Vec::new();
    let mut counts = [0usize; 2];
    let mut rate = None;
    for (label, l) in loaded {
        match l.outcome {
            Ok((r, ivs)) => {
                check_rate(&mut rate, r, &l.path)?;
                report.used_files += 1;
                counts[label as usize] += ivs.len();
                intervals.extend(ivs);
            }
            Err(e) => report.skipped.push(Skipped { path: l.path, reason: e.to_string() }),
        }
    }
    for (label, dir) in [(Label::Speech, speech_dir), (Label::Music, music_dir)] {
        if counts[label as usize] == 0 {
            return Err(Error::Input(format!("{}: no usable {label} intervals", dir.display())));
        }
    }
    Ok(Corpus { intervals, sample_rate: rate.expect("non-empty corpus").0, report })
}

/// Unlabeled intervals from a file or directory, skipping undecodable files.
pub fn scan_inputs(path: &Path, interval_s: f64, label: Option<Label>) -> Result<Corpus> {
    let files = input_files(path)?;
    let single = files.len() == 1 && !path.is_dir();
    let loaded: Vec<Loaded> = files.par_iter().map(|p| load(p, file_name(p), interval_s, label)).collect();
    let mut report = ScanReport::default();
    let mut intervals = Vec::new();
    let mut rate = None;
    for l in loaded {
        match l.outcome {
            Ok((r, ivs)) => {
                check_rate(&mut rate, r, &l.path)?;
                report.used_files += 1;
                intervals.extend(ivs);
            }
            // A directly named file that cannot be read is the caller's problem, not a warning.
            Err(e) if single => return Err(e),
            Err(e) => report.skipped.push(Skipped { path: l.path, reason: e.to_string() }),
        }
    }
    match rate {
        Some((sample_rate, _)) => Ok(Corpus { intervals, sample_rate, report }),
        None => Err(Error::Input(format!("{}: no usable intervals", path.display()))),
    }
}
