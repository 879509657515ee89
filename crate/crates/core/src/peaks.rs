//! Stage one: prominent spectral peaks per frame and the peak sequence matrix.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::spectral::MagnitudeSpectrum;

/// Strict interior local maxima of a sequence, in ascending bin order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PeakSet {
    pub bins: Vec<usize>,
    pub amplitudes: Vec<f64>,
}

impl PeakSet {
    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }
}

/// Indices `k` with `v[k-1] < v[k] > v[k+1]`, `1 ≤ k ≤ len-2`.
///
/// Sequences shorter than three values have no interior and yield an empty set.
pub fn detect_peaks(values: &[f64]) -> PeakSet {
    let mut set = PeakSet::default();
    for (i, w) in values.windows(3).enumerate() {
        if w[0] < w[1] && w[1] > w[2] {
            set.bins.push(i + 1);
            set.amplitudes.push(w[1]);
        }
    }
    set
}

/// Peak locations only, for callers that do not need amplitudes.
pub(crate) fn peak_locations(values: &[f64], out: &mut Vec<usize>) {
    out.clear();
    out.extend(values.windows(3).enumerate().filter(|(_, w)| w[0] < w[1] && w[1] > w[2]).map(|(i, _)| i + 1));
}

/// Higher amplitude first; equal amplitudes prefer the lower bin.
fn prominence_order(a: (usize, f64), b: (usize, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))
}

/// Column `pH_l`: the `p` most prominent peak bins, padded and sorted by
/// descending frequency.
///
/// Returns `None` when the set is empty; callers substitute an all-zero column.
pub fn select_prominent(ps: &PeakSet, p: usize) -> Option<Vec<usize>> {
    let mut column = vec![0; p];
    if fill_column(&ps.bins, &ps.amplitudes, &mut column, &mut Vec::new()) {
        Some(column)
    } else {
        None
    }
}

/// Writes the column into `out` (`out.len() == p`). Returns `false` for a
/// peakless frame, leaving `out` all zero.
fn fill_column(bins: &[usize], amps: &[f64], out: &mut [usize], ranked: &mut Vec<(usize, f64)>) -> bool {
    let p = out.len();
    if bins.is_empty() {
        out.fill(0);
        return false;
    }
    ranked.clear();
    ranked.extend(bins.iter().copied().zip(amps.iter().copied()));
    let q = ranked.len().min(p);
    if ranked.len() > p {
        ranked.select_nth_unstable_by(p - 1, |a, b| prominence_order(*a, *b));
    }
    ranked[..q].sort_unstable_by(|a, b| prominence_order(*a, *b));
    for (o, (bin, _)) in out.iter_mut().zip(&ranked[..q]) {
        *o = *bin;
    }
    // The weakest retained peak fills the remaining slots.
    let last = ranked[q - 1].0;
    out[q..].fill(last);
    out.sort_unstable_by(|a, b| b.cmp(a));
    true
}

/// `p × L` matrix of prominent-peak bin indices. Row `r` is the r-th spectral
/// peak sequence; row 0 holds the highest frequencies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeakSequenceMatrix {
    data: Vec<u32>,
    p: usize,
    frames: usize,
    n_bins: usize,
}

impl PeakSequenceMatrix {
    /// Builds a matrix from row-major data, checking bounds and column order.
    pub fn from_rows(rows: &[Vec<u32>], n_bins: usize) -> Result<Self> {
        let p = rows.len();
        if p == 0 {
            return Err(Error::Shape("matrix needs at least one row".into()));
        }
        let frames = rows[0].len();
        if rows.iter().any(|r| r.len() != frames) {
            return Err(Error::Shape("ragged rows".into()));
        }
        let data: Vec<u32> = rows.iter().flatten().copied().collect();
        let m = PeakSequenceMatrix { data, p, frames, n_bins };
        if m.data.iter().any(|&b| b as usize >= n_bins.max(1)) {
            return Err(Error::Shape(format!("entry outside 0..{n_bins}")));
        }
        for l in 0..frames {
            for r in 1..p {
                if m.get(r - 1, l) < m.get(r, l) {
                    return Err(Error::Shape(format!("column {l} not sorted non-increasing")));
                }
            }
        }
        Ok(m)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Number of frames `L`.
    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.frames..(r + 1) * self.frames]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u32]> {
        self.data.chunks_exact(self.frames)
    }

    pub fn get(&self, r: usize, l: usize) -> u32 {
        self.data[r * self.frames + l]
    }

    pub fn column(&self, l: usize) -> Vec<u32> {
        (0..self.p).map(|r| self.get(r, l)).collect()
    }
}

/// Counts of degenerate frames seen while assembling a matrix.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PeakDiagnostics {
    pub frames: u64,
    pub peakless_frames: u64,
}

impl PeakDiagnostics {
    pub fn merge(&mut self, other: PeakDiagnostics) {
        self.frames += other.frames;
        self.peakless_frames += other.peakless_frames;
    }
}

/// Incremental column-by-column assembly of a [`PeakSequenceMatrix`].
#[derive(Debug, Clone)]
pub struct PeakMatrixBuilder {
    p: usize,
    n_bins: usize,
    columns: Vec<usize>,
    peaks: PeakSet,
    ranked: Vec<(usize, f64)>,
    diagnostics: PeakDiagnostics,
}

impl PeakMatrixBuilder {
    pub fn new(p: usize, n_bins: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::Config("p must be at least 1".into()));
        }
        Ok(PeakMatrixBuilder {
            p,
            n_bins,
            columns: Vec::new(),
            peaks: PeakSet::default(),
            ranked: Vec::new(),
            diagnostics: PeakDiagnostics::default(),
        })
    }

    pub fn push_spectrum(&mut self, bins: &[f64]) -> Result<()> {
        if bins.len() != self.n_bins {
            return Err(Error::Shape(format!("spectrum has {} bins, expected {}", bins.len(), self.n_bins)));
        }
        self.peaks.bins.clear();
        self.peaks.amplitudes.clear();
        for (i, w) in bins.windows(3).enumerate() {
            if w[0] < w[1] && w[1] > w[2] {
                self.peaks.bins.push(i + 1);
                self.peaks.amplitudes.push(w[1]);
            }
        }
        let start = self.columns.len();
        self.columns.resize(start + self.p, 0);
        let found = fill_column(&self.peaks.bins, &self.peaks.amplitudes, &mut self.columns[start..], &mut self.ranked);
        self.diagnostics.frames += 1;
        if !found {
            self.diagnostics.peakless_frames += 1;
        }
        Ok(())
    }

    pub fn finish(self) -> Result<(PeakSequenceMatrix, PeakDiagnostics)> {
        let frames = self.columns.len() / self.p;
        if frames < 2 {
            return Err(Error::Shape(format!("need at least 2 frames, got {frames}")));
        }
        // Column-major scratch → row-major matrix.
        let mut data = vec![0u32; self.columns.len()];
        for (l, col) in self.columns.chunks_exact(self.p).enumerate() {
            for (r, &bin) in col.iter().enumerate() {
                data[r * frames + l] = bin as u32;
            }
        }
        Ok((PeakSequenceMatrix { data, p: self.p, frames, n_bins: self.n_bins }, self.diagnostics))
    }
}

/// Stage one for a whole interval.
pub fn build_peak_matrix(spectra: &[MagnitudeSpectrum], p: usize) -> Result<(PeakSequenceMatrix, PeakDiagnostics)> {
    let n_bins = spectra.first().map(|s| s.bins.len()).ok_or_else(|| Error::Shape("no spectra".into()))?;
    let mut builder = PeakMatrixBuilder::new(p, n_bins)?;
    for s in spectra {
        builder.push_spectrum(&s.bins)?;
    }
    builder.finish()
}
