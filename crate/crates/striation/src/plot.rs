//! Plot-data exports: spectrogram, peak-sequence overlay, feature distributions.

use std::io::Write;

use striation_core::features::SpsAttributes;
use striation_core::{MagnitudeSpectrum, PeakSequenceMatrix};

pub const ZCR_BINS: usize = 20;

/// `frame,bin,magnitude`, frames numbered from `first_frame`.
pub fn write_spectrogram(
    w: &mut dyn Write,
    spectra: &[MagnitudeSpectrum],
    first_frame: usize,
    header: bool,
) -> std::io::Result<()> {
    if header {
        writeln!(w, "frame,bin,magnitude")?;
    }
    for s in spectra {
        for (k, m) in s.bins.iter().enumerate() {
            writeln!(w, "{},{k},{m}", first_frame + s.frame_index)?;
        }
    }
    Ok(())
}

/// `row,frame,bin`.
pub fn write_sps(w: &mut dyn Write, m: &PeakSequenceMatrix, first_frame: usize, header: bool) -> std::io::Result<()> {
    if header {
        writeln!(w, "row,frame,bin")?;
    }
    for (r, row) in m.rows().enumerate() {
        for (l, b) in row.iter().enumerate() {
            writeln!(w, "{r},{},{b}", first_frame + l)?;
        }
    }
    Ok(())
}

/// Per-row distributions accumulated over intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct Distributions {
    p: usize,
    intervals: usize,
    zcr_counts: Vec<[u64; ZCR_BINS]>,
    autocorr_sum: Vec<Vec<f64>>,
}

impl Distributions {
    pub fn new(p: usize) -> Self {
        Distributions { p, intervals: 0, zcr_counts: vec![[0; ZCR_BINS]; p], autocorr_sum: vec![Vec::new(); p] }
    }

    pub fn add(&mut self, attrs: &SpsAttributes) {
        assert_eq!(attrs.p(), self.p);
        self.intervals += 1;
        for r in 0..self.p {
            let z = striation_core::features::zero_crossing_rate(attrs.centered(r));
            let bin = ((z * ZCR_BINS as f64) as usize).min(ZCR_BINS - 1);
            self.zcr_counts[r][bin] += 1;
            let a = attrs.autocorr(r);
            let sum = &mut self.autocorr_sum[r];
            if sum.is_empty() {
                sum.resize(a.len(), 0.0);
            }
            for (s, v) in sum.iter_mut().zip(a) {
                *s += v;
            }
        }
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    /// `row,bin_or_lag,value`: fraction of intervals whose `Z_r` falls in each of
    /// `ZCR_BINS` equal bins over [0, 1).
    pub fn write_zcr_histogram(&self, w: &mut dyn Write) -> std::io::Result<()> {
        writeln!(w, "row,bin_or_lag,value")?;
        let n = self.intervals.max(1) as f64;
        for (r, counts) in self.zcr_counts.iter().enumerate() {
            for (b, c) in counts.iter().enumerate() {
                writeln!(w, "{r},{b},{}", *c as f64 / n)?;
            }
        }
        Ok(())
    }

    /// `row,bin_or_lag,value`: mean `A_r[τ]` over intervals.
    pub fn write_autocorr(&self, w: &mut dyn Write) -> std::io::Result<()> {
        writeln!(w, "row,bin_or_lag,value")?;
        let n = self.intervals.max(1) as f64;
        for (r, sum) in self.autocorr_sum.iter().enumerate() {
            for (lag, s) in sum.iter().enumerate() {
                writeln!(w, "{r},{lag},{}", s / n)?;
            }
        }
        Ok(())
    }
}
