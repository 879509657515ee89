//! Interval → features, both stages end to end.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::features::{self, FeatureKind, FeatureVector, Provenance, SpsAttributes};
use crate::peaks::{PeakDiagnostics, PeakMatrixBuilder, PeakSequenceMatrix};
use crate::segment::AudioInterval;
use crate::spectral::{frame_interval, make_frame_config, FrameConfig, SpectrumAnalyzer, Window};

/// Defaults: 30 ms frames, 1 ms hop, 20 peak sequences.
pub const DEFAULT_FRAME_MS: f64 = 30.0;
pub const DEFAULT_HOP_MS: f64 = 1.0;
pub const DEFAULT_P: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub frame: FrameConfig,
    pub p: usize,
}

impl PipelineConfig {
    pub fn new(frame: FrameConfig, p: usize) -> Result<Self> {
        if p < 2 {
            return Err(Error::Config(format!("p must be at least 2, got {p}")));
        }
        Ok(PipelineConfig { frame, p })
    }

    pub fn from_ms(sample_rate: u32, frame_ms: f64, hop_ms: f64, p: usize, window: Window) -> Result<Self> {
        Self::new(make_frame_config(sample_rate, frame_ms, hop_ms, window)?, p)
    }

    pub fn defaults_for(sample_rate: u32) -> Result<Self> {
        Self::from_ms(sample_rate, DEFAULT_FRAME_MS, DEFAULT_HOP_MS, DEFAULT_P, Window::Rectangular)
    }
}

/// The three base feature vectors of one interval; fused vectors are
/// assembled on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalFeatures {
    pub sps_p: FeatureVector,
    pub sps_zcr: FeatureVector,
    pub sps_scg: FeatureVector,
    pub diagnostics: PeakDiagnostics,
}

impl IntervalFeatures {
    pub fn vector(&self, kind: FeatureKind) -> FeatureVector {
        match kind {
            FeatureKind::SpsP => self.sps_p.clone(),
            FeatureKind::SpsZcr => self.sps_zcr.clone(),
            FeatureKind::SpsScg => self.sps_scg.clone(),
            FeatureKind::EarlyFused => {
                features::early_fuse(&self.sps_p, &self.sps_zcr, &self.sps_scg).expect("vectors share provenance")
            }
        }
    }

    pub fn source_id(&self) -> &str {
        &self.sps_p.source_id
    }

    pub fn label(&self) -> Option<crate::Label> {
        self.sps_p.label
    }
}

/// Holds transform plans and scratch buffers; one per thread.
#[derive(Debug, Clone)]
pub struct Extractor {
    cfg: PipelineConfig,
    analyzer: SpectrumAnalyzer,
    magnitudes: Vec<f64>,
}

impl Extractor {
    pub fn new(cfg: PipelineConfig) -> Self {
        Extractor { analyzer: SpectrumAnalyzer::new(cfg.frame), magnitudes: vec![0.0; cfg.frame.n_bins()], cfg }
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    /// Stage one: `S_peak` for a sample window.
    pub fn peak_matrix(&mut self, samples: &[f64]) -> Result<(PeakSequenceMatrix, PeakDiagnostics)> {
        self.cfg.frame.check_interval(samples.len())?;
        let mut builder = PeakMatrixBuilder::new(self.cfg.p, self.cfg.frame.n_bins())?;
        for frame in frame_interval(samples, &self.cfg.frame) {
            self.analyzer.magnitudes_into(frame, &mut self.magnitudes)?;
            builder.push_spectrum(&self.magnitudes)?;
        }
        builder.finish()
    }

    pub fn attributes(&mut self, samples: &[f64]) -> Result<(PeakSequenceMatrix, SpsAttributes, PeakDiagnostics)> {
        let (m, diag) = self.peak_matrix(samples)?;
        let attrs = features::compute_attributes(&m)?;
        Ok((m, attrs, diag))
    }

    pub fn extract(&mut self, iv: &AudioInterval) -> Result<IntervalFeatures> {
        let (_, attrs, diagnostics) = self.attributes(&iv.samples)?;
        let prov = Provenance { source_id: iv.source_id.clone(), interval_index: iv.index, label: iv.label };
        Ok(IntervalFeatures {
            sps_p: features::sps_periodicity(&attrs, &prov),
            sps_zcr: features::sps_zcr(&attrs, &prov),
            sps_scg: features::sps_scg(&attrs, &prov)?,
            diagnostics,
        })
    }
}

/// Sequential extraction over a corpus.
pub fn extract_all(cfg: PipelineConfig, intervals: &[AudioInterval]) -> Result<Vec<IntervalFeatures>> {
    let mut ex = Extractor::new(cfg);
    intervals.iter().map(|iv| ex.extract(iv)).collect()
}
