//! Stage two: each spectral peak sequence treated as a time series.
//!
//! For row `r` of the peak matrix with `L` frames:
//!
//! * centroid `μ_r = (1/L) Σ_l S[r][l]`
//! * zero-centred sequence `C_r[l] = S[r][l] − μ_r`
//! * biased autocorrelation `A_r[τ] = (1/L) Σ_{l<L−τ} C_r[l]·C_r[l+τ]` for
//!   `τ = 0..=𝓛`, with `𝓛 = L/2` (even `L`) or `(L+1)/2` (odd `L`)
//!
//! From these come SPS-P (variance of the spacing between autocorrelation
//! peaks), SPS-ZCR (zero-crossing rate of `C_r`) and SPS-SCG
//! (`μ`, `σ` and the gradient of `μ` across rows).

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::peaks::{peak_locations, PeakSequenceMatrix};
use crate::segment::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureKind {
    SpsP,
    SpsZcr,
    SpsScg,
    EarlyFused,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 4] =
        [FeatureKind::SpsP, FeatureKind::SpsZcr, FeatureKind::SpsScg, FeatureKind::EarlyFused];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::SpsP => "sps_p",
            FeatureKind::SpsZcr => "sps_zcr",
            FeatureKind::SpsScg => "sps_scg",
            FeatureKind::EarlyFused => "early_fused",
        }
    }

    /// Vector dimension for `p` peak sequences.
    pub fn dim(self, p: usize) -> usize {
        match self {
            FeatureKind::SpsP | FeatureKind::SpsZcr => p,
            FeatureKind::SpsScg => 3 * p,
            FeatureKind::EarlyFused => 5 * p,
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sps_p" | "sps-p" => Ok(FeatureKind::SpsP),
            "sps_zcr" | "sps-zcr" => Ok(FeatureKind::SpsZcr),
            "sps_scg" | "sps-scg" => Ok(FeatureKind::SpsScg),
            "early_fused" | "fused" => Ok(FeatureKind::EarlyFused),
            other => Err(Error::Config(format!("unknown feature kind `{other}`"))),
        }
    }
}

/// A feature vector with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub kind: FeatureKind,
    pub values: Vec<f64>,
    pub label: Option<Label>,
    pub source_id: String,
    pub interval_index: usize,
}

impl FeatureVector {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    fn same_origin(&self, other: &FeatureVector) -> bool {
        self.source_id == other.source_id && self.interval_index == other.interval_index
    }
}

/// `𝓛`: largest autocorrelation lag.
pub fn lag_cap(frames: usize) -> usize {
    if frames.is_multiple_of(2) {
        frames / 2
    } else {
        frames.div_ceil(2)
    }
}

/// Centroids, centred sequences and autocorrelations of every row.
#[derive(Debug, Clone, PartialEq)]
pub struct SpsAttributes {
    p: usize,
    frames: usize,
    lag_cap: usize,
    centroids: Vec<f64>,
    centered: Vec<f64>,
    autocorr: Vec<f64>,
}

impl SpsAttributes {
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn lag_cap(&self) -> usize {
        self.lag_cap
    }

    pub fn centroids(&self) -> &[f64] {
        &self.centroids
    }

    pub fn centered(&self, r: usize) -> &[f64] {
        &self.centered[r * self.frames..(r + 1) * self.frames]
    }

    /// `A_r[0..=𝓛]`.
    pub fn autocorr(&self, r: usize) -> &[f64] {
        let w = self.lag_cap + 1;
        &self.autocorr[r * w..(r + 1) * w]
    }

    /// Population standard deviation `σ_r`; equals `sqrt(A_r[0])`.
    pub fn std_dev(&self, r: usize) -> f64 {
        libm::sqrt(self.autocorr(r)[0])
    }
}

/// First half of stage two: `μ_r`, `C_r` and `A_r` for every row.
pub fn compute_attributes(m: &PeakSequenceMatrix) -> Result<SpsAttributes> {
    let (p, frames) = (m.p(), m.frames());
    if frames < 2 {
        return Err(Error::Shape(format!("need at least 2 frames, got {frames}")));
    }
    let cap = lag_cap(frames);
    let inv_len = 1.0 / frames as f64;
    let mut centroids = Vec::with_capacity(p);
    let mut centered = Vec::with_capacity(p * frames);
    let mut autocorr = Vec::with_capacity(p * (cap + 1));
    for row in m.rows() {
        let total: i64 = row.iter().map(|&b| i64::from(b)).sum();
        centroids.push(total as f64 / frames as f64);
        // (L·S − ΣS)/L keeps C_r identical when a constant is added to the row.
        let start = centered.len();
        let len = frames as i64;
        centered.extend(row.iter().map(|&b| (len * i64::from(b) - total) as f64 / frames as f64));
        let c = &centered[start..];
        for tau in 0..=cap {
            let s: f64 = c[..frames - tau].iter().zip(&c[tau..]).map(|(a, b)| a * b).sum();
            autocorr.push(s * inv_len);
        }
    }
    Ok(SpsAttributes { p, frames, lag_cap: cap, centroids, centered, autocorr })
}

fn population_variance(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

/// `V_r` for one autocorrelation sequence. Fewer than two peak gaps give 0.
pub fn periodicity(autocorr: &[f64]) -> f64 {
    let mut lags = Vec::new();
    peak_locations(autocorr, &mut lags);
    if lags.len() < 3 {
        return 0.0;
    }
    let gaps: Vec<f64> = lags.windows(2).map(|w| (w[1] - w[0]) as f64).collect();
    population_variance(&gaps)
}

fn signum(x: f64) -> i32 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// `Z_r = (1/2L) Σ_{l=1}^{L-1} |sgn C[l] − sgn C[l−1]|` with `sgn(0) = 0`.
pub fn zero_crossing_rate(centered: &[f64]) -> f64 {
    let changes: i32 = centered.windows(2).map(|w| (signum(w[1]) - signum(w[0])).abs()).sum();
    f64::from(changes) / (2 * centered.len()) as f64
}

/// Central differences with one-sided ends.
pub fn centroid_gradient(mu: &[f64]) -> Vec<f64> {
    let p = mu.len();
    (0..p)
        .map(|r| match r {
            0 => mu[1] - mu[0],
            r if r == p - 1 => mu[p - 1] - mu[p - 2],
            r => 0.5 * (mu[r + 1] - mu[r - 1]),
        })
        .collect()
}

/// Provenance carried into every vector built from one interval.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Provenance {
    pub source_id: String,
    pub interval_index: usize,
    pub label: Option<Label>,
}

impl Provenance {
    fn vector(&self, kind: FeatureKind, values: Vec<f64>) -> FeatureVector {
        FeatureVector {
            kind,
            values,
            label: self.label,
            source_id: self.source_id.clone(),
            interval_index: self.interval_index,
        }
    }
}

/// SPS-P: `[V_0, …, V_{p−1}]`.
pub fn sps_periodicity(attrs: &SpsAttributes, prov: &Provenance) -> FeatureVector {
    let values = (0..attrs.p).map(|r| periodicity(attrs.autocorr(r))).collect();
    prov.vector(FeatureKind::SpsP, values)
}

/// SPS-ZCR: `[Z_0, …, Z_{p−1}]`.
pub fn sps_zcr(attrs: &SpsAttributes, prov: &Provenance) -> FeatureVector {
    let values = (0..attrs.p).map(|r| zero_crossing_rate(attrs.centered(r))).collect();
    prov.vector(FeatureKind::SpsZcr, values)
}

/// SPS-SCG: `[μ_0..μ_{p−1}, σ_0..σ_{p−1}, Δμ_0..Δμ_{p−1}]`.
pub fn sps_scg(attrs: &SpsAttributes, prov: &Provenance) -> Result<FeatureVector> {
    let p = attrs.p;
    if p < 2 {
        return Err(Error::Config(format!("SPS-SCG needs p ≥ 2, got {p}")));
    }
    let mut values = Vec::with_capacity(3 * p);
    values.extend_from_slice(&attrs.centroids);
    values.extend((0..p).map(|r| attrs.std_dev(r)));
    values.extend(centroid_gradient(&attrs.centroids));
    Ok(prov.vector(FeatureKind::SpsScg, values))
}

/// Concatenation `[SPS-P | SPS-ZCR | SPS-SCG]`.
pub fn early_fuse(fp: &FeatureVector, fz: &FeatureVector, fs: &FeatureVector) -> Result<FeatureVector> {
    if (fp.kind, fz.kind, fs.kind) != (FeatureKind::SpsP, FeatureKind::SpsZcr, FeatureKind::SpsScg) {
        return Err(Error::Fusion(format!(
            "expected kinds sps_p, sps_zcr, sps_scg; got {}, {}, {}",
            fp.kind, fz.kind, fs.kind
        )));
    }
    if !fp.same_origin(fz) || !fp.same_origin(fs) {
        return Err(Error::Fusion(format!(
            "provenance mismatch: {}#{}, {}#{}, {}#{}",
            fp.source_id, fp.interval_index, fz.source_id, fz.interval_index, fs.source_id, fs.interval_index
        )));
    }
    let mut values = vec![];
    values.extend_from_slice(&fp.values);
    values.extend_from_slice(&fz.values);
    values.extend_from_slice(&fs.values);
    Ok(FeatureVector {
        kind: FeatureKind::EarlyFused,
        values,
        label: fp.label,
        source_id: fp.source_id.clone(),
        interval_index: fp.interval_index,
    })
}
