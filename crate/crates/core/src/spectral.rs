//! Framing and half-spectrum magnitudes.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::fft::{Complex64, RealFft};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum Window {
    #[default]
    Rectangular,
    Hamming,
}

impl Window {
    pub fn as_str(self) -> &'static str {
        match self {
            Window::Rectangular => "rect",
            Window::Hamming => "hamming",
        }
    }

    pub fn coefficients(self, len: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; len],
            Window::Hamming if len == 1 => vec![1.0],
            Window::Hamming => {
                (0..len).map(|n| 0.54 - 0.46 * libm::cos(2.0 * PI * n as f64 / (len - 1) as f64)).collect()
            }
        }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rect" | "rectangular" => Ok(Window::Rectangular),
            "hamming" => Ok(Window::Hamming),
            other => Err(Error::Config(format!("unknown window `{other}`"))),
        }
    }
}

/// Frame geometry: `frame_len = 2·N_f` samples advanced by `hop`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FrameConfig {
    frame_len: usize,
    hop: usize,
    window: Window,
}

impl FrameConfig {
    pub fn new(frame_len: usize, hop: usize, window: Window) -> Result<Self> {
        if frame_len == 0 || !frame_len.is_multiple_of(2) {
            return Err(Error::Config(format!("frame length must be even and positive, got {frame_len}")));
        }
        if hop == 0 || hop > frame_len {
            return Err(Error::Config(format!("hop must be in 1..={frame_len}, got {hop}")));
        }
        Ok(FrameConfig { frame_len, hop, window })
    }

    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    pub fn window(&self) -> Window {
        self.window
    }

    /// `N_f`, the number of retained spectrum bins.
    pub fn n_bins(&self) -> usize {
        self.frame_len / 2
    }

    pub fn check_interval(&self, interval_len: usize) -> Result<()> {
        if self.frame_len > interval_len {
            return Err(Error::Config(format!(
                "frame length {} exceeds interval length {interval_len}",
                self.frame_len
            )));
        }
        Ok(())
    }

    /// `L = ⌊(len − frame_len)/hop⌋ + 1`, or 0 when the interval is shorter than a frame.
    pub fn frame_count(&self, interval_len: usize) -> usize {
        frame_count(interval_len, self.frame_len, self.hop)
    }
}

/// Number of whole frames of `frame_len` samples at stride `hop`.
pub fn frame_count(interval_len: usize, frame_len: usize, hop: usize) -> usize {
    if interval_len < frame_len || hop == 0 {
        0
    } else {
        (interval_len - frame_len) / hop + 1
    }
}

/// Frame geometry from millisecond durations. Odd sample counts are bumped
/// to the next even value.
pub fn make_frame_config(sample_rate: u32, frame_ms: f64, hop_ms: f64, window: Window) -> Result<FrameConfig> {
    if !(hop_ms > 0.0 && frame_ms > hop_ms) || !frame_ms.is_finite() {
        return Err(Error::Config(format!("need frame_ms > hop_ms > 0, got frame_ms={frame_ms} hop_ms={hop_ms}")));
    }
    if sample_rate == 0 {
        return Err(Error::Config("sample rate must be positive".into()));
    }
    let rate = f64::from(sample_rate);
    let mut frame_len = libm::round(frame_ms * rate / 1000.0) as usize;
    if frame_len % 2 == 1 {
        frame_len += 1;
    }
    if frame_len < 2 {
        frame_len = 2;
    }
    let hop = (libm::round(hop_ms * rate / 1000.0) as usize).max(1);
    FrameConfig::new(frame_len, hop.min(frame_len), window)
}

/// Overlapping frames of `samples`; the partial final frame is dropped.
pub fn frame_interval<'a>(samples: &'a [f64], cfg: &FrameConfig) -> impl ExactSizeIterator<Item = &'a [f64]> + 'a {
    let count = cfg.frame_count(samples.len());
    let (len, hop) = (cfg.frame_len, cfg.hop);
    (0..count).map(move |l| &samples[l * hop..l * hop + len])
}

/// Linear magnitudes `|X_l[k]|` for `k = 0..N_f`.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnitudeSpectrum {
    pub bins: Vec<f64>,
    pub frame_index: usize,
}

/// Reusable transform state for one frame configuration.
#[derive(Debug, Clone)]
pub struct SpectrumAnalyzer {
    cfg: FrameConfig,
    fft: RealFft,
    window: Vec<f64>,
    windowed: Vec<f64>,
    spectrum: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl SpectrumAnalyzer {
    pub fn new(cfg: FrameConfig) -> Self {
        let fft = RealFft::new(cfg.frame_len);
        let zero = Complex64::new(0.0, 0.0);
        SpectrumAnalyzer {
            window: cfg.window.coefficients(cfg.frame_len),
            windowed: vec![0.0; cfg.frame_len],
            spectrum: vec![zero; fft.output_len()],
            scratch: vec![zero; fft.scratch_len()],
            fft,
            cfg,
        }
    }

    pub fn config(&self) -> &FrameConfig {
        &self.cfg
    }

    /// Writes the `N_f` magnitudes of `frame` into `out`.
    pub fn magnitudes_into(&mut self, frame: &[f64], out: &mut [f64]) -> Result<()> {
        if frame.len() != self.cfg.frame_len {
            return Err(Error::Shape(format!("frame has {} samples, expected {}", frame.len(), self.cfg.frame_len)));
        }
        if out.len() != self.cfg.n_bins() {
            return Err(Error::Shape(format!("output has {} bins, expected {}", out.len(), self.cfg.n_bins())));
        }
        if let Some(index) = frame.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        for ((w, &x), &c) in self.windowed.iter_mut().zip(frame).zip(&self.window) {
            *w = x * c;
        }
        self.fft.process(&self.windowed, &mut self.spectrum, &mut self.scratch);
        for (o, z) in out.iter_mut().zip(&self.spectrum) {
            // sqrt(re² + im²) scales exactly under power-of-two gains.
            *o = libm::sqrt(z.re * z.re + z.im * z.im);
        }
        Ok(())
    }

    pub fn magnitude_spectrum(&mut self, frame: &[f64], frame_index: usize) -> Result<MagnitudeSpectrum> {
        let mut bins = vec![0.0; self.cfg.n_bins()];
        self.magnitudes_into(frame, &mut bins)?;
        Ok(MagnitudeSpectrum { bins, frame_index })
    }
}

/// One-shot convenience around [`SpectrumAnalyzer`].
pub fn magnitude_spectrum(frame: &[f64], cfg: &FrameConfig) -> Result<MagnitudeSpectrum> {
    SpectrumAnalyzer::new(*cfg).magnitude_spectrum(frame, 0)
}

/// Magnitude spectra for every frame of an interval.
pub fn spectrogram(samples: &[f64], cfg: &FrameConfig) -> Result<Vec<MagnitudeSpectrum>> {
    let mut analyzer = SpectrumAnalyzer::new(*cfg);
    frame_interval(samples, cfg).enumerate().map(|(l, frame)| analyzer.magnitude_spectrum(frame, l)).collect()
}
