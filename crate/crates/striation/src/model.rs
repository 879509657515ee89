//! `spsgmm v1` model files.
//!
//! ```text
//! spsgmm v1
//! feature sps_scg
//! dim 60
//! pipeline sample_rate 22050 interval_len 22050 frame_len 662 hop 22 window rect p 20
//! meta seed 0 chosen_k 4 grid 1 2 4 8 16 32
//! standardizer
//! mean <dim reals>
//! std <dim reals>
//! class speech
//! k 4
//! weights <k reals>
//! means
//! <dim reals>            (k rows)
//! vars
//! <dim reals>            (k rows)
//! log_prior <real>
//! class music
//! ...
//! ```
//!
//! Reals carry 17 significant digits so a reload is bit-identical.

use std::fmt::Write as _;
use std::path::Path;

use striation_core::gmm::{ClassModel, DiagonalGmm, GmmModel, Standardizer, TrainMeta};
use striation_core::{FeatureKind, Label, PipelineConfig, Window};

use crate::error::{Error, Result};
use crate::output::write_atomic;

const MAGIC: &str = "spsgmm v1";

/// Extraction settings a model was trained under; prediction must match them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineSpec {
    pub sample_rate: u32,
    pub interval_len: usize,
    pub frame_len: usize,
    pub hop: usize,
    pub window: Window,
    pub p: usize,
}

impl PipelineSpec {
    pub fn new(sample_rate: u32, interval_len: usize, cfg: &PipelineConfig) -> Self {
        PipelineSpec {
            sample_rate,
            interval_len,
            frame_len: cfg.frame.frame_len(),
            hop: cfg.frame.hop(),
            window: cfg.frame.window(),
            p: cfg.p,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub model: GmmModel,
    pub pipeline: Option<PipelineSpec>,
}

fn reals(out: &mut String, xs: &[f64]) {
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write!(out, "{x:.16e}").unwrap();
    }
}

fn class_section(out: &mut String, label: Label, c: &ClassModel) {
    let m = &c.mixture;
    writeln!(out, "class {label}").unwrap();
    writeln!(out, "k {}", m.k()).unwrap();
    out.push_str("weights ");
    reals(out, m.weights());
    out.push_str("\nmeans\n");
    for j in 0..m.k() {
        reals(out, m.mean(j));
        out.push('\n');
    }
    out.push_str("vars\n");
    for j in 0..m.k() {
        reals(out, m.var(j));
        out.push('\n');
    }
    out.push_str("log_prior ");
    reals(out, &[c.log_prior]);
    out.push('\n');
}

pub fn to_text(file: &ModelFile) -> String {
    let m = &file.model;
    let mut out = String::new();
    writeln!(out, "{MAGIC}").unwrap();
    writeln!(out, "feature {}", m.feature_kind).unwrap();
    writeln!(out, "dim {}", m.dim()).unwrap();
    if let Some(p) = file.pipeline {
        writeln!(
            out,
            "pipeline sample_rate {} interval_len {} frame_len {} hop {} window {} p {}",
            p.sample_rate, p.interval_len, p.frame_len, p.hop, p.window, p.p
        )
        .unwrap();
    }
    let grid: Vec<String> = m.meta.grid.iter().map(|k| k.to_string()).collect();
    writeln!(out, "meta seed {} chosen_k {} grid {}", m.meta.seed, m.meta.chosen_k, grid.join(" ")).unwrap();
    out.push_str("standardizer\nmean ");
    reals(&mut out, m.standardizer.mean());
    out.push_str("\nstd ");
    reals(&mut out, m.standardizer.std());
    out.push('\n');
    class_section(&mut out, Label::Speech, &m.speech);
    class_section(&mut out, Label::Music, &m.music);
    out
}

struct Parser<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
    path: &'a Path,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Format { path: self.path.to_path_buf(), line: self.line, msg: msg.into() }
    }

    fn next(&mut self) -> Result<&'a str> {
        match self.lines.next() {
            Some((i, l)) => {
                self.line = i + 1;
                Ok(l.trim_end())
            }
            None => {
                self.line += 1;
                Err(self.err("unexpected end of file"))
            }
        }
    }

    /// The next line, which must start with `key`; returns the remainder.
    fn keyed(&mut self, key: &str) -> Result<&'a str> {
        let l = self.next()?;
        let mut parts = l.splitn(2, ' ');
        if parts.next() != Some(key) {
            return Err(self.err(format!("expected `{key}`, found {l:?}")));
        }
        Ok(parts.next().unwrap_or("").trim())
    }

    fn exact(&mut self, want: &str) -> Result<()> {
        let l = self.next()?;
        if l != want {
            return Err(self.err(format!("expected `{want}`, found {l:?}")));
        }
        Ok(())
    }

    fn parse<T: std::str::FromStr>(&self, s: &str, what: &str) -> Result<T> {
        s.parse().map_err(|_| self.err(format!("bad {what} {s:?}")))
    }

    fn reals(&self, s: &str, n: usize) -> Result<Vec<f64>> {
        let xs = s.split_whitespace().map(|t| self.parse::<f64>(t, "real")).collect::<Result<Vec<_>>>()?;
        if xs.len() != n {
            return Err(self.err(format!("expected {n} values, found {}", xs.len())));
        }
        Ok(xs)
    }

    /// `key v key v ...` pairs in the given order.
    fn pairs(&self, s: &'a str, keys: &[&str]) -> Result<Vec<&'a str>> {
        let toks: Vec<&'a str> = s.split_whitespace().collect();
        let mut vals = Vec::new();
        for (i, key) in keys.iter().enumerate() {
            match (toks.get(2 * i), toks.get(2 * i + 1)) {
                (Some(k), Some(v)) if k == key => vals.push(*v),
                _ => return Err(self.err(format!("expected `{key} <value>`"))),
            }
        }
        Ok(vals)
    }

    fn class(&mut self, label: Label, dim: usize) -> Result<ClassModel> {
        self.exact(&format!("class {label}"))?;
        let k: usize = {
            let s = self.keyed("k")?;
            self.parse(s, "component count")?
        };
        let weights = {
            let s = self.keyed("weights")?;
            self.reals(s, k)?
        };
        self.exact("means")?;
        let mut means = Vec::with_capacity(k);
        for _ in 0..k {
            let l = self.next()?;
            means.push(self.reals(l, dim)?);
        }
        self.exact("vars")?;
        let mut vars = Vec::with_capacity(k);
        for _ in 0..k {
            let l = self.next()?;
            vars.push(self.reals(l, dim)?);
        }
        let log_prior = {
            let s = self.keyed("log_prior")?;
            self.reals(s, 1)?[0]
        };
        let mixture = DiagonalGmm::from_parts(weights, means, vars).map_err(|e| self.err(e.to_string()))?;
        Ok(ClassModel { mixture, log_prior })
    }
}

pub fn from_text(text: &str, path: &Path) -> Result<ModelFile> {
    let mut p = Parser { lines: text.lines().enumerate(), line: 0, path };
    p.exact(MAGIC)?;
    let feature_kind: FeatureKind = {
        let s = p.keyed("feature")?;
        s.parse().map_err(|e: striation_core::Error| p.err(e.to_string()))?
    };
    let dim: usize = {
        let s = p.keyed("dim")?;
        p.parse(s, "dimension")?
    };
    let mut l = p.next()?;
    let mut pipeline = None;
    if let Some(rest) = l.strip_prefix("pipeline ") {
        let v = p.pairs(rest, &["sample_rate", "interval_len", "frame_len", "hop", "window", "p"])?;
        pipeline = Some(PipelineSpec {
            sample_rate: p.parse(v[0], "sample_rate")?,
            interval_len: p.parse(v[1], "interval_len")?,
            frame_len: p.parse(v[2], "frame_len")?,
            hop: p.parse(v[3], "hop")?,
            window: v[4].parse().map_err(|e: striation_core::Error| p.err(e.to_string()))?,
            p: p.parse(v[5], "p")?,
        });
        l = p.next()?;
    }
    let meta = match l.strip_prefix("meta ") {
        Some(rest) => {
            let toks: Vec<&str> = rest.split_whitespace().collect();
            if toks.len() < 5 || toks[0] != "seed" || toks[2] != "chosen_k" || toks[4] != "grid" {
                return Err(p.err("expected `meta seed <n> chosen_k <k> grid <k...>`"));
            }
            TrainMeta {
                seed: p.parse(toks[1], "seed")?,
                chosen_k: p.parse(toks[3], "chosen_k")?,
                grid: toks[5..].iter().map(|t| p.parse(t, "grid value")).collect::<Result<_>>()?,
            }
        }
        None => return Err(p.err(format!("expected `meta`, found {l:?}"))),
    };
    p.exact("standardizer")?;
    let mean = {
        let s = p.keyed("mean")?;
        p.reals(s, dim)?
    };
    let std = {
        let s = p.keyed("std")?;
        p.reals(s, dim)?
    };
    let standardizer = Standardizer::from_parts(mean, std).map_err(|e| p.err(e.to_string()))?;
    let speech = p.class(Label::Speech, dim)?;
    let music = p.class(Label::Music, dim)?;
    if let Some((i, l)) = p.lines.find(|(_, l)| !l.trim().is_empty()) {
        p.line = i + 1;
        return Err(p.err(format!("trailing content {l:?}")));
    }
    Ok(ModelFile { model: GmmModel { feature_kind, standardizer, speech, music, meta }, pipeline })
}

pub fn save_model(path: &Path, file: &ModelFile) -> Result<()> {
    let text = to_text(file);
    write_atomic(path, |w| w.write_all(text.as_bytes()))
}

pub fn load_model(path: &Path) -> Result<ModelFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_text(&text, path)
}
