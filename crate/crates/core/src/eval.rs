//! Repeated stratified train/test splits with macro-F scoring.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::features::{FeatureKind, FeatureVector};
use crate::gmm::{self, GmmModel, DEFAULT_GRID};
use crate::peaks::PeakDiagnostics;
use crate::pipeline::{extract_all, IntervalFeatures, PipelineConfig};
use crate::rng::{derive_seed, seeded};
use crate::segment::{AudioInterval, Label};

/// 2×2 counts indexed `[actual][predicted]` (speech = 0, music = 1).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionMatrix {
    counts: [[u64; 2]; 2],
}

impl ConfusionMatrix {
    pub fn from_counts(counts: [[u64; 2]; 2]) -> Self {
        ConfusionMatrix { counts }
    }

    pub fn add(&mut self, actual: Label, predicted: Label) {
        self.counts[actual.index()][predicted.index()] += 1;
    }

    pub fn get(&self, actual: Label, predicted: Label) -> u64 {
        self.counts[actual.index()][predicted.index()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

/// F1 of one class treated as positive.
fn class_f1(cm: &ConfusionMatrix, class: Label) -> f64 {
    let other = match class {
        Label::Speech => Label::Music,
        Label::Music => Label::Speech,
    };
    let tp = cm.get(class, class);
    let fp = cm.get(other, class);
    let fn_ = cm.get(class, other);
    let predicted = tp + fp;
    let actual = tp + fn_;
    if predicted == 0 && actual == 0 {
        return 1.0;
    }
    if predicted == 0 || tp == 0 {
        return 0.0;
    }
    2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
}

/// Macro-averaged F1 over speech and music.
pub fn f_score(cm: &ConfusionMatrix) -> Result<f64> {
    if cm.total() == 0 {
        return Err(Error::EmptyConfusion);
    }
    Ok(0.5 * (class_f1(cm, Label::Speech) + class_f1(cm, Label::Music)))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum SplitUnit {
    /// Whole source files go to one side.
    #[default]
    File,
    Interval,
}

impl SplitUnit {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitUnit::File => "file",
            SplitUnit::Interval => "interval",
        }
    }
}

impl fmt::Display for SplitUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SplitUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "file" => Ok(SplitUnit::File),
            "interval" => Ok(SplitUnit::Interval),
            other => Err(Error::Config(format!("unknown split unit `{other}`"))),
        }
    }
}

/// Anything that can be assigned to a split side.
pub trait Sample {
    fn label(&self) -> Option<Label>;
    fn source_id(&self) -> &str;
}

impl Sample for FeatureVector {
    fn label(&self) -> Option<Label> {
        self.label
    }
    fn source_id(&self) -> &str {
        &self.source_id
    }
}

impl Sample for AudioInterval {
    fn label(&self) -> Option<Label> {
        self.label
    }
    fn source_id(&self) -> &str {
        &self.source_id
    }
}

impl Sample for IntervalFeatures {
    fn label(&self) -> Option<Label> {
        IntervalFeatures::label(self)
    }
    fn source_id(&self) -> &str {
        IntervalFeatures::source_id(self)
    }
}

impl<T: Sample + ?Sized> Sample for &T {
    fn label(&self) -> Option<Label> {
        (**self).label()
    }
    fn source_id(&self) -> &str {
        (**self).source_id()
    }
}

/// Per-class random split; returns ascending `(train, test)` index lists.
///
/// Each class sends `round(frac · n)` of its units to training, clamped so
/// that both sides get at least one unit.
pub fn stratified_split<T: Sample>(
    items: &[T],
    frac: f64,
    seed: u64,
    unit: SplitUnit,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(frac > 0.0 && frac < 1.0) {
        return Err(Error::Split(format!("train fraction must be in (0, 1), got {frac}")));
    }
    let mut rng = seeded(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for label in Label::ALL {
        // Unit key → member indices, ordered by key for determinism.
        let mut groups: BTreeMap<(&str, usize), Vec<usize>> = BTreeMap::new();
        for (i, item) in items.iter().enumerate() {
            if item.label() != Some(label) {
                continue;
            }
            let key = match unit {
                SplitUnit::File => (item.source_id(), 0),
                SplitUnit::Interval => ("", i),
            };
            groups.entry(key).or_default().push(i);
        }
        let n = groups.len();
        if n == 0 {
            return Err(Error::Split(format!("no {label} samples")));
        }
        if n < 2 {
            let hint = if unit == SplitUnit::File { "; try split unit `interval`" } else { "" };
            return Err(Error::Split(format!("class {label} has a single {unit}{hint}")));
        }
        let mut units: Vec<Vec<usize>> = groups.into_values().collect();
        units.shuffle(&mut rng);
        let n_train = (libm::round(frac * n as f64) as usize).clamp(1, n - 1);
        for (j, members) in units.into_iter().enumerate() {
            if j < n_train {
                train.extend(members);
            } else {
                test.extend(members);
            }
        }
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// What a trial trains and scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Single(FeatureKind),
    /// One model per base feature, combined by [`gmm::late_fuse_score`].
    LateFused,
}

impl Method {
    /// All kinds reported by `--feature all`.
    pub const ALL: [Method; 5] = [
        Method::Single(FeatureKind::SpsP),
        Method::Single(FeatureKind::SpsZcr),
        Method::Single(FeatureKind::SpsScg),
        Method::Single(FeatureKind::EarlyFused),
        Method::LateFused,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Single(k) => k.as_str(),
            Method::LateFused => "late_fused",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

const BASE_KINDS: [FeatureKind; 3] = [FeatureKind::SpsP, FeatureKind::SpsZcr, FeatureKind::SpsScg];

#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub n_trials: usize,
    pub train_frac: f64,
    pub seed: u64,
    pub split_unit: SplitUnit,
    pub k_grid: Vec<usize>,
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig {
            n_trials: 20,
            train_frac: 0.7,
            seed: 0,
            split_unit: SplitUnit::File,
            k_grid: DEFAULT_GRID.to_vec(),
        }
    }
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(Error::Config("need at least one trial".into()));
        }
        if !(self.train_frac > 0.0 && self.train_frac < 1.0) {
            return Err(Error::Config(format!("train fraction must be in (0, 1), got {}", self.train_frac)));
        }
        if self.k_grid.is_empty() || self.k_grid.contains(&0) {
            return Err(Error::Config("component grid must be non-empty and positive".into()));
        }
        Ok(())
    }

    pub fn trial_seed(&self, trial: usize) -> u64 {
        derive_seed(self.seed, trial as u64)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Diagnostics {
    pub peaks: PeakDiagnostics,
    pub skipped_files: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub trial: usize,
    /// Chosen component count per trained model (three for late fusion).
    pub chosen_k: Vec<usize>,
    pub confusion: ConfusionMatrix,
    pub f_score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub method: Method,
    pub config: TrialConfig,
    pub trials: Vec<TrialResult>,
    pub mean_f: f64,
    /// Population variance over trials.
    pub var_f: f64,
    pub diagnostics: Diagnostics,
}

/// Models fitted on one training split.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialModels {
    pub models: Vec<GmmModel>,
}

fn vectors(features: &[&IntervalFeatures], kind: FeatureKind) -> Vec<FeatureVector> {
    features.iter().map(|f| f.vector(kind)).collect()
}

/// Grid-searched models on the given training intervals.
pub fn fit_trial_models(
    train: &[&IntervalFeatures],
    method: Method,
    cfg: &TrialConfig,
    seed: u64,
) -> Result<TrialModels> {
    let kinds: &[FeatureKind] = match method {
        Method::Single(k) => &[k][..],
        Method::LateFused => &BASE_KINDS[..],
    };
    let mut models = Vec::new();
    for (i, &kind) in kinds.iter().enumerate() {
        let vs = vectors(train, kind);
        let refs: Vec<&FeatureVector> = vs.iter().collect();
        let gs = gmm::grid_search(&refs, &cfg.k_grid, derive_seed(seed, i as u64), cfg.split_unit)?;
        models.push(gs.model);
    }
    Ok(TrialModels { models })
}

fn predict(models: &TrialModels, method: Method, f: &IntervalFeatures) -> Result<Label> {
    match method {
        Method::Single(kind) => Ok(gmm::score(&models.models[0], &f.vector(kind))?.decision),
        Method::LateFused => {
            let vs = [f.sps_p.clone(), f.sps_zcr.clone(), f.sps_scg.clone()];
            let ms: Vec<&GmmModel> = models.models.iter().collect();
            let fs: Vec<&FeatureVector> = vs.iter().collect();
            Ok(gmm::late_fuse_score(&ms, &fs)?.decision)
        }
    }
}

/// One split → fit → score round. Trials are independent of each other.
pub fn run_trial(
    features: &[IntervalFeatures],
    method: Method,
    cfg: &TrialConfig,
    trial: usize,
) -> Result<TrialResult> {
    let wrap = |e: Error| Error::Trial { trial, source: Box::new(e) };
    if let Some(f) = features.iter().find(|f| f.label().is_none()) {
        return Err(wrap(Error::Shape(format!("unlabeled interval {}#{}", f.source_id(), f.sps_p.interval_index))));
    }
    let seed = cfg.trial_seed(trial);
    let (train_idx, test_idx) =
        stratified_split(features, cfg.train_frac, derive_seed(seed, 0), cfg.split_unit).map_err(wrap)?;
    let train: Vec<&IntervalFeatures> = train_idx.iter().map(|&i| &features[i]).collect();
    let models = fit_trial_models(&train, method, cfg, derive_seed(seed, 1)).map_err(wrap)?;
    let mut confusion = ConfusionMatrix::default();
    for &i in &test_idx {
        let f = &features[i];
        confusion.add(f.label().expect("checked above"), predict(&models, method, f).map_err(wrap)?);
    }
    let f_score = f_score(&confusion).map_err(wrap)?;
    Ok(TrialResult { trial, chosen_k: models.models.iter().map(|m| m.meta.chosen_k).collect(), confusion, f_score })
}

/// Aggregate trial results (in any order) into a report.
pub fn summarize(
    method: Method,
    config: &TrialConfig,
    mut trials: Vec<TrialResult>,
    diagnostics: Diagnostics,
) -> EvalReport {
    trials.sort_by_key(|t| t.trial);
    let n = trials.len().max(1) as f64;
    let mean_f = trials.iter().map(|t| t.f_score).sum::<f64>() / n;
    let var_f = trials.iter().map(|t| (t.f_score - mean_f) * (t.f_score - mean_f)).sum::<f64>() / n;
    EvalReport { method, config: config.clone(), trials, mean_f, var_f, diagnostics }
}

pub fn corpus_diagnostics(features: &[IntervalFeatures]) -> PeakDiagnostics {
    let mut d = PeakDiagnostics::default();
    for f in features {
        d.merge(f.diagnostics);
    }
    d
}

/// All trials sequentially on precomputed features.
pub fn evaluate_features(features: &[IntervalFeatures], method: Method, cfg: &TrialConfig) -> Result<EvalReport> {
    cfg.validate()?;
    let trials = (0..cfg.n_trials).map(|t| run_trial(features, method, cfg, t)).collect::<Result<Vec<_>>>()?;
    let diagnostics = Diagnostics { peaks: corpus_diagnostics(features), skipped_files: Vec::new() };
    Ok(summarize(method, cfg, trials, diagnostics))
}

/// Extract features once, then run every trial.
pub fn run_experiment(
    corpus: &[AudioInterval],
    method: Method,
    cfg: &TrialConfig,
    pipeline: PipelineConfig,
) -> Result<EvalReport> {
    if let Some(first) = corpus.first() {
        if let Some(other) = corpus.iter().find(|iv| iv.sample_rate != first.sample_rate) {
            return Err(Error::Config(format!(
                "mixed sample rates in one experiment: {} Hz and {} Hz",
                first.sample_rate, other.sample_rate
            )));
        }
    }
    let features = extract_all(pipeline, corpus)?;
    evaluate_features(&features, method, cfg)
}
