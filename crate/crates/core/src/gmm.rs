//! Two-class Gaussian mixture classifier with diagonal covariances.
//!
//! Features are z-scored with statistics from the training split, each
//! class gets its own mixture fitted by expectation-maximization, and a
//! vector is assigned to the class with the larger
//! `log p(x | class) + log P(class)`. Ties go to speech.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::eval::{self, stratified_split, ConfusionMatrix, SplitUnit};
use crate::features::{FeatureKind, FeatureVector};
use crate::rng::{derive_seed, seeded};
use crate::segment::Label;

pub const STD_FLOOR: f64 = 1e-8;
/// Variance floor in standardized units, i.e. relative to the pooled
/// per-dimension training variance.
pub const VAR_FLOOR: f64 = 1e-6;
pub const DEFAULT_GRID: [usize; 6] = [1, 2, 4, 8, 16, 32];

const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// Per-dimension z-scoring fitted on training data.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    mean: Vec<f64>,
    std: Vec<f64>,
}

impl Standardizer {
    pub fn fit<'a, I>(rows: I, dim: usize) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [f64]> + Clone,
    {
        let mut n = 0usize;
        let mut mean = vec![0.0; dim];
        for row in rows.clone() {
            if row.len() != dim {
                return Err(Error::Shape(format!("row has {} values, expected {dim}", row.len())));
            }
            for (m, x) in mean.iter_mut().zip(row) {
                *m += x;
            }
            n += 1;
        }
        if n == 0 {
            return Err(Error::Shape("cannot standardize an empty set".into()));
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        let mut var = vec![0.0; dim];
        for row in rows {
            for ((v, x), m) in var.iter_mut().zip(row).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        let std = var.iter().map(|v| libm::sqrt(v / n as f64).max(STD_FLOOR)).collect();
        Ok(Standardizer { mean, std })
    }

    pub fn from_parts(mean: Vec<f64>, std: Vec<f64>) -> Result<Self> {
        if mean.len() != std.len() {
            return Err(Error::Shape("standardizer mean/std length mismatch".into()));
        }
        if std.iter().any(|s| !s.is_finite() || *s < STD_FLOOR) || mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::Config("standardizer values must be finite with std ≥ 1e-8".into()));
        }
        Ok(Standardizer { mean, std })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn std(&self) -> &[f64] {
        &self.std
    }

    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        for (((o, v), m), s) in out.iter_mut().zip(x).zip(&self.mean).zip(&self.std) {
            *o = (v - m) / s;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.apply_into(x, &mut out);
        out
    }
}

/// Mixture of `k` axis-aligned Gaussians in `dim` dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalGmm {
    dim: usize,
    weights: Vec<f64>,
    means: Vec<f64>,
    vars: Vec<f64>,
}

impl DiagonalGmm {
    pub fn from_parts(weights: Vec<f64>, means: Vec<Vec<f64>>, vars: Vec<Vec<f64>>) -> Result<Self> {
        let k = weights.len();
        if k == 0 || means.len() != k || vars.len() != k {
            return Err(Error::Shape("mixture needs matching, non-empty weights/means/vars".into()));
        }
        let dim = means[0].len();
        if means.iter().chain(&vars).any(|r| r.len() != dim) {
            return Err(Error::Shape("mixture component rows differ in dimension".into()));
        }
        if vars.iter().flatten().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::Config("mixture variances must be positive and finite".into()));
        }
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|w| w.is_nan() || *w < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("mixture weights must lie on the simplex (sum {sum})")));
        }
        Ok(DiagonalGmm { dim, weights, means: means.concat(), vars: vars.concat() })
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mean(&self, j: usize) -> &[f64] {
        &self.means[j * self.dim..(j + 1) * self.dim]
    }

    pub fn var(&self, j: usize) -> &[f64] {
        &self.vars[j * self.dim..(j + 1) * self.dim]
    }

    /// `ln w_j + ln N(x; m_j, diag v_j)` for every component.
    fn component_log_densities(&self, x: &[f64], out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate() {
            let (m, v) = (self.mean(j), self.var(j));
            let mut quad = 0.0;
            let mut log_det = 0.0;
            for ((xi, mi), vi) in x.iter().zip(m).zip(v) {
                let d = xi - mi;
                quad += d * d / vi;
                log_det += libm::log(*vi);
            }
            *o = libm::log(self.weights[j]) - 0.5 * (self.dim as f64 * LN_2PI + log_det + quad);
        }
    }

    /// `ln p(x)` on already-standardized input.
    pub fn log_likelihood(&self, x: &[f64]) -> f64 {
        let mut buf = vec![0.0; self.k()];
        self.component_log_densities(x, &mut buf);
        log_sum_exp(&buf)
    }

    /// Posterior component probabilities for `x`.
    pub fn responsibilities(&self, x: &[f64]) -> Vec<f64> {
        let mut buf = vec![0.0; self.k()];
        self.component_log_densities(x, &mut buf);
        let lse = log_sum_exp(&buf);
        buf.iter().map(|l| libm::exp(l - lse)).collect()
    }
}

pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + libm::log(values.iter().map(|v| libm::exp(v - max)).sum::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmOptions {
    pub max_iter: usize,
    /// Stop once `|ΔLL| < tol · |LL|`.
    pub tol: f64,
    pub var_floor: f64,
}

impl Default for EmOptions {
    fn default() -> Self {
        EmOptions { max_iter: 200, tol: 1e-6, var_floor: VAR_FLOOR }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmFit {
    pub mixture: DiagonalGmm,
    /// Total training log-likelihood evaluated before each M-step, plus the final value.
    pub log_likelihood: Vec<f64>,
    pub converged: bool,
}

/// Indices of `k` farthest-point seeds; the first is drawn from `seed`.
fn farthest_point_seeds(data: &[f64], dim: usize, k: usize, seed: u64) -> Vec<usize> {
    let n = data.len() / dim;
    let mut rng = seeded(seed);
    let first = rng.random_range(0..n);
    let mut chosen = vec![first];
    let row = |i: usize| &data[i * dim..(i + 1) * dim];
    let dist2 = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
    let mut nearest: Vec<f64> = (0..n).map(|i| dist2(row(i), row(first))).collect();
    while chosen.len() < k {
        let mut best = 0;
        for i in 1..n {
            if nearest[i] > nearest[best] {
                best = i;
            }
        }
        chosen.push(best);
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(dist2(row(i), row(best)));
        }
    }
    chosen
}

/// EM for a diagonal mixture on row-major `data` (`n × dim`, standardized).
pub fn fit_mixture(data: &[f64], dim: usize, k: usize, seed: u64, opts: &EmOptions) -> Result<EmFit> {
    if dim == 0 || !data.len().is_multiple_of(dim) {
        return Err(Error::Shape(format!("data length {} is not a multiple of dim {dim}", data.len())));
    }
    let n = data.len() / dim;
    if k == 0 || n < k {
        return Err(Error::Config(format!("cannot fit {k} components to {n} samples")));
    }
    if let Some(index) = data.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let row = |i: usize| &data[i * dim..(i + 1) * dim];

    let mut mean_all = vec![0.0; dim];
    for i in 0..n {
        for (m, x) in mean_all.iter_mut().zip(row(i)) {
            *m += x;
        }
    }
    mean_all.iter_mut().for_each(|m| *m /= n as f64);
    let mut var_all = vec![0.0; dim];
    for i in 0..n {
        for ((v, x), m) in var_all.iter_mut().zip(row(i)).zip(&mean_all) {
            *v += (x - m) * (x - m);
        }
    }
    var_all.iter_mut().for_each(|v| *v = (*v / n as f64).max(opts.var_floor));

    let seeds = farthest_point_seeds(data, dim, k, seed);
    let mut mix = DiagonalGmm {
        dim,
        weights: vec![1.0 / k as f64; k],
        means: seeds.iter().flat_map(|&i| row(i).iter().copied()).collect(),
        vars: var_all.repeat(k),
    };

    let mut resp = vec![0.0; n * k];
    let mut trace = Vec::new();
    let mut converged = false;
    let mut prev: Option<f64> = None;
    for _ in 0..opts.max_iter {
        let ll = e_step(&mix, data, &mut resp);
        trace.push(ll);
        if let Some(p) = prev {
            if (ll - p).abs() < opts.tol * p.abs() {
                converged = true;
                break;
            }
        }
        m_step(&mut mix, data, &resp, opts.var_floor);
        prev = Some(ll);
    }
    if !converged {
        trace.push(e_step(&mix, data, &mut resp));
    }
    Ok(EmFit { mixture: mix, log_likelihood: trace, converged })
}

fn e_step(mix: &DiagonalGmm, data: &[f64], resp: &mut [f64]) -> f64 {
    let (k, dim) = (mix.k(), mix.dim);
    let mut total = 0.0;
    for (x, r) in data.chunks_exact(dim).zip(resp.chunks_exact_mut(k)) {
        mix.component_log_densities(x, r);
        let lse = log_sum_exp(r);
        for v in r.iter_mut() {
            *v = libm::exp(*v - lse);
        }
        total += lse;
    }
    total
}

fn m_step(mix: &mut DiagonalGmm, data: &[f64], resp: &[f64], floor: f64) {
    let (k, dim) = (mix.k(), mix.dim);
    let n = data.len() / dim;
    for j in 0..k {
        let nk: f64 = resp.iter().skip(j).step_by(k).sum();
        mix.weights[j] = nk / n as f64;
        if nk <= 1e-12 {
            // Collapsed component: keep its previous location and spread.
            continue;
        }
        let mut mean = vec![0.0; dim];
        for (x, r) in data.chunks_exact(dim).zip(resp.chunks_exact(k)) {
            let w = r[j];
            for (m, xi) in mean.iter_mut().zip(x) {
                *m += w * xi;
            }
        }
        mean.iter_mut().for_each(|m| *m /= nk);
        let mut var = vec![0.0; dim];
        for (x, r) in data.chunks_exact(dim).zip(resp.chunks_exact(k)) {
            let w = r[j];
            for ((v, xi), m) in var.iter_mut().zip(x).zip(&mean) {
                *v += w * (xi - m) * (xi - m);
            }
        }
        var.iter_mut().for_each(|v| *v = (*v / nk).max(floor));
        mix.means[j * dim..(j + 1) * dim].copy_from_slice(&mean);
        mix.vars[j * dim..(j + 1) * dim].copy_from_slice(&var);
    }
    let total: f64 = mix.weights.iter().sum();
    mix.weights.iter_mut().for_each(|w| *w /= total);
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassModel {
    pub mixture: DiagonalGmm,
    pub log_prior: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TrainMeta {
    pub seed: u64,
    pub grid: Vec<usize>,
    pub chosen_k: usize,
}

/// Trained two-class model: standardizer, one mixture per class, priors.
#[derive(Debug, Clone, PartialEq)]
pub struct GmmModel {
    pub feature_kind: FeatureKind,
    pub standardizer: Standardizer,
    pub speech: ClassModel,
    pub music: ClassModel,
    pub meta: TrainMeta,
}

impl GmmModel {
    pub fn dim(&self) -> usize {
        self.standardizer.dim()
    }

    pub fn class(&self, label: Label) -> &ClassModel {
        match label {
            Label::Speech => &self.speech,
            Label::Music => &self.music,
        }
    }

    /// Per-class `(log-likelihood, log-prior)` on raw (unstandardized) values.
    fn class_terms(&self, f: &FeatureVector) -> Result<[(f64, f64); 2]> {
        if f.kind != self.feature_kind {
            return Err(Error::Shape(format!("model expects {} vectors, got {}", self.feature_kind, f.kind)));
        }
        if f.dim() != self.dim() {
            return Err(Error::Shape(format!("model expects dimension {}, got {}", self.dim(), f.dim())));
        }
        if let Some(index) = f.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let z = self.standardizer.apply(&f.values);
        Ok([
            (self.speech.mixture.log_likelihood(&z), self.speech.log_prior),
            (self.music.mixture.log_likelihood(&z), self.music.log_prior),
        ])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassScore {
    pub log_lik_speech: f64,
    pub log_lik_music: f64,
    pub decision: Label,
    /// `(ll_speech + prior_speech) − (ll_music + prior_music)`; positive favours speech.
    pub margin: f64,
}

impl ClassScore {
    fn from_totals(log_lik_speech: f64, log_lik_music: f64, speech_total: f64, music_total: f64) -> Self {
        let margin = speech_total - music_total;
        let decision = if speech_total >= music_total { Label::Speech } else { Label::Music };
        ClassScore { log_lik_speech, log_lik_music, decision, margin }
    }
}

pub fn score(model: &GmmModel, f: &FeatureVector) -> Result<ClassScore> {
    let [(ls, ps), (lm, pm)] = model.class_terms(f)?;
    Ok(ClassScore::from_totals(ls, lm, ls + ps, lm + pm))
}

/// Sum of per-model `(log-likelihood + log-prior) / dim` per class.
pub fn late_fuse_score(models: &[&GmmModel], fs: &[&FeatureVector]) -> Result<ClassScore> {
    if models.len() != fs.len() || models.is_empty() {
        return Err(Error::Fusion("need one feature vector per model".into()));
    }
    let first = fs[0];
    if fs.iter().any(|f| f.source_id != first.source_id || f.interval_index != first.interval_index) {
        return Err(Error::Fusion("feature vectors come from different intervals".into()));
    }
    let (mut ls, mut lm, mut ts, mut tm) = (0.0, 0.0, 0.0, 0.0);
    for (model, f) in models.iter().zip(fs) {
        let [(s, ps), (m, pm)] = model.class_terms(f)?;
        let d = model.dim() as f64;
        ls += s / d;
        lm += m / d;
        ts += (s + ps) / d;
        tm += (m + pm) / d;
    }
    Ok(ClassScore::from_totals(ls, lm, ts, tm))
}

fn check_training_set(train: &[&FeatureVector]) -> Result<(FeatureKind, usize)> {
    let first = train.first().ok_or_else(|| Error::Shape("empty training set".into()))?;
    let (kind, dim) = (first.kind, first.dim());
    for f in train {
        if f.kind != kind || f.dim() != dim {
            return Err(Error::Shape("training vectors differ in kind or dimension".into()));
        }
        if f.label.is_none() {
            return Err(Error::Shape(format!("unlabeled training vector {}#{}", f.source_id, f.interval_index)));
        }
        if let Some(index) = f.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
    }
    Ok((kind, dim))
}

fn class_count(train: &[&FeatureVector], label: Label) -> usize {
    train.iter().filter(|f| f.label == Some(label)).count()
}

fn feasible(train: &[&FeatureVector], k: usize, dim: usize) -> Result<()> {
    for label in Label::ALL {
        let have = class_count(train, label);
        if have < k * dim || have < k {
            return Err(Error::TooFewSamples { class: label, have, need: (k * dim).max(k) });
        }
    }
    Ok(())
}

/// Fits one `k`-component mixture per class.
pub fn fit_gmm(train: &[&FeatureVector], k: usize, seed: u64) -> Result<GmmModel> {
    fit_gmm_with(train, k, seed, &EmOptions::default())
}

pub fn fit_gmm_with(train: &[&FeatureVector], k: usize, seed: u64, opts: &EmOptions) -> Result<GmmModel> {
    let (kind, dim) = check_training_set(train)?;
    feasible(train, k, dim)?;
    let standardizer = Standardizer::fit(train.iter().map(|f| f.values.as_slice()), dim)?;
    let n = train.len() as f64;
    let fit_class = |label: Label| -> Result<ClassModel> {
        let members: Vec<&&FeatureVector> = train.iter().filter(|f| f.label == Some(label)).collect();
        let mut data = vec![0.0; members.len() * dim];
        for (row, f) in data.chunks_exact_mut(dim).zip(&members) {
            standardizer.apply_into(&f.values, row);
        }
        let fit = fit_mixture(&data, dim, k, derive_seed(seed, label.index() as u64), opts)?;
        Ok(ClassModel { mixture: fit.mixture, log_prior: libm::log(members.len() as f64 / n) })
    };
    let speech = fit_class(Label::Speech)?;
    let music = fit_class(Label::Music)?;
    Ok(GmmModel {
        feature_kind: kind,
        standardizer,
        speech,
        music,
        meta: TrainMeta { seed, grid: vec![k], chosen_k: k },
    })
}

/// Outcome of one grid point.
#[derive(Debug, Clone, PartialEq)]
pub enum GridPoint {
    Scored { k: usize, f_score: f64 },
    Skipped { k: usize, reason: Error },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearch {
    pub model: GmmModel,
    pub points: Vec<GridPoint>,
}

/// Picks the component count by validation macro-F on an 80:20 split of
/// `train`, then refits that count on all of `train`.
pub fn grid_search(train: &[&FeatureVector], grid: &[usize], seed: u64, unit: SplitUnit) -> Result<GridSearch> {
    if grid.is_empty() {
        return Err(Error::Config("component grid is empty".into()));
    }
    let (_, dim) = check_training_set(train)?;
    let mut grid: Vec<usize> = grid.to_vec();
    grid.sort_unstable();
    grid.dedup();

    let split_seed = derive_seed(seed, 100);
    let per_class_sources = |label: Label| {
        let mut ids: Vec<&str> =
            train.iter().filter(|f| f.label == Some(label)).map(|f| f.source_id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    };
    let unit = match unit {
        SplitUnit::File if Label::ALL.iter().all(|&l| per_class_sources(l) >= 2) => SplitUnit::File,
        _ => SplitUnit::Interval,
    };
    let (fit_idx, val_idx) = stratified_split(train, 0.8, split_seed, unit)?;
    let fit_set: Vec<&FeatureVector> = fit_idx.iter().map(|&i| train[i]).collect();
    let val_set: Vec<&FeatureVector> = val_idx.iter().map(|&i| train[i]).collect();

    let mut points = Vec::new();
    let mut best: Option<(usize, f64)> = None;
    for &k in &grid {
        if let Err(reason) = feasible(&fit_set, k, dim) {
            points.push(GridPoint::Skipped { k, reason });
            continue;
        }
        let model = fit_gmm(&fit_set, k, seed)?;
        let mut cm = ConfusionMatrix::default();
        for f in &val_set {
            cm.add(f.label.expect("checked"), score(&model, f)?.decision);
        }
        let f = eval::f_score(&cm)?;
        points.push(GridPoint::Scored { k, f_score: f });
        // Strictly greater keeps the smaller K on ties.
        if best.is_none_or(|(_, bf)| f > bf) {
            best = Some((k, f));
        }
    }
    let (k, _) = best.ok_or(Error::GridInfeasible)?;
    let mut model = fit_gmm(train, k, seed)?;
    model.meta = TrainMeta { seed, grid, chosen_k: k };
    Ok(GridSearch { model, points })
}
