use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use striation::corpus::{self, Corpus};
use striation::model::{self, ModelFile, PipelineSpec};
use striation::output::write_atomic;
use striation::plot::{self, Distributions};
use striation::{features_csv, report, Error, Result};
use striation_core::eval::{Method, SplitUnit, TrialConfig};
use striation_core::gmm;
use striation_core::segment::segment_intervals;
use striation_core::spectral::spectrogram;
use striation_core::{Extractor, FeatureKind, FeatureVector, Label, PipelineConfig, Window};

/// Speech/music discrimination from spectral peak sequences.
#[derive(Parser)]
#[command(name = "striation", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write one feature CSV row per (interval, feature kind).
    Extract(ExtractArgs),
    /// Fit a GMM classifier and write a model file.
    Train(TrainArgs),
    /// Classify every interval with a trained model.
    Predict(PredictArgs),
    /// Repeated stratified train/test evaluation over a labeled corpus.
    Evaluate(EvaluateArgs),
    /// Export spectrogram, peak-sequence and distribution plot data.
    Inspect(InspectArgs),
}

#[derive(Args, Clone, Copy)]
struct PipelineArgs {
    /// Analysis interval length in milliseconds.
    #[arg(long, default_value_t = 1000.0)]
    interval_ms: f64,
    /// Frame length in milliseconds (rounded to an even sample count).
    #[arg(long, default_value_t = 30.0)]
    frame_ms: f64,
    /// Frame shift in milliseconds.
    #[arg(long, default_value_t = 1.0)]
    hop_ms: f64,
    /// Number of prominent peaks kept per frame.
    #[arg(long, default_value_t = 20)]
    p: usize,
    /// Analysis window.
    #[arg(long, value_enum, default_value_t = WindowArg::Rect)]
    window: WindowArg,
}

impl PipelineArgs {
    fn interval_s(&self) -> Result<f64> {
        if !(self.interval_ms > 0.0 && self.interval_ms.is_finite()) {
            return Err(Error::Input(format!("--interval-ms must be positive, got {}", self.interval_ms)));
        }
        Ok(self.interval_ms / 1000.0)
    }

    fn config(&self, sample_rate: u32) -> Result<PipelineConfig> {
        Ok(PipelineConfig::from_ms(sample_rate, self.frame_ms, self.hop_ms, self.p, self.window.into())?)
    }
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Classifier.
    #[arg(long, value_enum, default_value_t = ClassifierArg::Gmm)]
    classifier: ClassifierArg,
    /// Candidate mixture sizes, searched on a held-out part of the training data.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32")]
    k_grid: Vec<usize>,
    /// Unit for train/validation and train/test splits.
    #[arg(long, value_enum, default_value_t = SplitUnitArg::File)]
    split_unit: SplitUnitArg,
    /// Master seed; every random choice derives from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ExtractArgs {
    /// WAV file or directory of WAV files.
    input: PathBuf,
    /// Output CSV.
    #[arg(long)]
    out: PathBuf,
    /// Feature kind(s) to write.
    #[arg(long, value_enum, default_value_t = FeatureArg::All)]
    feature: FeatureArg,
    /// Label to attach to every row.
    #[arg(long, value_enum)]
    label: Option<LabelArg>,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
struct TrainArgs {
    /// Directory of speech WAV files.
    #[arg(long, requires = "music", conflicts_with = "features")]
    speech: Option<PathBuf>,
    /// Directory of music WAV files.
    #[arg(long, requires = "speech")]
    music: Option<PathBuf>,
    /// Labeled feature CSV from `extract`, instead of audio directories.
    #[arg(long, required_unless_present = "speech")]
    features: Option<PathBuf>,
    /// Output model file.
    #[arg(long)]
    out: PathBuf,
    /// Feature kind to train on (`fused` is early fusion).
    #[arg(long, value_enum, default_value_t = FeatureArg::SpsScg)]
    feature: FeatureArg,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
struct PredictArgs {
    /// WAV file or directory of WAV files.
    input: PathBuf,
    /// Model file from `train`.
    #[arg(long)]
    model: PathBuf,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Extraction settings, used only when the model does not record its own.
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Directory of speech WAV files.
    #[arg(long)]
    speech: PathBuf,
    /// Directory of music WAV files.
    #[arg(long)]
    music: PathBuf,
    /// Output directory for report.txt, trials.csv and summary.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Feature kind; `all` adds early and late fusion rows.
    #[arg(long, value_enum, default_value_t = FeatureArg::All)]
    feature: FeatureArg,
    /// Number of repeated trials.
    #[arg(long, default_value_t = 20)]
    trials: usize,
    /// Training fraction of each class.
    #[arg(long, default_value_t = 0.7)]
    split: f64,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
struct InspectArgs {
    /// WAV file.
    input: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Exports to write.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Emit::Spectrogram, Emit::Sps, Emit::Zcr, Emit::Autocorr])]
    emit: Vec<Emit>,
    /// Restrict to one interval (0-based); all intervals when absent.
    #[arg(long)]
    interval: Option<usize>,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum FeatureArg {
    SpsP,
    SpsZcr,
    SpsScg,
    Fused,
    All,
}

impl FeatureArg {
    fn kinds(self) -> Vec<FeatureKind> {
        match self {
            FeatureArg::SpsP => vec![FeatureKind::SpsP],
            FeatureArg::SpsZcr => vec![FeatureKind::SpsZcr],
            FeatureArg::SpsScg => vec![FeatureKind::SpsScg],
            FeatureArg::Fused => vec![FeatureKind::EarlyFused],
            FeatureArg::All => FeatureKind::ALL.to_vec(),
        }
    }

    fn methods(self) -> Vec<Method> {
        match self {
            FeatureArg::All => Method::ALL.to_vec(),
            one => one.kinds().into_iter().map(Method::Single).collect(),
        }
    }
}

#[derive(ValueEnum, Clone, Copy)]
enum WindowArg {
    Rect,
    Hamming,
}

impl From<WindowArg> for Window {
    fn from(w: WindowArg) -> Self {
        match w {
            WindowArg::Rect => Window::Rectangular,
            WindowArg::Hamming => Window::Hamming,
        }
    }
}

#[derive(ValueEnum, Clone, Copy)]
enum SplitUnitArg {
    File,
    Interval,
}

impl From<SplitUnitArg> for SplitUnit {
    fn from(u: SplitUnitArg) -> Self {
        match u {
            SplitUnitArg::File => SplitUnit::File,
            SplitUnitArg::Interval => SplitUnit::Interval,
        }
    }
}

#[derive(ValueEnum, Clone, Copy)]
enum ClassifierArg {
    Gmm,
}

#[derive(ValueEnum, Clone, Copy)]
enum LabelArg {
    Speech,
    Music,
}

impl From<LabelArg> for Label {
    fn from(l: LabelArg) -> Self {
        match l {
            LabelArg::Speech => Label::Speech,
            LabelArg::Music => Label::Music,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum Emit {
    Spectrogram,
    Sps,
    Zcr,
    Autocorr,
}

fn warn_skipped(c: &Corpus) {
    for s in &c.report.skipped {
        eprintln!("warning: skipped {}: {}", s.path.display(), s.reason);
    }
}

fn peak_diagnostics(frames: u64, peakless: u64) {
    eprintln!("frames: {frames}, peakless frames: {peakless}");
}

fn extract(a: ExtractArgs) -> Result<()> {
    let c = corpus::scan_inputs(&a.input, a.pipeline.interval_s()?, a.label.map(Label::from))?;
    warn_skipped(&c);
    let cfg = a.pipeline.config(c.sample_rate)?;
    let features = striation::extract_parallel(cfg, &c.intervals)?;
    let kinds = a.feature.kinds();
    let rows: Vec<FeatureVector> = features.iter().flat_map(|f| kinds.iter().map(|&k| f.vector(k))).collect();
    features_csv::save_features(&a.out, &rows)?;
    let d = striation_core::eval::corpus_diagnostics(&features);
    eprintln!("{} intervals from {} files", features.len(), c.report.used_files);
    peak_diagnostics(d.frames, d.peakless_frames);
    Ok(())
}

fn single_kind(f: FeatureArg) -> Result<FeatureKind> {
    match f.kinds()[..] {
        [k] => Ok(k),
        _ => {
            Err(Error::Input("train needs a single feature kind; `all` is only valid for extract and evaluate".into()))
        }
    }
}

fn train(a: TrainArgs) -> Result<()> {
    let kind = single_kind(a.feature)?;
    let (vectors, pipeline) = match (&a.speech, &a.music, &a.features) {
        (Some(s), Some(m), _) => {
            let c = corpus::scan_corpus(s, m, a.pipeline.interval_s()?)?;
            warn_skipped(&c);
            let cfg = a.pipeline.config(c.sample_rate)?;
            let features = striation::extract_parallel(cfg, &c.intervals)?;
            let spec = PipelineSpec::new(c.sample_rate, c.intervals[0].samples.len(), &cfg);
            (features.iter().map(|f| f.vector(kind)).collect::<Vec<_>>(), Some(spec))
        }
        (_, _, Some(path)) => {
            let rows: Vec<FeatureVector> =
                features_csv::load_features(path)?.into_iter().filter(|r| r.kind == kind).collect();
            if rows.is_empty() {
                return Err(Error::Input(format!("{}: no {kind} rows", path.display())));
            }
            if let Some(r) = rows.iter().find(|r| r.label.is_none()) {
                return Err(Error::Input(format!(
                    "{}: unlabeled row for {}#{}",
                    path.display(),
                    r.source_id,
                    r.interval_index
                )));
            }
            (rows, None)
        }
        _ => return Err(Error::Input("give --speech and --music, or --features".into())),
    };
    let refs: Vec<&FeatureVector> = vectors.iter().collect();
    let gs = gmm::grid_search(&refs, &a.model.k_grid, a.model.seed, a.model.split_unit.into())?;
    for p in &gs.points {
        match p {
            gmm::GridPoint::Scored { k, f_score } => eprintln!("K={k}: validation F {f_score:.4}"),
            gmm::GridPoint::Skipped { k, reason } => eprintln!("K={k}: skipped ({reason})"),
        }
    }
    eprintln!("chosen K={}", gs.model.meta.chosen_k);
    model::save_model(&a.out, &ModelFile { model: gs.model, pipeline })
}

fn predict(a: PredictArgs) -> Result<()> {
    let mf = model::load_model(&a.model)?;
    let interval_s = match mf.pipeline {
        Some(p) => p.interval_len as f64 / p.sample_rate as f64,
        None => a.pipeline.interval_s()?,
    };
    let c = corpus::scan_inputs(&a.input, interval_s, None)?;
    warn_skipped(&c);
    let cfg = match mf.pipeline {
        Some(p) => {
            if p.sample_rate != c.sample_rate {
                return Err(Error::Input(format!(
                    "model was trained at {} Hz but the input is {} Hz",
                    p.sample_rate, c.sample_rate
                )));
            }
            PipelineConfig::new(striation_core::FrameConfig::new(p.frame_len, p.hop, p.window)?, p.p)?
        }
        None => a.pipeline.config(c.sample_rate)?,
    };
    let features = striation::extract_parallel(cfg, &c.intervals)?;
    let mut out = String::from("source_id,interval_index,decision,log_lik_speech,log_lik_music,margin\n");
    for f in &features {
        let v = f.vector(mf.model.feature_kind);
        let s = gmm::score(&mf.model, &v)?;
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            v.source_id, v.interval_index, s.decision, s.log_lik_speech, s.log_lik_music, s.margin
        ));
    }
    match &a.out {
        Some(p) => write_atomic(p, |w| w.write_all(out.as_bytes())),
        None => std::io::stdout().write_all(out.as_bytes()).map_err(|e| Error::Input(format!("stdout: {e}"))),
    }
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    let cfg = TrialConfig {
        n_trials: a.trials,
        train_frac: a.split,
        seed: a.model.seed,
        split_unit: a.model.split_unit.into(),
        k_grid: a.model.k_grid.clone(),
    };
    cfg.validate().map_err(|e| Error::Input(e.to_string()))?;
    let c = corpus::scan_corpus(&a.speech, &a.music, a.pipeline.interval_s()?)?;
    warn_skipped(&c);
    let pipeline = a.pipeline.config(c.sample_rate)?;
    let features = striation::extract_parallel(pipeline, &c.intervals)?;
    let skipped: Vec<String> = c.report.skipped.iter().map(|s| format!("{}: {}", s.path.display(), s.reason)).collect();
    let reports = a
        .feature
        .methods()
        .into_iter()
        .map(|m| striation::evaluate_parallel(&features, m, &cfg, skipped.clone()))
        .collect::<Result<Vec<_>>>()?;
    if let Some(dir) = &a.out {
        report::write_reports(dir, &reports)?;
    }
    print!("{}", report::summary_table(&reports));
    Ok(())
}

fn emit_csv(dir: &Path, name: &str, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    write_atomic(&dir.join(name), body)
}

fn inspect(a: InspectArgs) -> Result<()> {
    let sig = striation::wav::decode_wav(&a.input)?;
    let cfg = a.pipeline.config(sig.sample_rate)?;
    let mut intervals = segment_intervals(&sig, a.pipeline.interval_s()?, "inspect", None)?;
    if let Some(i) = a.interval {
        if i >= intervals.len() {
            return Err(Error::Input(format!("--interval {i}: the file has {} intervals", intervals.len())));
        }
        intervals = vec![intervals.swap_remove(i)];
    }
    std::fs::create_dir_all(&a.out).map_err(|e| Error::Input(format!("{}: {e}", a.out.display())))?;
    let frames_per = cfg.frame.frame_count(intervals[0].samples.len());
    let first_frame = |iv: &striation_core::AudioInterval| iv.index * frames_per;

    let mut ex = Extractor::new(cfg);
    let mut analysed = Vec::with_capacity(intervals.len());
    let (mut frames, mut peakless) = (0, 0);
    for iv in &intervals {
        let (m, attrs, d) = ex.attributes(&iv.samples)?;
        frames += d.frames;
        peakless += d.peakless_frames;
        analysed.push((m, attrs));
    }
    if a.emit.contains(&Emit::Spectrogram) {
        // Recomputed per interval on write so the whole spectrogram never sits in memory.
        let mut failure = None;
        emit_csv(&a.out, "spectrogram.csv", |w| {
            for (n, iv) in intervals.iter().enumerate() {
                match spectrogram(&iv.samples, &cfg.frame) {
                    Ok(spectra) => plot::write_spectrogram(w, &spectra, first_frame(iv), n == 0)?,
                    Err(e) => {
                        failure = Some(e);
                        return Err(std::io::Error::other("spectrogram failed"));
                    }
                }
            }
            Ok(())
        })
        .map_err(|e| failure.take().map(Error::from).unwrap_or(e))?;
    }
    if a.emit.contains(&Emit::Sps) {
        emit_csv(&a.out, "sps.csv", |w| {
            for (n, (iv, (m, _))) in intervals.iter().zip(&analysed).enumerate() {
                plot::write_sps(w, m, first_frame(iv), n == 0)?;
            }
            Ok(())
        })?;
    }
    let mut dist = Distributions::new(cfg.p);
    for (_, attrs) in &analysed {
        dist.add(attrs);
    }
    if a.emit.contains(&Emit::Zcr) {
        emit_csv(&a.out, "zcr_hist.csv", |w| dist.write_zcr_histogram(w))?;
    }
    if a.emit.contains(&Emit::Autocorr) {
        emit_csv(&a.out, "autocorr.csv", |w| dist.write_autocorr(w))?;
    }
    eprintln!("{} intervals", intervals.len());
    peak_diagnostics(frames, peakless);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Extract(a) => extract(a),
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Inspect(a) => inspect(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input() { 2 } else { 1 })
        }
    }
}
