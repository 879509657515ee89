//! File formats, corpus ingestion and parallel drivers around `striation-core`.

pub mod corpus;
pub mod error;
pub mod features_csv;
pub mod model;
pub mod output;
pub mod plot;
pub mod report;
pub mod synth;
pub mod wav;

use rayon::prelude::*;
use striation_core::eval::{self, Diagnostics, EvalReport, Method, TrialConfig};
use striation_core::{AudioInterval, Extractor, IntervalFeatures, PipelineConfig};

pub use error::{Error, Result};

/// Feature extraction on all cores; output order matches `intervals`.
pub fn extract_parallel(cfg: PipelineConfig, intervals: &[AudioInterval]) -> Result<Vec<IntervalFeatures>> {
    let results: Vec<_> = intervals.par_iter().map_init(|| Extractor::new(cfg), |ex, iv| ex.extract(iv)).collect();
    Ok(results.into_iter().collect::<striation_core::Result<Vec<_>>>()?)
}

/// All trials of one method on all cores. The report does not depend on
/// scheduling: trials are seeded independently and sorted before summary,
/// and the lowest-indexed failure is the one reported.
pub fn evaluate_parallel(
    features: &[IntervalFeatures],
    method: Method,
    cfg: &TrialConfig,
    skipped_files: Vec<String>,
) -> Result<EvalReport> {
    cfg.validate()?;
    let results: Vec<_> =
        (0..cfg.n_trials).into_par_iter().map(|t| eval::run_trial(features, method, cfg, t)).collect();
    let trials = results.into_iter().collect::<striation_core::Result<Vec<_>>>()?;
    let diagnostics = Diagnostics { peaks: eval::corpus_diagnostics(features), skipped_files };
    Ok(eval::summarize(method, cfg, trials, diagnostics))
}
