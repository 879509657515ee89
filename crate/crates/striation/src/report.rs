//! Evaluation report: text, per-trial CSV, summary CSV.

use std::fmt::Write as _;
use std::path::Path;

use striation_core::eval::EvalReport;
use striation_core::Label;

use crate::error::Result;
use crate::output::write_atomic;

fn chosen_k(ks: &[usize]) -> String {
    ks.iter().map(|k| k.to_string()).collect::<Vec<_>>().join("/")
}

pub fn trials_csv(reports: &[EvalReport]) -> String {
    let mut out = String::from("trial,feature,chosen_K,f_score\n");
    for r in reports {
        for t in &r.trials {
            writeln!(out, "{},{},{},{}", t.trial, r.method, chosen_k(&t.chosen_k), t.f_score).unwrap();
        }
    }
    out
}

pub fn summary_csv(reports: &[EvalReport]) -> String {
    let mut out = String::from("feature,mean_f,var_f\n");
    for r in reports {
        writeln!(out, "{},{},{}", r.method, r.mean_f, r.var_f).unwrap();
    }
    out
}

/// Aligned table of mean (variance) per method.
pub fn summary_table(reports: &[EvalReport]) -> String {
    let mut out = format!("{:<12} {:>8} {:>10}\n", "feature", "mean_f", "var_f");
    for r in reports {
        writeln!(out, "{:<12} {:>8.4} {:>10.6}", r.method.name(), r.mean_f, r.var_f).unwrap();
    }
    out
}

pub fn text_report(reports: &[EvalReport]) -> String {
    let mut out = String::new();
    let Some(first) = reports.first() else {
        return out;
    };
    let c = &first.config;
    let grid: Vec<String> = c.k_grid.iter().map(|k| k.to_string()).collect();
    writeln!(out, "trials: {}", c.n_trials).unwrap();
    writeln!(out, "train fraction: {}", c.train_frac).unwrap();
    writeln!(out, "split unit: {}", c.split_unit).unwrap();
    writeln!(out, "seed: {}", c.seed).unwrap();
    writeln!(out, "K grid: {}", grid.join(" ")).unwrap();
    let d = &first.diagnostics;
    writeln!(out, "frames analysed: {}", d.peaks.frames).unwrap();
    writeln!(out, "peakless frames: {}", d.peaks.peakless_frames).unwrap();
    writeln!(out, "skipped files: {}", d.skipped_files.len()).unwrap();
    for s in &d.skipped_files {
        writeln!(out, "  {s}").unwrap();
    }
    out.push('\n');
    out.push_str(&summary_table(reports));
    for r in reports {
        writeln!(out, "\n[{}]", r.method).unwrap();
        writeln!(out, "{:>5} {:>9} {:>8}  confusion (ss sm ms mm)", "trial", "K", "f_score").unwrap();
        for t in &r.trials {
            let cm = &t.confusion;
            let cell = |a, p| cm.get(a, p);
            writeln!(
                out,
                "{:>5} {:>9} {:>8.4}  {} {} {} {}",
                t.trial,
                chosen_k(&t.chosen_k),
                t.f_score,
                cell(Label::Speech, Label::Speech),
                cell(Label::Speech, Label::Music),
                cell(Label::Music, Label::Speech),
                cell(Label::Music, Label::Music)
            )
            .unwrap();
        }
    }
    out
}

/// `report.txt`, `trials.csv` and `summary.csv` under `dir`.
pub fn write_reports(dir: &Path, reports: &[EvalReport]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| crate::error::Error::io(dir, e))?;
    for (name, body) in [
        ("report.txt", text_report(reports)),
        ("trials.csv", trials_csv(reports)),
        ("summary.csv", summary_csv(reports)),
    ] {
        write_atomic(&dir.join(name), |w| w.write_all(body.as_bytes()))?;
    }
    Ok(())
}
