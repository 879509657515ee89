//! End-to-end runs of the `striation` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use striation::synth;
use striation::wav::write_pcm16;
use striation_core::rng::seeded;

const RATE: u32 = synth::SAMPLE_RATE;

fn striation(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_striation")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn music_file(dir: &Path, name: &str, secs: usize, seed: u64) -> PathBuf {
    let p = dir.join(name);
    write_pcm16(&p, &synth::music_like(&mut seeded(seed), RATE, secs * RATE as usize), RATE).unwrap();
    p
}

/// `files` speech and music files of `secs` seconds each.
fn corpus(dir: &Path, files: u64, secs: usize) -> (PathBuf, PathBuf) {
    let (sp, mu) = (dir.join("speech"), dir.join("music"));
    std::fs::create_dir_all(&sp).unwrap();
    std::fs::create_dir_all(&mu).unwrap();
    for i in 0..files {
        let x = synth::speech_like(&mut seeded(i), RATE, secs * RATE as usize);
        write_pcm16(sp.join(format!("{i:02}.wav")), &x, RATE).unwrap();
        music_file(&mu, &format!("{i:02}.wav"), secs, 1000 + i);
    }
    (sp, mu)
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path).unwrap().lines().map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn extract_thirty_seconds() {
    let dir = tempfile::tempdir().unwrap();
    let wav = music_file(dir.path(), "m.wav", 30, 1);
    let out = dir.path().join("f.csv");
    let r = striation(&["extract", s(&wav), "--out", s(&out), "--feature", "sps-scg"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let rows = csv_rows(&out);
    assert_eq!(rows[0][..5], ["source_id", "interval_index", "label", "kind", "v0"]);
    assert_eq!(rows.len(), 31);
    assert!(rows[1..].iter().all(|r| r.len() == 4 + 60 && r[3] == "sps_scg"));
    assert_eq!(rows[30][1], "29");
    assert!(String::from_utf8_lossy(&r.stderr).contains("peakless frames"));
}

#[test]
fn extract_dimension_follows_p() {
    let dir = tempfile::tempdir().unwrap();
    let wav = music_file(dir.path(), "m.wav", 2, 2);
    let out = dir.path().join("f.csv");
    let r = striation(&["extract", s(&wav), "--out", s(&out), "--p", "5"]);
    assert!(r.status.success());
    let rows = csv_rows(&out);
    // Four kinds per interval; the header is as wide as the widest.
    assert_eq!(rows.len(), 1 + 2 * 4);
    let widths: Vec<(String, usize)> = rows[1..5].iter().map(|r| (r[3].clone(), r.len() - 4)).collect();
    assert_eq!(
        widths,
        [("sps_p".into(), 5), ("sps_zcr".into(), 5), ("sps_scg".into(), 15), ("early_fused".into(), 25)]
    );
}

#[test]
fn unreadable_input_exits_two_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f.csv");
    let r = striation(&["extract", s(&dir.path().join("missing.wav")), "--out", s(&out)]);
    assert_eq!(r.status.code(), Some(2));
    assert!(!out.exists());
    let junk = dir.path().join("junk.wav");
    std::fs::write(&junk, b"RIFF....WAVEfmt ").unwrap();
    let r = striation(&["extract", s(&junk), "--out", s(&out)]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("chunk"));
    assert!(!out.exists());
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(striation(&["extract"]).status.code(), Some(2));
    assert_eq!(striation(&["evaluate", "--speech", "a", "--music", "b", "--window", "kaiser"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let (sp, mu) = corpus(dir.path(), 2, 1);
    let model = dir.path().join("m.txt");
    let r = striation(&["train", "--speech", s(&sp), "--music", s(&mu), "--out", s(&model), "--feature", "all"]);
    assert_eq!(r.status.code(), Some(2));
    let r = striation(&["evaluate", "--speech", s(&sp), "--music", s(&mu), "--split", "1.5"]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn help_lists_every_flag_with_defaults() {
    let help = |cmd: &str| String::from_utf8(striation(&[cmd, "--help"]).stdout).unwrap();
    let eval = help("evaluate");
    for flag in [
        "--interval-ms",
        "--frame-ms",
        "--hop-ms",
        "--p",
        "--feature",
        "--classifier",
        "--k-grid",
        "--trials",
        "--split",
        "--split-unit",
        "--seed",
        "--window",
        "--out",
    ] {
        assert!(eval.contains(flag), "evaluate --help lacks {flag}");
    }
    for default in [
        "[default: 1000]",
        "[default: 30]",
        "[default: 1]",
        "[default: 20]",
        "[default: 0.7]",
        "[default: rect]",
        "[default: file]",
        "[default: 1,2,4,8,16,32]",
    ] {
        assert!(eval.contains(default), "evaluate --help lacks {default}");
    }
    assert!(help("inspect").contains("--emit"));
}

#[test]
fn inspect_one_second() {
    let dir = tempfile::tempdir().unwrap();
    let wav = music_file(dir.path(), "m.wav", 1, 3);
    let out = dir.path().join("plots");
    let r = striation(&["inspect", s(&wav), "--out", s(&out)]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let spec = csv_rows(&out.join("spectrogram.csv"));
    assert_eq!(spec[0], ["frame", "bin", "magnitude"]);
    assert_eq!(spec.len() - 1, 973 * 331);
    let sps = csv_rows(&out.join("sps.csv"));
    assert_eq!(sps[0], ["row", "frame", "bin"]);
    assert_eq!(sps.len() - 1, 973 * 20);
    let zcr = csv_rows(&out.join("zcr_hist.csv"));
    assert_eq!(zcr[0], ["row", "bin_or_lag", "value"]);
    assert_eq!(zcr.len() - 1, 20 * 20);
    let ac = csv_rows(&out.join("autocorr.csv"));
    assert_eq!(ac.len() - 1, 20 * (973 / 2 + 1 + 1));
}

#[test]
fn inspect_selective_emit() {
    let dir = tempfile::tempdir().unwrap();
    let wav = music_file(dir.path(), "m.wav", 2, 4);
    let out = dir.path().join("plots");
    assert!(striation(&["inspect", s(&wav), "--out", s(&out), "--emit", "sps", "--interval", "1"]).status.success());
    let names: Vec<_> = std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names, ["sps.csv"]);
    let sps = csv_rows(&out.join("sps.csv"));
    assert_eq!(sps[1][1], "973");
}

#[test]
fn inspect_silence() {
    let dir = tempfile::tempdir().unwrap();
    let wav = dir.path().join("silent.wav");
    write_pcm16(&wav, &vec![0.0; RATE as usize], RATE).unwrap();
    let out = dir.path().join("plots");
    let r = striation(&["inspect", s(&wav), "--out", s(&out), "--emit", "spectrogram"]);
    assert!(r.status.success());
    let spec = csv_rows(&out.join("spectrogram.csv"));
    assert!(spec[1..].iter().all(|r| r[2] == "0"));
    assert!(String::from_utf8_lossy(&r.stderr).contains("peakless frames: 973"));
}

#[test]
fn train_predict_and_reload() {
    let dir = tempfile::tempdir().unwrap();
    let (sp, mu) = corpus(dir.path(), 4, 5);
    let model = dir.path().join("model.txt");
    let train = || {
        striation(&[
            "train",
            "--speech",
            s(&sp),
            "--music",
            s(&mu),
            "--out",
            s(&model),
            "--p",
            "5",
            "--k-grid",
            "1,2",
            "--seed",
            "3",
        ])
    };
    let r = train();
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let first = std::fs::read(&model).unwrap();
    assert!(first.starts_with(b"spsgmm v1\nfeature sps_scg\ndim 15\npipeline sample_rate 22050"));
    assert!(train().status.success());
    assert_eq!(std::fs::read(&model).unwrap(), first);

    let preds = dir.path().join("p.csv");
    let r = striation(&["predict", s(&sp.join("00.wav")), "--model", s(&model), "--out", s(&preds)]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let rows = csv_rows(&preds);
    assert_eq!(rows[0], ["source_id", "interval_index", "decision", "log_lik_speech", "log_lik_music", "margin"]);
    assert_eq!(rows.len(), 6);
    assert!(rows[1..].iter().filter(|r| r[2] == "speech").count() >= 4);
}

#[test]
fn train_from_feature_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (sp, mu) = corpus(dir.path(), 3, 4);
    let (fs, fm) = (dir.path().join("s.csv"), dir.path().join("m.csv"));
    for (input, out, label) in [(&sp, &fs, "speech"), (&mu, &fm, "music")] {
        let r = striation(&["extract", s(input), "--out", s(out), "--label", label, "--p", "4", "--feature", "sps-p"]);
        assert!(r.status.success());
    }
    let both = dir.path().join("both.csv");
    let body =
        std::fs::read_to_string(&fs).unwrap() + std::fs::read_to_string(&fm).unwrap().split_once('\n').unwrap().1;
    std::fs::write(&both, body).unwrap();
    let model = dir.path().join("model.txt");
    let r = striation(&[
        "train",
        "--features",
        s(&both),
        "--feature",
        "sps-p",
        "--out",
        s(&model),
        "--split-unit",
        "interval",
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(std::fs::read_to_string(&model).unwrap().contains("dim 4\nmeta"));
    // No pipeline line, so predict takes the flags; a mismatched p is a shape error.
    let r = striation(&["predict", s(&sp), "--model", s(&model), "--p", "4"]);
    assert!(r.status.success());
    assert_eq!(String::from_utf8(r.stdout).unwrap().lines().count(), 1 + 12);
    assert_eq!(striation(&["predict", s(&sp), "--model", s(&model)]).status.code(), Some(1));
}

#[test]
fn evaluate_all_features() {
    let dir = tempfile::tempdir().unwrap();
    let (sp, mu) = corpus(dir.path(), 10, 5);
    let run = |out: &Path| {
        striation(&[
            "evaluate",
            "--speech",
            s(&sp),
            "--music",
            s(&mu),
            "--p",
            "5",
            "--trials",
            "1",
            "--seed",
            "7",
            "--out",
            s(out),
        ])
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let r = run(&a);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let table = String::from_utf8(r.stdout.clone()).unwrap();
    for m in ["sps_p", "sps_zcr", "sps_scg", "early_fused", "late_fused"] {
        assert!(table.contains(m), "{table}");
    }
    let summary = csv_rows(&a.join("summary.csv"));
    assert_eq!(summary[0], ["feature", "mean_f", "var_f"]);
    assert_eq!(summary.len(), 6);
    assert!(summary[1..].iter().all(|r| r[2] == "0"));
    let trials = csv_rows(&a.join("trials.csv"));
    assert_eq!(trials[0], ["trial", "feature", "chosen_K", "f_score"]);
    assert_eq!(trials[5][1], "late_fused");
    assert_eq!(trials[5][2].split('/').count(), 3);

    assert_eq!(run(&b).stdout, r.stdout);
    for f in ["report.txt", "trials.csv", "summary.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn evaluate_single_file_class_suggests_interval_unit() {
    let dir = tempfile::tempdir().unwrap();
    let (sp, mu) = corpus(dir.path(), 1, 3);
    let r = striation(&["evaluate", "--speech", s(&sp), "--music", s(&mu), "--feature", "sps-p", "--trials", "1"]);
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stderr).contains("interval"));
}
