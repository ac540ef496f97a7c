//! End-to-end command flow: synth -> label -> segment -> dmo -> train-eval
//! -> report, plus config handling and the illegal-combination guards.

use std::path::Path;
use std::process::{Command, Output};

fn gaitctx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gaitctx"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = gaitctx(args);
    assert!(
        out.status.success(),
        "command {:?} failed:\n{}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn fail(args: &[&str]) -> String {
    let out = gaitctx(args);
    assert!(!out.status.success(), "command {args:?} unexpectedly succeeded");
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn run_chain(dir: &Path) {
    let out = dir.to_str().unwrap();
    ok(&[
        "synth",
        "--out",
        out,
        "--subjects",
        "2",
        "--duration",
        "900",
        "--outdoor-fraction",
        "0.45",
        "--seed",
        "5",
    ]);
    for s in ["s01", "s02"] {
        let gps = format!("{out}/gps_{s}.csv");
        let imu = format!("{out}/imu_{s}.csv");
        let labels = format!("{out}/labels_{s}.csv");
        let windows = format!("{out}/windows_{s}.csv");
        let bouts = format!("{out}/bouts_{s}.csv");
        ok(&[
            "label", "--gps", &gps, "--subject", s, "--out", out, "--duration", "900",
        ]);
        ok(&[
            "segment", "--imu", &imu, "--labels", &labels, "--subject", s, "--out", out,
        ]);
        ok(&[
            "dmo", "--imu", &imu, "--windows", &windows, "--bouts", &bouts, "--subject", s,
            "--out", out,
        ]);
    }
}

#[test]
fn full_chain_produces_all_four_datasets_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    run_chain(dir.path());
    let out = dir.path().to_str().unwrap();

    // The four dataset surfaces exist for both subjects.
    for s in ["s01", "s02"] {
        for prefix in ["windows", "bouts", "dmo_bouts", "dmo_windows"] {
            let path = dir.path().join(format!("{prefix}_{s}.csv"));
            assert!(path.exists(), "{} missing", path.display());
        }
    }

    // A feature-based campaign on each granularity.
    let report_gnb = format!("{out}/report_gnb.json");
    let stdout = ok(&[
        "train-eval",
        "--data",
        out,
        "--dataset",
        "bouts-dmo",
        "--model",
        "gnb",
        "--folds",
        "stratified:3",
        "--seed",
        "7",
        "--out",
        &report_gnb,
    ]);
    assert!(stdout.contains("gnb"), "{stdout}");
    assert!(Path::new(&report_gnb).exists());
    assert!(Path::new(&format!("{out}/report_gnb.txt")).exists());

    let report_knn = format!("{out}/report_knn.json");
    ok(&[
        "train-eval",
        "--data",
        out,
        "--dataset",
        "windows-dmo",
        "--model",
        "knn",
        "--normalize",
        "zscore",
        "--folds",
        "stratified:3",
        "--seed",
        "7",
        "--out",
        &report_knn,
    ]);

    // A raw-signal campaign through the series loading path.
    let report_rocket = format!("{out}/report_rocket.json");
    ok(&[
        "train-eval",
        "--data",
        out,
        "--dataset",
        "bouts-series",
        "--model",
        "rocket",
        "--kernels",
        "100",
        "--channel",
        "magnitude",
        "--length",
        "pad",
        "--folds",
        "stratified:3",
        "--seed",
        "7",
        "--out",
        &report_rocket,
    ]);

    // The convolution campaign leaves its seeded bank descriptor behind.
    let bank: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(format!("{out}/report_rocket.bank.json")).unwrap())
            .unwrap();
    assert_eq!(bank["num_kernels"], 100);
    assert_eq!(bank["seed"], 7);

    // Combined rendering.
    let table = ok(&["report", "--in", &report_gnb, &report_knn, &report_rocket]);
    assert!(table.contains("bouts-dmo-gnb"));
    assert!(table.contains("windows-dmo-knn"));
    assert!(table.contains("rocket"));
}

#[test]
fn reports_are_reproducible_from_config_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    run_chain(dir.path());
    let out = dir.path().to_str().unwrap();
    let a = format!("{out}/a.json");
    let b = format!("{out}/b.json");
    for path in [&a, &b] {
        ok(&[
            "train-eval",
            "--data",
            out,
            "--dataset",
            "bouts-dmo",
            "--model",
            "logistic",
            "--normalize",
            "zscore",
            "--folds",
            "stratified:3",
            "--seed",
            "11",
            "--out",
            path,
        ]);
    }
    let bytes_a = std::fs::read(&a).unwrap();
    let bytes_b = std::fs::read(&b).unwrap();
    assert_eq!(bytes_a, bytes_b, "same config and seed must reproduce the report");
}

#[test]
fn illegal_combinations_are_rejected_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();

    // No data needed: validation fires before loading.
    let err = fail(&[
        "train-eval",
        "--data",
        out,
        "--dataset",
        "bouts-series",
        "--model",
        "rocket",
        "--length",
        "original",
        "--out",
        &format!("{out}/r.json"),
    ]);
    assert!(err.contains("length=original"), "{err}");
    assert!(err.contains("rocket"), "{err}");

    let err = fail(&[
        "train-eval",
        "--data",
        out,
        "--dataset",
        "windows-dmo",
        "--model",
        "dtw",
        "--out",
        &format!("{out}/r.json"),
    ]);
    assert!(err.contains("dtw"), "{err}");

    // Valid config but an empty data directory names the missing artifact.
    let err = fail(&[
        "train-eval",
        "--data",
        out,
        "--dataset",
        "windows-dmo",
        "--model",
        "gnb",
        "--out",
        &format!("{out}/r.json"),
    ]);
    assert!(err.contains("windows_"), "{err}");
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    run_chain(dir.path());
    let out = dir.path().to_str().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        format!(
            "data = {out}\ndataset = bouts-dmo\nmodel = gnb\nfolds = stratified:3\nseed = 3\n"
        ),
    )
    .unwrap();
    let report = format!("{out}/from_config.json");
    ok(&[
        "train-eval",
        "--config",
        cfg.to_str().unwrap(),
        "--model",
        "knn", // overrides model=gnb from the file
        "--out",
        &report,
    ]);
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(parsed["model"], "knn");
    assert_eq!(parsed["config"]["run"]["dataset"], "bouts-dmo");
    assert_eq!(parsed["config"]["run"]["seed"], 3);
}

#[test]
fn empty_gps_requires_explicit_duration_and_labels_indoor() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let gps = dir.path().join("gps_s01.csv");
    std::fs::write(&gps, "t,lat,lon\n").unwrap();

    let err = fail(&["label", "--gps", gps.to_str().unwrap(), "--subject", "s01", "--out", out]);
    assert!(err.contains("--duration"), "{err}");

    ok(&[
        "label",
        "--gps",
        gps.to_str().unwrap(),
        "--subject",
        "s01",
        "--out",
        out,
        "--duration",
        "120",
    ]);
    let labels = std::fs::read_to_string(dir.path().join("labels_s01.csv")).unwrap();
    let rows: Vec<&str> = labels.lines().skip(1).collect();
    assert_eq!(rows.len(), 120);
    assert!(rows.iter().all(|r| r.ends_with(",1")), "silence labels indoor");
}

#[test]
fn loso_folds_run_from_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    run_chain(dir.path());
    let out = dir.path().to_str().unwrap();
    let report = format!("{out}/loso.json");
    ok(&[
        "train-eval",
        "--data",
        out,
        "--dataset",
        "bouts-dmo",
        "--model",
        "gnb",
        "--folds",
        "loso",
        "--out",
        &report,
    ]);
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(parsed["strategy"], "loso");
    assert_eq!(parsed["folds"].as_array().unwrap().len(), 2);
}

#[test]
fn synth_is_byte_deterministic() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [&dir_a, &dir_b] {
        ok(&[
            "synth",
            "--out",
            dir.path().to_str().unwrap(),
            "--subjects",
            "1",
            "--duration",
            "640",
            "--seed",
            "9",
        ]);
    }
    for name in ["imu_s01.csv", "gps_s01.csv", "truth_s01.csv"] {
        let a = std::fs::read(dir_a.path().join(name)).unwrap();
        let b = std::fs::read(dir_b.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs across identically seeded runs");
    }
}
