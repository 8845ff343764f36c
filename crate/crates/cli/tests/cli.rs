use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn semg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semg"))
        .args(args)
        .env_remove("EMG_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn small_dataset(dir: &Path, seed: &str) {
    let o = semg(&[
        "synth", "--out", path(dir), "--classes", "2", "--channels", "2", "--trials", "3", "--seconds", "2",
        "--seed", seed,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn synth_is_reproducible_and_guards_output() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    small_dataset(&a, "7");
    small_dataset(&b, "7");
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["class_names"].as_array().unwrap().len(), 2);
    for entry in fs::read_dir(&a).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name:?}");
    }
    assert!(fs::read_to_string(a.join("config.resolved.toml")).unwrap().contains("seed = 7"));

    let again = semg(&["synth", "--out", path(&a), "--classes", "2"]);
    assert_eq!(again.status.code(), Some(2));
    assert!(stderr(&again).contains("not empty"));
    let forced = semg(&["synth", "--out", path(&a), "--classes", "2", "--channels", "2", "--trials", "3", "--seconds", "2", "--force"]);
    assert!(forced.status.success());
}

#[test]
fn extract_wavelet_on_eight_channels() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let o = semg(&["synth", "--out", path(&data), "--classes", "2", "--trials", "1", "--seconds", "1"]);
    assert!(o.status.success());
    let out = tmp.path().join("w.csv");
    let manifest = data.join("manifest.json");
    let o = semg(&["extract", "--manifest", path(&manifest), "--family", "wavelet", "--out", path(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let header = fs::read_to_string(&out).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header.split(',').count(), 240 + 1);
    assert!(tmp.path().join("w.config.toml").exists());

    let o = semg(&["extract", "--manifest", path(&manifest), "--family", "fourier", "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn extract_low_rate_reports_filter_error() {
    let tmp = tempfile::tempdir().unwrap();
    let mut csv = String::from("ch0\n");
    for i in 0..2000 {
        csv.push_str(&format!("{}\n", (i as f64 * 0.37).sin()));
    }
    fs::write(tmp.path().join("t0.csv"), &csv).unwrap();
    fs::write(tmp.path().join("t1.csv"), &csv).unwrap();
    let manifest = r#"{"class_names":["a","b"],"entries":[
        {"path":"t0.csv","label":0,"subject":"s1","session":"d1","fs":800.0},
        {"path":"t1.csv","label":1,"subject":"s1","session":"d1","fs":800.0}]}"#;
    fs::write(tmp.path().join("manifest.json"), manifest).unwrap();
    let out = tmp.path().join("f.csv");
    let o = semg(&[
        "extract", "--manifest", path(&tmp.path().join("manifest.json")), "--family", "ftdd", "--out", path(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("high cutoff 450 Hz must be below the Nyquist frequency 400 Hz"), "{}", stderr(&o));
}

#[test]
fn bench_one_cell_and_report() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    small_dataset(&data, "3");
    let manifest = data.join("manifest.json");
    let out = tmp.path().join("bench");
    let o = semg(&[
        "bench", "--manifest", path(&manifest), "--families", "ftdd", "--models", "knn", "--out", path(&out), "--jobs", "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = stdout(&o);
    assert!(table.contains("\nKNN "));
    assert!(!table.contains("\nLDA "));
    for f in ["cells/ftdd_knn.json", "table.txt", "table.csv", "run.json", "config.resolved.toml"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let run = fs::read_to_string(out.join("run.json")).unwrap();
    assert!(run.contains("\"version\"") && run.contains("\"seed\": 7"));

    let r = semg(&["report", path(&out)]);
    assert!(r.status.success());
    assert_eq!(stdout(&r), fs::read_to_string(out.join("table.txt")).unwrap());
    let r = semg(&["report", path(&out), "--csv"]);
    assert!(stdout(&r).starts_with("family,model,status"));
}

#[test]
fn bench_from_config_file_with_env_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bench.toml");
    fs::write(
        &cfg,
        "families = [\"tsd\"]\nmodels = [\"lda\", \"rf\"]\n[dataset.synthetic]\nn_classes = 2\nn_channels = 2\nfs = 2048.0\ntrials_per_class = 3\ntrial_seconds = 2.0\nseed = 1\n",
    )
    .unwrap();
    let out = tmp.path().join("b");
    let o = Command::new(env!("CARGO_BIN_EXE_semg"))
        .args(["bench", "--config", path(&cfg), "--out", path(&out)])
        .env("EMG_SEED", "99")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let resolved = fs::read_to_string(out.join("config.resolved.toml")).unwrap();
    assert!(resolved.starts_with("seed = 99"), "{resolved}");

    fs::write(&cfg, "familes = [\"tsd\"]\n").unwrap();
    let o = semg(&["bench", "--config", path(&cfg), "--out", path(&tmp.path().join("c"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = semg(&["bench", "--manifest", "/does/not/exist.json", "--out", path(&tmp.path().join("x"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("does not exist"));

    let data = tmp.path().join("data");
    small_dataset(&data, "3");
    let out = tmp.path().join("fail");
    let o = semg(&[
        "bench", "--manifest", path(&data.join("manifest.json")), "--families", "ftdd", "--models", "lda,knn",
        "--knn-k", "100000", "--out", path(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("\nLDA "));
    assert!(stdout(&o).contains("(failed)"));
}

#[test]
fn seeds_change_results_but_stay_valid() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    small_dataset(&data, "3");
    let manifest = data.join("manifest.json");
    let cell = |seed: &str| {
        let out = tmp.path().join(format!("s{seed}"));
        let o = semg(&[
            "bench", "--manifest", path(&manifest), "--families", "tsd", "--models", "rf", "--seed", seed, "--out",
            path(&out),
        ]);
        assert!(o.status.success());
        let v: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out.join("cells/tsd_rf.json")).unwrap()).unwrap();
        v["config"]["cell_seed"].as_u64().unwrap()
    };
    assert_ne!(cell("1"), cell("2"));
}

#[test]
fn train_writes_loadable_model() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    small_dataset(&data, "5");
    let feats = tmp.path().join("f.csv");
    let o = semg(&["extract", "--manifest", path(&data.join("manifest.json")), "--family", "tsd", "--out", path(&feats)]);
    assert!(o.status.success());
    let model = tmp.path().join("m.json");
    let o = semg(&["train", "--features", path(&feats), "--family", "tsd", "--model", "bagging_svm", "--out", path(&model)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("held-out accuracy"));
    let text = fs::read_to_string(&model).unwrap();
    let p = semg_core::classify::Pipeline::from_json(&text).unwrap();
    assert!(p.scaler.is_some());
    let again = semg(&["train", "--features", path(&feats), "--model", "lda", "--out", path(&model)]);
    assert_eq!(again.status.code(), Some(2));
}
