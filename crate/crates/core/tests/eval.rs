use semg_core::classify::ModelKind;
use semg_core::eval::{
    read_bundle, render_table, run_benchmark, write_bundle, BenchConfig, CellStatus, DatasetConfig, SplitMode,
};
use semg_core::features::FeatureFamily;
use semg_core::signal::{write_dataset, SyntheticSpec};

fn small_spec() -> SyntheticSpec {
    SyntheticSpec {
        n_classes: 3,
        n_channels: 2,
        fs: 2048.0,
        trials_per_class: 4,
        trial_seconds: 2.0,
        seed: 3,
    }
}

fn small_config() -> BenchConfig {
    BenchConfig {
        dataset: DatasetConfig {
            manifest: None,
            synthetic: Some(small_spec()),
        },
        ..BenchConfig::default()
    }
}

#[test]
fn single_cell_bench() {
    let cfg = BenchConfig {
        families: vec![FeatureFamily::Ftdd],
        models: vec![ModelKind::Knn],
        ..small_config()
    };
    let result = run_benchmark(&cfg).unwrap();
    assert_eq!(result.reports.len(), 1);
    let r = &result.reports[0];
    assert_eq!(r.cell_id, "ftdd_knn");
    assert_eq!(r.status, CellStatus::Ok);
    assert_eq!(r.config.n_features, 12);
    assert_eq!(r.config.n_train + r.config.n_test, result.dataset.n_windows);
    let cm = r.confusion.as_ref().unwrap();
    assert_eq!(cm.total() as usize, r.config.n_test);
    // 2 s at 2048 Hz with 1228-sample windows and a 614 step
    assert_eq!(result.dataset.n_windows, 3 * 4 * 5);
}

#[test]
fn full_grid_and_table_order() {
    let result = run_benchmark(&small_config()).unwrap();
    assert_eq!(result.reports.len(), 24);
    assert!(result.all_ok());
    let table = render_table(&result.reports);
    let titles: Vec<usize> = FeatureFamily::ALL
        .iter()
        .map(|f| table.find(f.title()).unwrap())
        .collect();
    assert!(titles.windows(2).all(|w| w[0] < w[1]));
    let first = &table[..titles[1]];
    let mut last = 0;
    for k in ModelKind::ALL {
        let at = first.find(&format!("\n{}", k.display_name())).unwrap();
        assert!(at > last, "{k} out of order");
        last = at;
    }
    assert!(first.contains("1D Dilated CNN-LSTM"));
    assert!(first.contains("not implemented"));
}

#[test]
fn bundle_roundtrip_and_jobs_independence() {
    let one = run_benchmark(&BenchConfig { jobs: 1, ..small_config() }).unwrap();
    let four = run_benchmark(&BenchConfig { jobs: 4, ..small_config() }).unwrap();
    for (a, b) in one.reports.iter().zip(&four.reports) {
        assert_eq!(a.cell_id, b.cell_id);
        assert_eq!(a.config, b.config);
        assert_eq!(a.metrics, b.metrics);
        assert_eq!(a.confusion, b.confusion);
    }
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config();
    write_bundle(dir.path(), &one, &cfg).unwrap();
    let back = read_bundle(dir.path()).unwrap();
    assert_eq!(back.len(), one.reports.len());
    for r in &back {
        let orig = one.reports.iter().find(|o| o.cell_id == r.cell_id).unwrap();
        assert_eq!(r, orig);
    }
    let resolved = std::fs::read_to_string(dir.path().join("config.resolved.toml")).unwrap();
    assert_eq!(BenchConfig::from_toml(&resolved).unwrap(), cfg);
}

#[test]
fn manifest_dataset_matches_in_memory() {
    let spec = small_spec();
    let records = spec.generate().unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), &records, &spec.class_names()).unwrap();
    let toml = r#"
seed = 7
families = ["tsd"]
models = ["lda", "rf"]
[dataset]
manifest = "manifest.json"
"#;
    let cfg_path = dir.path().join("bench.toml");
    std::fs::write(&cfg_path, toml).unwrap();
    let from_disk = run_benchmark(&BenchConfig::from_file(&cfg_path).unwrap()).unwrap();
    let in_memory = run_benchmark(&BenchConfig {
        families: vec![FeatureFamily::Tsd],
        models: vec![ModelKind::Lda, ModelKind::RandomForest],
        ..small_config()
    })
    .unwrap();
    for (a, b) in from_disk.reports.iter().zip(&in_memory.reports) {
        assert_eq!(a.confusion, b.confusion, "{}", a.cell_id);
    }
}

#[test]
fn failed_cell_is_reported_not_fatal() {
    let mut cfg = BenchConfig {
        families: vec![FeatureFamily::Ftdd],
        models: vec![ModelKind::Lda, ModelKind::Knn],
        ..small_config()
    };
    cfg.classifiers.knn_k = 10_000;
    let result = run_benchmark(&cfg).unwrap();
    assert!(!result.all_ok());
    assert_eq!(result.reports[0].status, CellStatus::Ok);
    assert_eq!(result.reports[1].status, CellStatus::Failed);
    assert!(result.reports[1].error.is_some());
    assert!(render_table(&result.reports).contains("(failed)"));
}

#[test]
fn subject_split_keeps_subjects_apart() {
    let cfg = BenchConfig {
        families: vec![FeatureFamily::Wavelet],
        models: vec![ModelKind::Lda],
        split_mode: SplitMode::Subject,
        test_fraction: 0.25,
        ..small_config()
    };
    let prepared = semg_core::eval::prepare_features(&cfg).unwrap();
    assert!(!prepared.train.is_empty() && !prepared.test.is_empty());
    let result = run_benchmark(&cfg).unwrap();
    assert!(result.all_ok());
}

#[test]
fn config_errors() {
    let missing = BenchConfig {
        dataset: DatasetConfig {
            manifest: Some("/nonexistent/manifest.json".into()),
            synthetic: None,
        },
        ..BenchConfig::default()
    };
    assert!(run_benchmark(&missing).is_err());
    assert!(run_benchmark(&BenchConfig::default()).is_err());
    assert!(BenchConfig::from_toml("seeds = 3").is_err());
    let bad_fraction = BenchConfig {
        test_fraction: 1.0,
        ..small_config()
    };
    assert!(run_benchmark(&bad_fraction).is_err());
    let low_fs = BenchConfig {
        dataset: DatasetConfig {
            manifest: None,
            synthetic: Some(SyntheticSpec {
                fs: 800.0,
                ..small_spec()
            }),
        },
        ..BenchConfig::default()
    };
    assert!(run_benchmark(&low_fs).is_err());
}
