use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{metrics, ConfusionMatrix};
use super::report::{cell_seed, CellConfig, CellStatus, EvaluationReport, Timings};
use super::split::{stratified_split, subject_split, SplitMode};
use crate::classify::{ClassifierParams, ModelKind, Pipeline};
use crate::error::{Error, Result};
use crate::features::{extract, FeatureFamily, FeatureMatrix, FeatureParams};
use crate::preprocess::{bandpass, segment_all, BandpassConfig, WindowConfig};
use crate::signal::{load_dataset, Dataset, SyntheticSpec};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    /// JSON manifest of canonical CSV (or WFDB) trials.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manifest: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticSpec>,
}

impl DatasetConfig {
    pub fn load(&self) -> Result<(Dataset, String)> {
        match (&self.manifest, &self.synthetic) {
            (Some(path), None) => {
                if !path.exists() {
                    return Err(Error::Config(format!("dataset manifest {} does not exist", path.display())));
                }
                Ok((load_dataset(path)?, path.display().to_string()))
            }
            (None, Some(spec)) => {
                let records = spec.generate()?;
                Ok((
                    Dataset {
                        records,
                        class_names: spec.class_names(),
                    },
                    "synthetic".to_string(),
                ))
            }
            (Some(_), Some(_)) => Err(Error::Config(
                "dataset: give either `manifest` or `synthetic`, not both".into(),
            )),
            (None, None) => Err(Error::Config("dataset: `manifest` or `synthetic` is required".into())),
        }
    }
}

/// Declarative benchmark description, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchConfig {
    pub seed: u64,
    /// Worker threads; 0 uses every core. Results never depend on it.
    pub jobs: usize,
    pub families: Vec<FeatureFamily>,
    pub models: Vec<ModelKind>,
    pub test_fraction: f64,
    pub split_mode: SplitMode,
    pub dataset: DatasetConfig,
    pub bandpass: BandpassConfig,
    pub window: WindowConfig,
    pub features: FeatureParams,
    pub classifiers: ClassifierParams,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            jobs: 0,
            families: FeatureFamily::ALL.to_vec(),
            models: ModelKind::ALL.to_vec(),
            test_fraction: 0.2,
            split_mode: SplitMode::Window,
            dataset: DatasetConfig::default(),
            bandpass: BandpassConfig::default(),
            window: WindowConfig::default(),
            features: FeatureParams::default(),
            classifiers: ClassifierParams::default(),
        }
    }
}

impl BenchConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Parses a config file; a relative manifest path resolves against the
    /// file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        if let Some(m) = &cfg.dataset.manifest {
            if m.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                cfg.dataset.manifest = Some(base.join(m));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.families.is_empty() || self.models.is_empty() {
            return Err(Error::Config("at least one family and one model are required".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::Config(format!(
                "test_fraction must lie in (0, 1), got {}",
                self.test_fraction
            )));
        }
        self.features.tdd.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub source: String,
    pub n_records: usize,
    pub n_channels: usize,
    pub fs: f64,
    pub class_names: Vec<String>,
    pub n_windows: usize,
    pub window_len: usize,
    pub n_train: usize,
    pub n_test: usize,
}

#[derive(Debug, Clone)]
pub struct BenchmarkResult {
    pub dataset: DatasetSummary,
    pub reports: Vec<EvaluationReport>,
}

impl BenchmarkResult {
    pub fn all_ok(&self) -> bool {
        self.reports.iter().all(EvaluationReport::is_ok)
    }
}

/// Features of one family over the shared windows, or the stage error.
pub struct PreparedFamily {
    pub family: FeatureFamily,
    pub matrix: Result<FeatureMatrix>,
    pub extract_ms: f64,
}

pub struct PreparedData {
    pub summary: DatasetSummary,
    pub families: Vec<PreparedFamily>,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Ingest, filter, segment, split and extract every configured family.
pub fn prepare_features(config: &BenchConfig) -> Result<PreparedData> {
    config.validate()?;
    let (dataset, source) = config.dataset.load()?;
    let filtered = dataset
        .records
        .par_iter()
        .map(|r| bandpass(r, &config.bandpass))
        .collect::<Result<Vec<_>>>()?;
    let windows = segment_all(&filtered, &config.window)?;
    let labels = windows.labels();
    let split_seed = cell_seed(config.seed, "split");
    let (train, test) = match config.split_mode {
        SplitMode::Window => stratified_split(&labels, config.test_fraction, split_seed)?,
        SplitMode::Subject => {
            let subjects: Vec<String> = windows.windows.iter().map(|w| w.origin.subject.clone()).collect();
            subject_split(&subjects, config.test_fraction, split_seed)?
        }
    };
    let families = config
        .families
        .iter()
        .map(|&family| {
            let start = Instant::now();
            let matrix = extract(&windows, family, &config.features);
            PreparedFamily {
                family,
                matrix,
                extract_ms: start.elapsed().as_secs_f64() * 1e3,
            }
        })
        .collect();
    let summary = DatasetSummary {
        source,
        n_records: dataset.records.len(),
        n_channels: windows.n_channels,
        fs: windows.fs,
        class_names: dataset.class_names,
        n_windows: windows.len(),
        window_len: windows.window_len,
        n_train: train.len(),
        n_test: test.len(),
    };
    Ok(PreparedData {
        summary,
        families,
        train,
        test,
    })
}

fn run_cell(
    config: &BenchConfig,
    data: &PreparedData,
    prepared: &PreparedFamily,
    model: ModelKind,
) -> EvaluationReport {
    let cell_id = format!("{}_{}", prepared.family, model);
    let seed = cell_seed(config.seed, &cell_id);
    let mut cell_config = CellConfig {
        family: prepared.family,
        model,
        global_seed: config.seed,
        cell_seed: seed,
        test_fraction: config.test_fraction,
        split_mode: config.split_mode,
        stratified: config.split_mode == SplitMode::Window,
        averaging: "macro".into(),
        standardized: model.needs_scaling(),
        bandpass: config.bandpass,
        window: config.window,
        features: config.features,
        classifiers: config.classifiers.clone(),
        fusion: "elementwise cosine contribution a_j*b_j/(|a||b|)".into(),
        n_channels: data.summary.n_channels,
        n_features: 0,
        n_train: data.train.len(),
        n_test: data.test.len(),
    };
    let mut timings = Timings {
        extract_ms: prepared.extract_ms,
        ..Timings::default()
    };
    let outcome = (|| -> Result<(ConfusionMatrix, _)> {
        let matrix = prepared.matrix.as_ref().map_err(|e| Error::Feature(e.to_string()))?;
        cell_config.n_features = matrix.n_features();
        let train = matrix.select(&data.train);
        let test = matrix.select(&data.test);
        let start = Instant::now();
        let pipeline = Pipeline::fit(model, &train, &config.classifiers, seed)?;
        timings.fit_ms = start.elapsed().as_secs_f64() * 1e3;
        let start = Instant::now();
        let predicted = pipeline.predict(&test.values)?;
        timings.predict_ms = start.elapsed().as_secs_f64() * 1e3;
        let cm = ConfusionMatrix::from_predictions(&test.labels, &predicted, &data.summary.class_names)?;
        let m = metrics(&cm)?;
        Ok((cm, m))
    })();
    match outcome {
        Ok((cm, m)) => EvaluationReport {
            cell_id,
            status: CellStatus::Ok,
            error: None,
            config: cell_config,
            metrics: Some(m),
            confusion: Some(cm),
            timings,
        },
        Err(e) => EvaluationReport {
            cell_id,
            status: CellStatus::Failed,
            error: Some(e.to_string()),
            config: cell_config,
            metrics: None,
            confusion: None,
            timings,
        },
    }
}

fn run_inner(config: &BenchConfig) -> Result<BenchmarkResult> {
    let data = prepare_features(config)?;
    let cells: Vec<(&PreparedFamily, ModelKind)> = data
        .families
        .iter()
        .flat_map(|f| config.models.iter().map(move |&m| (f, m)))
        .collect();
    let reports = cells
        .par_iter()
        .map(|(f, m)| run_cell(config, &data, f, *m))
        .collect();
    Ok(BenchmarkResult {
        dataset: data.summary,
        reports,
    })
}

/// Runs every (family, model) cell. Stage failures before extraction abort
/// the run; failures inside a cell are recorded in that cell's report.
pub fn run_benchmark(config: &BenchConfig) -> Result<BenchmarkResult> {
    if config.jobs == 0 {
        return run_inner(config);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| run_inner(config))
}
