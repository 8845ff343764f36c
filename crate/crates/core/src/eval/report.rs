use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::bench::{BenchConfig, BenchmarkResult};
use super::metrics::{ConfusionMatrix, MetricsSummary};
use super::split::SplitMode;
use crate::classify::{ClassifierParams, ModelKind};
use crate::error::{Error, Result};
use crate::features::{FeatureFamily, FeatureParams};
use crate::preprocess::{BandpassConfig, WindowConfig};

/// Rows printed as not implemented under every table.
pub const DEEP_MODELS: [&str; 2] = ["1D Dilated CNN", "1D Dilated CNN-LSTM"];

/// Seed of one grid cell: the first 8 bytes of SHA-256 over the global
/// seed and the cell id, so results do not depend on scheduling.
pub fn cell_seed(global: u64, cell_id: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(global.to_le_bytes());
    h.update(cell_id.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Ok,
    Failed,
}

/// Everything needed to rerun one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellConfig {
    pub family: FeatureFamily,
    pub model: ModelKind,
    pub global_seed: u64,
    pub cell_seed: u64,
    pub test_fraction: f64,
    pub split_mode: SplitMode,
    pub stratified: bool,
    pub averaging: String,
    pub standardized: bool,
    pub bandpass: BandpassConfig,
    pub window: WindowConfig,
    pub features: FeatureParams,
    pub classifiers: ClassifierParams,
    pub fusion: String,
    pub n_channels: usize,
    pub n_features: usize,
    pub n_train: usize,
    pub n_test: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub extract_ms: f64,
    pub fit_ms: f64,
    pub predict_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub cell_id: String,
    pub status: CellStatus,
    pub error: Option<String>,
    pub config: CellConfig,
    pub metrics: Option<MetricsSummary>,
    pub confusion: Option<ConfusionMatrix>,
    pub timings: Timings,
}

impl EvaluationReport {
    pub fn is_ok(&self) -> bool {
        self.status == CellStatus::Ok
    }
}

fn fmt_pct(v: f64) -> String {
    format!("{:.2}", 100.0 * v)
}

/// One table per feature family in the classical row order, with the deep
/// models listed as not implemented.
pub fn render_table(reports: &[EvaluationReport]) -> String {
    let mut out = String::new();
    for family in FeatureFamily::ALL {
        let rows: Vec<&EvaluationReport> = ModelKind::ALL
            .iter()
            .filter_map(|k| reports.iter().find(|r| r.config.family == family && r.config.model == *k))
            .collect();
        if rows.is_empty() {
            continue;
        }
        let _ = writeln!(out, "{}", family.title());
        let _ = writeln!(out, "{:<22} {:>8} {:>6} {:>6} {:>6}", "Model", "ACC", "P", "R", "F1");
        let _ = writeln!(out, "{}", "-".repeat(52));
        for r in rows {
            let name = r.config.model.display_name();
            match &r.metrics {
                Some(m) => {
                    let _ = writeln!(
                        out,
                        "{:<22} {:>8} {:>6.2} {:>6.2} {:>6.2}",
                        name,
                        fmt_pct(m.accuracy),
                        m.macro_precision,
                        m.macro_recall,
                        m.macro_f1
                    );
                }
                None => {
                    let _ = writeln!(out, "{name:<22} {:>8} {:>6} {:>6} {:>6}  (failed)", "-", "-", "-", "-");
                }
            }
        }
        for deep in DEEP_MODELS {
            let _ = writeln!(out, "{deep:<22} {:>8}", "not implemented");
        }
        out.push('\n');
    }
    out
}

pub fn render_csv(reports: &[EvaluationReport]) -> String {
    let mut out = String::from("family,model,status,accuracy,macro_precision,macro_recall,macro_f1\n");
    for r in reports {
        let status = if r.is_ok() { "ok" } else { "failed" };
        match &r.metrics {
            Some(m) => {
                let _ = writeln!(
                    out,
                    "{},{},{status},{},{},{},{}",
                    r.config.family, r.config.model, m.accuracy, m.macro_precision, m.macro_recall, m.macro_f1
                );
            }
            None => {
                let _ = writeln!(out, "{},{},{status},,,,", r.config.family, r.config.model);
            }
        }
    }
    out
}

#[derive(Serialize)]
struct RunInfo<'a> {
    tool: &'static str,
    version: &'static str,
    seed: u64,
    dataset: &'a super::bench::DatasetSummary,
    cells: Vec<&'a str>,
    not_implemented: [&'static str; 2],
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes one JSON per cell, `table.txt`, `table.csv`, `run.json` and the
/// resolved configuration into `dir`.
pub fn write_bundle(dir: &Path, result: &BenchmarkResult, config: &BenchConfig) -> Result<Vec<PathBuf>> {
    let cells = dir.join("cells");
    fs::create_dir_all(&cells).map_err(|e| Error::io(&cells, e))?;
    let mut written = Vec::new();
    for r in &result.reports {
        let p = cells.join(format!("{}.json", r.cell_id));
        let json = serde_json::to_string_pretty(r).map_err(|e| Error::Serde(e.to_string()))?;
        write_file(&p, &(json + "\n"))?;
        written.push(p);
    }
    let table = dir.join("table.txt");
    write_file(&table, &render_table(&result.reports))?;
    let csv = dir.join("table.csv");
    write_file(&csv, &render_csv(&result.reports))?;
    let info = RunInfo {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        seed: config.seed,
        dataset: &result.dataset,
        cells: result.reports.iter().map(|r| r.cell_id.as_str()).collect(),
        not_implemented: DEEP_MODELS,
    };
    let run = dir.join("run.json");
    let json = serde_json::to_string_pretty(&info).map_err(|e| Error::Serde(e.to_string()))?;
    write_file(&run, &(json + "\n"))?;
    let cfg = dir.join("config.resolved.toml");
    write_file(&cfg, &config.to_toml()?)?;
    written.extend([table, csv, run, cfg]);
    Ok(written)
}

/// Reads every cell report of a bundle, in file-name order.
pub fn read_bundle(dir: &Path) -> Result<Vec<EvaluationReport>> {
    let cells = dir.join("cells");
    let mut paths: Vec<PathBuf> = fs::read_dir(&cells)
        .map_err(|e| Error::io(&cells, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            serde_json::from_str(&text).map_err(|e| Error::Parse {
                path: p.clone(),
                message: e.to_string(),
            })
        })
        .collect()
}
