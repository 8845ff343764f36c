//! Descriptor families and the feature matrix they produce.

mod tdd;
mod wavelet;

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::WindowSet;

pub use tdd::{
    channel_pairs, ftdd_names, ftdd_window, fuse, log_power, raw_moments, tdd_base,
    tdd_base_with_lambda, tkeo_sum, tsd_names, tsd_signal_features, tsd_signal_features_with_lambda,
    tsd_window, IrfMode, LambdaMode, TddParams, TDD_FEATURES, TSD_FEATURES,
};
pub use wavelet::{
    band_features, band_names, dwt, wavelet_features, wavelet_names, wavelet_window, SubbandSet,
    WaveletFilter, WAVELET_FEATURES,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureFamily {
    Ftdd,
    Tsd,
    Wavelet,
}

impl FeatureFamily {
    pub const ALL: [FeatureFamily; 3] = [FeatureFamily::Ftdd, FeatureFamily::Tsd, FeatureFamily::Wavelet];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureFamily::Ftdd => "ftdd",
            FeatureFamily::Tsd => "tsd",
            FeatureFamily::Wavelet => "wavelet",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            FeatureFamily::Ftdd => "Fused time-domain descriptors (fTDD)",
            FeatureFamily::Tsd => "Temporal-spatial descriptors (TSD)",
            FeatureFamily::Wavelet => "Wavelet transform features (sym8)",
        }
    }
}

impl fmt::Display for FeatureFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ftdd" => Ok(FeatureFamily::Ftdd),
            "tsd" => Ok(FeatureFamily::Tsd),
            "wavelet" | "wt" => Ok(FeatureFamily::Wavelet),
            other => Err(Error::Config(format!(
                "unknown feature family {other:?} (expected ftdd, tsd or wavelet)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeatureParams {
    pub tdd: TddParams,
    pub wavelet_levels: usize,
    /// Guard inside the subband entropy logarithm.
    pub entropy_c: f64,
}

impl Default for FeatureParams {
    fn default() -> Self {
        Self {
            tdd: TddParams::default(),
            wavelet_levels: 5,
            entropy_c: 1e-12,
        }
    }
}

/// Rows are windows, columns named features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub values: Vec<Vec<f64>>,
    pub feature_names: Vec<String>,
    pub labels: Vec<usize>,
}

impl FeatureMatrix {
    pub fn new(values: Vec<Vec<f64>>, feature_names: Vec<String>, labels: Vec<usize>) -> Result<Self> {
        if values.len() != labels.len() {
            return Err(Error::Feature(format!(
                "{} rows but {} labels",
                values.len(),
                labels.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = feature_names.iter().find(|n| !seen.insert(n.as_str())) {
            return Err(Error::Feature(format!("duplicate feature name {dup}")));
        }
        for (r, row) in values.iter().enumerate() {
            if row.len() != feature_names.len() {
                return Err(Error::Feature(format!(
                    "row {r} has {} values, expected {}",
                    row.len(),
                    feature_names.len()
                )));
            }
            if let Some(c) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::Feature(format!(
                    "non-finite value at row {r}, feature {}",
                    feature_names[c]
                )));
            }
        }
        Ok(Self {
            values,
            feature_names,
            labels,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.values.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Number of classes implied by the largest label.
    pub fn n_classes(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    /// Row subset in the order given.
    pub fn select(&self, rows: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            values: rows.iter().map(|&r| self.values[r].clone()).collect(),
            feature_names: self.feature_names.clone(),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
        }
    }

    /// CSV with the feature names as header and a final `label` column.
    pub fn to_csv_string(&self) -> String {
        let mut out = self.feature_names.join(",");
        out.push_str(",label\n");
        for (row, label) in self.values.iter().zip(&self.labels) {
            for v in row {
                out.push_str(&v.to_string());
                out.push(',');
            }
            out.push_str(&label.to_string());
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let header = reader
            .headers()
            .map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?
            .clone();
        let n = header.len();
        if n < 2 || &header[n - 1] != "label" {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                message: "feature CSV must end with a `label` column".into(),
            });
        }
        let names: Vec<String> = header.iter().take(n - 1).map(str::to_string).collect();
        let mut values = Vec::new();
        let mut labels = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
            let cell = |c: usize, message: String| Error::Cell {
                path: path.to_path_buf(),
                row: i + 2,
                column: c + 1,
                message,
            };
            let mut row = Vec::with_capacity(n - 1);
            for c in 0..n - 1 {
                let v: f64 = rec[c]
                    .trim()
                    .parse()
                    .map_err(|_| cell(c, format!("non-numeric value {:?}", &rec[c])))?;
                row.push(v);
            }
            let label: usize = rec[n - 1]
                .trim()
                .parse()
                .map_err(|_| cell(n - 1, format!("bad label {:?}", &rec[n - 1])))?;
            values.push(row);
            labels.push(label);
        }
        Self::new(values, names, labels)
    }
}

pub fn feature_names(family: FeatureFamily, n_channels: usize, params: &FeatureParams) -> Vec<String> {
    match family {
        FeatureFamily::Ftdd => ftdd_names(n_channels),
        FeatureFamily::Tsd => tsd_names(n_channels),
        FeatureFamily::Wavelet => wavelet_names(n_channels, params.wavelet_levels),
    }
}

/// One feature row per window, computed in parallel, in window order.
pub fn extract(ws: &WindowSet, family: FeatureFamily, params: &FeatureParams) -> Result<FeatureMatrix> {
    if ws.is_empty() {
        return Err(Error::Feature("empty window set".into()));
    }
    params.tdd.validate()?;
    let filter = WaveletFilter::sym8();
    let values = ws
        .windows
        .par_iter()
        .map(|w| match family {
            FeatureFamily::Ftdd => ftdd_window(&w.samples, &params.tdd),
            FeatureFamily::Tsd => tsd_window(&w.samples, &params.tdd),
            FeatureFamily::Wavelet => {
                wavelet_window(&w.samples, &filter, params.wavelet_levels, params.entropy_c)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    FeatureMatrix::new(values, feature_names(family, ws.n_channels, params), ws.labels())
}
