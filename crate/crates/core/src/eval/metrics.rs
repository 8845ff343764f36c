use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
    pub class_names: Vec<String>,
}

impl ConfusionMatrix {
    pub fn new(counts: Vec<Vec<u64>>, class_names: Vec<String>) -> Result<Self> {
        let k = counts.len();
        if k == 0 {
            return Err(Error::Eval("empty confusion matrix".into()));
        }
        if counts.iter().any(|r| r.len() != k) {
            return Err(Error::Eval("confusion matrix must be square".into()));
        }
        if class_names.len() != k {
            return Err(Error::Eval(format!(
                "{k} classes but {} class names",
                class_names.len()
            )));
        }
        Ok(Self { counts, class_names })
    }

    pub fn from_predictions(truth: &[usize], predicted: &[usize], class_names: &[String]) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::Eval(format!(
                "{} true labels but {} predictions",
                truth.len(),
                predicted.len()
            )));
        }
        let k = class_names.len();
        let mut counts = vec![vec![0u64; k]; k];
        for (&t, &p) in truth.iter().zip(predicted) {
            if t >= k || p >= k {
                return Err(Error::Eval(format!("label {} outside {k} classes", t.max(p))));
            }
            counts[t][p] += 1;
        }
        Self::new(counts, class_names.to_vec())
    }

    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes()).map(|i| self.counts[i][i]).sum()
    }
}

/// One-vs-rest counts and scores for one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class_name: String,
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    /// `(tp + tn) / (tp + tn + fp + fn)`
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    /// `trace / total`.
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub per_class: Vec<ClassMetrics>,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Per-class and macro-averaged scores; any 0/0 is taken as 0.
pub fn metrics(cm: &ConfusionMatrix) -> Result<MetricsSummary> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::Eval("confusion matrix holds no predictions".into()));
    }
    let k = cm.n_classes();
    let per_class: Vec<ClassMetrics> = (0..k)
        .map(|c| {
            let tp = cm.counts[c][c];
            let row: u64 = cm.counts[c].iter().sum();
            let col: u64 = cm.counts.iter().map(|r| r[c]).sum();
            let fp = col - tp;
            let fn_ = row - tp;
            let tn = total - tp - fp - fn_;
            let precision = ratio(tp as f64, (tp + fp) as f64);
            let recall = ratio(tp as f64, (tp + fn_) as f64);
            ClassMetrics {
                class_name: cm.class_names[c].clone(),
                tp,
                tn,
                fp,
                fn_,
                accuracy: (tp + tn) as f64 / total as f64,
                precision,
                recall,
                f1: ratio(2.0 * precision * recall, precision + recall),
            }
        })
        .collect();
    let mean = |f: fn(&ClassMetrics) -> f64| per_class.iter().map(f).sum::<f64>() / k as f64;
    Ok(MetricsSummary {
        accuracy: cm.trace() as f64 / total as f64,
        macro_precision: mean(|m| m.precision),
        macro_recall: mean(|m| m.recall),
        macro_f1: mean(|m| m.f1),
        per_class,
    })
}
