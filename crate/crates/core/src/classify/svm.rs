//! One-vs-rest linear SVMs (hinge loss) trained by dual coordinate descent.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::util::{argmax, check_train, distinct_labels, mix_seed};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SvmParams {
    pub c: f64,
    pub max_epochs: usize,
    /// Stop once the spread of projected gradients falls below this.
    pub tol: f64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            max_epochs: 1000,
            tol: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    /// One weight vector per class; the last entry is the bias.
    pub weights: Vec<Vec<f64>>,
}

impl SvmModel {
    pub fn fit(train: &FeatureMatrix, params: &SvmParams, seed: u64) -> Result<Self> {
        let n_classes = check_train(train)?;
        if distinct_labels(&train.labels) < 2 {
            return Err(Error::SingleClass);
        }
        if !(params.c > 0.0) {
            return Err(Error::Config(format!("SVM C must be > 0, got {}", params.c)));
        }
        let weights = (0..n_classes)
            .map(|class| {
                let y: Vec<f64> = train
                    .labels
                    .iter()
                    .map(|&l| if l == class { 1.0 } else { -1.0 })
                    .collect();
                binary_dcd(&train.values, &y, params, mix_seed(seed, class as u64))
            })
            .collect();
        Ok(Self { weights })
    }

    pub fn decision_values(&self, row: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .map(|w| {
                let d = w.len() - 1;
                row.iter().zip(&w[..d]).map(|(a, b)| a * b).sum::<f64>() + w[d]
            })
            .collect()
    }

    /// Softmax over the decision values.
    pub fn predict_proba(&self, row: &[f64]) -> Vec<f64> {
        let dv = self.decision_values(row);
        let max = dv.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exp: Vec<f64> = dv.iter().map(|v| (v - max).exp()).collect();
        let sum: f64 = exp.iter().sum();
        exp.into_iter().map(|v| v / sum).collect()
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        argmax(&self.decision_values(row))
    }
}

/// Dual coordinate descent for `min 0.5|w|^2 + C Σ max(0, 1 - y_i w·x_i)`
/// with the bias folded in as a constant feature of 1.
fn binary_dcd(x: &[Vec<f64>], y: &[f64], params: &SvmParams, seed: u64) -> Vec<f64> {
    let n = x.len();
    let d = x[0].len();
    let mut w = vec![0.0; d + 1];
    let mut alpha = vec![0.0; n];
    let q_diag: Vec<f64> = x.iter().map(|r| r.iter().map(|v| v * v).sum::<f64>() + 1.0).collect();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = params.c;

    for _ in 0..params.max_epochs {
        order.shuffle(&mut rng);
        let mut pg_max = f64::NEG_INFINITY;
        let mut pg_min = f64::INFINITY;
        for &i in &order {
            let xi = &x[i];
            let margin = xi.iter().zip(&w[..d]).map(|(a, b)| a * b).sum::<f64>() + w[d];
            let g = y[i] * margin - 1.0;
            let pg = if alpha[i] == 0.0 {
                g.min(0.0)
            } else if alpha[i] == c {
                g.max(0.0)
            } else {
                g
            };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg != 0.0 {
                let old = alpha[i];
                alpha[i] = (old - g / q_diag[i]).clamp(0.0, c);
                let step = (alpha[i] - old) * y[i];
                if step != 0.0 {
                    for (wj, v) in w[..d].iter_mut().zip(xi) {
                        *wj += step * v;
                    }
                    w[d] += step;
                }
            }
        }
        if pg_max - pg_min < params.tol {
            break;
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn blobs(n: usize, sep: f64, seed: u64) -> FeatureMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let c = i % 2;
            let centre = if c == 0 { -sep / 2.0 } else { sep / 2.0 };
            rows.push(vec![
                centre + rng.sample::<f64, _>(StandardNormal) * 0.4,
                rng.sample::<f64, _>(StandardNormal),
            ]);
            labels.push(c);
        }
        FeatureMatrix::new(rows, vec!["a".into(), "b".into()], labels).unwrap()
    }

    #[test]
    fn separable_blobs_fit_perfectly() {
        // 5 sigma gap between the closest class points along feature a
        let m = blobs(200, 5.0, 1);
        let gap = {
            let max0 = m.values.iter().zip(&m.labels).filter(|(_, &l)| l == 0).map(|(r, _)| r[0]).fold(f64::MIN, f64::max);
            let min1 = m.values.iter().zip(&m.labels).filter(|(_, &l)| l == 1).map(|(r, _)| r[0]).fold(f64::MAX, f64::min);
            min1 - max0
        };
        assert!(gap > 0.0, "fixture must be separable by a vertical line");
        let svm = SvmModel::fit(&m, &SvmParams::default(), 0).unwrap();
        let acc = m
            .values
            .iter()
            .zip(&m.labels)
            .filter(|(r, &l)| svm.predict_row(r) == l)
            .count();
        assert_eq!(acc, 200);
        let p = svm.predict_proba(&m.values[0]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_class_rejected() {
        let m = FeatureMatrix::new(vec![vec![1.0], vec![2.0]], vec!["a".into()], vec![1, 1]).unwrap();
        assert!(matches!(SvmModel::fit(&m, &SvmParams::default(), 0), Err(Error::SingleClass)));
    }

    #[test]
    fn deterministic_given_seed() {
        let m = blobs(100, 1.0, 2);
        let a = SvmModel::fit(&m, &SvmParams::default(), 9).unwrap();
        let b = SvmModel::fit(&m, &SvmParams::default(), 9).unwrap();
        assert_eq!(a, b);
    }
}
