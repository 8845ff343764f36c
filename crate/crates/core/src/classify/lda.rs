//! Linear discriminant analysis with a shared within-class covariance,
//! whitened through the SVD of the class-centred data.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::util::{argmax, check_train};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

/// Singular values below this fraction of the largest are treated as zero.
const RANK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    /// Columns map a raw row into the whitened space (`d x r`, row-major).
    pub whiten: Vec<Vec<f64>>,
    /// Whitened class means, one per class.
    pub class_means: Vec<Vec<f64>>,
    /// `-0.5 |mean|^2 + ln prior` for each class.
    pub offsets: Vec<f64>,
}

impl LdaModel {
    pub fn fit(train: &FeatureMatrix) -> Result<Self> {
        let n_classes = check_train(train)?;
        let n = train.n_rows();
        let d = train.n_features();
        if n < 2 {
            return Err(Error::Training("LDA needs at least 2 rows".into()));
        }
        if n_classes < 2 {
            return Err(Error::SingleClass);
        }
        let mut counts = vec![0usize; n_classes];
        let mut means = vec![vec![0.0; d]; n_classes];
        for (row, &y) in train.values.iter().zip(&train.labels) {
            counts[y] += 1;
            for (m, v) in means[y].iter_mut().zip(row) {
                *m += v;
            }
        }
        if let Some(k) = counts.iter().position(|&c| c < 2) {
            return Err(Error::Training(format!(
                "LDA needs at least 2 rows per class; class {k} has {}",
                counts[k]
            )));
        }
        for (m, &c) in means.iter_mut().zip(&counts) {
            m.iter_mut().for_each(|v| *v /= c as f64);
        }

        let dof = (n - n_classes) as f64;
        let mut centred = DMatrix::<f64>::zeros(n, d);
        for (i, (row, &y)) in train.values.iter().zip(&train.labels).enumerate() {
            for j in 0..d {
                centred[(i, j)] = row[j] - means[y][j];
            }
        }
        let mut scale = vec![1.0; d];
        for (j, s) in scale.iter_mut().enumerate() {
            let sd = (centred.column(j).norm_squared() / dof.max(1.0)).sqrt();
            if sd > 0.0 {
                *s = sd;
            }
        }
        let norm = dof.max(1.0).sqrt();
        for (j, &sd) in scale.iter().enumerate() {
            let f = 1.0 / (sd * norm);
            centred.column_mut(j).iter_mut().for_each(|v| *v *= f);
        }

        let svd = centred.svd(false, true);
        let v_t = svd.v_t.ok_or_else(|| Error::Training("SVD failed".into()))?;
        let sv = svd.singular_values;
        let s_max = sv.iter().copied().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] > RANK_TOL * s_max).collect();
        if keep.is_empty() {
            return Err(Error::Training("within-class scatter is zero".into()));
        }

        // whiten[j][r] = V[j, r] / (scale_j * sigma_r)
        let whiten: Vec<Vec<f64>> = (0..d)
            .map(|j| keep.iter().map(|&r| v_t[(r, j)] / (scale[j] * sv[r])).collect())
            .collect();
        let project = |x: &[f64]| -> Vec<f64> {
            let mut z = vec![0.0; keep.len()];
            for (xj, wj) in x.iter().zip(&whiten) {
                for (zr, w) in z.iter_mut().zip(wj) {
                    *zr += xj * w;
                }
            }
            z
        };
        let class_means: Vec<Vec<f64>> = means.iter().map(|m| project(m)).collect();
        let offsets = class_means
            .iter()
            .zip(&counts)
            .map(|(m, &c)| -0.5 * m.iter().map(|v| v * v).sum::<f64>() + (c as f64 / n as f64).ln())
            .collect();
        Ok(Self {
            whiten,
            class_means,
            offsets,
        })
    }

    pub fn scores(&self, row: &[f64]) -> Vec<f64> {
        let r = self.class_means.first().map_or(0, Vec::len);
        let mut z = vec![0.0; r];
        for (xj, wj) in row.iter().zip(&self.whiten) {
            for (zr, w) in z.iter_mut().zip(wj) {
                *zr += xj * w;
            }
        }
        self.class_means
            .iter()
            .zip(&self.offsets)
            .map(|(m, o)| m.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>() + o)
            .collect()
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        argmax(&self.scores(row))
    }
}
