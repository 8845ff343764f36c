use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

/// Per-column z-score learned from training rows. Columns with zero spread
/// map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::Training("cannot standardize an empty matrix".into()))?;
        let d = first.len();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; d];
        for r in rows {
            if r.len() != d {
                return Err(Error::FeatureMismatch {
                    expected: d,
                    found: r.len(),
                });
            }
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut std = vec![0.0; d];
        if rows.len() > 1 {
            for r in rows {
                for ((s, v), m) in std.iter_mut().zip(r).zip(&mean) {
                    *s += (v - m) * (v - m);
                }
            }
            std.iter_mut().for_each(|s| *s = (*s / (n - 1.0)).sqrt());
        }
        for (s, m) in std.iter_mut().zip(&mean) {
            // spread at rounding level of the column's magnitude
            if *s <= 1e-12 * m.abs().max(1e-300) {
                *s = 0.0;
            }
        }
        Ok(Self { mean, std })
    }

    pub fn n_features(&self) -> usize {
        self.mean.len()
    }

    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.mean.len() {
            return Err(Error::FeatureMismatch {
                expected: self.mean.len(),
                found: row.len(),
            });
        }
        Ok(row
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| if *s == 0.0 { 0.0 } else { (v - m) / s })
            .collect())
    }

    pub fn transform_rows(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        rows.iter().map(|r| self.transform_row(r)).collect()
    }

    pub fn apply(&self, m: &FeatureMatrix) -> Result<FeatureMatrix> {
        Ok(FeatureMatrix {
            values: self.transform_rows(&m.values)?,
            feature_names: m.feature_names.clone(),
            labels: m.labels.clone(),
        })
    }
}

pub fn standardize_fit(m: &FeatureMatrix) -> Result<Standardizer> {
    Standardizer::fit(&m.values)
}

pub fn standardize_apply(s: &Standardizer, m: &FeatureMatrix) -> Result<FeatureMatrix> {
    s.apply(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn simple_column() {
        let s = Standardizer::fit(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        assert_eq!((s.mean[0], s.std[0]), (2.0, 1.0));
        let t = s.transform_rows(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        assert_eq!(t, vec![vec![-1.0], vec![0.0], vec![1.0]]);
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let s = Standardizer::fit(&[vec![5.0, 1.0], vec![5.0, 2.0]]).unwrap();
        let t = s.transform_rows(&[vec![5.0, 1.0], vec![5.0, 2.0]]).unwrap();
        assert_eq!(t[0][0], 0.0);
        assert_eq!(t[1][0], 0.0);
    }

    #[test]
    fn errors() {
        assert!(Standardizer::fit(&[]).is_err());
        let s = Standardizer::fit(&[vec![1.0, 2.0]]).unwrap();
        assert!(matches!(s.transform_row(&[1.0]), Err(Error::FeatureMismatch { .. })));
    }

    proptest! {
        #[test]
        fn own_training_set_is_standard(rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 3), 2..40)) {
            let s = Standardizer::fit(&rows).unwrap();
            let t = s.transform_rows(&rows).unwrap();
            let n = t.len() as f64;
            for c in 0..3 {
                let mean = t.iter().map(|r| r[c]).sum::<f64>() / n;
                let var = t.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / (n - 1.0);
                prop_assert!(mean.abs() < 1e-9);
                if s.std[c] != 0.0 {
                    prop_assert!((var.sqrt() - 1.0).abs() < 1e-9);
                } else {
                    prop_assert!(t.iter().all(|r| r[c] == 0.0));
                }
            }
        }
    }
}
