use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

/// Brute-force Euclidean k-nearest-neighbour vote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub n_classes: usize,
}

impl KnnModel {
    pub fn fit(train: &FeatureMatrix, k: usize) -> Result<Self> {
        if train.n_rows() == 0 {
            return Err(Error::Training("empty training set".into()));
        }
        if k == 0 || k > train.n_rows() {
            return Err(Error::Training(format!(
                "k = {k} must lie in 1..={} (training rows)",
                train.n_rows()
            )));
        }
        Ok(Self {
            k,
            rows: train.values.clone(),
            labels: train.labels.clone(),
            n_classes: train.n_classes(),
        })
    }

    /// The `k` nearest training indices, ordered by (distance, index).
    pub fn neighbours(&self, query: &[f64]) -> Vec<usize> {
        let mut dist: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| (r.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum(), i))
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < dist.len() {
            dist.select_nth_unstable_by(self.k - 1, cmp);
            dist.truncate(self.k);
        }
        dist.sort_unstable_by(cmp);
        dist.into_iter().map(|(_, i)| i).collect()
    }

    /// Majority label among the neighbours. Among classes tied on votes the
    /// one owning the nearest neighbour wins.
    pub fn predict_row(&self, query: &[f64]) -> usize {
        let nb = self.neighbours(query);
        let mut counts = vec![0usize; self.n_classes];
        for &i in &nb {
            counts[self.labels[i]] += 1;
        }
        let top = counts.iter().copied().max().unwrap_or(0);
        nb.iter()
            .map(|&i| self.labels[i])
            .find(|&l| counts[l] == top)
            .unwrap_or(0)
    }
}

/// Fits and predicts in one call.
pub fn knn_predict(train: &FeatureMatrix, queries: &[Vec<f64>], k: usize) -> Result<Vec<usize>> {
    let model = KnnModel::fit(train, k)?;
    for q in queries {
        if q.len() != train.n_features() {
            return Err(Error::FeatureMismatch {
                expected: train.n_features(),
                found: q.len(),
            });
        }
    }
    Ok(queries.iter().map(|q| model.predict_row(q)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: Vec<Vec<f64>>, labels: Vec<usize>) -> FeatureMatrix {
        let d = rows[0].len();
        FeatureMatrix::new(rows, (0..d).map(|i| format!("f{i}")).collect(), labels).unwrap()
    }

    #[test]
    fn single_row_training_set() {
        let m = matrix(vec![vec![1.0, 2.0]], vec![3]);
        let p = knn_predict(&m, &[vec![0.0, 0.0], vec![100.0, -4.0]], 1).unwrap();
        assert_eq!(p, vec![3, 3]);
    }

    #[test]
    fn exact_match_with_k1() {
        let m = matrix(vec![vec![0.0], vec![1.0], vec![2.0]], vec![0, 1, 2]);
        assert_eq!(knn_predict(&m, &[vec![1.0]], 1).unwrap(), vec![1]);
    }

    #[test]
    fn vote_tie_goes_to_nearest_class() {
        let m = matrix(vec![vec![0.0], vec![1.1], vec![-1.2], vec![1.3]], vec![1, 0, 1, 0]);
        // k = 4: two votes each; the nearest row (index 0) is class 1
        assert_eq!(knn_predict(&m, &[vec![0.0]], 4).unwrap(), vec![1]);
    }

    #[test]
    fn distance_tie_prefers_lower_index() {
        let m = matrix(vec![vec![1.0], vec![-1.0]], vec![1, 0]);
        assert_eq!(knn_predict(&m, &[vec![0.0]], 1).unwrap(), vec![1]);
    }

    #[test]
    fn bad_k_rejected() {
        let m = matrix(vec![vec![1.0]], vec![0]);
        assert!(knn_predict(&m, &[vec![0.0]], 2).is_err());
        assert!(knn_predict(&m, &[vec![0.0]], 0).is_err());
        assert!(knn_predict(&m, &[vec![0.0, 1.0]], 1).is_err());
    }
}
