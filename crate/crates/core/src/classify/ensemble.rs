//! Bagging, SAMME boosting over random forests, and hard voting.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::util::{argmax, check_train, majority, mix_seed};
use super::{fit, wrap, ClassifierParams, ForestModel, ForestParams, ModelKind, ModelParams, TrainedModel};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaggingOptions {
    pub n_estimators: usize,
    /// `false` trains every member on the full set.
    pub bootstrap: bool,
}

impl Default for BaggingOptions {
    fn default() -> Self {
        Self {
            n_estimators: 10,
            bootstrap: true,
        }
    }
}

/// Majority vote of `n_estimators` base learners, each fitted on its own
/// bootstrap resample.
pub fn fit_bagging(
    base: ModelKind,
    train: &FeatureMatrix,
    params: &ClassifierParams,
    opts: &BaggingOptions,
    seed: u64,
) -> Result<TrainedModel> {
    let kind = match base {
        ModelKind::Knn => ModelKind::BaggingKnn,
        ModelKind::Svm => ModelKind::BaggingSvm,
        other => {
            return Err(Error::Config(format!(
                "bagging supports knn and svm base learners, not {other}"
            )))
        }
    };
    check_train(train)?;
    if opts.n_estimators == 0 {
        return Err(Error::Config("bagging needs at least one estimator".into()));
    }
    let n = train.n_rows();
    let members = (0..opts.n_estimators)
        .into_par_iter()
        .map(|e| {
            let member_seed = mix_seed(seed, e as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(member_seed);
            let rows: Vec<usize> = if opts.bootstrap {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let mut m = fit(base, &train.select(&rows), params, rng.gen())?;
            m.n_classes = train.n_classes();
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(wrap(kind, train, params, seed, ModelParams::Bagging { members }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedLearner {
    pub alpha: f64,
    pub forest: ForestModel,
}

/// SAMME learner weight `ln((1-ε)/ε) + ln(K-1)`, or `None` when the learner
/// is no better than chance (`ε >= 1 - 1/K`). `ε` must be positive.
pub fn samme_alpha(error: f64, n_classes: usize) -> Option<f64> {
    let k = n_classes as f64;
    if error >= 1.0 - 1.0 / k {
        return None;
    }
    Some(((1.0 - error) / error).ln() + (k - 1.0).ln())
}

pub(crate) fn boosted_vote(learners: &[BoostedLearner], row: &[f64], n_classes: usize) -> usize {
    let mut votes = vec![0.0; n_classes];
    for l in learners {
        votes[l.forest.predict_row(row)] += l.alpha;
    }
    argmax(&votes)
}

/// Multi-class SAMME with random forests as base learners. Each round's
/// forest draws its bootstraps in proportion to the current sample weights.
pub fn fit_adaboost_rf(train: &FeatureMatrix, params: &ClassifierParams, seed: u64) -> Result<TrainedModel> {
    let n_classes = check_train(train)?;
    if params.boost_rounds == 0 {
        return Err(Error::Config("AdaBoost needs at least one round".into()));
    }
    let forest_params = ForestParams {
        n_trees: params.boost_trees,
        ..params.forest
    };
    let n = train.n_rows();
    let mut weights = vec![1.0 / n as f64; n];
    let mut learners: Vec<BoostedLearner> = Vec::new();
    for round in 0..params.boost_rounds {
        let forest = ForestModel::fit_weighted(train, &forest_params, Some(&weights), mix_seed(seed, round as u64))?;
        let miss: Vec<bool> = train
            .values
            .iter()
            .zip(&train.labels)
            .map(|(r, &l)| forest.predict_row(r) != l)
            .collect();
        let total: f64 = weights.iter().sum();
        let error: f64 = weights.iter().zip(&miss).filter(|(_, &m)| m).map(|(w, _)| w).sum::<f64>() / total;
        if error <= 0.0 {
            learners.push(BoostedLearner { alpha: 1.0, forest });
            break;
        }
        let Some(alpha) = samme_alpha(error, n_classes) else {
            if learners.is_empty() {
                return Err(Error::Training(format!(
                    "first boosted forest is no better than chance (weighted error {error:.4})"
                )));
            }
            break;
        };
        for (w, &m) in weights.iter_mut().zip(&miss) {
            if m {
                *w *= alpha.exp();
            }
        }
        let s: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= s);
        learners.push(BoostedLearner { alpha, forest });
    }
    Ok(wrap(ModelKind::AdaBoost, train, params, seed, ModelParams::AdaBoost { learners }))
}

/// Fits each configured member and combines them by hard voting.
pub fn fit_voting(train: &FeatureMatrix, params: &ClassifierParams, seed: u64) -> Result<TrainedModel> {
    if params.voting_members.len() < 2 {
        return Err(Error::Config("voting needs at least two members".into()));
    }
    if params.voting_members.contains(&ModelKind::Voting) {
        return Err(Error::Config("voting members cannot themselves be voting ensembles".into()));
    }
    let members = params
        .voting_members
        .par_iter()
        .enumerate()
        .map(|(i, &k)| fit(k, train, params, mix_seed(seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(wrap(ModelKind::Voting, train, params, seed, ModelParams::Voting { members }))
}

/// Hard majority vote over already-trained models; ties go to the lower
/// class index.
pub fn voting_predict(models: &[TrainedModel], rows: &[Vec<f64>]) -> Result<Vec<usize>> {
    let first = models
        .first()
        .filter(|_| models.len() >= 2)
        .ok_or_else(|| Error::Config("voting needs at least two models".into()))?;
    if let Some(m) = models
        .iter()
        .find(|m| m.n_classes != first.n_classes || m.n_features != first.n_features)
    {
        return Err(Error::Config(format!(
            "inconsistent voting members: {} classes / {} features vs {} / {}",
            m.n_classes, m.n_features, first.n_classes, first.n_features
        )));
    }
    let per_model = models.iter().map(|m| m.predict(rows)).collect::<Result<Vec<_>>>()?;
    Ok((0..rows.len())
        .map(|i| majority(per_model.iter().map(|p| p[i]), first.n_classes))
        .collect())
}
