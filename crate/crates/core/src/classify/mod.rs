//! Classical classifiers behind one fit/predict contract.
//!
//! Every model is fitted from a [`FeatureMatrix`] and a seed and yields a
//! [`TrainedModel`], an immutable value that serializes to JSON and predicts
//! bit-identically after a round trip. Ties are always broken toward the
//! lower class index.

mod ensemble;
mod forest;
mod knn;
mod lda;
mod scaler;
mod svm;
mod util;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

pub use ensemble::{samme_alpha, voting_predict, BaggingOptions, BoostedLearner};
pub use forest::{fit_tree, DecisionTree, ForestModel, ForestParams, Node};
pub use knn::{knn_predict, KnnModel};
pub use lda::LdaModel;
pub use scaler::{standardize_apply, standardize_fit, Standardizer};
pub use svm::{SvmModel, SvmParams};
pub use util::mix_seed;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Lda,
    Svm,
    Knn,
    #[serde(rename = "rf")]
    RandomForest,
    Voting,
    BaggingKnn,
    BaggingSvm,
    #[serde(rename = "adaboost")]
    AdaBoost,
}

impl ModelKind {
    /// Table row order.
    pub const ALL: [ModelKind; 8] = [
        ModelKind::Lda,
        ModelKind::Svm,
        ModelKind::Knn,
        ModelKind::RandomForest,
        ModelKind::Voting,
        ModelKind::BaggingKnn,
        ModelKind::BaggingSvm,
        ModelKind::AdaBoost,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Lda => "lda",
            ModelKind::Svm => "svm",
            ModelKind::Knn => "knn",
            ModelKind::RandomForest => "rf",
            ModelKind::Voting => "voting",
            ModelKind::BaggingKnn => "bagging_knn",
            ModelKind::BaggingSvm => "bagging_svm",
            ModelKind::AdaBoost => "adaboost",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            ModelKind::Lda => "LDA",
            ModelKind::Svm => "SVM",
            ModelKind::Knn => "KNN",
            ModelKind::RandomForest => "Random Forest",
            ModelKind::Voting => "Voting Ensemble",
            ModelKind::BaggingKnn => "Bagging KNN",
            ModelKind::BaggingSvm => "Bagging SVM",
            ModelKind::AdaBoost => "Adaboost",
        }
    }

    /// Distance- and margin-based models get z-scored inputs; tree models
    /// see raw features.
    pub fn needs_scaling(self) -> bool {
        !matches!(self, ModelKind::RandomForest | ModelKind::AdaBoost)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('-', "_");
        ModelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == norm)
            .or(match norm.as_str() {
                "random_forest" => Some(ModelKind::RandomForest),
                "ada_boost" => Some(ModelKind::AdaBoost),
                _ => None,
            })
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown model {s:?} (expected one of lda, svm, knn, rf, voting, bagging_knn, bagging_svm, adaboost)"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifierParams {
    pub knn_k: usize,
    pub svm: SvmParams,
    pub forest: ForestParams,
    pub bagging_estimators: usize,
    pub boost_rounds: usize,
    /// Trees in each boosted forest.
    pub boost_trees: usize,
    pub voting_members: Vec<ModelKind>,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        Self {
            knn_k: 5,
            svm: SvmParams::default(),
            forest: ForestParams::default(),
            bagging_estimators: 10,
            boost_rounds: 10,
            boost_trees: 25,
            voting_members: vec![ModelKind::Svm, ModelKind::Knn, ModelKind::RandomForest],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelParams {
    Lda(LdaModel),
    Knn(KnnModel),
    Svm(SvmModel),
    Forest(ForestModel),
    Bagging { members: Vec<TrainedModel> },
    AdaBoost { learners: Vec<BoostedLearner> },
    Voting { members: Vec<TrainedModel> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub kind: ModelKind,
    pub n_classes: usize,
    pub n_features: usize,
    pub seed: u64,
    pub hyperparameters: ClassifierParams,
    pub params: ModelParams,
}

impl TrainedModel {
    fn check_width(&self, row: &[f64]) -> Result<()> {
        if row.len() != self.n_features {
            return Err(Error::FeatureMismatch {
                expected: self.n_features,
                found: row.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn predict_row_unchecked(&self, row: &[f64]) -> usize {
        match &self.params {
            ModelParams::Lda(m) => m.predict_row(row),
            ModelParams::Knn(m) => m.predict_row(row),
            ModelParams::Svm(m) => m.predict_row(row),
            ModelParams::Forest(m) => m.predict_row(row),
            ModelParams::Bagging { members } | ModelParams::Voting { members } => util::majority(
                members.iter().map(|m| m.predict_row_unchecked(row)),
                self.n_classes,
            ),
            ModelParams::AdaBoost { learners } => ensemble::boosted_vote(learners, row, self.n_classes),
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> Result<usize> {
        self.check_width(row)?;
        Ok(self.predict_row_unchecked(row))
    }

    /// Predictions for every row, computed in parallel.
    pub fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<usize>> {
        rows.iter().try_for_each(|r| self.check_width(r))?;
        Ok(rows.par_iter().map(|r| self.predict_row_unchecked(r)).collect())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let model: TrainedModel = serde_json::from_str(s).map_err(|e| Error::Serde(e.to_string()))?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Serde(format!(
                "unsupported model format version {} (expected {MODEL_FORMAT_VERSION})",
                model.format_version
            )));
        }
        Ok(model)
    }
}

pub(crate) fn wrap(
    kind: ModelKind,
    train: &FeatureMatrix,
    hyper: &ClassifierParams,
    seed: u64,
    params: ModelParams,
) -> TrainedModel {
    TrainedModel {
        format_version: MODEL_FORMAT_VERSION,
        kind,
        n_classes: train.n_classes(),
        n_features: train.n_features(),
        seed,
        hyperparameters: hyper.clone(),
        params,
    }
}

pub fn fit_lda(train: &FeatureMatrix) -> Result<TrainedModel> {
    let m = LdaModel::fit(train)?;
    Ok(wrap(ModelKind::Lda, train, &ClassifierParams::default(), 0, ModelParams::Lda(m)))
}

pub fn fit_knn(train: &FeatureMatrix, k: usize) -> Result<TrainedModel> {
    let m = KnnModel::fit(train, k)?;
    let hyper = ClassifierParams {
        knn_k: k,
        ..ClassifierParams::default()
    };
    Ok(wrap(ModelKind::Knn, train, &hyper, 0, ModelParams::Knn(m)))
}

pub fn fit_linear_svm(train: &FeatureMatrix, params: &SvmParams, seed: u64) -> Result<TrainedModel> {
    let m = SvmModel::fit(train, params, seed)?;
    let hyper = ClassifierParams {
        svm: *params,
        ..ClassifierParams::default()
    };
    Ok(wrap(ModelKind::Svm, train, &hyper, seed, ModelParams::Svm(m)))
}

pub fn fit_random_forest(train: &FeatureMatrix, params: &ForestParams, seed: u64) -> Result<TrainedModel> {
    let m = ForestModel::fit(train, params, seed)?;
    let hyper = ClassifierParams {
        forest: *params,
        ..ClassifierParams::default()
    };
    Ok(wrap(ModelKind::RandomForest, train, &hyper, seed, ModelParams::Forest(m)))
}

pub use ensemble::{fit_adaboost_rf, fit_bagging, fit_voting};

/// Fits any model kind with the given hyperparameters.
pub fn fit(kind: ModelKind, train: &FeatureMatrix, params: &ClassifierParams, seed: u64) -> Result<TrainedModel> {
    let mut model = match kind {
        ModelKind::Lda => fit_lda(train)?,
        ModelKind::Knn => fit_knn(train, params.knn_k)?,
        ModelKind::Svm => fit_linear_svm(train, &params.svm, seed)?,
        ModelKind::RandomForest => fit_random_forest(train, &params.forest, seed)?,
        ModelKind::BaggingKnn | ModelKind::BaggingSvm => {
            let opts = BaggingOptions {
                n_estimators: params.bagging_estimators,
                bootstrap: true,
            };
            let base = if kind == ModelKind::BaggingKnn { ModelKind::Knn } else { ModelKind::Svm };
            fit_bagging(base, train, params, &opts, seed)?
        }
        ModelKind::AdaBoost => fit_adaboost_rf(train, params, seed)?,
        ModelKind::Voting => fit_voting(train, params, seed)?,
    };
    model.seed = seed;
    model.hyperparameters = params.clone();
    Ok(model)
}

/// A model together with the scaler fitted on its training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pipeline {
    pub scaler: Option<Standardizer>,
    pub model: TrainedModel,
}

impl Pipeline {
    /// Standardizes first when `kind` calls for it.
    pub fn fit(kind: ModelKind, train: &FeatureMatrix, params: &ClassifierParams, seed: u64) -> Result<Self> {
        if kind.needs_scaling() {
            let scaler = standardize_fit(train)?;
            let scaled = scaler.apply(train)?;
            Ok(Self {
                scaler: Some(scaler),
                model: fit(kind, &scaled, params, seed)?,
            })
        } else {
            Ok(Self {
                scaler: None,
                model: fit(kind, train, params, seed)?,
            })
        }
    }

    pub fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<usize>> {
        match &self.scaler {
            Some(s) => self.model.predict(&s.transform_rows(rows)?),
            None => self.model.predict(rows),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: Pipeline = serde_json::from_str(s).map_err(|e| Error::Serde(e.to_string()))?;
        if p.model.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Serde(format!(
                "unsupported model format version {}",
                p.model.format_version
            )));
        }
        Ok(p)
    }
}
