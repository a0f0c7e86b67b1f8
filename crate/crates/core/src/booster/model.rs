//! Additive training loop and prediction.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::objective::{compute_gradients, logistic_loss, logit, sigmoid};
use super::params::Hyperparams;
use super::split::sort_rows_by;
use super::tree::{build_tree_presorted, Tree};
use crate::dataset::{Dataset, FeatureView};
use crate::error::{Error, Result};

/// Per-round training record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoundLog {
    pub round: usize,
    /// Fraction of training rows misclassified at probability 0.5.
    pub train_error: f64,
    /// Mean logistic loss on the training rows.
    pub train_loss: f64,
    /// Error on the monitored holdout, when one was supplied.
    pub valid_error: Option<f64>,
}

/// Which error early stopping watches.
#[derive(Debug, Clone, Copy)]
pub enum Monitor<'a> {
    TrainingError,
    Holdout(&'a Dataset),
}

/// Boosted ensemble: `raw(x) = base_raw + sum_k tree_k(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub(crate) trees: Vec<Tree>,
    pub(crate) hyperparams: Hyperparams,
    pub(crate) base_raw: f64,
    pub(crate) feature_count: usize,
    pub(crate) training_log: Vec<RoundLog>,
}

impl Model {
    /// Assembles a model from parts, e.g. for tests or external tooling.
    pub fn from_parts(
        trees: Vec<Tree>,
        hyperparams: Hyperparams,
        feature_count: usize,
        training_log: Vec<RoundLog>,
    ) -> Result<Self> {
        hyperparams.validate()?;
        Ok(Self {
            base_raw: logit(hyperparams.base_score),
            trees,
            hyperparams,
            feature_count,
            training_log,
        })
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn hyperparams(&self) -> &Hyperparams {
        &self.hyperparams
    }

    pub fn base_raw(&self) -> f64 {
        self.base_raw
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    pub fn training_log(&self) -> &[RoundLog] {
        &self.training_log
    }

    fn check_cols(&self, x: FeatureView<'_>) -> Result<()> {
        if x.n_cols() != self.feature_count {
            return Err(Error::FeatureMismatch {
                expected: self.feature_count,
                actual: x.n_cols(),
            });
        }
        Ok(())
    }

    #[inline]
    pub fn predict_raw_row(&self, row: &[f64]) -> f64 {
        self.trees
            .iter()
            .fold(self.base_raw, |acc, t| acc + t.predict_row(row))
    }

    pub fn predict_raw(&self, x: FeatureView<'_>) -> Result<Vec<f64>> {
        self.check_cols(x)?;
        Ok((0..x.n_rows())
            .into_par_iter()
            .map(|i| self.predict_raw_row(x.row(i)))
            .collect())
    }

    pub fn predict_proba(&self, x: FeatureView<'_>) -> Result<Vec<f64>> {
        Ok(self.predict_raw(x)?.into_iter().map(sigmoid).collect())
    }

    /// Label 1 iff the predicted probability is `>= threshold`.
    pub fn predict_label(&self, x: FeatureView<'_>, threshold: f64) -> Result<Vec<u8>> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(Error::InvalidInput(format!(
                "threshold {threshold} outside [0, 1]"
            )));
        }
        Ok(self
            .predict_proba(x)?
            .into_iter()
            .map(|p| u8::from(p >= threshold))
            .collect())
    }
}

fn error_rate(labels: &[u8], raw: &[f64]) -> f64 {
    let wrong = labels
        .iter()
        .zip(raw)
        .filter(|(&y, &r)| u8::from(sigmoid(r) >= 0.5) != y)
        .count();
    wrong as f64 / labels.len() as f64
}

fn mean_loss(labels: &[u8], raw: &[f64]) -> f64 {
    let total: f64 = labels.iter().zip(raw).map(|(&y, &r)| logistic_loss(y, r)).sum();
    total / labels.len() as f64
}

/// Trains with early stopping on the training error.
pub fn train(ds: &Dataset, params: &Hyperparams, seed: u64) -> Result<Model> {
    train_monitored(ds, params, seed, Monitor::TrainingError)
}

/// Boosting loop.
///
/// Each round samples features (and rows, when `subsample < 1`) without
/// replacement from a stream seeded by `seed`, fits a tree to the logistic
/// gradients at the current raw scores and adds it to the ensemble. With
/// `early_stopping_rounds = Some(r)`, training halts once the monitored error
/// has not strictly decreased for `r` consecutive rounds and the ensemble is
/// truncated to the best round.
pub fn train_monitored(
    ds: &Dataset,
    params: &Hyperparams,
    seed: u64,
    monitor: Monitor<'_>,
) -> Result<Model> {
    params.validate()?;
    if ds.is_empty() {
        return Err(Error::InvalidDataset("cannot train on an empty dataset".into()));
    }
    let holdout = match monitor {
        Monitor::TrainingError => None,
        Monitor::Holdout(v) => {
            if v.is_empty() {
                return Err(Error::InvalidDataset("holdout set is empty".into()));
            }
            if v.feature_count() != ds.feature_count() {
                return Err(Error::FeatureMismatch {
                    expected: ds.feature_count(),
                    actual: v.feature_count(),
                });
            }
            Some(v)
        }
    };

    let x = ds.view();
    let n = ds.n_rows();
    let p = ds.feature_count();
    let labels = ds.labels();
    let base_raw = logit(params.base_score);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let all_rows: Vec<usize> = (0..n).collect();
    let presorted: Vec<Vec<usize>> = (0..p)
        .into_par_iter()
        .map(|f| sort_rows_by(x, f, &all_rows))
        .collect();

    let mut raw = vec![base_raw; n];
    let mut valid_raw = holdout.map(|v| vec![base_raw; v.n_rows()]);
    let mut trees = Vec::with_capacity(params.num_rounds);
    let mut log = Vec::with_capacity(params.num_rounds);
    let mut best: Option<(f64, usize)> = None;
    let n_features = params.features_per_tree(p);
    let n_rows = params.rows_per_tree(n);
    let mut in_sample = vec![true; n];

    for round in 0..params.num_rounds {
        let mut features: Vec<usize> = if n_features < p {
            sample(&mut rng, p, n_features).into_vec()
        } else {
            (0..p).collect()
        };
        features.sort_unstable();
        if n_rows < n {
            in_sample.iter_mut().for_each(|s| *s = false);
            for r in sample(&mut rng, n, n_rows) {
                in_sample[r] = true;
            }
        }

        let grads = compute_gradients(labels, &raw)?;
        let sorted: Vec<Vec<usize>> = features
            .iter()
            .map(|&f| {
                if n_rows < n {
                    presorted[f].iter().copied().filter(|&r| in_sample[r]).collect()
                } else {
                    presorted[f].clone()
                }
            })
            .collect();
        let tree = build_tree_presorted(x, sorted, &grads, params, &features)?;

        raw.par_iter_mut()
            .enumerate()
            .for_each(|(i, r)| *r += tree.predict_row(x.row(i)));
        let train_error = error_rate(labels, &raw);
        let train_loss = mean_loss(labels, &raw);
        let valid_error = match (holdout, valid_raw.as_mut()) {
            (Some(v), Some(vr)) => {
                vr.par_iter_mut()
                    .enumerate()
                    .for_each(|(i, r)| *r += tree.predict_row(v.row(i)));
                Some(error_rate(v.labels(), vr))
            }
            _ => None,
        };
        trees.push(tree);
        log.push(RoundLog {
            round,
            train_error,
            train_loss,
            valid_error,
        });

        if let Some(patience) = params.early_stopping_rounds {
            let monitored = valid_error.unwrap_or(train_error);
            match best {
                Some((err, _)) if monitored >= err => {}
                _ => best = Some((monitored, round)),
            }
            let (_, best_round) = best.expect("set on the first round");
            if round - best_round >= patience {
                break;
            }
        }
    }

    if params.early_stopping_rounds.is_some() {
        if let Some((_, best_round)) = best {
            trees.truncate(best_round + 1);
        }
    }

    Ok(Model {
        trees,
        hyperparams: params.clone(),
        base_raw,
        feature_count: p,
        training_log: log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_params() -> Hyperparams {
        Hyperparams {
            eta: 0.3,
            gamma: 0.0,
            max_depth: 3,
            colsample: 1.0,
            min_child_weight: 0.0,
            num_rounds: 20,
            early_stopping_rounds: None,
            ..Default::default()
        }
    }

    #[test]
    fn fits_a_single_point() {
        let ds = Dataset::from_rows(&[vec![1.0, 2.0]], vec![1]).unwrap();
        let m = train(&ds, &tiny_params(), 0).unwrap();
        let p = m.predict_proba(ds.view()).unwrap();
        assert!(p[0] > 0.5);
    }

    #[test]
    fn zero_trees_predict_base() {
        let m = Model::from_parts(vec![], Hyperparams::default(), 2, vec![]).unwrap();
        let data = [1.0, 2.0, 3.0, 4.0];
        let raw = m.predict_raw(FeatureView::new(&data, 2).unwrap()).unwrap();
        assert_eq!(raw, vec![0.0, 0.0]);
        assert_eq!(m.predict_label(FeatureView::new(&data, 2).unwrap(), 0.5).unwrap(), vec![1, 1]);
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = Model::from_parts(vec![], Hyperparams::default(), 2, vec![]).unwrap();
        let data = [1.0, 2.0, 3.0];
        let x = FeatureView::new(&data, 3).unwrap();
        assert!(matches!(m.predict_raw(x), Err(Error::FeatureMismatch { .. })));
        let data = [1.0, 2.0];
        let x = FeatureView::new(&data, 2).unwrap();
        assert!(m.predict_label(x, 1.5).is_err());
        assert!(m.predict_label(x, -0.1).is_err());
    }

    #[test]
    fn single_class_converges_to_constant() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let ds = Dataset::from_rows(&rows, vec![0; 10]).unwrap();
        let m = train(&ds, &tiny_params(), 1).unwrap();
        let p = m.predict_proba(ds.view()).unwrap();
        assert!(p.iter().all(|&v| v < 0.5 && (v - p[0]).abs() < 1e-12));
    }

    #[test]
    fn early_stopping_truncates_to_best_round() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64]).collect();
        let labels: Vec<u8> = (0..40).map(|i| u8::from(i >= 20)).collect();
        let ds = Dataset::from_rows(&rows, labels).unwrap();
        let params = Hyperparams {
            early_stopping_rounds: Some(3),
            num_rounds: 100,
            ..tiny_params()
        };
        let m = train(&ds, &params, 0).unwrap();
        // perfectly separable: error hits 0 at round 0 and never strictly improves
        assert_eq!(m.training_log()[0].train_error, 0.0);
        assert_eq!(m.training_log().len(), 4);
        assert_eq!(m.trees().len(), 1);
    }

    #[test]
    fn empty_dataset_is_rejected() {
        let ds = Dataset::new(vec![], vec![], 3).unwrap();
        assert!(train(&ds, &tiny_params(), 0).is_err());
    }
}
