use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Training knobs for the booster.
///
/// `Default` is the tuned Spambase configuration: eta 0.4, gamma 0.2,
/// max depth 24, column sample 0.75, 200 rounds with early stopping after 10
/// non-improving rounds, row subsample and min child weight 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hyperparams {
    /// Shrinkage applied to every leaf weight.
    pub eta: f64,
    /// Minimum loss reduction for a split to survive pruning.
    pub gamma: f64,
    /// L2 penalty on leaf weights.
    pub lambda: f64,
    pub max_depth: usize,
    /// Fraction of features sampled (without replacement) per tree.
    pub colsample: f64,
    /// Fraction of rows sampled (without replacement) per tree.
    pub subsample: f64,
    /// Minimum hessian sum in each child of a split.
    pub min_child_weight: f64,
    pub num_rounds: usize,
    pub early_stopping_rounds: Option<usize>,
    /// Initial probability; the ensemble starts from `logit(base_score)`.
    pub base_score: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            eta: 0.4,
            gamma: 0.2,
            lambda: 1.0,
            max_depth: 24,
            colsample: 0.75,
            subsample: 1.0,
            min_child_weight: 1.0,
            num_rounds: 200,
            early_stopping_rounds: Some(10),
            base_score: 0.5,
        }
    }
}

fn check(ok: bool, name: &'static str, reason: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParam {
            name,
            reason: reason(),
        })
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        check(self.eta > 0.0 && self.eta <= 1.0, "eta", || {
            format!("{} not in (0, 1]", self.eta)
        })?;
        check(self.gamma >= 0.0 && self.gamma.is_finite(), "gamma", || {
            format!("{} must be a finite value >= 0", self.gamma)
        })?;
        check(self.lambda >= 0.0 && self.lambda.is_finite(), "lambda", || {
            format!("{} must be a finite value >= 0", self.lambda)
        })?;
        check(self.max_depth >= 1, "max_depth", || "must be >= 1".into())?;
        check(self.colsample > 0.0 && self.colsample <= 1.0, "colsample", || {
            format!("{} not in (0, 1]", self.colsample)
        })?;
        check(self.subsample > 0.0 && self.subsample <= 1.0, "subsample", || {
            format!("{} not in (0, 1]", self.subsample)
        })?;
        check(
            self.min_child_weight >= 0.0 && self.min_child_weight.is_finite(),
            "min_child_weight",
            || format!("{} must be a finite value >= 0", self.min_child_weight),
        )?;
        check(self.num_rounds >= 1, "num_rounds", || "must be >= 1".into())?;
        check(
            self.early_stopping_rounds.map_or(true, |r| r >= 1),
            "early_stopping_rounds",
            || "must be >= 1 when set".into(),
        )?;
        check(
            self.base_score > 0.0 && self.base_score < 1.0,
            "base_score",
            || format!("{} not in (0, 1)", self.base_score),
        )?;
        Ok(())
    }

    /// Number of features drawn per tree: `ceil(colsample * p)`, at least 1.
    pub fn features_per_tree(&self, p: usize) -> usize {
        ((self.colsample * p as f64).ceil() as usize).clamp(1, p.max(1))
    }

    /// Number of rows drawn per tree: `ceil(subsample * n)`, at least 1.
    pub fn rows_per_tree(&self, n: usize) -> usize {
        ((self.subsample * n as f64).ceil() as usize).clamp(1, n.max(1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let p = Hyperparams::default();
        p.validate().unwrap();
        assert_eq!(p.features_per_tree(57), 43);
        assert_eq!(p.rows_per_tree(3221), 3221);
    }

    #[test]
    fn rejects_out_of_range() {
        let bad = [
            Hyperparams { eta: 0.0, ..Default::default() },
            Hyperparams { eta: 1.5, ..Default::default() },
            Hyperparams { gamma: -1.0, ..Default::default() },
            Hyperparams { lambda: f64::NAN, ..Default::default() },
            Hyperparams { max_depth: 0, ..Default::default() },
            Hyperparams { colsample: 0.0, ..Default::default() },
            Hyperparams { subsample: 1.01, ..Default::default() },
            Hyperparams { min_child_weight: -0.1, ..Default::default() },
            Hyperparams { num_rounds: 0, ..Default::default() },
            Hyperparams { early_stopping_rounds: Some(0), ..Default::default() },
            Hyperparams { base_score: 1.0, ..Default::default() },
        ];
        for p in bad {
            assert!(p.validate().is_err(), "{p:?}");
        }
    }
}
