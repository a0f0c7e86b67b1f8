//! Logistic-loss derivatives and the closed forms of the second-order
//! regularized objective: optimal leaf weight, structure score and split gain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest hessian handed to the tree builder. Saturated probabilities would
/// otherwise give `h = 0` exactly.
pub const MIN_HESSIAN: f64 = 1e-16;

/// First and second derivative of the loss w.r.t. the raw score of one row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradPair {
    pub g: f64,
    pub h: f64,
}

/// Sums of gradients and hessians over a set of rows.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GradStats {
    pub sum_grad: f64,
    pub sum_hess: f64,
}

impl GradStats {
    pub fn new(sum_grad: f64, sum_hess: f64) -> Self {
        Self { sum_grad, sum_hess }
    }

    pub fn from_rows(rows: &[usize], grads: &[GradPair]) -> Self {
        let mut s = Self::default();
        for &r in rows {
            s.add(grads[r]);
        }
        s
    }

    #[inline]
    pub fn add(&mut self, gp: GradPair) {
        self.sum_grad += gp.g;
        self.sum_hess += gp.h;
    }

    #[inline]
    pub fn sub(&self, other: &GradStats) -> GradStats {
        GradStats {
            sum_grad: self.sum_grad - other.sum_grad,
            sum_hess: self.sum_hess - other.sum_hess,
        }
    }
}

/// Numerically stable logistic function.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Binary log loss of one row given its raw score.
#[inline]
pub fn logistic_loss(label: u8, raw: f64) -> f64 {
    // log(1 + exp(-z)) with z = raw for y = 1 and -raw for y = 0
    let z = if label == 1 { raw } else { -raw };
    if z > 0.0 {
        (-z).exp().ln_1p()
    } else {
        -z + z.exp().ln_1p()
    }
}

/// Logistic-loss gradients: `g = p - y`, `h = p (1 - p)` with `p = sigmoid(raw)`.
pub fn compute_gradients(labels: &[u8], raw_scores: &[f64]) -> Result<Vec<GradPair>> {
    if labels.len() != raw_scores.len() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: raw_scores.len(),
        });
    }
    Ok(labels
        .iter()
        .zip(raw_scores)
        .map(|(&y, &raw)| {
            let p = sigmoid(raw);
            GradPair {
                g: p - f64::from(y),
                h: (p * (1.0 - p)).max(MIN_HESSIAN),
            }
        })
        .collect())
}

/// Optimal weight of a leaf: `-G / (H + lambda)`.
pub fn leaf_weight(sum_grad: f64, sum_hess: f64, lambda: f64) -> Result<f64> {
    let denom = sum_hess + lambda;
    if denom.is_nan() || denom <= 0.0 {
        return Err(Error::NonPositiveDenominator(denom));
    }
    Ok(-sum_grad / denom)
}

/// Objective value of a fixed tree structure with optimal leaf weights:
/// `-1/2 * sum_j G_j^2 / (H_j + lambda) + gamma * T`.
pub fn structure_score(leaves: &[GradStats], lambda: f64, gamma: f64) -> Result<f64> {
    if leaves.is_empty() {
        return Err(Error::InvalidInput("structure score of an empty leaf set".into()));
    }
    let mut acc = 0.0;
    for leaf in leaves {
        let denom = leaf.sum_hess + lambda;
        if denom.is_nan() || denom <= 0.0 {
            return Err(Error::NonPositiveDenominator(denom));
        }
        acc += leaf.sum_grad * leaf.sum_grad / denom;
    }
    Ok(-0.5 * acc + gamma * leaves.len() as f64)
}

/// Loss reduction from splitting a leaf into `left` and `right`:
/// `1/2 [G_L^2/(H_L+l) + G_R^2/(H_R+l) - (G_L+G_R)^2/(H_L+H_R+l)] - gamma`.
pub fn split_gain(left: GradStats, right: GradStats, lambda: f64, gamma: f64) -> Result<f64> {
    for denom in [
        left.sum_hess + lambda,
        right.sum_hess + lambda,
        left.sum_hess + right.sum_hess + lambda,
    ] {
        if denom.is_nan() || denom <= 0.0 {
            return Err(Error::NonPositiveDenominator(denom));
        }
    }
    Ok(split_gain_unchecked(left, right, lambda, gamma))
}

#[inline]
pub(crate) fn split_gain_unchecked(left: GradStats, right: GradStats, lambda: f64, gamma: f64) -> f64 {
    let g = left.sum_grad + right.sum_grad;
    let h = left.sum_hess + right.sum_hess;
    0.5 * (left.sum_grad * left.sum_grad / (left.sum_hess + lambda)
        + right.sum_grad * right.sum_grad / (right.sum_hess + lambda)
        - g * g / (h + lambda))
        - gamma
}
