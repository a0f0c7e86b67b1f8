//! Brute-force reference computations used as test oracles.
#![allow(dead_code)]

use gbspam_core::booster::GradPair;

/// Split found by exhaustive enumeration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSplit {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

pub fn gain_formula(gl: f64, hl: f64, gr: f64, hr: f64, lambda: f64, gamma: f64) -> f64 {
    let score = |g: f64, h: f64| g * g / (h + lambda);
    0.5 * (score(gl, hl) + score(gr, hr) - score(gl + gr, hl + hr)) - gamma
}

/// Enumerates every `(feature, midpoint)` pair, partitioning rows directly by
/// `x < t`, and keeps the best positive gain. Gains within a relative `1e-10`
/// are ties and go to the lower feature, then the lower threshold.
pub fn brute_force_split(
    rows: &[Vec<f64>],
    grads: &[GradPair],
    lambda: f64,
    gamma: f64,
    min_child_weight: f64,
) -> Option<OracleSplit> {
    let n_features = rows.first().map_or(0, Vec::len);
    let mut best: Option<OracleSplit> = None;
    for f in 0..n_features {
        let mut values: Vec<f64> = rows.iter().map(|r| r[f]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for pair in values.windows(2) {
            let t = (pair[0] + pair[1]) / 2.0;
            let (mut gl, mut hl, mut gr, mut hr) = (0.0, 0.0, 0.0, 0.0);
            for (row, gp) in rows.iter().zip(grads) {
                if row[f] < t {
                    gl += gp.g;
                    hl += gp.h;
                } else {
                    gr += gp.g;
                    hr += gp.h;
                }
            }
            if hl < min_child_weight || hr < min_child_weight {
                continue;
            }
            let gain = gain_formula(gl, hl, gr, hr, lambda, gamma);
            let tied = |b: f64| (gain - b).abs() <= 1e-10 * gain.abs().max(b.abs());
            if best.map_or(true, |b| gain > b.gain && !tied(b.gain)) {
                best = Some(OracleSplit {
                    feature: f,
                    threshold: t,
                    gain,
                });
            }
        }
    }
    best.filter(|b| b.gain > 0.0)
}

/// AUC by counting every (positive, negative) pair: wins count 1, ties 1/2.
pub fn pairwise_auc(actual: &[u8], scores: &[f64]) -> f64 {
    let (mut wins, mut ties, mut pairs) = (0u64, 0u64, 0u64);
    for (i, &yi) in actual.iter().enumerate() {
        if yi != 1 {
            continue;
        }
        for (j, &yj) in actual.iter().enumerate() {
            if yj != 0 {
                continue;
            }
            pairs += 1;
            if scores[i] > scores[j] {
                wins += 1;
            } else if scores[i] == scores[j] {
                ties += 1;
            }
        }
    }
    (2 * wins + ties) as f64 / (2 * pairs) as f64
}

/// One-leaf quadratic objective `G w + (H + lambda) w^2 / 2`.
pub fn leaf_objective(g: f64, h: f64, lambda: f64, w: f64) -> f64 {
    g * w + 0.5 * (h + lambda) * w * w
}

pub fn sigmoid_ref(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}
