//! Exact greedy split search.
//!
//! For every candidate feature the rows are ordered by value and scanned
//! once; a threshold is proposed at the midpoint of each pair of adjacent
//! distinct values. Features may be scanned in parallel; the winner is chosen
//! by gain, then lower feature index, then lower threshold, so the result
//! does not depend on scheduling.

use rayon::prelude::*;

use super::objective::{split_gain_unchecked, GradPair, GradStats};
use crate::dataset::FeatureView;

/// Row count times feature count above which features are scanned in parallel.
const PARALLEL_WORK: usize = 16 * 1024;

/// Relative difference below which two gains count as tied. Identical
/// partitions reached through different summation orders differ only in the
/// last bits.
pub const GAIN_TIE_TOLERANCE: f64 = 1e-10;

#[inline]
fn gains_tied(a: f64, b: f64) -> bool {
    (a - b).abs() <= GAIN_TIE_TOLERANCE * a.abs().max(b.abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
    pub left: GradStats,
    pub right: GradStats,
}

impl SplitCandidate {
    /// Higher gain wins; tied gains (see [`GAIN_TIE_TOLERANCE`]) go to the
    /// lower feature index, then the lower threshold.
    pub fn beats(&self, other: &SplitCandidate) -> bool {
        if gains_tied(self.gain, other.gain) {
            (self.feature, self.threshold) < (other.feature, other.threshold)
        } else {
            self.gain > other.gain
        }
    }
}

/// Threshold between two adjacent distinct sorted values `lo < hi`.
///
/// Guaranteed to satisfy `lo < t <= hi`, so `x < t` sends `lo` left and `hi` right.
#[inline]
pub fn midpoint(lo: f64, hi: f64) -> f64 {
    let t = lo * 0.5 + hi * 0.5;
    if t > lo && t <= hi {
        t
    } else {
        hi
    }
}

/// Split-search settings shared by every node of a tree.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SplitRule {
    pub lambda: f64,
    pub gamma: f64,
    pub min_child_weight: f64,
}

/// Scans one feature given its rows already sorted by value.
pub(crate) fn scan_sorted(
    x: FeatureView<'_>,
    feature: usize,
    sorted_rows: &[usize],
    grads: &[GradPair],
    parent: GradStats,
    rule: SplitRule,
) -> Option<SplitCandidate> {
    let mut best: Option<SplitCandidate> = None;
    let mut left = GradStats::default();
    let n = sorted_rows.len();
    for i in 0..n.saturating_sub(1) {
        let r = sorted_rows[i];
        left.add(grads[r]);
        let lo = x.value(r, feature);
        let hi = x.value(sorted_rows[i + 1], feature);
        if lo >= hi {
            continue;
        }
        let right = parent.sub(&left);
        if left.sum_hess < rule.min_child_weight || right.sum_hess < rule.min_child_weight {
            continue;
        }
        let gain = split_gain_unchecked(left, right, rule.lambda, rule.gamma);
        // thresholds ascend, so a tie keeps the earlier candidate
        if best.map_or(true, |b| gain > b.gain && !gains_tied(gain, b.gain)) {
            best = Some(SplitCandidate {
                feature,
                threshold: midpoint(lo, hi),
                gain,
                left,
                right,
            });
        }
    }
    best
}

/// Picks the winning candidate among per-feature bests, keeping only a
/// strictly positive gain.
pub(crate) fn select_best(
    candidates: impl IntoIterator<Item = Option<SplitCandidate>>,
) -> Option<SplitCandidate> {
    candidates
        .into_iter()
        .flatten()
        .fold(None, |acc: Option<SplitCandidate>, c| match acc {
            Some(b) if !c.beats(&b) => Some(b),
            _ => Some(c),
        })
        .filter(|c| c.gain > 0.0)
}

/// Scans every feature list (each sorted by its own feature) and returns the best split.
pub(crate) fn best_split_presorted(
    x: FeatureView<'_>,
    features: &[usize],
    sorted: &[Vec<usize>],
    grads: &[GradPair],
    parent: GradStats,
    rule: SplitRule,
) -> Option<SplitCandidate> {
    let n = sorted.first().map_or(0, Vec::len);
    if n * features.len() >= PARALLEL_WORK {
        let per_feature: Vec<_> = features
            .par_iter()
            .zip(sorted.par_iter())
            .map(|(&f, rows)| scan_sorted(x, f, rows, grads, parent, rule))
            .collect();
        select_best(per_feature)
    } else {
        select_best(
            features
                .iter()
                .zip(sorted)
                .map(|(&f, rows)| scan_sorted(x, f, rows, grads, parent, rule)),
        )
    }
}

/// Sorts `rows` by the value of `feature` (stable, so equal values keep row order).
pub(crate) fn sort_rows_by(x: FeatureView<'_>, feature: usize, rows: &[usize]) -> Vec<usize> {
    let mut sorted = rows.to_vec();
    sorted.sort_by(|&a, &b| x.value(a, feature).total_cmp(&x.value(b, feature)));
    sorted
}

/// Best exact-greedy split of `rows` over `feature_ids`.
///
/// A candidate is admissible only if both children carry at least
/// `min_child_weight` hessian mass; the maximal-gain admissible candidate is
/// returned when its gain (already net of `gamma`) is strictly positive.
pub fn find_best_split(
    x: FeatureView<'_>,
    rows: &[usize],
    feature_ids: &[usize],
    grads: &[GradPair],
    lambda: f64,
    gamma: f64,
    min_child_weight: f64,
) -> Option<SplitCandidate> {
    if rows.is_empty() {
        return None;
    }
    let parent = GradStats::from_rows(rows, grads);
    let rule = SplitRule {
        lambda,
        gamma,
        min_child_weight,
    };
    let sorted: Vec<Vec<usize>> = feature_ids
        .iter()
        .map(|&f| sort_rows_by(x, f, rows))
        .collect();
    best_split_presorted(x, feature_ids, &sorted, grads, parent, rule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::booster::objective::compute_gradients;

    #[test]
    fn four_point_example() {
        let data = [1.0, 2.0, 3.0, 4.0];
        let x = FeatureView::new(&data, 1).unwrap();
        let grads = compute_gradients(&[0, 0, 1, 1], &[0.0; 4]).unwrap();
        let best = find_best_split(x, &[0, 1, 2, 3], &[0], &grads, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(best.feature, 0);
        assert_eq!(best.threshold, 2.5);
        assert!((best.gain - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(best.left, GradStats::new(1.0, 0.5));
        assert_eq!(best.right, GradStats::new(-1.0, 0.5));
    }

    #[test]
    fn identical_labels_give_no_split() {
        let data = [1.0, 2.0, 3.0, 4.0];
        let x = FeatureView::new(&data, 1).unwrap();
        let grads = compute_gradients(&[1; 4], &[0.0; 4]).unwrap();
        assert!(find_best_split(x, &[0, 1, 2, 3], &[0], &grads, 1.0, 0.0, 0.0).is_none());
    }

    #[test]
    fn constant_feature_has_no_candidates() {
        let data = [5.0, 5.0, 5.0];
        let x = FeatureView::new(&data, 1).unwrap();
        let grads = compute_gradients(&[0, 1, 0], &[0.0; 3]).unwrap();
        let parent = GradStats::from_rows(&[0, 1, 2], &grads);
        let rule = SplitRule {
            lambda: 0.0,
            gamma: 0.0,
            min_child_weight: 0.0,
        };
        assert!(scan_sorted(x, 0, &[0, 1, 2], &grads, parent, rule).is_none());
    }

    #[test]
    fn min_child_weight_blocks_thin_children() {
        let data = [1.0, 2.0, 3.0, 4.0];
        let x = FeatureView::new(&data, 1).unwrap();
        let grads = compute_gradients(&[0, 0, 1, 1], &[0.0; 4]).unwrap();
        // each child of the 2|2 split has hessian 0.5
        assert!(find_best_split(x, &[0, 1, 2, 3], &[0], &grads, 1.0, 0.0, 0.6).is_none());
    }

    #[test]
    fn tie_prefers_lower_feature() {
        // two identical columns produce identical candidates
        let data = [1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 4.0, 4.0];
        let x = FeatureView::new(&data, 2).unwrap();
        let grads = compute_gradients(&[0, 0, 1, 1], &[0.0; 4]).unwrap();
        let best = find_best_split(x, &[0, 1, 2, 3], &[1, 0], &grads, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(best.feature, 0);
    }

    #[test]
    fn midpoint_of_adjacent_floats() {
        let lo = 1.0f64;
        let hi = f64::from_bits(lo.to_bits() + 1);
        let t = midpoint(lo, hi);
        assert!(lo < t && t <= hi);
        assert_eq!(midpoint(1.0, 3.0), 2.0);
    }
}
