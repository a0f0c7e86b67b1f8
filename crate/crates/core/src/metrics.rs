//! Binary classification metrics: confusion counts, the scalar rates derived
//! from them, and ROC / precision-recall curves with their areas.
//!
//! A ratio whose denominator is zero is `None`, never a silent 0 or 1.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        Self { tp, tn, fp, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

fn check_binary(v: &[u8], what: &str) -> Result<()> {
    match v.iter().position(|&y| y > 1) {
        Some(i) => Err(Error::InvalidInput(format!(
            "{what}[{i}] = {} is not 0 or 1",
            v[i]
        ))),
        None => Ok(()),
    }
}

pub fn confusion(actual: &[u8], predicted: &[u8]) -> Result<ConfusionMatrix> {
    if actual.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            left: actual.len(),
            right: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(Error::InvalidInput("confusion matrix of zero rows".into()));
    }
    check_binary(actual, "actual")?;
    check_binary(predicted, "predicted")?;
    let mut cm = ConfusionMatrix::default();
    for (&a, &p) in actual.iter().zip(predicted) {
        match (a, p) {
            (1, 1) => cm.tp += 1,
            (0, 0) => cm.tn += 1,
            (0, 1) => cm.fp += 1,
            _ => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

/// The six rates derived from a confusion matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarMetrics {
    pub accuracy: Option<f64>,
    pub specificity: Option<f64>,
    /// Also known as recall or true-positive rate.
    pub sensitivity: Option<f64>,
    pub precision: Option<f64>,
    pub f1: Option<f64>,
    pub balanced_accuracy: Option<f64>,
}

pub fn scalar_metrics(cm: &ConfusionMatrix) -> Result<ScalarMetrics> {
    if cm.total() == 0 {
        return Err(Error::InvalidInput("metrics of an empty confusion matrix".into()));
    }
    let accuracy = ratio(cm.tp + cm.tn, cm.total());
    let specificity = ratio(cm.tn, cm.tn + cm.fp);
    let sensitivity = ratio(cm.tp, cm.tp + cm.fn_);
    let precision = ratio(cm.tp, cm.tp + cm.fp);
    let f1 = match (precision, sensitivity) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    let balanced_accuracy = match (sensitivity, specificity) {
        (Some(se), Some(sp)) => Some((se + sp) / 2.0),
        _ => None,
    };
    Ok(ScalarMetrics {
        accuracy,
        specificity,
        sensitivity,
        precision,
        f1,
        balanced_accuracy,
    })
}

/// Rounds a fraction to a percentage with two decimals, half away from zero.
/// Presentation only.
pub fn percent_2dp(fraction: f64) -> f64 {
    (fraction * 10_000.0).round() / 100.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    pub y: f64,
    /// Score threshold (`score >= threshold` predicts 1). `+inf` marks the
    /// origin point where nothing is predicted positive.
    pub threshold: f64,
}

/// ROC points are `(FPR, TPR)`; PR points are `(recall, precision)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Curve {
    pub points: Vec<CurvePoint>,
}

/// Distinct-score groups in descending score order: `(score, positives, negatives)`.
fn descending_groups(actual: &[u8], scores: &[f64]) -> Result<Vec<(f64, u64, u64)>> {
    if actual.len() != scores.len() {
        return Err(Error::LengthMismatch {
            left: actual.len(),
            right: scores.len(),
        });
    }
    check_binary(actual, "actual")?;
    if let Some(i) = scores.iter().position(|s| s.is_nan()) {
        return Err(Error::InvalidInput(format!("score {i} is NaN")));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut groups: Vec<(f64, u64, u64)> = Vec::new();
    for i in order {
        let s = scores[i];
        match groups.last_mut() {
            Some(g) if g.0.partial_cmp(&s) == Some(Ordering::Equal) => {
                if actual[i] == 1 { g.1 += 1 } else { g.2 += 1 }
            }
            _ => groups.push((s, u64::from(actual[i] == 1), u64::from(actual[i] == 0))),
        }
    }
    Ok(groups)
}

fn class_totals(groups: &[(f64, u64, u64)]) -> (u64, u64) {
    groups
        .iter()
        .fold((0, 0), |(p, n), g| (p + g.1, n + g.2))
}

/// ROC curve over every distinct score plus its trapezoidal area.
///
/// The area is accumulated in integer pair counts and divided once, so it is
/// the exact same number as [`roc_auc_mann_whitney`].
pub fn roc_curve(actual: &[u8], scores: &[f64]) -> Result<(Curve, f64)> {
    let groups = descending_groups(actual, scores)?;
    let (pos, neg) = class_totals(&groups);
    if pos == 0 || neg == 0 {
        return Err(Error::InvalidInput(
            "ROC needs at least one positive and one negative".into(),
        ));
    }
    let mut points = vec![CurvePoint {
        x: 0.0,
        y: 0.0,
        threshold: f64::INFINITY,
    }];
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut twice_area: u128 = 0;
    for &(score, gp, gn) in &groups {
        let tp_prev = tp;
        tp += gp;
        fp += gn;
        twice_area += u128::from(gn) * u128::from(tp_prev + tp);
        points.push(CurvePoint {
            x: fp as f64 / neg as f64,
            y: tp as f64 / pos as f64,
            threshold: score,
        });
    }
    let auc = twice_area as f64 / (2.0 * pos as f64 * neg as f64);
    Ok((Curve { points }, auc))
}

/// `P(score_pos > score_neg) + 1/2 P(score_pos == score_neg)` by rank counting.
pub fn roc_auc_mann_whitney(actual: &[u8], scores: &[f64]) -> Result<f64> {
    let groups = descending_groups(actual, scores)?;
    let (pos, neg) = class_totals(&groups);
    if pos == 0 || neg == 0 {
        return Err(Error::InvalidInput(
            "AUC needs at least one positive and one negative".into(),
        ));
    }
    // ascending pass: negatives strictly below each positive count 1, ties 1/2
    let mut neg_below = 0u64;
    let mut twice_u: u128 = 0;
    for &(_, gp, gn) in groups.iter().rev() {
        twice_u += u128::from(gp) * u128::from(2 * neg_below + gn);
        neg_below += gn;
    }
    Ok(twice_u as f64 / (2.0 * pos as f64 * neg as f64))
}

/// Precision-recall curve over every distinct score and its average
/// precision `sum_k (R_k - R_{k-1}) * P_k`.
pub fn pr_curve(actual: &[u8], scores: &[f64]) -> Result<(Curve, f64)> {
    let groups = descending_groups(actual, scores)?;
    let (pos, _) = class_totals(&groups);
    if pos == 0 {
        return Err(Error::InvalidInput("PR curve needs at least one positive".into()));
    }
    let mut points = vec![CurvePoint {
        x: 0.0,
        y: 1.0,
        threshold: f64::INFINITY,
    }];
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut recall_prev = 0.0;
    let mut ap = 0.0;
    for &(score, gp, gn) in &groups {
        tp += gp;
        fp += gn;
        let recall = tp as f64 / pos as f64;
        let precision = tp as f64 / (tp + fp) as f64;
        ap += (recall - recall_prev) * precision;
        recall_prev = recall;
        points.push(CurvePoint {
            x: recall,
            y: precision,
            threshold: score,
        });
    }
    Ok((Curve { points }, ap))
}

/// Everything reported for one evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub confusion: ConfusionMatrix,
    #[serde(flatten)]
    pub scalars: ScalarMetrics,
    pub roc_auc: Option<f64>,
    pub pr_auc: Option<f64>,
}

/// Confusion-derived rates at `threshold` plus both curves. Curves that are
/// undefined for the input (single class) are returned empty with `None` areas.
pub fn evaluate_scores(
    actual: &[u8],
    scores: &[f64],
    threshold: f64,
) -> Result<(MetricsReport, Curve, Curve)> {
    let predicted: Vec<u8> = scores.iter().map(|&s| u8::from(s >= threshold)).collect();
    let cm = confusion(actual, &predicted)?;
    let scalars = scalar_metrics(&cm)?;
    let (roc, roc_auc) = match roc_curve(actual, scores) {
        Ok((c, a)) => (c, Some(a)),
        Err(_) => (Curve::default(), None),
    };
    let (pr, pr_auc) = match pr_curve(actual, scores) {
        Ok((c, a)) => (c, Some(a)),
        Err(_) => (Curve::default(), None),
    };
    Ok((
        MetricsReport {
            confusion: cm,
            scalars,
            roc_auc,
            pr_auc,
        },
        roc,
        pr,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn confusion_examples() {
        assert_eq!(confusion(&[1, 0], &[1, 0]).unwrap(), ConfusionMatrix::new(1, 1, 0, 0));
        assert_eq!(confusion(&[1], &[0]).unwrap(), ConfusionMatrix::new(0, 0, 0, 1));
        assert!(confusion(&[1, 0], &[1]).is_err());
        assert!(confusion(&[2], &[1]).is_err());
        assert!(confusion(&[], &[]).is_err());
    }

    #[test]
    fn test_set_counts_match_reported_percentages() {
        let m = scalar_metrics(&ConfusionMatrix::new(520, 817, 19, 24)).unwrap();
        let pct = |v: Option<f64>| percent_2dp(v.unwrap());
        assert_eq!(pct(m.accuracy), 96.88);
        assert_eq!(pct(m.sensitivity), 95.59);
        assert_eq!(pct(m.specificity), 97.73);
        assert_eq!(pct(m.precision), 96.47);
        assert_eq!(pct(m.f1), 96.03);
        assert_eq!(pct(m.balanced_accuracy), 96.66);
        let train = scalar_metrics(&ConfusionMatrix::new(1266, 1946, 8, 1)).unwrap();
        assert_eq!(pct(train.accuracy), 99.72);
    }

    #[test]
    fn degenerate_all_positive() {
        let m = scalar_metrics(&ConfusionMatrix::new(7, 0, 0, 0)).unwrap();
        assert_eq!(m.accuracy, Some(1.0));
        assert_eq!(m.sensitivity, Some(1.0));
        assert_eq!(m.precision, Some(1.0));
        assert_eq!(m.specificity, None);
        assert_eq!(m.balanced_accuracy, None);
        assert!(scalar_metrics(&ConfusionMatrix::default()).is_err());
    }

    #[test]
    fn roc_examples() {
        assert_eq!(roc_curve(&[0, 1], &[0.1, 0.9]).unwrap().1, 1.0);
        assert_eq!(roc_curve(&[1, 0], &[0.1, 0.9]).unwrap().1, 0.0);
        assert_eq!(roc_curve(&[0, 1, 0, 1], &[0.1, 0.2, 0.3, 0.4]).unwrap().1, 0.75);
        assert!(roc_curve(&[1, 1], &[0.1, 0.9]).is_err());
        let (curve, _) = roc_curve(&[0, 1, 0, 1], &[0.1, 0.2, 0.3, 0.4]).unwrap();
        let first = curve.points.first().unwrap();
        let last = curve.points.last().unwrap();
        assert_eq!((first.x, first.y), (0.0, 0.0));
        assert_eq!((last.x, last.y), (1.0, 1.0));
    }

    #[test]
    fn roc_with_all_tied_scores_is_half() {
        assert_eq!(roc_curve(&[0, 1, 1, 0, 1], &[0.5; 5]).unwrap().1, 0.5);
        assert_eq!(roc_auc_mann_whitney(&[0, 1, 1, 0, 1], &[0.5; 5]).unwrap(), 0.5);
    }

    #[test]
    fn pr_examples() {
        assert_eq!(pr_curve(&[0, 0, 1, 1], &[0.1, 0.2, 0.8, 0.9]).unwrap().1, 1.0);
        let n = 8;
        let mut actual = vec![0u8; n];
        actual[n - 1] = 1;
        let scores: Vec<f64> = (0..n).map(|i| (n - i) as f64).collect();
        assert!((pr_curve(&actual, &scores).unwrap().1 - 1.0 / n as f64).abs() < 1e-15);
        let ap = pr_curve(&[1, 0, 0, 1, 0], &[0.3; 5]).unwrap().1;
        assert!((ap - 0.4).abs() < 1e-15);
        assert!(pr_curve(&[0, 0], &[0.1, 0.2]).is_err());
    }

    #[test]
    fn report_serializes_undefined_as_null() {
        let (report, _, _) = evaluate_scores(&[1, 1], &[0.9, 0.8], 0.5).unwrap();
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"specificity\":null"), "{json}");
        assert!(json.contains("\"roc_auc\":null"), "{json}");
    }
}
