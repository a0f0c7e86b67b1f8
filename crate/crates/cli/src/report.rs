//! Plain-text tables and summary statistics.

use gbspam_core::metrics::{percent_2dp, ConfusionMatrix, MetricsReport};
use serde::{Deserialize, Serialize};

/// The eight reported rates, as fractions.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Rates {
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub precision: Option<f64>,
    pub f1: Option<f64>,
    pub balanced_accuracy: Option<f64>,
    pub accuracy: Option<f64>,
    pub roc_auc: Option<f64>,
    pub pr_auc: Option<f64>,
}

pub const RATE_HEADERS: [&str; 8] = [
    "Sensitivity/Recall",
    "Specificity",
    "Precision",
    "F1-Score",
    "Balanced Accuracy",
    "Accuracy",
    "ROC-AUC",
    "PR-AUC",
];

impl Rates {
    pub fn of(r: &MetricsReport) -> Self {
        let s = &r.scalars;
        Self {
            sensitivity: s.sensitivity,
            specificity: s.specificity,
            precision: s.precision,
            f1: s.f1,
            balanced_accuracy: s.balanced_accuracy,
            accuracy: s.accuracy,
            roc_auc: r.roc_auc,
            pr_auc: r.pr_auc,
        }
    }

    pub fn values(&self) -> [Option<f64>; 8] {
        [
            self.sensitivity,
            self.specificity,
            self.precision,
            self.f1,
            self.balanced_accuracy,
            self.accuracy,
            self.roc_auc,
            self.pr_auc,
        ]
    }

    fn from_values(v: [Option<f64>; 8]) -> Self {
        Self {
            sensitivity: v[0],
            specificity: v[1],
            precision: v[2],
            f1: v[3],
            balanced_accuracy: v[4],
            accuracy: v[5],
            roc_auc: v[6],
            pr_auc: v[7],
        }
    }

    /// Same rates rounded to percent with two decimals.
    pub fn percent(&self) -> Self {
        Self::from_values(self.values().map(|v| v.map(percent_2dp)))
    }
}

/// Mean and sample standard deviation of each rate over runs where it is defined.
pub fn mean_sd(runs: &[Rates]) -> (Rates, Rates) {
    let mut mean = [None; 8];
    let mut sd = [None; 8];
    for i in 0..8 {
        let xs: Vec<f64> = runs.iter().filter_map(|r| r.values()[i]).collect();
        let (m, s) = mean_and_sd(&xs);
        mean[i] = m;
        sd[i] = s;
    }
    (Rates::from_values(mean), Rates::from_values(sd))
}

pub fn mean_and_sd(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let sd = if xs.len() > 1 {
        (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (Some(m), Some(sd))
}

/// Left-aligned first column, right-aligned value columns.
pub fn table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: Vec<&str>| {
        let mut s = String::new();
        for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            if i == 0 {
                s.push_str(&format!("{cell:<w$}"));
            } else {
                s.push_str(&format!("  {cell:>w$}"));
            }
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(headers.to_vec());
    for row in rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
    }
    out
}

pub fn pct_cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{:.2}", percent_2dp(x)))
}

/// One labelled row per entry, columns in the standard rate order.
pub fn rates_table(first: &str, rows: &[(String, Rates)]) -> String {
    let mut headers = vec![first];
    headers.extend(RATE_HEADERS);
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|(label, r)| {
            let mut cells = vec![label.clone()];
            cells.extend(r.values().into_iter().map(pct_cell));
            cells
        })
        .collect();
    table(&headers, &body)
}

/// Rows are predicted labels, columns actual labels.
pub fn confusion_table(title: &str, cm: &ConfusionMatrix) -> String {
    let rows = vec![
        vec!["0".to_string(), cm.tn.to_string(), cm.fn_.to_string()],
        vec!["1".to_string(), cm.fp.to_string(), cm.tp.to_string()],
    ];
    format!(
        "{title} (rows: predicted, columns: actual; 1 = spam)\n{}",
        table(&["", "0", "1"], &rows)
    )
}

/// Published results on the same dataset, shown for comparison only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Baseline {
    pub classifier: &'static str,
    pub accuracy: f64,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub precision: Option<f64>,
    pub f1: Option<f64>,
    pub roc_auc: Option<f64>,
}

const fn row(
    classifier: &'static str,
    accuracy: f64,
    sensitivity: Option<f64>,
    specificity: Option<f64>,
    precision: Option<f64>,
    f1: Option<f64>,
    roc_auc: Option<f64>,
) -> Baseline {
    Baseline {
        classifier,
        accuracy,
        sensitivity,
        specificity,
        precision,
        f1,
        roc_auc,
    }
}

/// Percentages as published; not recomputed here.
pub const BASELINES: [Baseline; 12] = [
    row("XGBoost (published)", 96.88, Some(95.59), Some(97.73), Some(96.47), Some(96.03), Some(99.08)),
    row("SVM", 94.06, Some(93.87), Some(94.06), None, None, None),
    row("CNSA-FFO", 93.88, Some(87.28), Some(97.31), None, None, None),
    row("NSA-PSO", 91.22, Some(65.99), Some(93.43), None, None, None),
    row("PSO", 81.32, Some(60.48), Some(94.86), None, None, None),
    row("NSA", 68.86, Some(22.24), Some(99.16), None, None, None),
    row("LR-Two-step", 93.03, None, None, None, None, None),
    row("LR", 90.85, None, None, None, None, None),
    row("Rotation Forest", 93.50, Some(93.50), None, Some(93.50), Some(93.50), Some(97.60)),
    row("J48", 91.20, Some(91.20), None, Some(91.20), Some(91.10), Some(93.70)),
    row("Bayesian LR", 93.00, Some(93.00), None, Some(93.00), Some(93.00), Some(92.70)),
    row("MLP", 92.30, Some(92.30), None, Some(92.30), Some(92.30), Some(97.30)),
];

/// Baselines next to this run's mean test rates.
pub fn baseline_table(ours: &Rates, seeds: usize) -> String {
    let headers = [
        "Classifier",
        "Accuracy",
        "Sensitivity/Recall",
        "Specificity",
        "Precision",
        "F1-Score",
        "ROC-AUC",
    ];
    let fixed = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.2}"));
    let mut rows = vec![vec![
        format!("This run (mean of {seeds})"),
        pct_cell(ours.accuracy),
        pct_cell(ours.sensitivity),
        pct_cell(ours.specificity),
        pct_cell(ours.precision),
        pct_cell(ours.f1),
        pct_cell(ours.roc_auc),
    ]];
    rows.extend(BASELINES.iter().map(|b| {
        vec![
            b.classifier.to_string(),
            format!("{:.2}", b.accuracy),
            fixed(b.sensitivity),
            fixed(b.specificity),
            fixed(b.precision),
            fixed(b.f1),
            fixed(b.roc_auc),
        ]
    }));
    table(&headers, &rows)
}
