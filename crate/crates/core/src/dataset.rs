//! Dense binary-labelled datasets, Spambase-format CSV ingestion and seeded
//! stratified partitioning.
//!
//! Rows carry stable identifiers (their position in the source file) that
//! survive every split and subset, so any experiment can be traced back to
//! the exact input lines it used.

use std::collections::HashMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Row-major dense feature matrix with binary labels (1 = spam).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<u8>,
    row_ids: Vec<usize>,
    feature_count: usize,
}

/// Borrowed row-major feature matrix.
#[derive(Debug, Clone, Copy)]
pub struct FeatureView<'a> {
    data: &'a [f64],
    cols: usize,
}

impl<'a> FeatureView<'a> {
    pub fn new(data: &'a [f64], cols: usize) -> Result<Self> {
        if cols == 0 {
            return Err(Error::InvalidInput("feature matrix has zero columns".into()));
        }
        if data.len() % cols != 0 {
            return Err(Error::InvalidInput(format!(
                "feature buffer of length {} is not a multiple of {cols} columns",
                data.len()
            )));
        }
        Ok(Self { data, cols })
    }

    pub fn n_rows(&self) -> usize {
        self.data.len() / self.cols
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &'a [f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }
}

impl Dataset {
    /// Builds a dataset with positional row ids `0..n`.
    pub fn new(features: Vec<f64>, labels: Vec<u8>, feature_count: usize) -> Result<Self> {
        let n = labels.len();
        Self::with_row_ids(features, labels, (0..n).collect(), feature_count)
    }

    pub fn with_row_ids(
        features: Vec<f64>,
        labels: Vec<u8>,
        row_ids: Vec<usize>,
        feature_count: usize,
    ) -> Result<Self> {
        if feature_count == 0 {
            return Err(Error::InvalidDataset("feature_count must be at least 1".into()));
        }
        if features.len() != labels.len() * feature_count {
            return Err(Error::InvalidDataset(format!(
                "{} feature values for {} rows of {feature_count} features",
                features.len(),
                labels.len()
            )));
        }
        if row_ids.len() != labels.len() {
            return Err(Error::LengthMismatch {
                left: row_ids.len(),
                right: labels.len(),
            });
        }
        if let Some(pos) = labels.iter().position(|&y| y > 1) {
            return Err(Error::InvalidDataset(format!(
                "row {pos} has label {} (expected 0 or 1)",
                labels[pos]
            )));
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "row {} column {} is not finite",
                pos / feature_count,
                pos % feature_count
            )));
        }
        let mut seen = std::collections::HashSet::with_capacity(row_ids.len());
        if let Some(dup) = row_ids.iter().find(|id| !seen.insert(**id)) {
            return Err(Error::InvalidDataset(format!("duplicate row id {dup}")));
        }
        Ok(Self {
            features,
            labels,
            row_ids,
            feature_count,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<u8>) -> Result<Self> {
        let p = rows.first().map(Vec::len).unwrap_or(0);
        if let Some(bad) = rows.iter().position(|r| r.len() != p) {
            return Err(Error::InvalidDataset(format!(
                "row {bad} has {} features, expected {p}",
                rows[bad].len()
            )));
        }
        if rows.len() != labels.len() {
            return Err(Error::LengthMismatch {
                left: rows.len(),
                right: labels.len(),
            });
        }
        Self::new(rows.concat(), labels, p)
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn row_ids(&self) -> &[usize] {
        &self.row_ids
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn view(&self) -> FeatureView<'_> {
        FeatureView {
            data: &self.features,
            cols: self.feature_count,
        }
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.feature_count..(i + 1) * self.feature_count]
    }

    #[inline]
    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.features[row * self.feature_count + col]
    }

    /// `[count of label 0, count of label 1]`.
    pub fn class_counts(&self) -> [usize; 2] {
        let ones = self.labels.iter().filter(|&&y| y == 1).count();
        [self.labels.len() - ones, ones]
    }

    /// Positions (not ids) of the rows labelled `class`, in storage order.
    pub fn positions_of(&self, class: u8) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &y)| y == class)
            .map(|(i, _)| i)
            .collect()
    }

    /// New dataset made of the rows at `positions`, in that order. Row ids are kept.
    pub fn select(&self, positions: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(positions.len() * self.feature_count);
        let mut labels = Vec::with_capacity(positions.len());
        let mut row_ids = Vec::with_capacity(positions.len());
        for &i in positions {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
            row_ids.push(self.row_ids[i]);
        }
        Dataset {
            features,
            labels,
            row_ids,
            feature_count: self.feature_count,
        }
    }

    /// Rows whose ids are listed in `ids`, in the order given.
    pub fn select_ids(&self, ids: &[usize]) -> Result<Dataset> {
        let index: HashMap<usize, usize> = self
            .row_ids
            .iter()
            .enumerate()
            .map(|(pos, &id)| (id, pos))
            .collect();
        let positions = ids
            .iter()
            .map(|id| {
                index
                    .get(id)
                    .copied()
                    .ok_or_else(|| Error::InvalidInput(format!("row id {id} not in dataset")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.select(&positions))
    }

    /// Appends rows, assigning fresh ids above the current maximum.
    pub(crate) fn append_rows(&mut self, features: &[f64], labels: &[u8]) {
        debug_assert_eq!(features.len(), labels.len() * self.feature_count);
        let first = self.row_ids.iter().max().map_or(0, |m| m + 1);
        self.features.extend_from_slice(features);
        self.labels.extend_from_slice(labels);
        self.row_ids.extend(first..first + labels.len());
    }
}

/// Test fraction and seed for [`stratified_split`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    test_fraction: f64,
    seed: u64,
}

impl SplitSpec {
    pub fn new(test_fraction: f64, seed: u64) -> Result<Self> {
        if !(test_fraction > 0.0 && test_fraction < 1.0) {
            return Err(Error::InvalidSplit(format!(
                "test_fraction {test_fraction} must lie strictly between 0 and 1"
            )));
        }
        Ok(Self {
            test_fraction,
            seed,
        })
    }

    pub fn test_fraction(&self) -> f64 {
        self.test_fraction
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Per-class test quota: `test_fraction * count`, rounded half to even.
pub fn test_quota(test_fraction: f64, class_count: usize) -> usize {
    (test_fraction * class_count as f64).round_ties_even() as usize
}

/// Reads a headerless comma-separated file whose last field is a 0/1 label.
pub fn load_dataset(path: impl AsRef<Path>, expected_features: Option<usize>) -> Result<Dataset> {
    let path = path.as_ref();
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Error::io(path, e))?;
    parse_dataset(text.as_bytes(), expected_features)
}

/// Parses Spambase-format CSV from any reader. See [`load_dataset`].
pub fn parse_dataset(input: impl Read, expected_features: Option<usize>) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut width = expected_features.map(|p| p + 1);

    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::MalformedLine {
                line,
                reason: e.to_string(),
            }
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(Error::MalformedLine {
                line,
                reason: format!("expected {w} fields, found {}", record.len()),
            });
        }
        if w < 2 {
            return Err(Error::MalformedLine {
                line,
                reason: "need at least one feature and a label".into(),
            });
        }
        for (col, field) in record.iter().take(w - 1).enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::MalformedLine {
                line,
                reason: format!("field {} ({field:?}) is not a number", col + 1),
            })?;
            if !v.is_finite() {
                return Err(Error::MalformedLine {
                    line,
                    reason: format!("field {} is not finite", col + 1),
                });
            }
            features.push(v);
        }
        labels.push(parse_label(&record[w - 1], line)?);
    }

    let Some(w) = width else {
        return Err(Error::InvalidDataset("no data rows".into()));
    };
    if labels.is_empty() {
        return Err(Error::InvalidDataset("no data rows".into()));
    }
    Dataset::new(features, labels, w - 1)
}

fn parse_label(field: &str, line: u64) -> Result<u8> {
    match field {
        "0" => Ok(0),
        "1" => Ok(1),
        other => match other.parse::<f64>() {
            Ok(0.0) => Ok(0),
            Ok(1.0) => Ok(1),
            _ => Err(Error::MalformedLine {
                line,
                reason: format!("label {other:?} is not 0 or 1"),
            }),
        },
    }
}

/// Seeded stratified train/test partition.
///
/// Each class's rows are shuffled independently (class 0 first, then class 1,
/// from a single seeded stream) and the first `test_quota` of them go to the
/// test side. Both outputs keep the source storage order.
pub fn stratified_split(ds: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut train_pos = Vec::new();
    let mut test_pos = Vec::new();
    for class in [0u8, 1] {
        let mut pos = ds.positions_of(class);
        if pos.len() < 2 {
            return Err(Error::InvalidSplit(format!(
                "class {class} has {} rows; at least 2 are required",
                pos.len()
            )));
        }
        let quota = test_quota(spec.test_fraction, pos.len());
        if quota >= pos.len() {
            return Err(Error::InvalidSplit(format!(
                "class {class} has {} rows but its test quota is {quota}",
                pos.len()
            )));
        }
        pos.shuffle(&mut rng);
        test_pos.extend_from_slice(&pos[..quota]);
        train_pos.extend_from_slice(&pos[quota..]);
    }
    train_pos.sort_unstable();
    test_pos.sort_unstable();
    Ok((ds.select(&train_pos), ds.select(&test_pos)))
}

/// One cross-validation fold, as row ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train_ids: Vec<usize>,
    pub valid_ids: Vec<usize>,
}

/// Stratified k-fold assignment.
///
/// Shuffled rows of each class are dealt round-robin over the folds; class 1
/// continues where class 0 stopped so that total fold sizes stay balanced
/// (and `k = n` yields leave-one-out).
pub fn kfold_indices(ds: &Dataset, k: usize, seed: u64) -> Result<Vec<Fold>> {
    let n = ds.n_rows();
    if k < 2 || k > n {
        return Err(Error::InvalidSplit(format!(
            "k = {k} must satisfy 2 <= k <= n = {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0usize; n];
    let mut next = 0usize;
    for class in [0u8, 1] {
        let mut pos = ds.positions_of(class);
        pos.shuffle(&mut rng);
        for p in pos {
            fold_of[p] = next;
            next = (next + 1) % k;
        }
    }
    let ids = ds.row_ids();
    Ok((0..k)
        .map(|f| {
            let (valid, train): (Vec<usize>, Vec<usize>) =
                (0..n).partition(|&p| fold_of[p] == f);
            Fold {
                train_ids: train.into_iter().map(|p| ids[p]).collect(),
                valid_ids: valid.into_iter().map(|p| ids[p]).collect(),
            }
        })
        .collect())
}
