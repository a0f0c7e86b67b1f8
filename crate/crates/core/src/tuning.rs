//! Exhaustive grid search with validation during training.
//!
//! Each combination is trained with early stopping monitored on the
//! validation rows and scored by validation classification error. The test
//! partition never reaches this module: callers pass the training partition
//! only.

use std::fmt;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::booster::{train_monitored, Hyperparams, Model, Monitor};
use crate::dataset::{kfold_indices, stratified_split, Dataset, SplitSpec};
use crate::error::{Error, Result};

/// A tunable field of [`Hyperparams`], in canonical enumeration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    Eta,
    Gamma,
    Lambda,
    MaxDepth,
    Colsample,
    Subsample,
    MinChildWeight,
    NumRounds,
    EarlyStoppingRounds,
    BaseScore,
}

impl Param {
    pub const ALL: [Param; 10] = [
        Param::Eta,
        Param::Gamma,
        Param::Lambda,
        Param::MaxDepth,
        Param::Colsample,
        Param::Subsample,
        Param::MinChildWeight,
        Param::NumRounds,
        Param::EarlyStoppingRounds,
        Param::BaseScore,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Param::Eta => "eta",
            Param::Gamma => "gamma",
            Param::Lambda => "lambda",
            Param::MaxDepth => "max_depth",
            Param::Colsample => "colsample",
            Param::Subsample => "subsample",
            Param::MinChildWeight => "min_child_weight",
            Param::NumRounds => "num_rounds",
            Param::EarlyStoppingRounds => "early_stopping_rounds",
            Param::BaseScore => "base_score",
        }
    }

    pub fn from_name(name: &str) -> Option<Param> {
        Param::ALL.into_iter().find(|p| p.name() == name)
    }

    fn is_integer(self) -> bool {
        matches!(
            self,
            Param::MaxDepth | Param::NumRounds | Param::EarlyStoppingRounds
        )
    }

    /// Writes `value` into the matching field of `params`.
    pub fn apply(self, params: &mut Hyperparams, value: f64) {
        match self {
            Param::Eta => params.eta = value,
            Param::Gamma => params.gamma = value,
            Param::Lambda => params.lambda = value,
            Param::MaxDepth => params.max_depth = value as usize,
            Param::Colsample => params.colsample = value,
            Param::Subsample => params.subsample = value,
            Param::MinChildWeight => params.min_child_weight = value,
            Param::NumRounds => params.num_rounds = value as usize,
            Param::EarlyStoppingRounds => params.early_stopping_rounds = Some(value as usize),
            Param::BaseScore => params.base_score = value,
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Candidate values per hyperparameter. Axes are kept in canonical [`Param`]
/// order; combinations enumerate with the last axis varying fastest.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamGrid {
    axes: Vec<(Param, Vec<f64>)>,
}

impl ParamGrid {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds (or replaces) one axis. Every value is checked against the
    /// field's own range.
    pub fn with(mut self, param: Param, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Grid(format!("{param}: empty value list")));
        }
        for &v in &values {
            if param.is_integer() && (v.fract() != 0.0 || v < 0.0) {
                return Err(Error::Grid(format!("{param}: {v} is not a non-negative integer")));
            }
            let mut probe = Hyperparams {
                early_stopping_rounds: Some(10),
                ..Hyperparams::default()
            };
            param.apply(&mut probe, v);
            probe
                .validate()
                .map_err(|e| Error::Grid(format!("{param}: {e}")))?;
        }
        self.axes.retain(|(p, _)| *p != param);
        self.axes.push((param, values));
        self.axes.sort_by_key(|(p, _)| *p);
        Ok(self)
    }

    pub fn axes(&self) -> &[(Param, Vec<f64>)] {
        &self.axes
    }

    /// Product of the axis lengths (1 for an empty grid).
    pub fn len(&self) -> usize {
        self.axes.iter().map(|(_, v)| v.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every combination applied on top of `base`, in enumeration order.
    pub fn combinations(&self, base: &Hyperparams) -> Vec<Hyperparams> {
        let mut out = Vec::with_capacity(self.len());
        let mut idx = vec![0usize; self.axes.len()];
        loop {
            let mut p = base.clone();
            for ((param, values), &i) in self.axes.iter().zip(&idx) {
                param.apply(&mut p, values[i]);
            }
            out.push(p);
            // odometer increment, last axis fastest
            let mut k = self.axes.len();
            loop {
                if k == 0 {
                    return out;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < self.axes[k].1.len() {
                    break;
                }
                idx[k] = 0;
            }
        }
    }

    /// Parses a TOML table whose keys are hyperparameter names and whose
    /// values are numbers or arrays of numbers.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table =
            toml::from_str(text).map_err(|e| Error::Grid(format!("parse error: {e}")))?;
        let mut grid = ParamGrid::new();
        for (key, value) in &table {
            let param = Param::from_name(key)
                .ok_or_else(|| Error::Grid(format!("unknown hyperparameter {key:?}")))?;
            let items: Vec<&toml::Value> = match value {
                toml::Value::Array(a) => a.iter().collect(),
                other => vec![other],
            };
            let values = items
                .into_iter()
                .map(|v| match v {
                    toml::Value::Integer(i) => Ok(*i as f64),
                    toml::Value::Float(f) => Ok(*f),
                    other => Err(Error::Grid(format!(
                        "{key}: expected numbers, found {}",
                        other.type_str()
                    ))),
                })
                .collect::<Result<Vec<f64>>>()?;
            grid = grid.with(param, values)?;
        }
        Ok(grid)
    }

    pub fn from_toml_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum ValidationStrategy {
    /// Stratified holdout of `fraction` of the training rows.
    Holdout { fraction: f64 },
    /// Stratified k-fold; the score is the mean over folds.
    KFold { k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationConfig {
    pub strategy: ValidationStrategy,
    pub seed: u64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            strategy: ValidationStrategy::Holdout { fraction: 0.2 },
            seed: 0,
        }
    }
}

impl ValidationConfig {
    fn validate(&self) -> Result<()> {
        match self.strategy {
            ValidationStrategy::Holdout { fraction } if !(fraction > 0.0 && fraction < 1.0) => {
                Err(Error::Grid(format!("holdout fraction {fraction} not in (0, 1)")))
            }
            ValidationStrategy::KFold { k } if k < 2 => {
                Err(Error::Grid(format!("k-fold needs k >= 2, got {k}")))
            }
            _ => Ok(()),
        }
    }

    /// `(fit, validation)` dataset pairs.
    fn partitions(&self, train: &Dataset) -> Result<Vec<(Dataset, Dataset)>> {
        let parts = match self.strategy {
            ValidationStrategy::Holdout { fraction } => {
                vec![stratified_split(train, &SplitSpec::new(fraction, self.seed)?)?]
            }
            ValidationStrategy::KFold { k } => kfold_indices(train, k, self.seed)?
                .into_iter()
                .map(|f| Ok((train.select_ids(&f.train_ids)?, train.select_ids(&f.valid_ids)?)))
                .collect::<Result<Vec<_>>>()?,
        };
        for (i, (fit, valid)) in parts.iter().enumerate() {
            for (name, d) in [("fit", fit), ("validation", valid)] {
                if d.class_counts().contains(&0) {
                    return Err(Error::InvalidSplit(format!(
                        "fold {i}: {name} rows are missing a class"
                    )));
                }
            }
        }
        Ok(parts)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub index: usize,
    pub params: Hyperparams,
    /// Mean validation classification error over folds.
    pub validation_error: f64,
    /// Mean number of trees kept after early stopping.
    pub rounds_used: f64,
    pub wall_time_ms: f64,
}

impl TraceRecord {
    /// Equality ignoring wall time.
    pub fn same_outcome(&self, other: &TraceRecord) -> bool {
        self.index == other.index
            && self.params == other.params
            && self.validation_error.to_bits() == other.validation_error.to_bits()
            && self.rounds_used.to_bits() == other.rounds_used.to_bits()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SearchTrace {
    pub records: Vec<TraceRecord>,
}

impl SearchTrace {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<&str> = vec!["index"];
        header.extend(Param::ALL.iter().map(|p| p.name()));
        header.extend(["validation_error", "rounds_used", "wall_time_ms"]);
        w.write_record(&header).map_err(csv_err)?;
        for r in &self.records {
            let p = &r.params;
            let es = p
                .early_stopping_rounds
                .map_or_else(String::new, |v| v.to_string());
            w.write_record([
                r.index.to_string(),
                p.eta.to_string(),
                p.gamma.to_string(),
                p.lambda.to_string(),
                p.max_depth.to_string(),
                p.colsample.to_string(),
                p.subsample.to_string(),
                p.min_child_weight.to_string(),
                p.num_rounds.to_string(),
                es,
                p.base_score.to_string(),
                r.validation_error.to_string(),
                r.rounds_used.to_string(),
                format!("{:.3}", r.wall_time_ms),
            ])
            .map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::InvalidInput(e.to_string()))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidInput(format!("csv: {e}"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub best: Hyperparams,
    pub best_index: usize,
    pub trace: SearchTrace,
}

fn describe(index: usize, total: usize, p: &Hyperparams) -> String {
    format!(
        "combination {} of {total} (eta={}, gamma={}, lambda={}, max_depth={}, colsample={}, subsample={}, min_child_weight={}, num_rounds={}, early_stopping_rounds={:?})",
        index + 1,
        p.eta,
        p.gamma,
        p.lambda,
        p.max_depth,
        p.colsample,
        p.subsample,
        p.min_child_weight,
        p.num_rounds,
        p.early_stopping_rounds
    )
}

fn evaluate_combination(
    parts: &[(Dataset, Dataset)],
    params: &Hyperparams,
    seed: u64,
) -> Result<(f64, f64)> {
    let mut err_sum = 0.0;
    let mut rounds_sum = 0.0;
    for (fit, valid) in parts {
        let model: Model = train_monitored(fit, params, seed, Monitor::Holdout(valid))?;
        let labels = model.predict_label(valid.view(), 0.5)?;
        let wrong = labels.iter().zip(valid.labels()).filter(|(a, b)| a != b).count();
        err_sum += wrong as f64 / valid.n_rows() as f64;
        rounds_sum += model.trees().len() as f64;
    }
    let k = parts.len() as f64;
    Ok((err_sum / k, rounds_sum / k))
}

/// Trains every grid combination (on top of `base`) and returns the one with
/// the lowest validation error, earliest combination on ties.
pub fn grid_search(
    train: &Dataset,
    grid: &ParamGrid,
    base: &Hyperparams,
    val: &ValidationConfig,
    seed: u64,
) -> Result<SearchOutcome> {
    val.validate()?;
    let combos = grid.combinations(base);
    let total = combos.len();
    let parts = val.partitions(train);

    let records = combos
        .into_par_iter()
        .enumerate()
        .map(|(index, params)| {
            let wrap = |e: Error| Error::Grid(format!("{}: {e}", describe(index, total, &params)));
            params.validate().map_err(wrap)?;
            let parts = parts.as_ref().map_err(|e| wrap(Error::InvalidSplit(e.to_string())))?;
            let start = Instant::now();
            let (validation_error, rounds_used) =
                evaluate_combination(parts, &params, seed).map_err(wrap)?;
            Ok(TraceRecord {
                index,
                validation_error,
                rounds_used,
                wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
                params,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let best_index = records
        .iter()
        .fold(None::<&TraceRecord>, |best, r| match best {
            Some(b) if b.validation_error <= r.validation_error => Some(b),
            _ => Some(r),
        })
        .map(|r| r.index)
        .expect("grid has at least one combination");
    Ok(SearchOutcome {
        best: records[best_index].params.clone(),
        best_index,
        trace: SearchTrace { records },
    })
}
