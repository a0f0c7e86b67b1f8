use std::path::Path;

use anyhow::{Context, Result};
use gbspam_core::booster::Hyperparams;
use gbspam_core::resampling::ResampleSpec;
use gbspam_core::Dataset;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Everything needed to replay a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub tool_version: String,
    pub dataset: DatasetInfo,
    pub split: SplitInfo,
    pub resample: Option<ResampleInfo>,
    pub train_seed: u64,
    pub hyperparams: Hyperparams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetInfo {
    pub path: String,
    pub sha256: String,
    pub rows: usize,
    pub feature_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitInfo {
    pub seed: u64,
    pub test_fraction: f64,
    pub train: ClassCounts,
    pub test: ClassCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResampleInfo {
    pub spec: ResampleSpec,
    /// Training partition after resampling.
    pub resampled_train: ClassCounts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassCounts {
    pub ham: usize,
    pub spam: usize,
}

impl ClassCounts {
    pub fn of(ds: &Dataset) -> Self {
        let [ham, spam] = ds.class_counts();
        Self { ham, spam }
    }

    pub fn total(&self) -> usize {
        self.ham + self.spam
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn tool_version() -> String {
    format!("gbspam {}", env!("CARGO_PKG_VERSION"))
}
