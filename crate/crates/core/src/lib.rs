//! Regularized second-order gradient boosting for binary spam detection.
//!
//! * [`dataset`]: Spambase-format ingestion, stratified splits and folds.
//! * [`booster`]: logistic-loss tree boosting with exact greedy splits,
//!   bottom-up pruning, shrinkage, sampling and early stopping.
//! * [`metrics`]: confusion counts, scalar rates, ROC and PR curves.
//! * [`tuning`]: exhaustive grid search with validation during training.
//! * [`resampling`]: random over/under-sampling, SMOTE and Tomek links.
//!
//! ```
//! use gbspam_core::booster::{train, Hyperparams};
//! use gbspam_core::dataset::Dataset;
//!
//! let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
//! let labels = (0..20).map(|i| u8::from(i >= 10)).collect();
//! let ds = Dataset::from_rows(&rows, labels).unwrap();
//! let params = Hyperparams { max_depth: 2, colsample: 1.0, ..Default::default() };
//! let model = train(&ds, &params, 7).unwrap();
//! assert_eq!(model.predict_label(ds.view(), 0.5).unwrap(), ds.labels());
//! ```

pub mod booster;
pub mod dataset;
pub mod error;
pub mod metrics;
pub mod resampling;
pub mod tuning;

pub use booster::{Hyperparams, Model};
pub use dataset::{Dataset, FeatureView, SplitSpec};
pub use error::{Error, Result};
pub use metrics::{ConfusionMatrix, MetricsReport};
