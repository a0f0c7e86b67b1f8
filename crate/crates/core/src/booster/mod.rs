//! Regularized second-order gradient-boosted trees with logistic loss.
//!
//! Each round fits a regression tree to the first and second derivatives of
//! the loss at the current raw scores. Leaves take the closed-form optimal
//! weight `-G / (H + lambda)` scaled by `eta`; splits are chosen by exact
//! greedy search on the structure-score gain, grown to `max_depth` and then
//! pruned bottom-up against `gamma`.

mod io;
mod model;
mod objective;
mod params;
mod split;
mod tree;

pub use io::{load_model, model_from_json, model_to_json, save_model, FORMAT_VERSION};
pub use model::{train, train_monitored, Model, Monitor, RoundLog};
pub use objective::{
    compute_gradients, leaf_weight, logistic_loss, logit, sigmoid, split_gain, structure_score,
    GradPair, GradStats, MIN_HESSIAN,
};
pub use params::Hyperparams;
pub use split::{find_best_split, midpoint, SplitCandidate, GAIN_TIE_TOLERANCE};
pub use tree::{build_tree, prune, Tree, TreeNode};
