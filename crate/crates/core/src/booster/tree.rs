//! Regression trees over raw scores: depth-first growth on presorted
//! feature lists, then bottom-up pruning against `gamma`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::objective::{leaf_weight, split_gain, GradPair, GradStats};
use super::params::Hyperparams;
use super::split::{best_split_presorted, sort_rows_by, SplitRule};
use crate::dataset::FeatureView;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TreeNode {
    /// Rows with `x[feature] < threshold` go left, all others right.
    Split {
        feature: usize,
        threshold: f64,
        gain: f64,
        stats: GradStats,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        weight: f64,
        stats: GradStats,
    },
}

impl TreeNode {
    pub fn stats(&self) -> GradStats {
        match self {
            TreeNode::Split { stats, .. } | TreeNode::Leaf { stats, .. } => *stats,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, TreeNode::Leaf { .. })
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    /// Visits every node in pre-order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a TreeNode)) {
        f(self);
        if let TreeNode::Split { left, right, .. } = self {
            left.walk(f);
            right.walk(f);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tree {
    pub leaf_count: usize,
    pub depth: usize,
    pub root: TreeNode,
}

impl Tree {
    pub fn from_root(root: TreeNode) -> Self {
        Self {
            leaf_count: root.leaf_count(),
            depth: root.depth(),
            root,
        }
    }

    /// Leaf weight reached by `row`.
    #[inline]
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { weight, .. } => return *weight,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    node = if row[*feature] < *threshold { left } else { right };
                }
            }
        }
    }
}

fn make_leaf(stats: GradStats, lambda: f64, eta: f64) -> Result<TreeNode> {
    Ok(TreeNode::Leaf {
        weight: eta * leaf_weight(stats.sum_grad, stats.sum_hess, lambda)?,
        stats,
    })
}

struct Grower<'a> {
    x: FeatureView<'a>,
    grads: &'a [GradPair],
    features: &'a [usize],
    rule: SplitRule,
    max_depth: usize,
    lambda: f64,
    eta: f64,
    goes_left: Vec<bool>,
}

impl Grower<'_> {
    /// `sorted[k]` holds this node's rows ordered by `features[k]`.
    fn grow(&mut self, sorted: Vec<Vec<usize>>, stats: GradStats, depth: usize) -> Result<TreeNode> {
        let n = sorted.first().map_or(0, Vec::len);
        if depth >= self.max_depth || n < 2 {
            return make_leaf(stats, self.lambda, self.eta);
        }
        let Some(best) =
            best_split_presorted(self.x, self.features, &sorted, self.grads, stats, self.rule)
        else {
            return make_leaf(stats, self.lambda, self.eta);
        };

        let k = self
            .features
            .iter()
            .position(|&f| f == best.feature)
            .expect("winning feature is one of the scanned features");
        let x = self.x;
        for &r in &sorted[k] {
            self.goes_left[r] = x.value(r, best.feature) < best.threshold;
        }
        let goes_left = &self.goes_left;
        let (left_lists, right_lists): (Vec<Vec<usize>>, Vec<Vec<usize>>) = if n * sorted.len()
            >= 16 * 1024
        {
            sorted
                .into_par_iter()
                .map(|rows| rows.into_iter().partition(|&r| goes_left[r]))
                .unzip()
        } else {
            sorted
                .into_iter()
                .map(|rows| rows.into_iter().partition::<Vec<usize>, _>(|&r| goes_left[r]))
                .unzip()
        };

        let left = self.grow(left_lists, best.left, depth + 1)?;
        let right = self.grow(right_lists, best.right, depth + 1)?;
        Ok(TreeNode::Split {
            feature: best.feature,
            threshold: best.threshold,
            gain: best.gain,
            stats,
            left: Box::new(left),
            right: Box::new(right),
        })
    }
}

/// Grows a tree from per-feature sorted row lists, then prunes it with `params.gamma`.
///
/// Growth accepts any split with positive gain at `gamma = 0`; `gamma` is
/// applied only by [`prune`].
pub(crate) fn build_tree_presorted(
    x: FeatureView<'_>,
    sorted: Vec<Vec<usize>>,
    grads: &[GradPair],
    params: &Hyperparams,
    feature_ids: &[usize],
) -> Result<Tree> {
    let rows = sorted.first().cloned().unwrap_or_default();
    let stats = GradStats::from_rows(&rows, grads);
    let mut grower = Grower {
        x,
        grads,
        features: feature_ids,
        rule: SplitRule {
            lambda: params.lambda,
            gamma: 0.0,
            min_child_weight: params.min_child_weight,
        },
        max_depth: params.max_depth,
        lambda: params.lambda,
        eta: params.eta,
        goes_left: vec![false; x.n_rows()],
    };
    let root = grower.grow(sorted, stats, 0)?;
    prune(Tree::from_root(root), params.gamma, params.lambda, params.eta)
}

/// Builds one tree over `rows` using the features in `feature_ids`.
pub fn build_tree(
    x: FeatureView<'_>,
    rows: &[usize],
    grads: &[GradPair],
    params: &Hyperparams,
    feature_ids: &[usize],
) -> Result<Tree> {
    params.validate()?;
    if rows.is_empty() {
        return Err(crate::Error::InvalidInput("cannot build a tree on zero rows".into()));
    }
    if feature_ids.is_empty() {
        let stats = GradStats::from_rows(rows, grads);
        return Ok(Tree::from_root(make_leaf(stats, params.lambda, params.eta)?));
    }
    let sorted = feature_ids.iter().map(|&f| sort_rows_by(x, f, rows)).collect();
    build_tree_presorted(x, sorted, grads, params, feature_ids)
}

/// Bottom-up pruning.
///
/// Every split's gain is recomputed from its children's statistics with the
/// given `gamma`; a split whose children are both leaves and whose gain is
/// `<= 0` collapses into a leaf carrying the eta-scaled optimal weight of its
/// own statistics. Collapses cascade upwards in the same post-order pass.
pub fn prune(tree: Tree, gamma: f64, lambda: f64, eta: f64) -> Result<Tree> {
    Ok(Tree::from_root(prune_node(tree.root, gamma, lambda, eta)?))
}

fn prune_node(node: TreeNode, gamma: f64, lambda: f64, eta: f64) -> Result<TreeNode> {
    match node {
        leaf @ TreeNode::Leaf { .. } => Ok(leaf),
        TreeNode::Split {
            feature,
            threshold,
            stats,
            left,
            right,
            ..
        } => {
            let left = prune_node(*left, gamma, lambda, eta)?;
            let right = prune_node(*right, gamma, lambda, eta)?;
            let gain = split_gain(left.stats(), right.stats(), lambda, gamma)?;
            if left.is_leaf() && right.is_leaf() && gain <= 0.0 {
                return make_leaf(stats, lambda, eta);
            }
            Ok(TreeNode::Split {
                feature,
                threshold,
                gain,
                stats,
                left: Box::new(left),
                right: Box::new(right),
            })
        }
    }
}
