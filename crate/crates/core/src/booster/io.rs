//! Versioned JSON model documents.
//!
//! Floats are written in shortest round-trip form, so a saved model reloads
//! bit-for-bit and predicts identically.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::{Model, RoundLog};
use super::objective::logit;
use super::params::Hyperparams;
use super::tree::{Tree, TreeNode};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    format_version: u32,
    hyperparams: Hyperparams,
    base_raw: f64,
    feature_count: usize,
    training_log: Vec<RoundLog>,
    trees: Vec<Tree>,
}

pub fn model_to_json(model: &Model) -> Result<String> {
    let doc = ModelDocument {
        format_version: FORMAT_VERSION,
        hyperparams: model.hyperparams.clone(),
        base_raw: model.base_raw,
        feature_count: model.feature_count,
        training_log: model.training_log.clone(),
        trees: model.trees.clone(),
    };
    let mut s = serde_json::to_string_pretty(&doc)
        .map_err(|e| Error::ModelFormat(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn model_from_json(text: &str) -> Result<Model> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::ModelFormat(format!("parse error: {e}")))?;
    match value.get("format_version").and_then(serde_json::Value::as_u64) {
        Some(v) if v == u64::from(FORMAT_VERSION) => {}
        Some(v) => {
            return Err(Error::ModelFormat(format!(
                "unsupported format_version {v} (expected {FORMAT_VERSION})"
            )))
        }
        None => return Err(Error::ModelFormat("missing format_version".into())),
    }
    let doc: ModelDocument =
        serde_json::from_value(value).map_err(|e| Error::ModelFormat(format!("schema: {e}")))?;
    validate(&doc)?;
    Ok(Model {
        trees: doc.trees,
        hyperparams: doc.hyperparams,
        base_raw: doc.base_raw,
        feature_count: doc.feature_count,
        training_log: doc.training_log,
    })
}

fn validate(doc: &ModelDocument) -> Result<()> {
    doc.hyperparams.validate()?;
    if doc.feature_count == 0 {
        return Err(Error::ModelFormat("feature_count must be positive".into()));
    }
    if doc.base_raw.to_bits() != logit(doc.hyperparams.base_score).to_bits() {
        return Err(Error::ModelFormat("base_raw does not match base_score".into()));
    }
    if doc.trees.len() > doc.hyperparams.num_rounds {
        return Err(Error::ModelFormat(format!(
            "{} trees exceed num_rounds {}",
            doc.trees.len(),
            doc.hyperparams.num_rounds
        )));
    }
    for (k, tree) in doc.trees.iter().enumerate() {
        let mut bad = None;
        tree.root.walk(&mut |node| match node {
            TreeNode::Split {
                feature, threshold, ..
            } if *feature >= doc.feature_count || threshold.is_nan() => {
                bad.get_or_insert(format!("tree {k}: bad split on feature {feature}"));
            }
            TreeNode::Leaf { weight, .. } if !weight.is_finite() => {
                bad.get_or_insert(format!("tree {k}: non-finite leaf weight"));
            }
            _ => {}
        });
        if let Some(msg) = bad {
            return Err(Error::ModelFormat(msg));
        }
        if tree.leaf_count != tree.root.leaf_count() || tree.depth != tree.root.depth() {
            return Err(Error::ModelFormat(format!(
                "tree {k}: recorded leaf_count/depth disagree with its nodes"
            )));
        }
    }
    Ok(())
}

pub fn save_model(model: &Model, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model_to_json(model)?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::booster::model::train;
    use crate::dataset::Dataset;

    fn small_model() -> (Model, Dataset) {
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![(i as f64 * 0.37).sin(), (i % 7) as f64 / 3.0])
            .collect();
        let labels = (0..30).map(|i| u8::from((i * 7) % 11 > 4)).collect();
        let ds = Dataset::from_rows(&rows, labels).unwrap();
        let params = Hyperparams {
            max_depth: 4,
            num_rounds: 8,
            early_stopping_rounds: None,
            ..Default::default()
        };
        (train(&ds, &params, 5).unwrap(), ds)
    }

    #[test]
    fn round_trip_preserves_predictions() {
        let (m, ds) = small_model();
        let back = model_from_json(&model_to_json(&m).unwrap()).unwrap();
        assert_eq!(back, m);
        let a = m.predict_raw(ds.view()).unwrap();
        let b = back.predict_raw(ds.view()).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn unknown_version_is_rejected() {
        let (m, _) = small_model();
        let text = model_to_json(&m)
            .unwrap()
            .replacen("\"format_version\": 1", "\"format_version\": 99", 1);
        let err = model_from_json(&text).unwrap_err();
        assert!(err.to_string().contains("unsupported format_version 99"), "{err}");
    }

    #[test]
    fn truncated_document_fails() {
        let (m, _) = small_model();
        let text = model_to_json(&m).unwrap();
        let err = model_from_json(&text[..text.len() / 2]).unwrap_err();
        assert!(err.to_string().contains("parse error"), "{err}");
    }

    #[test]
    fn schema_violation_fails() {
        let (m, _) = small_model();
        let text = model_to_json(&m).unwrap().replacen("\"feature\": ", "\"feature\": 1000", 1);
        assert!(model_from_json(&text).is_err());
        let text = model_to_json(&m).unwrap().replacen("\"eta\"", "\"etta\"", 1);
        assert!(model_from_json(&text).is_err());
    }

    #[test]
    fn save_and_load_file() {
        let (m, _) = small_model();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&m, &path).unwrap();
        assert_eq!(load_model(&path).unwrap(), m);
    }
}
