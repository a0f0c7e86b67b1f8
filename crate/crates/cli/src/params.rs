use std::path::Path;

use anyhow::{Context, Result};
use gbspam_core::booster::Hyperparams;

use crate::args::ParamArgs;

/// Defaults, overlaid with the params file, overlaid with per-field flags.
pub fn resolve(args: &ParamArgs) -> Result<Hyperparams> {
    let mut p = match &args.params {
        Some(path) => from_file(path)?,
        None => Hyperparams::default(),
    };
    if let Some(v) = args.eta {
        p.eta = v;
    }
    if let Some(v) = args.gamma {
        p.gamma = v;
    }
    if let Some(v) = args.lambda {
        p.lambda = v;
    }
    if let Some(v) = args.max_depth {
        p.max_depth = v;
    }
    if let Some(v) = args.colsample {
        p.colsample = v;
    }
    if let Some(v) = args.subsample {
        p.subsample = v;
    }
    if let Some(v) = args.min_child_weight {
        p.min_child_weight = v;
    }
    if let Some(v) = args.rounds {
        p.num_rounds = v;
    }
    if let Some(v) = args.early_stopping {
        p.early_stopping_rounds = (v > 0).then_some(v);
    }
    p.validate()?;
    Ok(p)
}

pub fn from_toml_str(text: &str) -> Result<Hyperparams> {
    let overrides: toml::Table = toml::from_str(text).context("params file")?;
    let mut table = toml::Table::try_from(Hyperparams::default())?;
    for (key, value) in overrides {
        if key == "early_stopping_rounds" && value.as_integer() == Some(0) {
            table.remove(&key);
        } else {
            table.insert(key, value);
        }
    }
    let p: Hyperparams = toml::Value::Table(table).try_into().context("params file")?;
    p.validate()?;
    Ok(p)
}

pub fn from_file(path: &Path) -> Result<Hyperparams> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    from_toml_str(&text).with_context(|| path.display().to_string())
}

/// TOML form accepted back by `--params`.
pub fn to_toml(p: &Hyperparams) -> Result<String> {
    let mut table = toml::Table::try_from(p)?;
    if p.early_stopping_rounds.is_none() {
        table.insert("early_stopping_rounds".into(), toml::Value::Integer(0));
    }
    Ok(toml::to_string(&table)?)
}
