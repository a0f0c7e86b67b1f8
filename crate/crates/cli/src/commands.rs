use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use gbspam_core::booster::{load_model, model_to_json, train, Hyperparams, Model, RoundLog};
use gbspam_core::dataset::{load_dataset, stratified_split};
use gbspam_core::metrics::{evaluate_scores, Curve, MetricsReport};
use gbspam_core::resampling::{resample, ResampleMethod, ResampleSpec};
use gbspam_core::tuning::{grid_search, ParamGrid, ValidationConfig, ValidationStrategy};
use gbspam_core::{Dataset, SplitSpec};
use serde::{Deserialize, Serialize};

use crate::args::{
    EvaluateArgs, GridSearchArgs, Partition, ReproduceArgs, ResampleCmdArgs, TrainArgs, Validation,
};
use crate::manifest::{sha256_file, tool_version, ClassCounts, DatasetInfo, Manifest, ResampleInfo, SplitInfo};
use crate::params;
use crate::report::{self, Rates};

/// Grid used when `grid-search` gets no `--grid`.
pub const DEFAULT_GRID: &str = include_str!("../grids/default.toml");

/// Minimum mean-accuracy gain (percentage points) that counts as a resampler
/// improving on the unresampled model.
pub const RESAMPLING_IMPROVEMENT_PP: f64 = 0.5;

/// A loaded dataset file and its content hash.
pub struct Source {
    pub path: PathBuf,
    pub sha256: String,
    pub dataset: Dataset,
}

impl Source {
    pub fn load(path: &Path) -> Result<Self> {
        let dataset = load_dataset(path, None)?;
        ensure!(!dataset.is_empty(), "{}: no data rows", path.display());
        Ok(Self {
            path: path.to_path_buf(),
            sha256: sha256_file(path)?,
            dataset,
        })
    }
}

/// One split-resample-train run.
pub struct Fitted {
    pub manifest: Manifest,
    pub model: Model,
    pub train: Dataset,
    pub test: Dataset,
}

pub fn fit(
    src: &Source,
    split: SplitSpec,
    params: &Hyperparams,
    resampling: Option<ResampleSpec>,
) -> Result<Fitted> {
    let (train_part, test) = stratified_split(&src.dataset, &split)?;
    let (fit_rows, resample_info) = match resampling {
        Some(spec) => {
            let out = resample(&train_part, &spec)
                .with_context(|| format!("resampling with {}", spec.method))?;
            let info = ResampleInfo {
                spec,
                resampled_train: ClassCounts::of(&out),
            };
            (out, Some(info))
        }
        None => (train_part.clone(), None),
    };
    let model = train(&fit_rows, params, split.seed())?;
    let manifest = Manifest {
        tool_version: tool_version(),
        dataset: DatasetInfo {
            path: src.path.display().to_string(),
            sha256: src.sha256.clone(),
            rows: src.dataset.n_rows(),
            feature_count: src.dataset.feature_count(),
        },
        split: SplitInfo {
            seed: split.seed(),
            test_fraction: split.test_fraction(),
            train: ClassCounts::of(&train_part),
            test: ClassCounts::of(&test),
        },
        resample: resample_info,
        train_seed: split.seed(),
        hyperparams: params.clone(),
    };
    Ok(Fitted {
        manifest,
        model,
        train: train_part,
        test,
    })
}

/// Metrics written by `evaluate` (and per seed by `reproduce`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsDocument {
    pub dataset_sha256: String,
    pub partition: String,
    pub rows: usize,
    pub threshold: f64,
    pub metrics: MetricsReport,
    /// The same rates in percent, rounded to two decimals.
    pub percent: Rates,
}

pub struct Scored {
    pub document: MetricsDocument,
    pub roc: Curve,
    pub pr: Curve,
}

pub fn score(model: &Model, ds: &Dataset, partition: &str, sha256: &str, threshold: f64) -> Result<Scored> {
    ensure!(!ds.is_empty(), "{partition} partition has no rows to evaluate");
    let proba = model.predict_proba(ds.view())?;
    let (metrics, roc, pr) = evaluate_scores(ds.labels(), &proba, threshold)?;
    let percent = Rates::of(&metrics).percent();
    Ok(Scored {
        document: MetricsDocument {
            dataset_sha256: sha256.to_string(),
            partition: partition.to_string(),
            rows: ds.n_rows(),
            threshold,
            metrics,
            percent,
        },
        roc,
        pr,
    })
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| anyhow::anyhow!("csv: {e}"))
}

fn write_curve(path: &Path, curve: &Curve, x: &str, y: &str) -> Result<()> {
    let rows = curve
        .points
        .iter()
        .map(|p| vec![p.x.to_string(), p.y.to_string(), p.threshold.to_string()]);
    fs::write(path, csv_bytes(&[x, y, "threshold"], rows)?)
        .with_context(|| format!("writing {}", path.display()))
}

fn write_training_log(path: &Path, log: &[RoundLog]) -> Result<()> {
    let rows = log.iter().map(|r| {
        vec![
            r.round.to_string(),
            r.train_error.to_string(),
            r.train_loss.to_string(),
            r.valid_error.map_or_else(String::new, |v| v.to_string()),
        ]
    });
    let header = ["round", "train_error", "train_loss", "valid_error"];
    fs::write(path, csv_bytes(&header, rows)?).with_context(|| format!("writing {}", path.display()))
}

fn write_model(dir: &Path, fitted: &Fitted) -> Result<()> {
    write_text(&dir.join("model.json"), &model_to_json(&fitted.model)?)?;
    write_json(&dir.join("manifest.json"), &fitted.manifest)?;
    write_training_log(&dir.join("training_log.csv"), fitted.model.training_log())
}

fn write_scored(dir: &Path, stem: &str, scored: &Scored) -> Result<()> {
    write_json(&dir.join(format!("{stem}.json")), &scored.document)?;
    write_curve(&dir.join(format!("{stem}_roc.csv")), &scored.roc, "fpr", "tpr")?;
    write_curve(&dir.join(format!("{stem}_pr.csv")), &scored.pr, "recall", "precision")
}

fn resample_spec(method: Option<ResampleMethod>, k_neighbors: usize, seed: u64) -> Option<ResampleSpec> {
    method.map(|method| ResampleSpec {
        method,
        k_neighbors,
        seed,
    })
}

pub struct TrainOutcome {
    pub fitted: Fitted,
    pub out: PathBuf,
}

pub fn cmd_train(args: &TrainArgs) -> Result<TrainOutcome> {
    let params = params::resolve(&args.params)?;
    let src = Source::load(&args.data.data)?;
    let split = SplitSpec::new(args.data.test_fraction, args.data.seed)?;
    let spec = resample_spec(args.resample.resample.method(), args.resample.k_neighbors, args.data.seed);
    let fitted = fit(&src, split, &params, spec)?;
    create_dir(&args.out)?;
    write_model(&args.out, &fitted)?;
    Ok(TrainOutcome {
        fitted,
        out: args.out.clone(),
    })
}

pub struct EvaluateOutcome {
    pub scored: Scored,
    pub text: String,
}

pub fn metrics_text(doc: &MetricsDocument) -> String {
    let label = doc.partition[..1].to_uppercase() + &doc.partition[1..];
    format!(
        "{}\n{}",
        report::rates_table("Data", &[(label, Rates::of(&doc.metrics))]),
        report::confusion_table("Confusion matrix", &doc.metrics.confusion)
    )
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<EvaluateOutcome> {
    let model = load_model(&args.model)?;
    let (src, rows, partition) = match &args.manifest {
        Some(path) => {
            let manifest: Manifest = read_json(path)?;
            let data = args.data.clone().unwrap_or_else(|| PathBuf::from(&manifest.dataset.path));
            let src = Source::load(&data)?;
            ensure!(
                src.sha256 == manifest.dataset.sha256,
                "{} does not match the manifest's dataset hash",
                data.display()
            );
            let split = SplitSpec::new(manifest.split.test_fraction, manifest.split.seed)?;
            let (train_part, test) = stratified_split(&src.dataset, &split)?;
            let partition = args.split.unwrap_or(Partition::Test);
            let rows = match partition {
                Partition::Train => train_part,
                Partition::Test => test,
                Partition::All => src.dataset.clone(),
            };
            (src, rows, partition)
        }
        None => {
            let Some(data) = &args.data else {
                bail!("evaluate needs --data or --manifest");
            };
            let partition = args.split.unwrap_or(Partition::All);
            ensure!(
                partition == Partition::All,
                "--split {} needs --manifest to replay the split",
                partition.name()
            );
            let src = Source::load(data)?;
            let rows = src.dataset.clone();
            (src, rows, partition)
        }
    };
    ensure!(
        rows.feature_count() == model.feature_count(),
        "model expects {} features, dataset has {}",
        model.feature_count(),
        rows.feature_count()
    );
    let scored = score(&model, &rows, partition.name(), &src.sha256, args.threshold)?;
    create_dir(&args.out)?;
    write_scored(&args.out, "metrics", &scored)?;
    let text = metrics_text(&scored.document);
    write_text(&args.out.join("metrics.txt"), &text)?;
    Ok(EvaluateOutcome { scored, text })
}

/// Summary written next to the trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSummary {
    pub combinations: usize,
    pub best_index: usize,
    pub best_validation_error: f64,
    pub validation: ValidationConfig,
    pub best: Hyperparams,
}

pub struct GridSearchOutcome {
    pub summary: SearchSummary,
    pub trace_rows: usize,
    pub fitted: Fitted,
}

pub fn cmd_grid_search(args: &GridSearchArgs) -> Result<GridSearchOutcome> {
    let base = params::resolve(&args.params)?;
    let grid = match &args.grid {
        Some(path) => ParamGrid::from_toml_file(path)?,
        None => ParamGrid::from_toml_str(DEFAULT_GRID)?,
    };
    ensure!(!grid.is_empty(), "grid has no hyperparameters");
    let strategy = match args.validation {
        Validation::Holdout => ValidationStrategy::Holdout {
            fraction: args.holdout_fraction,
        },
        Validation::Kfold => ValidationStrategy::KFold { k: args.folds },
    };
    let val = ValidationConfig {
        strategy,
        seed: args.data.seed,
    };
    let src = Source::load(&args.data.data)?;
    let split = SplitSpec::new(args.data.test_fraction, args.data.seed)?;
    // only the training partition reaches the search
    let (train_part, _) = stratified_split(&src.dataset, &split)?;
    let outcome = grid_search(&train_part, &grid, &base, &val, args.data.seed)?;
    let best = outcome.trace.records[outcome.best_index].clone();

    let fitted = fit(&src, split, &outcome.best, None)?;
    create_dir(&args.out)?;
    write_text(&args.out.join("trace.csv"), &outcome.trace.to_csv()?)?;
    write_text(&args.out.join("best_params.toml"), &params::to_toml(&outcome.best)?)?;
    let summary = SearchSummary {
        combinations: outcome.trace.records.len(),
        best_index: outcome.best_index,
        best_validation_error: best.validation_error,
        validation: val,
        best: outcome.best.clone(),
    };
    write_json(&args.out.join("search.json"), &summary)?;
    write_model(&args.out, &fitted)?;
    Ok(GridSearchOutcome {
        trace_rows: outcome.trace.records.len(),
        summary,
        fitted,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    pub trees: usize,
    pub rounds_run: usize,
    pub train_counts: ClassCounts,
    pub test_counts: ClassCounts,
    pub train: MetricsReport,
    pub test: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResamplingRow {
    /// `none` for the unresampled reference.
    pub method: String,
    pub per_seed_accuracy: Vec<f64>,
    pub mean_accuracy: f64,
    /// Mean accuracy minus the reference, in percentage points.
    pub delta_pp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResamplingStudy {
    pub k_neighbors: usize,
    pub improvement_threshold_pp: f64,
    pub rows: Vec<ResamplingRow>,
    /// Methods whose mean accuracy beats the reference by more than the threshold.
    pub improving_methods: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproduceSummary {
    pub tool_version: String,
    pub dataset_sha256: String,
    pub test_fraction: f64,
    pub hyperparams: Hyperparams,
    pub seeds: Vec<SeedResult>,
    pub test_mean: Rates,
    pub test_sd: Rates,
    pub train_accuracy_mean: f64,
    pub resampling: Option<ResamplingStudy>,
}

pub fn cmd_reproduce(args: &ReproduceArgs) -> Result<ReproduceSummary> {
    ensure!(!args.seeds.is_empty(), "no seeds given");
    let params = params::resolve(&args.params)?;
    let src = Source::load(&args.data)?;
    create_dir(&args.out)?;

    let mut seeds = Vec::with_capacity(args.seeds.len());
    let mut cms = Vec::new();
    for &seed in &args.seeds {
        let split = SplitSpec::new(args.test_fraction, seed)?;
        let fitted = fit(&src, split, &params, None).with_context(|| format!("seed {seed}"))?;
        let train_scored = score(&fitted.model, &fitted.train, "train", &src.sha256, 0.5)?;
        let test_scored = score(&fitted.model, &fitted.test, "test", &src.sha256, 0.5)?;
        let dir = args.out.join(format!("seed-{seed}"));
        create_dir(&dir)?;
        write_model(&dir, &fitted)?;
        write_scored(&dir, "train_metrics", &train_scored)?;
        write_scored(&dir, "test_metrics", &test_scored)?;
        cms.push((
            seed,
            train_scored.document.metrics.confusion,
            test_scored.document.metrics.confusion,
        ));
        seeds.push(SeedResult {
            seed,
            trees: fitted.model.trees().len(),
            rounds_run: fitted.model.training_log().len(),
            train_counts: fitted.manifest.split.train,
            test_counts: fitted.manifest.split.test,
            train: train_scored.document.metrics,
            test: test_scored.document.metrics,
        });
    }
    let test_rates: Vec<Rates> = seeds.iter().map(|s| Rates::of(&s.test)).collect();
    let (test_mean, test_sd) = report::mean_sd(&test_rates);
    let train_acc: Vec<f64> = seeds.iter().filter_map(|s| s.train.scalars.accuracy).collect();
    let train_accuracy_mean = report::mean_and_sd(&train_acc).0.unwrap_or(f64::NAN);

    let resampling = if args.skip_resampling {
        None
    } else {
        Some(resampling_study(&src, args, &params, &seeds)?)
    };

    let summary = ReproduceSummary {
        tool_version: tool_version(),
        dataset_sha256: src.sha256.clone(),
        test_fraction: args.test_fraction,
        hyperparams: params,
        seeds,
        test_mean,
        test_sd,
        train_accuracy_mean,
        resampling,
    };
    write_json(&args.out.join("summary.json"), &summary)?;
    write_text(&args.out.join("report.txt"), &reproduce_text(&summary, &cms))?;
    Ok(summary)
}

fn resampling_study(
    src: &Source,
    args: &ReproduceArgs,
    params: &Hyperparams,
    reference: &[SeedResult],
) -> Result<ResamplingStudy> {
    let ref_acc: Vec<f64> = reference.iter().map(|s| s.test.scalars.accuracy.unwrap_or(f64::NAN)).collect();
    let ref_mean = report::mean_and_sd(&ref_acc).0.unwrap_or(f64::NAN);
    let mut rows = vec![ResamplingRow {
        method: "none".into(),
        per_seed_accuracy: ref_acc,
        mean_accuracy: ref_mean,
        delta_pp: 0.0,
    }];
    for method in ResampleMethod::ALL {
        let mut acc = Vec::with_capacity(args.seeds.len());
        for &seed in &args.seeds {
            let split = SplitSpec::new(args.test_fraction, seed)?;
            let spec = resample_spec(Some(method), args.k_neighbors, seed);
            let fitted = fit(src, split, params, spec)
                .with_context(|| format!("resampling study, {method}, seed {seed}"))?;
            let scored = score(&fitted.model, &fitted.test, "test", &src.sha256, 0.5)?;
            acc.push(scored.document.metrics.scalars.accuracy.unwrap_or(f64::NAN));
        }
        let mean = report::mean_and_sd(&acc).0.unwrap_or(f64::NAN);
        rows.push(ResamplingRow {
            method: method.name().into(),
            per_seed_accuracy: acc,
            mean_accuracy: mean,
            delta_pp: 100.0 * (mean - ref_mean),
        });
    }
    let improving_methods = rows
        .iter()
        .filter(|r| r.delta_pp > RESAMPLING_IMPROVEMENT_PP)
        .map(|r| r.method.clone())
        .collect();
    Ok(ResamplingStudy {
        k_neighbors: args.k_neighbors,
        improvement_threshold_pp: RESAMPLING_IMPROVEMENT_PP,
        rows,
        improving_methods,
    })
}

type SeedConfusions = (u64, gbspam_core::ConfusionMatrix, gbspam_core::ConfusionMatrix);

pub fn reproduce_text(s: &ReproduceSummary, cms: &[SeedConfusions]) -> String {
    let mut out = String::new();
    let n = s.seeds.len();
    out.push_str(&format!(
        "Test set, {n} seeds, test fraction {} (percent)\n",
        s.test_fraction
    ));
    let mut rows: Vec<(String, Rates)> = s
        .seeds
        .iter()
        .map(|r| (format!("seed {}", r.seed), Rates::of(&r.test)))
        .collect();
    rows.push(("mean".into(), s.test_mean));
    rows.push(("sd".into(), s.test_sd));
    out.push_str(&report::rates_table("Data", &rows));

    out.push_str("\nTraining set (percent)\n");
    let train_rows: Vec<(String, Rates)> = s
        .seeds
        .iter()
        .map(|r| (format!("seed {}", r.seed), Rates::of(&r.train)))
        .collect();
    out.push_str(&report::rates_table("Data", &train_rows));

    for (seed, train_cm, test_cm) in cms {
        out.push('\n');
        out.push_str(&report::confusion_table(&format!("Seed {seed}, training set"), train_cm));
        out.push_str(&report::confusion_table(&format!("Seed {seed}, test set"), test_cm));
    }

    out.push_str("\nPublished results on the same dataset (reported, not recomputed; percent)\n");
    out.push_str(&report::baseline_table(&s.test_mean, n));

    if let Some(study) = &s.resampling {
        out.push_str(&format!(
            "\nResampling study: training partition rebalanced, test partition untouched (k = {})\n",
            study.k_neighbors
        ));
        let body: Vec<Vec<String>> = study
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.method.clone(),
                    report::pct_cell(Some(r.mean_accuracy)),
                    format!("{:+.2}", r.delta_pp),
                ]
            })
            .collect();
        out.push_str(&report::table(&["Method", "Mean accuracy", "Delta (pp)"], &body));
        if study.improving_methods.is_empty() {
            out.push_str(&format!(
                "No resampler raised mean test accuracy by more than {} pp.\n",
                study.improvement_threshold_pp
            ));
        } else {
            out.push_str(&format!(
                "Raised mean test accuracy by more than {} pp: {}\n",
                study.improvement_threshold_pp,
                study.improving_methods.join(", ")
            ));
        }
    }
    out
}

pub struct ResampleOutcome {
    pub before: ClassCounts,
    pub after: ClassCounts,
}

pub fn cmd_resample(args: &ResampleCmdArgs) -> Result<ResampleOutcome> {
    let ds = load_dataset(&args.data, None)?;
    let spec = ResampleSpec {
        method: args.resample,
        k_neighbors: args.k_neighbors,
        seed: args.seed,
    };
    let out = resample(&ds, &spec)?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for i in 0..out.n_rows() {
        let mut record: Vec<String> = out.row(i).iter().map(f64::to_string).collect();
        record.push(out.labels()[i].to_string());
        w.write_record(&record)?;
    }
    let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("csv: {e}"))?;
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    fs::write(&args.out, bytes).with_context(|| format!("writing {}", args.out.display()))?;
    Ok(ResampleOutcome {
        before: ClassCounts::of(&ds),
        after: ClassCounts::of(&out),
    })
}
