//! Command-line pipeline around `gbspam-core`: train, evaluate, grid search,
//! multi-seed reproduction and dataset resampling, each writing its artifacts
//! to an output directory.

pub mod args;
pub mod commands;
pub mod manifest;
pub mod params;
pub mod report;

use anyhow::{Context, Result};

pub use args::{Cli, Command};
pub use commands::{cmd_evaluate, cmd_grid_search, cmd_reproduce, cmd_resample, cmd_train};

/// Runs one parsed invocation, printing a short summary to stdout.
pub fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Train(a) => {
            let out = cmd_train(&a)?;
            let m = &out.fitted.manifest;
            println!(
                "trained {} trees on {} rows (test partition {} rows); wrote {}",
                out.fitted.model.trees().len(),
                m.resample.as_ref().map_or(m.split.train.total(), |r| r.resampled_train.total()),
                m.split.test.total(),
                out.out.display()
            );
        }
        Command::Evaluate(a) => {
            let out = cmd_evaluate(&a)?;
            print!("{}", out.text);
        }
        Command::GridSearch(a) => {
            let out = cmd_grid_search(&a)?;
            println!(
                "best of {} combinations: #{} with validation error {:.4}; refit with {} trees; wrote {}",
                out.trace_rows,
                out.summary.best_index + 1,
                out.summary.best_validation_error,
                out.fitted.model.trees().len(),
                a.out.display()
            );
        }
        Command::Reproduce(a) => {
            let summary = cmd_reproduce(&a)?;
            let text = std::fs::read_to_string(a.out.join("report.txt"))?;
            print!("{text}");
            println!("wrote {} seed(s) to {}", summary.seeds.len(), a.out.display());
        }
        Command::Resample(a) => {
            let out = cmd_resample(&a)?;
            println!(
                "{}: ham {} -> {}, spam {} -> {}; wrote {}",
                a.resample,
                out.before.ham,
                out.after.ham,
                out.before.spam,
                out.after.spam,
                a.out.display()
            );
        }
    }
    Ok(())
}
