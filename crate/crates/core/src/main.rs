use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use framestylo::cli::{self, BootstrapOptions, ExtractOptions, LoocvOptions, TrainOptions};
use framestylo::features::{Levels, DEFAULT_CROP_MARGIN};
use framestylo::parallel::{threads_from_env, with_threads};
use framestylo::tight_frame::Boundary;
use framestylo::{Error, Result};

/// Authenticate paintings from tight-frame coefficient statistics.
///
/// Set FRAMESTYLO_THREADS to cap the number of worker threads; outputs do not
/// depend on it.
#[derive(Parser)]
#[command(name = "framestylo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract feature vectors for every painting in a manifest.
    Extract {
        /// CSV manifest with header `id,path,label`.
        #[arg(long)]
        manifest: PathBuf,
        /// Feature table to write.
        #[arg(long)]
        out: PathBuf,
        /// Pixels cropped from each side before analysis.
        #[arg(long, default_value_t = DEFAULT_CROP_MARGIN)]
        crop: usize,
        /// Transform depth: 1 (54 features) or 2 (105 features).
        #[arg(long, default_value_t = 1)]
        levels: u8,
        /// Border extension: reflect or circular.
        #[arg(long, default_value = "reflect")]
        boundary: Boundary,
        /// Skip paintings that cannot be decoded or cropped.
        #[arg(long)]
        permissive: bool,
    },
    /// Leave-one-out cross-validation over a feature table.
    Loocv {
        #[arg(long)]
        features: PathBuf,
        /// JSON report to write.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        selection: SelectionArgs,
    },
    /// Train a classifier on a whole feature table.
    Train {
        #[arg(long)]
        features: PathBuf,
        /// Model JSON to write.
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        selection: SelectionArgs,
    },
    /// Classify every row of a feature table with a saved model.
    Classify {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Write predictions here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bootstrap the LOOCV accuracy over class-preserving resamples.
    Bootstrap {
        #[arg(long)]
        features: PathBuf,
        /// JSON report to write.
        #[arg(long)]
        out: PathBuf,
        /// Accuracy histogram (CSV, 0.01-wide bins) to write.
        #[arg(long)]
        hist: PathBuf,
        /// Number of resampled datasets.
        #[arg(short = 'B', long = "datasets", default_value_t = 200)]
        datasets: usize,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        selection: SelectionArgs,
    },
}

#[derive(clap::Args)]
struct SelectionArgs {
    /// Number of features selected greedily per fit.
    #[arg(short, long, default_value_t = 5)]
    k: usize,
    /// Comma-separated feature indices or names to use instead of selection.
    #[arg(long)]
    fixed: Option<String>,
    /// Never select constant columns.
    #[arg(long)]
    exclude_degenerate: bool,
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Extract {
            manifest,
            out,
            crop,
            levels,
            boundary,
            permissive,
        } => {
            let summary = cli::extract(&ExtractOptions {
                manifest,
                out,
                crop_margin: crop,
                levels: Levels::from_count(levels)?,
                boundary,
                permissive,
            })?;
            for (id, err) in &summary.skipped {
                eprintln!("skipped `{id}`: {err}");
            }
            eprintln!("extracted {} paintings", summary.table.rows.len());
        }
        Command::Loocv {
            features,
            out,
            selection,
        } => {
            let report = cli::run_loocv(&LoocvOptions {
                features,
                out,
                k: selection.k,
                fixed_features: selection.fixed,
                exclude_degenerate: selection.exclude_degenerate,
            })?;
            let m = report.metrics;
            eprintln!(
                "TP {} TN {} TPR {:.4} TNR {:.4} accuracy {:.4}",
                m.tp, m.tn, m.tpr, m.tnr, m.accuracy
            );
        }
        Command::Train {
            features,
            model,
            selection,
        } => {
            let file = cli::run_train(&TrainOptions {
                features,
                model,
                k: selection.k,
                fixed_features: selection.fixed,
                exclude_degenerate: selection.exclude_degenerate,
            })?;
            eprintln!(
                "features {:?} threshold {:.6} training accuracy {:.4}",
                file.feature_names, file.threshold, file.training_accuracy
            );
        }
        Command::Classify {
            features,
            model,
            out,
        } => {
            let text = cli::format_predictions(&cli::run_classify(&features, &model)?);
            match out {
                Some(path) => std::fs::write(&path, text).map_err(|e| Error::Io { path, source: e })?,
                None => {
                    let mut stdout = std::io::stdout().lock();
                    stdout
                        .write_all(text.as_bytes())
                        .map_err(|e| Error::Io { path: "<stdout>".into(), source: e })?;
                }
            }
        }
        Command::Bootstrap {
            features,
            out,
            hist,
            datasets,
            seed,
            selection,
        } => {
            let report = cli::run_bootstrap(&BootstrapOptions {
                features,
                out,
                histogram: hist,
                datasets,
                seed,
                k: selection.k,
                fixed_features: selection.fixed,
                exclude_degenerate: selection.exclude_degenerate,
            })?;
            eprintln!(
                "mean {:.4} median {:.4} std {:.4} CI ({:.4}, {:.4})",
                report.mean, report.median, report.std, report.ci_low, report.ci_high
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = threads_from_env().and_then(|threads| with_threads(threads, || run(cli.command))?);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
