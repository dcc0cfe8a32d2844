//! Command implementations behind the `framestylo` binary.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::classifier::train;
use crate::error::{Error, Result};
use crate::evaluation::{bootstrap, loocv, BootstrapConfig, BootstrapReport, EvaluationReport, LoocvConfig};
use crate::features::{crop_border, feature_names, feature_vector, Levels};
use crate::io::{
    load_gray, read_manifest, write_histogram, BootstrapReportFile, FeatureRow, FeatureTable,
    LoocvReportFile, ModelFile,
};
use crate::selection::{forward_select, normalize_columns, Label, SelectionConfig};
use crate::tight_frame::Boundary;

/// Resolves feature references given either as indices (`3`) or column names
/// (`tail_t16`).
pub fn parse_feature_list(spec: &str, levels: Levels) -> Result<Vec<usize>> {
    let names = feature_names(levels);
    spec.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|token| {
            if let Ok(i) = token.parse::<usize>() {
                if i < names.len() {
                    return Ok(i);
                }
                return Err(Error::dimension(format!(
                    "feature {i} out of range for {} features",
                    names.len()
                )));
            }
            names
                .iter()
                .position(|n| n == token)
                .ok_or_else(|| Error::invalid(format!("unknown feature `{token}`")))
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct ExtractOptions {
    pub manifest: PathBuf,
    pub out: PathBuf,
    pub crop_margin: usize,
    pub levels: Levels,
    pub boundary: Boundary,
    /// Skip paintings that fail to load or crop instead of aborting.
    pub permissive: bool,
}

/// Extraction outcome: the written table and the paintings that were skipped.
#[derive(Debug)]
pub struct ExtractSummary {
    pub table: FeatureTable,
    pub skipped: Vec<(String, Error)>,
}

pub fn extract(opts: &ExtractOptions) -> Result<ExtractSummary> {
    let manifest = read_manifest(&opts.manifest)?;
    let results: Vec<Result<Vec<f64>>> = manifest
        .entries
        .par_iter()
        .map(|entry| {
            let gray = load_gray(&entry.path)?;
            let cropped = crop_border(&gray, opts.crop_margin)?;
            Ok(feature_vector(&cropped, opts.levels, opts.boundary)?.into_values())
        })
        .collect();

    let mut rows = Vec::with_capacity(results.len());
    let mut skipped = Vec::new();
    for (entry, result) in manifest.entries.iter().zip(results) {
        match result {
            Ok(values) => rows.push(FeatureRow {
                id: entry.id.clone(),
                label: entry.label,
                values,
            }),
            Err(e) if opts.permissive => skipped.push((entry.id.clone(), e)),
            Err(e) => {
                return Err(match e {
                    Error::Dimension(msg) => Error::Dimension(format!("`{}`: {msg}", entry.id)),
                    Error::InvalidInput(msg) => {
                        Error::InvalidInput(format!("`{}`: {msg}", entry.id))
                    }
                    other => other,
                })
            }
        }
    }
    let table = FeatureTable {
        levels: opts.levels,
        rows,
    };
    table.write(&opts.out)?;
    Ok(ExtractSummary { table, skipped })
}

#[derive(Debug, Clone)]
pub struct LoocvOptions {
    pub features: PathBuf,
    pub out: PathBuf,
    pub k: usize,
    pub fixed_features: Option<String>,
    pub exclude_degenerate: bool,
}

fn loocv_config(
    levels: Levels,
    k: usize,
    fixed: Option<&str>,
    exclude_degenerate: bool,
) -> Result<LoocvConfig> {
    Ok(LoocvConfig {
        k,
        fixed_features: fixed.map(|s| parse_feature_list(s, levels)).transpose()?,
        exclude_degenerate,
    })
}

pub fn run_loocv(opts: &LoocvOptions) -> Result<EvaluationReport> {
    let table = FeatureTable::read(&opts.features)?;
    let config = loocv_config(
        table.levels,
        opts.k,
        opts.fixed_features.as_deref(),
        opts.exclude_degenerate,
    )?;
    let report = loocv(&table.to_training_set()?, &config)?;
    LoocvReportFile::new(table.levels, opts.k, config.fixed_features, &report)?.write(&opts.out)?;
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct TrainOptions {
    pub features: PathBuf,
    pub model: PathBuf,
    pub k: usize,
    pub fixed_features: Option<String>,
    pub exclude_degenerate: bool,
}

/// Selects features on the whole table (unless fixed), calibrates and saves.
pub fn run_train(opts: &TrainOptions) -> Result<ModelFile> {
    let table = FeatureTable::read(&opts.features)?;
    let data = table.to_training_set()?;
    let xn = normalize_columns(data.features())?;
    let subset = match opts.fixed_features.as_deref() {
        Some(spec) => parse_feature_list(spec, table.levels)?,
        None => {
            let cfg = SelectionConfig {
                k: opts.k,
                exclude_degenerate: opts.exclude_degenerate,
            };
            forward_select(&xn, data.labels(), cfg)?.indices
        }
    };
    let model = train(&xn, data.labels(), &subset)?;
    let file = ModelFile::new(table.levels, &model)?;
    file.write(&opts.model)?;
    Ok(file)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifiedRow {
    pub id: String,
    pub distance: f64,
    pub predicted: Label,
}

pub fn run_classify(features: &Path, model: &Path) -> Result<Vec<ClassifiedRow>> {
    let file = ModelFile::read(model)?;
    let model = file.to_model()?;
    let table = FeatureTable::read(features)?;
    if table.levels.dimension() != model.feature_dim {
        return Err(Error::dimension(format!(
            "model was trained on {}-level features ({} columns) but the table has {} columns",
            file.levels,
            model.feature_dim,
            table.levels.dimension()
        )));
    }
    table
        .rows
        .iter()
        .map(|row| {
            let p = model.classify_row(&row.values)?;
            Ok(ClassifiedRow {
                id: row.id.clone(),
                distance: p.distance,
                predicted: p.label,
            })
        })
        .collect()
}

/// Prediction lines as printed by `classify`.
pub fn format_predictions(rows: &[ClassifiedRow]) -> String {
    let mut out = String::from("id,distance,predicted\n");
    for r in rows {
        out.push_str(&format!("{},{:.16e},{}\n", r.id, r.distance, r.predicted));
    }
    out
}

#[derive(Debug, Clone)]
pub struct BootstrapOptions {
    pub features: PathBuf,
    pub out: PathBuf,
    pub histogram: PathBuf,
    pub datasets: usize,
    pub seed: u64,
    pub k: usize,
    pub fixed_features: Option<String>,
    pub exclude_degenerate: bool,
}

pub fn run_bootstrap(opts: &BootstrapOptions) -> Result<BootstrapReport> {
    let table = FeatureTable::read(&opts.features)?;
    let loocv = loocv_config(
        table.levels,
        opts.k,
        opts.fixed_features.as_deref(),
        opts.exclude_degenerate,
    )?;
    let fixed = loocv.fixed_features.clone();
    let config = BootstrapConfig {
        datasets: opts.datasets,
        seed: opts.seed,
        loocv,
    };
    let report = bootstrap(&table.to_training_set()?, &config)?;
    BootstrapReportFile::new(opts.k, fixed, report.clone()).write(&opts.out)?;
    write_histogram(&opts.histogram, &report.accuracies)?;
    Ok(report)
}
