//! On-disk formats: the painting manifest, the feature table, model and
//! report JSON, and accuracy histograms.
//!
//! * Manifest: CSV with header `id,path,label`; labels are `vG` or `nvG`;
//!   relative paths resolve against the manifest's directory.
//! * Feature table: CSV with header `id,label,<feature names>`, values written
//!   with 17 significant digits so they read back bit-exactly.
//! * Model, LOOCV and bootstrap reports: pretty-printed JSON carrying a
//!   `schema_version`.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use image::DynamicImage;
use ndarray::{Array2, Array3};
use serde::{Deserialize, Serialize};

use crate::classifier::TrainedClassifier;
use crate::error::{Error, Result};
use crate::evaluation::{BootstrapReport, EvaluationReport, Metrics, PaintingResult};
use crate::features::{feature_name, feature_names, grayscale, Levels};
use crate::selection::{Label, TrainingSet};
use crate::tight_frame::GrayImage;

pub const SCHEMA_VERSION: u32 = 1;

/// Width of one histogram bin.
pub const HISTOGRAM_BIN_WIDTH: f64 = 0.01;
const HISTOGRAM_BINS: usize = 100;

fn parse_error(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn csv_error(path: &Path, err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line());
    match err.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        kind => parse_error(path, line, format!("{kind:?}")),
    }
}

fn open_csv(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub id: String,
    pub path: PathBuf,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let mut reader = open_csv(path)?;
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().collect::<Vec<_>>() != ["id", "path", "label"] {
        return Err(parse_error(path, 1, "manifest header must be `id,path,label`"));
    }
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let id = record[0].to_string();
        if id.is_empty() {
            return Err(parse_error(path, line, "empty id"));
        }
        if record[1].is_empty() {
            return Err(parse_error(path, line, format!("empty path for `{id}`")));
        }
        let label: Label = record[2]
            .parse()
            .map_err(|e: Error| parse_error(path, line, e.to_string()))?;
        if !seen.insert(id.clone()) {
            return Err(Error::invalid(format!(
                "{}:{line}: duplicate id `{id}`",
                path.display()
            )));
        }
        entries.push(ManifestEntry {
            id,
            path: base.join(&record[1]),
            label,
        });
    }
    Ok(Manifest { entries })
}

/// Decodes an image file into an `m × n × 3` array of 0–255 intensities.
pub fn load_rgb(path: &Path) -> Result<Array3<f64>> {
    let img = image::open(path).map_err(|e| match e {
        image::ImageError::IoError(source) => Error::io(path, source),
        source => Error::Image {
            path: path.to_path_buf(),
            source,
        },
    })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data: Vec<f64> = match img {
        DynamicImage::ImageLuma8(_)
        | DynamicImage::ImageLumaA8(_)
        | DynamicImage::ImageRgb8(_)
        | DynamicImage::ImageRgba8(_) => img.to_rgb8().into_raw().into_iter().map(f64::from).collect(),
        _ => img
            .to_rgb32f()
            .into_raw()
            .into_iter()
            .map(|v| f64::from(v) * 255.0)
            .collect(),
    };
    Ok(Array3::from_shape_vec((h, w, 3), data).expect("buffer matches image size"))
}

pub fn load_gray(path: &Path) -> Result<GrayImage> {
    grayscale(load_rgb(path)?.view())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub id: String,
    pub label: Label,
    pub values: Vec<f64>,
}

/// Per-painting feature vectors with their column names.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub levels: Levels,
    pub rows: Vec<FeatureRow>,
}

impl FeatureTable {
    pub fn names(&self) -> Vec<String> {
        feature_names(self.levels)
    }

    pub fn to_training_set(&self) -> Result<TrainingSet> {
        let dim = self.levels.dimension();
        let n = self.rows.len();
        let flat: Vec<f64> = self.rows.iter().flat_map(|r| r.values.iter().copied()).collect();
        let x = Array2::from_shape_vec((n, dim), flat)
            .map_err(|_| Error::dimension("feature rows differ in length"))?;
        TrainingSet::new(
            x,
            self.rows.iter().map(|r| r.label).collect(),
            self.rows.iter().map(|r| r.id.clone()).collect(),
        )
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        out.push_str("id,label");
        for name in self.names() {
            out.push(',');
            out.push_str(&name);
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.id);
            out.push(',');
            out.push_str(row.label.as_str());
            for v in &row.values {
                out.push(',');
                out.push_str(&format!("{v:.16e}"));
            }
            out.push('\n');
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<FeatureTable> {
        let mut reader = open_csv(path)?;
        let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
        if header.len() < 2 || &header[0] != "id" || &header[1] != "label" {
            return Err(parse_error(path, 1, "header must start with `id,label`"));
        }
        let levels = Levels::from_dimension(header.len() - 2)
            .map_err(|e| parse_error(path, 1, e.to_string()))?;
        for (i, name) in header.iter().skip(2).enumerate() {
            let expected = feature_name(levels, i)?;
            if name != expected {
                return Err(parse_error(
                    path,
                    1,
                    format!("column {} is `{name}`, expected `{expected}`", i + 3),
                ));
            }
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| csv_error(path, e))?;
            let line = record.position().map_or(0, |p| p.line());
            let label = record[1]
                .parse()
                .map_err(|e: Error| parse_error(path, line, e.to_string()))?;
            let values = record
                .iter()
                .skip(2)
                .enumerate()
                .map(|(i, field)| match field.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(parse_error(
                        path,
                        line,
                        format!("column {} (`{field}`) is not a finite number", i + 3),
                    )),
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(FeatureRow {
                id: record[0].to_string(),
                label,
                values,
            });
        }
        Ok(FeatureTable { levels, rows })
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Serialised form of a [`TrainedClassifier`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema_version: u32,
    pub levels: u8,
    pub feature_indices: Vec<usize>,
    pub feature_names: Vec<String>,
    pub scales: Vec<f64>,
    pub center: Vec<f64>,
    pub threshold: f64,
    pub training_accuracy: f64,
}

impl ModelFile {
    pub fn new(levels: Levels, model: &TrainedClassifier) -> Result<Self> {
        if model.feature_dim != levels.dimension() {
            return Err(Error::dimension(format!(
                "model expects {} features, {}-level tables have {}",
                model.feature_dim,
                levels.count(),
                levels.dimension()
            )));
        }
        Ok(ModelFile {
            schema_version: SCHEMA_VERSION,
            levels: levels.count(),
            feature_names: model
                .feature_indices
                .iter()
                .map(|&i| feature_name(levels, i))
                .collect::<Result<_>>()?,
            feature_indices: model.feature_indices.clone(),
            scales: model.scales.clone(),
            center: model.center.clone(),
            threshold: model.threshold,
            training_accuracy: model.training_accuracy,
        })
    }

    pub fn levels(&self) -> Result<Levels> {
        Levels::from_count(self.levels)
    }

    pub fn to_model(&self) -> Result<TrainedClassifier> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid(format!(
                "unsupported model schema version {}",
                self.schema_version
            )));
        }
        let model = TrainedClassifier {
            feature_dim: self.levels()?.dimension(),
            feature_indices: self.feature_indices.clone(),
            scales: self.scales.clone(),
            center: self.center.clone(),
            threshold: self.threshold,
            training_accuracy: self.training_accuracy,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn read(path: &Path) -> Result<ModelFile> {
        read_json(path)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyRecord {
    pub index: usize,
    pub name: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoocvReportFile {
    pub schema_version: u32,
    pub levels: u8,
    /// Selection size, absent when features were fixed.
    pub k: Option<usize>,
    pub fixed_features: Option<Vec<usize>>,
    pub metrics: Metrics,
    pub per_painting: Vec<PaintingResult>,
    pub feature_frequencies: Vec<FrequencyRecord>,
}

impl LoocvReportFile {
    pub fn new(
        levels: Levels,
        k: usize,
        fixed_features: Option<Vec<usize>>,
        report: &EvaluationReport,
    ) -> Result<Self> {
        let feature_frequencies = report
            .feature_frequencies()
            .into_iter()
            .map(|c| {
                Ok(FrequencyRecord {
                    index: c.index,
                    name: feature_name(levels, c.index)?,
                    count: c.count,
                })
            })
            .collect::<Result<_>>()?;
        Ok(LoocvReportFile {
            schema_version: SCHEMA_VERSION,
            levels: levels.count(),
            k: fixed_features.is_none().then_some(k),
            fixed_features,
            metrics: report.metrics,
            per_painting: report.per_painting.clone(),
            feature_frequencies,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn read(path: &Path) -> Result<Self> {
        read_json(path)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReportFile {
    pub schema_version: u32,
    pub k: Option<usize>,
    pub fixed_features: Option<Vec<usize>>,
    #[serde(flatten)]
    pub report: BootstrapReport,
}

impl BootstrapReportFile {
    pub fn new(k: usize, fixed_features: Option<Vec<usize>>, report: BootstrapReport) -> Self {
        BootstrapReportFile {
            schema_version: SCHEMA_VERSION,
            k: fixed_features.is_none().then_some(k),
            fixed_features,
            report,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn read(path: &Path) -> Result<Self> {
        read_json(path)
    }
}

/// Counts per 0.01-wide bin over `[0, 1]` as `(lower edge, count)`; an
/// accuracy of exactly 1 falls in the last bin.
pub fn histogram(accuracies: &[f64]) -> Vec<(f64, usize)> {
    let mut counts = [0usize; HISTOGRAM_BINS];
    for &a in accuracies {
        // The nudge keeps values such as 0.29 (stored as 0.28999…) in their
        // nominal bin.
        let bin = ((a / HISTOGRAM_BIN_WIDTH) + 1e-9).floor().clamp(0.0, (HISTOGRAM_BINS - 1) as f64);
        counts[bin as usize] += 1;
    }
    counts
        .iter()
        .enumerate()
        .map(|(i, &c)| (i as f64 * HISTOGRAM_BIN_WIDTH, c))
        .collect()
}

pub fn write_histogram(path: &Path, accuracies: &[f64]) -> Result<()> {
    let mut out = String::from("bin_lower,count\n");
    for (edge, count) in histogram(accuracies) {
        out.push_str(&format!("{edge:.2},{count}\n"));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
