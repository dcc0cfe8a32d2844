//! Column normalisation, distance-to-centre scoring and greedy AUC-driven
//! feature selection.
//!
//! A candidate feature subset is scored by how well the Euclidean distance to
//! the genuine-class centre ranks genuine paintings ahead of imitations. The
//! score is the area under the ROC curve of the rule "genuine iff the distance
//! is below ρ", swept over every ρ.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Class of a painting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    /// By the target artist (`vG`).
    #[serde(rename = "vG")]
    Genuine,
    /// By an imitator (`nvG`).
    #[serde(rename = "nvG")]
    Imitation,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Genuine => "vG",
            Label::Imitation => "nvG",
        }
    }

    pub fn is_genuine(self) -> bool {
        self == Label::Genuine
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vG" => Ok(Label::Genuine),
            "nvG" => Ok(Label::Imitation),
            other => Err(Error::invalid(format!(
                "unknown label `{other}` (expected `vG` or `nvG`)"
            ))),
        }
    }
}

/// Counts of genuine and imitation labels.
pub fn class_counts(labels: &[Label]) -> (usize, usize) {
    let genuine = labels.iter().filter(|l| l.is_genuine()).count();
    (genuine, labels.len() - genuine)
}

/// Labelled feature rows, one per painting.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    features: Array2<f64>,
    labels: Vec<Label>,
    ids: Vec<String>,
}

impl TrainingSet {
    /// Requires at least two genuine rows, one imitation row and finite values.
    pub fn new(features: Array2<f64>, labels: Vec<Label>, ids: Vec<String>) -> Result<Self> {
        let n = features.nrows();
        if labels.len() != n || ids.len() != n {
            return Err(Error::dimension(format!(
                "{n} feature rows but {} labels and {} ids",
                labels.len(),
                ids.len()
            )));
        }
        if features.ncols() == 0 {
            return Err(Error::dimension("training set has no feature columns"));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("training set contains non-finite values"));
        }
        let (genuine, imitation) = class_counts(&labels);
        if genuine < 2 || imitation < 1 {
            return Err(Error::invalid(format!(
                "need at least 2 vG and 1 nvG rows, got {genuine} vG and {imitation} nvG"
            )));
        }
        Ok(TrainingSet {
            features,
            labels,
            ids,
        })
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.features.ncols()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.features
            .row(i)
            .to_slice()
            .expect("owned standard-layout rows are contiguous")
    }

    pub fn genuine_rows(&self) -> Vec<usize> {
        genuine_rows(&self.labels)
    }

    /// The rows at `rows`, in that order (repeats allowed).
    pub fn select_rows(&self, rows: &[usize]) -> Result<TrainingSet> {
        let features = self.features.select(ndarray::Axis(0), rows);
        let labels = rows.iter().map(|&r| self.labels[r]).collect();
        let ids = rows.iter().map(|&r| self.ids[r].clone()).collect();
        TrainingSet::new(features, labels, ids)
    }
}

pub(crate) fn genuine_rows(labels: &[Label]) -> Vec<usize> {
    labels
        .iter()
        .enumerate()
        .filter_map(|(i, l)| l.is_genuine().then_some(i))
        .collect()
}

/// Training matrix with every column scaled to unit sample standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedSet {
    features: Array2<f64>,
    scales: Vec<f64>,
    degenerate: Vec<bool>,
}

impl NormalizedSet {
    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    /// Per-column divisors; 1 for constant columns.
    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    /// Columns that were constant and left unscaled.
    pub fn degenerate(&self) -> &[bool] {
        &self.degenerate
    }

    pub fn len(&self) -> usize {
        self.features.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.features.nrows() == 0
    }

    pub fn dimension(&self) -> usize {
        self.features.ncols()
    }
}

/// Divides every column by its sample standard deviation (`n - 1`
/// denominator). Constant columns are divided by 1 and flagged.
pub fn normalize_columns(features: ArrayView2<'_, f64>) -> Result<NormalizedSet> {
    let n = features.nrows();
    if n < 2 {
        return Err(Error::dimension(format!(
            "normalisation needs at least 2 rows, got {n}"
        )));
    }
    let mut out = features.to_owned();
    let mut scales = Vec::with_capacity(features.ncols());
    let mut degenerate = Vec::with_capacity(features.ncols());
    for mut col in out.columns_mut() {
        let first = col[0];
        if col.iter().all(|&v| v == first) {
            scales.push(1.0);
            degenerate.push(true);
            continue;
        }
        let mean = col.sum() / n as f64;
        let ss: f64 = col.iter().map(|&v| (v - mean) * (v - mean)).sum();
        let std = (ss / (n - 1) as f64).sqrt();
        col.mapv_inplace(|v| v / std);
        scales.push(std);
        degenerate.push(false);
    }
    Ok(NormalizedSet {
        features: out,
        scales,
        degenerate,
    })
}

fn check_subset(subset: &[usize], dim: usize) -> Result<()> {
    if subset.is_empty() {
        return Err(Error::invalid("feature subset is empty"));
    }
    if let Some(&bad) = subset.iter().find(|&&i| i >= dim) {
        return Err(Error::dimension(format!(
            "feature index {bad} out of range for {dim} features"
        )));
    }
    Ok(())
}

/// Mean of the genuine rows over `subset`, ordered as `subset`.
pub fn vg_center(xn: &NormalizedSet, genuine_rows: &[usize], subset: &[usize]) -> Result<Vec<f64>> {
    if genuine_rows.is_empty() {
        return Err(Error::invalid("no genuine rows to average"));
    }
    check_subset(subset, xn.dimension())?;
    let x = xn.features();
    Ok(subset
        .iter()
        .map(|&f| column_mean(x, genuine_rows, f))
        .collect())
}

fn column_mean(x: ArrayView2<'_, f64>, rows: &[usize], col: usize) -> f64 {
    rows.iter().map(|&r| x[[r, col]]).sum::<f64>() / rows.len() as f64
}

/// Euclidean distance of every row, restricted to `subset`, to `center`.
pub fn distances(xn: &NormalizedSet, subset: &[usize], center: &[f64]) -> Result<Vec<f64>> {
    check_subset(subset, xn.dimension())?;
    if center.len() != subset.len() {
        return Err(Error::dimension(format!(
            "centre has {} components for {} features",
            center.len(),
            subset.len()
        )));
    }
    let x = xn.features();
    Ok(x.rows()
        .into_iter()
        .map(|row| {
            subset
                .iter()
                .zip(center)
                .fold(0.0, |acc, (&f, &c)| acc + (row[f] - c) * (row[f] - c))
                .sqrt()
        })
        .collect())
}

/// Area under the ROC curve for "genuine iff distance < ρ".
///
/// The curve is traced from ρ below every distance to ρ above every distance,
/// moving one block of tied distances at a time, so a block holding both
/// classes contributes a diagonal segment. The area is accumulated in integer
/// units of one (genuine, imitation) pair before the final division.
pub fn auc(distances: &[f64], labels: &[Label]) -> Result<f64> {
    if distances.len() != labels.len() {
        return Err(Error::dimension(format!(
            "{} distances but {} labels",
            distances.len(),
            labels.len()
        )));
    }
    let (pos, neg) = class_counts(labels);
    if pos == 0 || neg == 0 {
        return Err(Error::invalid("AUC needs both classes present"));
    }
    let mut order: Vec<usize> = (0..distances.len()).collect();
    order.sort_by(|&a, &b| distances[a].total_cmp(&distances[b]));

    // twice the area, in pair units
    let mut doubled: u64 = 0;
    let mut tp: u64 = 0;
    let mut i = 0;
    while i < order.len() {
        let d = distances[order[i]];
        let (mut p, mut q) = (0u64, 0u64);
        while i < order.len() && distances[order[i]] == d {
            if labels[order[i]].is_genuine() {
                p += 1;
            } else {
                q += 1;
            }
            i += 1;
        }
        doubled += q * (2 * tp + p);
        tp += p;
    }
    let total = 2 * pos as u64 * neg as u64;
    Ok(doubled as f64 / total as f64)
}

/// Greedy selection options.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelectionConfig {
    /// Number of features to select.
    pub k: usize,
    /// Skip constant (flagged) columns when scanning candidates.
    pub exclude_degenerate: bool,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            k: 5,
            exclude_degenerate: false,
        }
    }
}

/// Selected feature indices in selection order with the AUC after each step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSet {
    pub indices: Vec<usize>,
    pub auc_trace: Vec<f64>,
}

/// Forward stage-wise selection maximising AUC.
///
/// Each step adds the unselected feature whose inclusion gives the largest
/// AUC; ties go to the smallest feature index.
pub fn forward_select(xn: &NormalizedSet, labels: &[Label], config: SelectionConfig) -> Result<FeatureSet> {
    let n = xn.len();
    if labels.len() != n {
        return Err(Error::dimension(format!("{n} rows but {} labels", labels.len())));
    }
    let (pos, neg) = class_counts(labels);
    if pos == 0 || neg == 0 {
        return Err(Error::invalid("selection needs both classes present"));
    }
    let dim = xn.dimension();
    let mut available: Vec<bool> = if config.exclude_degenerate {
        xn.degenerate().iter().map(|d| !d).collect()
    } else {
        vec![true; dim]
    };
    let candidates = available.iter().filter(|a| **a).count();
    if config.k > candidates {
        return Err(Error::invalid(format!(
            "cannot select {} features from {candidates} candidates",
            config.k
        )));
    }

    let x = xn.features();
    let genuine = genuine_rows(labels);
    // Running Σ (x - c)² over the selected features, in selection order.
    let mut partial = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let mut selected = FeatureSet {
        indices: Vec::with_capacity(config.k),
        auc_trace: Vec::with_capacity(config.k),
    };

    for _ in 0..config.k {
        let mut best: Option<(usize, f64)> = None;
        for f in (0..dim).filter(|&f| available[f]) {
            let c = column_mean(x, &genuine, f);
            for ((s, &p), &v) in scratch.iter_mut().zip(&partial).zip(x.column(f)) {
                *s = (p + (v - c) * (v - c)).sqrt();
            }
            let score = auc(&scratch, labels)?;
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((f, score));
            }
        }
        let (f, score) = best.expect("at least one candidate remains");
        let c = column_mean(x, &genuine, f);
        for (p, &v) in partial.iter_mut().zip(x.column(f)) {
            *p += (v - c) * (v - c);
        }
        available[f] = false;
        selected.indices.push(f);
        selected.auc_trace.push(score);
    }
    Ok(selected)
}

/// How often a feature was selected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureCount {
    pub index: usize,
    pub count: usize,
}

/// Occurrence counts of features across selections, by count descending then
/// index ascending. Features never selected are omitted.
pub fn feature_frequencies<'a, I>(sets: I) -> Vec<FeatureCount>
where
    I: IntoIterator<Item = &'a [usize]>,
{
    let mut counts = std::collections::BTreeMap::new();
    for set in sets {
        for &f in set {
            *counts.entry(f).or_insert(0usize) += 1;
        }
    }
    let mut table: Vec<FeatureCount> = counts
        .into_iter()
        .map(|(index, count)| FeatureCount { index, count })
        .collect();
    table.sort_by(|a, b| b.count.cmp(&a.count).then(a.index.cmp(&b.index)));
    table
}
