//! Distance-threshold classifier around the genuine-class centre.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::selection::{class_counts, distances, genuine_rows, vg_center, Label, NormalizedSet};

/// Outcome of threshold calibration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdFit {
    pub threshold: f64,
    /// Training accuracy of `distance < threshold`.
    pub accuracy: f64,
    /// 1-based cut position in the sorted distances: the first `cut - 1`
    /// distances fall below the threshold.
    pub cut: usize,
}

/// Picks the threshold that maximises training accuracy.
///
/// Distances are sorted ascending and every cut position `j = 1 ..= n + 1`
/// that separates distinct values is scored by the number of genuine rows
/// before it plus imitation rows from it onwards. The largest maximising cut
/// wins and the threshold is the midpoint of the distances around it, taking
/// 0 below the first and `max + 1` above the last.
pub fn fit_threshold(distances: &[f64], labels: &[Label]) -> Result<ThresholdFit> {
    let n = distances.len();
    if labels.len() != n {
        return Err(Error::dimension(format!("{n} distances but {} labels", labels.len())));
    }
    let (pos, neg) = class_counts(labels);
    if pos == 0 || neg == 0 {
        return Err(Error::invalid(
            "threshold calibration needs both classes present",
        ));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| distances[a].total_cmp(&distances[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| distances[i]).collect();

    let mut genuine_below = 0usize;
    let mut imitation_below = 0usize;
    let mut best = (0usize, 0usize); // (cut, correct)
    for cut in 1..=n + 1 {
        if cut > 1 {
            if labels[order[cut - 2]].is_genuine() {
                genuine_below += 1;
            } else {
                imitation_below += 1;
            }
        }
        // A cut between equal distances cannot be realised by any threshold.
        if cut > 1 && cut <= n && sorted[cut - 2] == sorted[cut - 1] {
            continue;
        }
        let correct = genuine_below + (neg - imitation_below);
        if correct >= best.1 {
            best = (cut, correct);
        }
    }

    let (cut, correct) = best;
    let below = if cut == 1 { 0.0 } else { sorted[cut - 2] };
    let above = if cut == n + 1 { sorted[n - 1] + 1.0 } else { sorted[cut - 1] };
    Ok(ThresholdFit {
        threshold: (below + above) / 2.0,
        accuracy: correct as f64 / n as f64,
        cut,
    })
}

/// Classification of one painting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: Label,
    pub distance: f64,
}

/// A calibrated classifier: the selected features with their training
/// scales, the genuine-class centre and the decision threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedClassifier {
    /// Length of the raw feature vectors the model expects.
    pub feature_dim: usize,
    pub feature_indices: Vec<usize>,
    pub scales: Vec<f64>,
    pub center: Vec<f64>,
    pub threshold: f64,
    pub training_accuracy: f64,
}

impl TrainedClassifier {
    /// Checks the structural invariants of a (possibly deserialised) model.
    pub fn validate(&self) -> Result<()> {
        let k = self.feature_indices.len();
        if k == 0 {
            return Err(Error::invalid("model has no features"));
        }
        if self.scales.len() != k || self.center.len() != k {
            return Err(Error::dimension(format!(
                "model has {k} features but {} scales and {} centre components",
                self.scales.len(),
                self.center.len()
            )));
        }
        if let Some(&bad) = self.feature_indices.iter().find(|&&i| i >= self.feature_dim) {
            return Err(Error::dimension(format!(
                "model feature index {bad} out of range for {} features",
                self.feature_dim
            )));
        }
        if self.scales.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::invalid("model scales must be positive and finite"));
        }
        if !self.threshold.is_finite() || self.center.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("model threshold and centre must be finite"));
        }
        Ok(())
    }

    /// Distance of a raw feature row to the centre.
    pub fn distance(&self, raw: &[f64]) -> Result<f64> {
        if raw.len() != self.feature_dim {
            return Err(Error::dimension(format!(
                "feature row has {} values, model expects {}",
                raw.len(),
                self.feature_dim
            )));
        }
        let sq = self
            .feature_indices
            .iter()
            .zip(&self.scales)
            .zip(&self.center)
            .fold(0.0, |acc, ((&f, &s), &c)| {
                let z = raw[f] / s;
                acc + (z - c) * (z - c)
            });
        Ok(sq.sqrt())
    }

    /// Genuine iff `distance < threshold`.
    pub fn decide(&self, distance: f64) -> Label {
        if distance < self.threshold {
            Label::Genuine
        } else {
            Label::Imitation
        }
    }

    pub fn classify_row(&self, raw: &[f64]) -> Result<Prediction> {
        let distance = self.distance(raw)?;
        Ok(Prediction {
            label: self.decide(distance),
            distance,
        })
    }

    pub fn classify(&self, features: &FeatureVector) -> Result<Prediction> {
        self.classify_row(features.values())
    }
}

/// Fits centre and threshold on the normalised training rows over `subset`.
pub fn train(xn: &NormalizedSet, labels: &[Label], subset: &[usize]) -> Result<TrainedClassifier> {
    if labels.len() != xn.len() {
        return Err(Error::dimension(format!(
            "{} rows but {} labels",
            xn.len(),
            labels.len()
        )));
    }
    let center = vg_center(xn, &genuine_rows(labels), subset)?;
    let d = distances(xn, subset, &center)?;
    let fit = fit_threshold(&d, labels)?;
    Ok(TrainedClassifier {
        feature_dim: xn.dimension(),
        feature_indices: subset.to_vec(),
        scales: subset.iter().map(|&f| xn.scales()[f]).collect(),
        center,
        threshold: fit.threshold,
        training_accuracy: fit.accuracy,
    })
}
