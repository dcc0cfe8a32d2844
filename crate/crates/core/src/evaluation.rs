//! Leave-one-out cross-validation and class-preserving bootstrap.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{train, Prediction, TrainedClassifier};
use crate::error::{Error, Result};
use crate::selection::{
    class_counts, feature_frequencies, forward_select, normalize_columns, FeatureCount,
    FeatureSet, Label, SelectionConfig, TrainingSet,
};

/// How each fold picks its features.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoocvConfig {
    /// Features selected per fold when `fixed_features` is unset.
    pub k: usize,
    /// Use these features in every fold instead of running selection.
    pub fixed_features: Option<Vec<usize>>,
    pub exclude_degenerate: bool,
}

impl Default for LoocvConfig {
    fn default() -> Self {
        LoocvConfig {
            k: 5,
            fixed_features: None,
            exclude_degenerate: false,
        }
    }
}

impl LoocvConfig {
    fn validate(&self, dim: usize) -> Result<()> {
        match &self.fixed_features {
            Some(fixed) => {
                if fixed.is_empty() {
                    return Err(Error::invalid("fixed feature set is empty"));
                }
                if let Some(&bad) = fixed.iter().find(|&&f| f >= dim) {
                    return Err(Error::dimension(format!(
                        "fixed feature {bad} out of range for {dim} features"
                    )));
                }
                let mut sorted = fixed.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != fixed.len() {
                    return Err(Error::invalid("fixed feature set has duplicates"));
                }
            }
            None => {
                if self.k == 0 || self.k > dim {
                    return Err(Error::invalid(format!(
                        "k = {} must be between 1 and the feature count {dim}",
                        self.k
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Everything one fold produced.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldOutcome {
    /// `None` when the features were fixed.
    pub selection: Option<FeatureSet>,
    pub model: TrainedClassifier,
    pub prediction: Prediction,
}

/// Trains on every row except `held_out` and classifies that row.
pub fn run_fold(dataset: &TrainingSet, held_out: usize, config: &LoocvConfig) -> Result<FoldOutcome> {
    let rows: Vec<usize> = (0..dataset.len()).filter(|&r| r != held_out).collect();
    let training = dataset.select_rows(&rows).map_err(|e| {
        Error::invalid(format!(
            "fold holding out `{}` has an unusable training part: {e}",
            dataset.ids()[held_out]
        ))
    })?;
    let xn = normalize_columns(training.features())?;
    let (selection, subset) = match &config.fixed_features {
        Some(fixed) => (None, fixed.clone()),
        None => {
            let fs = forward_select(
                &xn,
                training.labels(),
                SelectionConfig {
                    k: config.k,
                    exclude_degenerate: config.exclude_degenerate,
                },
            )?;
            let subset = fs.indices.clone();
            (Some(fs), subset)
        }
    };
    let model = train(&xn, training.labels(), &subset)?;
    let prediction = model.classify_row(dataset.row(held_out))?;
    Ok(FoldOutcome {
        selection,
        model,
        prediction,
    })
}

/// Confusion-derived rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub tp: usize,
    pub tn: usize,
    pub tpr: f64,
    pub tnr: f64,
    pub accuracy: f64,
}

pub fn metrics(tp: usize, tn: usize, vg_count: usize, nvg_count: usize) -> Result<Metrics> {
    if vg_count == 0 || nvg_count == 0 {
        return Err(Error::invalid("metrics need positive class counts"));
    }
    if tp > vg_count || tn > nvg_count {
        return Err(Error::invalid(format!(
            "TP {tp} / TN {tn} exceed class counts {vg_count} / {nvg_count}"
        )));
    }
    Ok(Metrics {
        tp,
        tn,
        tpr: tp as f64 / vg_count as f64,
        tnr: tn as f64 / nvg_count as f64,
        accuracy: (tp + tn) as f64 / (vg_count + nvg_count) as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaintingResult {
    pub id: String,
    pub label: Label,
    pub predicted: Label,
    pub distance: f64,
    /// Features the fold used, in selection order.
    pub selected_features: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub per_painting: Vec<PaintingResult>,
    pub metrics: Metrics,
}

impl EvaluationReport {
    pub fn feature_frequencies(&self) -> Vec<FeatureCount> {
        feature_frequencies(self.per_painting.iter().map(|p| p.selected_features.as_slice()))
    }
}

/// Leave-one-out over every row; folds run in parallel and are collected in
/// row order.
pub fn loocv(dataset: &TrainingSet, config: &LoocvConfig) -> Result<EvaluationReport> {
    if dataset.len() < 3 {
        return Err(Error::invalid(format!(
            "leave-one-out needs at least 3 paintings, got {}",
            dataset.len()
        )));
    }
    config.validate(dataset.dimension())?;
    let folds: Vec<FoldOutcome> = (0..dataset.len())
        .into_par_iter()
        .map(|i| run_fold(dataset, i, config))
        .collect::<Result<_>>()?;

    let per_painting: Vec<PaintingResult> = folds
        .into_iter()
        .enumerate()
        .map(|(i, fold)| PaintingResult {
            id: dataset.ids()[i].clone(),
            label: dataset.labels()[i],
            predicted: fold.prediction.label,
            distance: fold.prediction.distance,
            selected_features: fold.model.feature_indices,
        })
        .collect();
    let tp = per_painting
        .iter()
        .filter(|p| p.label == Label::Genuine && p.predicted == Label::Genuine)
        .count();
    let tn = per_painting
        .iter()
        .filter(|p| p.label == Label::Imitation && p.predicted == Label::Imitation)
        .count();
    let (vg, nvg) = class_counts(dataset.labels());
    Ok(EvaluationReport {
        metrics: metrics(tp, tn, vg, nvg)?,
        per_painting,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BootstrapConfig {
    /// Number of resampled datasets.
    pub datasets: usize,
    pub seed: u64,
    pub loocv: LoocvConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReport {
    pub seed: u64,
    #[serde(rename = "B")]
    pub datasets: usize,
    /// LOOCV accuracy of each resampled dataset, in dataset order.
    pub accuracies: Vec<f64>,
    pub mean: f64,
    pub median: f64,
    /// Sample standard deviation (0 for a single dataset).
    pub std: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// 1-based ranks of the interval bounds: the ⌈0.03·B⌉-th and ⌈0.975·B⌉-th
/// smallest accuracies, which for B = 200 are the 6th and 195th.
pub fn ci_ranks(datasets: usize) -> (usize, usize) {
    let low = (3 * datasets).div_ceil(100).max(1);
    let high = (975 * datasets).div_ceil(1000).max(1);
    (low, high)
}

/// Summary statistics and order-statistic interval of a list of accuracies.
pub fn summarize(seed: u64, accuracies: Vec<f64>) -> Result<BootstrapReport> {
    let b = accuracies.len();
    if b == 0 {
        return Err(Error::invalid("no accuracies to summarise"));
    }
    let mut sorted = accuracies.clone();
    sorted.sort_by(f64::total_cmp);
    let mean = accuracies.iter().sum::<f64>() / b as f64;
    let median = if b % 2 == 1 {
        sorted[b / 2]
    } else {
        (sorted[b / 2 - 1] + sorted[b / 2]) / 2.0
    };
    let std = if b > 1 {
        let ss: f64 = accuracies.iter().map(|a| (a - mean) * (a - mean)).sum();
        (ss / (b - 1) as f64).sqrt()
    } else {
        0.0
    };
    let (lo, hi) = ci_ranks(b);
    Ok(BootstrapReport {
        seed,
        datasets: b,
        mean,
        median,
        std,
        ci_low: sorted[lo - 1],
        ci_high: sorted[hi - 1],
        accuracies,
    })
}

/// Draws dataset `index` of a bootstrap run: genuine rows and imitation rows
/// are each resampled with replacement, keeping both class sizes. Genuine
/// draws come first.
///
/// Every dataset has its own ChaCha20 stream keyed by `(seed, index)`, so the
/// draws do not depend on the order in which datasets are generated.
pub fn resample(dataset: &TrainingSet, seed: u64, index: u64) -> Result<TrainingSet> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let genuine = dataset.genuine_rows();
    let imitation: Vec<usize> = (0..dataset.len())
        .filter(|r| !dataset.labels()[*r].is_genuine())
        .collect();
    let mut rows = Vec::with_capacity(dataset.len());
    for pool in [&genuine, &imitation] {
        rows.extend((0..pool.len()).map(|_| pool[rng.gen_range(0..pool.len())]));
    }
    dataset.select_rows(&rows)
}

/// LOOCV accuracy over `config.datasets` class-preserving resamples.
pub fn bootstrap(dataset: &TrainingSet, config: &BootstrapConfig) -> Result<BootstrapReport> {
    if config.datasets < 1 {
        return Err(Error::invalid("bootstrap needs at least one dataset"));
    }
    config.loocv.validate(dataset.dimension())?;
    let accuracies: Vec<f64> = (0..config.datasets as u64)
        .into_par_iter()
        .map(|b| {
            let sample = resample(dataset, config.seed, b)?;
            Ok(loocv(&sample, &config.loocv)?.metrics.accuracy)
        })
        .collect::<Result<_>>()?;
    summarize(config.seed, accuracies)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use Label::{Genuine as G, Imitation as I};

    #[test]
    fn reference_metric_rows() {
        let m = metrics(60, 8, 64, 15).unwrap();
        assert_eq!(m.tpr, 0.9375);
        assert!((m.tnr - 0.5333).abs() < 5e-5);
        assert!((m.accuracy - 0.8608).abs() < 5e-5);

        let m = metrics(60, 10, 64, 15).unwrap();
        assert!((m.tnr - 0.6667).abs() < 5e-5);
        assert!((m.accuracy - 0.8861).abs() < 5e-5);

        let m = metrics(64, 15, 64, 15).unwrap();
        assert_eq!((m.tpr, m.tnr, m.accuracy), (1.0, 1.0, 1.0));

        assert!(metrics(1, 1, 0, 3).is_err());
        assert!(metrics(5, 1, 4, 3).is_err());
    }

    #[test]
    fn ci_rank_rule() {
        assert_eq!(ci_ranks(200), (6, 195));
        assert_eq!(ci_ranks(10), (1, 10));
        assert_eq!(ci_ranks(1), (1, 1));
        assert_eq!(ci_ranks(100), (3, 98));
    }

    #[test]
    fn summary_of_known_sequence() {
        let accs: Vec<f64> = (1..=200).rev().map(|i| i as f64 / 200.0).collect();
        let r = summarize(7, accs).unwrap();
        assert_eq!(r.ci_low, 0.03);
        assert_eq!(r.ci_high, 0.975);
        assert_eq!(r.median, (100.0 / 200.0 + 101.0 / 200.0) / 2.0);
        assert!((r.mean - 0.5025).abs() < 1e-12);
        assert_eq!(r.datasets, 200);
        assert!(summarize(0, vec![]).is_err());
        let one = summarize(0, vec![0.8]).unwrap();
        assert_eq!((one.std, one.ci_low, one.ci_high, one.median), (0.0, 0.8, 0.8, 0.8));
    }

    fn separable() -> TrainingSet {
        // column 0 is constant within each class
        let labels = vec![G, G, G, G, G, I, I, I];
        let x = Array2::from_shape_fn((8, 3), |(r, c)| match c {
            0 => if labels[r] == G { 1.0 } else { 4.0 },
            _ => ((r * 5 + c * 3) % 7) as f64,
        });
        let ids = (0..8).map(|i| format!("p{i}")).collect();
        TrainingSet::new(x, labels, ids).unwrap()
    }

    #[test]
    fn loocv_on_perfectly_separable_data() {
        let data = separable();
        let report = loocv(&data, &LoocvConfig { k: 1, ..Default::default() }).unwrap();
        assert_eq!(report.metrics.accuracy, 1.0);
        assert!(report.per_painting.iter().all(|p| p.selected_features == vec![0]));
        assert_eq!(report.feature_frequencies(), vec![FeatureCount { index: 0, count: 8 }]);

        let fixed = LoocvConfig { fixed_features: Some(vec![0]), ..Default::default() };
        assert_eq!(loocv(&data, &fixed).unwrap().metrics.accuracy, 1.0);
    }

    #[test]
    fn config_errors() {
        let data = separable();
        for cfg in [
            LoocvConfig { k: 0, ..Default::default() },
            LoocvConfig { k: 4, ..Default::default() },
            LoocvConfig { fixed_features: Some(vec![]), ..Default::default() },
            LoocvConfig { fixed_features: Some(vec![3]), ..Default::default() },
            LoocvConfig { fixed_features: Some(vec![1, 1]), ..Default::default() },
        ] {
            assert!(loocv(&data, &cfg).is_err(), "{cfg:?}");
        }
        let b = BootstrapConfig { datasets: 0, seed: 1, loocv: LoocvConfig::default() };
        assert!(bootstrap(&data, &b).is_err());
    }

    #[test]
    fn fold_without_imitations_fails() {
        let x = Array2::from_shape_fn((4, 2), |(r, c)| (r + c) as f64);
        let data = TrainingSet::new(x, vec![G, G, G, I], (0..4).map(|i| i.to_string()).collect())
            .unwrap();
        let err = loocv(&data, &LoocvConfig { k: 1, ..Default::default() }).unwrap_err();
        assert!(err.to_string().contains("`3`"), "{err}");
    }

    #[test]
    fn resample_keeps_class_sizes() {
        let data = separable();
        for b in 0..20 {
            let s = resample(&data, 11, b).unwrap();
            assert_eq!(class_counts(s.labels()), (5, 3));
            assert_eq!(s, resample(&data, 11, b).unwrap());
        }
        assert_ne!(resample(&data, 11, 0).unwrap(), resample(&data, 12, 0).unwrap());
    }
}
