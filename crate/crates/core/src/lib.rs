//! Painting authentication from geometric tight-frame statistics.
//!
//! The pipeline turns each painting into a vector of coefficient statistics
//! ([`features`]), selects a handful of features whose distance to the
//! genuine-class centre best separates the classes ([`selection`]), and flags
//! paintings far from that centre as imitations ([`classifier`]).
//! [`evaluation`] wraps this in leave-one-out cross-validation and a
//! class-preserving bootstrap.

pub mod classifier;
pub mod cli;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod io;
pub mod parallel;
pub mod selection;
pub mod tight_frame;

pub use classifier::{fit_threshold, train, Prediction, ThresholdFit, TrainedClassifier};
pub use error::{Error, Result};
pub use evaluation::{
    bootstrap, loocv, metrics, BootstrapConfig, BootstrapReport, EvaluationReport, LoocvConfig,
    Metrics,
};
pub use features::{
    channel_stats, crop_border, feature_vector, grayscale, ChannelStats, FeatureVector, Levels,
    Statistic,
};
pub use selection::{
    auc, distances, feature_frequencies, forward_select, normalize_columns, vg_center, FeatureSet,
    Label, NormalizedSet, SelectionConfig, TrainingSet,
};
pub use tight_frame::{analyze, analyze_two_level, filter_bank, Boundary, CoefficientStack, GrayImage, Kernel};
