//! Painting → statistic feature vector.
//!
//! Each coefficient matrix contributes its mean, its standard deviation and
//! the fraction of "tail" entries lying strictly more than one standard
//! deviation from the mean. Features are laid out statistic-major:
//! index `s * C + j` holds statistic `s` of channel `j`, where `C` is the
//! channel count (18 for one level, 35 for two).

use ndarray::{Array2, ArrayView2, ArrayView3, Axis};

use crate::error::{Error, Result};
use crate::tight_frame::{filter_bank, Analyzer, Boundary, GrayImage, FILTER_COUNT, TWO_LEVEL_CHANNELS};

/// Default number of pixels removed from each side before analysis.
pub const DEFAULT_CROP_MARGIN: usize = 100;

/// Rec. 601 luma weights.
const LUMA: [f64; 3] = [0.299, 0.587, 0.114];

/// Depth of the tight-frame transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Levels {
    #[default]
    One,
    Two,
}

impl Levels {
    pub fn from_count(levels: u8) -> Result<Self> {
        match levels {
            1 => Ok(Levels::One),
            2 => Ok(Levels::Two),
            other => Err(Error::invalid(format!(
                "unsupported level count {other} (expected 1 or 2)"
            ))),
        }
    }

    /// Infers the level count from a feature dimension (54 or 105).
    pub fn from_dimension(dim: usize) -> Result<Self> {
        [Levels::One, Levels::Two]
            .into_iter()
            .find(|l| l.dimension() == dim)
            .ok_or_else(|| {
                Error::dimension(format!("{dim} features matches neither 54 nor 105"))
            })
    }

    pub fn count(self) -> u8 {
        match self {
            Levels::One => 1,
            Levels::Two => 2,
        }
    }

    pub fn channels(self) -> usize {
        match self {
            Levels::One => FILTER_COUNT,
            Levels::Two => TWO_LEVEL_CHANNELS,
        }
    }

    pub fn dimension(self) -> usize {
        Statistic::ALL.len() * self.channels()
    }

    fn channel_label(self, channel: usize) -> String {
        match self {
            Levels::One => format!("t{channel:02}"),
            Levels::Two if channel < FILTER_COUNT - 1 => format!("l1t{:02}", channel + 1),
            Levels::Two => format!("l2t{:02}", channel - (FILTER_COUNT - 1)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    Mean,
    Std,
    Tail,
}

impl Statistic {
    pub const ALL: [Statistic; 3] = [Statistic::Mean, Statistic::Std, Statistic::Tail];

    pub fn name(self) -> &'static str {
        match self {
            Statistic::Mean => "mean",
            Statistic::Std => "std",
            Statistic::Tail => "tail",
        }
    }
}

/// Splits a feature index into its statistic and channel.
pub fn feature_layout(levels: Levels, index: usize) -> Result<(Statistic, usize)> {
    if index >= levels.dimension() {
        return Err(Error::dimension(format!(
            "feature index {index} out of range for {} features",
            levels.dimension()
        )));
    }
    let c = levels.channels();
    Ok((Statistic::ALL[index / c], index % c))
}

/// Column name of a feature, e.g. `mean_t03` or `tail_l2t16`.
pub fn feature_name(levels: Levels, index: usize) -> Result<String> {
    let (stat, channel) = feature_layout(levels, index)?;
    Ok(format!("{}_{}", stat.name(), levels.channel_label(channel)))
}

pub fn feature_names(levels: Levels) -> Vec<String> {
    (0..levels.dimension())
        .map(|i| feature_name(levels, i).expect("index within dimension"))
        .collect()
}

/// Mean, standard deviation and tail fraction of one coefficient matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelStats {
    pub mean: f64,
    pub std: f64,
    pub tail_fraction: f64,
}

/// Two-pass statistics in row-major order; the standard deviation uses the
/// `N - 1` denominator and tail entries satisfy `|a - mean| > std` strictly.
pub fn channel_stats(matrix: ArrayView2<'_, f64>) -> Result<ChannelStats> {
    let n = matrix.len();
    if n < 2 {
        return Err(Error::dimension(format!(
            "statistics need at least 2 entries, got {n}"
        )));
    }
    let count = n as f64;
    let mean = matrix.iter().sum::<f64>() / count;
    let ss: f64 = matrix.iter().map(|&a| (a - mean) * (a - mean)).sum();
    let std = (ss / (count - 1.0)).sqrt();
    let tails = matrix.iter().filter(|&&a| (a - mean).abs() > std).count();
    Ok(ChannelStats {
        mean,
        std,
        tail_fraction: tails as f64 / count,
    })
}

/// Luma of an `m × n × 3` RGB array; intensities stay unrounded.
pub fn grayscale(color: ArrayView3<'_, f64>) -> Result<GrayImage> {
    let (_, _, channels) = color.dim();
    if channels != 3 {
        return Err(Error::dimension(format!(
            "expected 3 colour channels, got {channels}"
        )));
    }
    let gray = color.map_axis(Axis(2), |px| {
        LUMA[0] * px[0] + LUMA[1] * px[1] + LUMA[2] * px[2]
    });
    GrayImage::new(gray)
}

/// Luma from three separate channel planes.
pub fn grayscale_planes(
    red: ArrayView2<'_, f64>,
    green: ArrayView2<'_, f64>,
    blue: ArrayView2<'_, f64>,
) -> Result<GrayImage> {
    if red.dim() != green.dim() || red.dim() != blue.dim() {
        return Err(Error::dimension(format!(
            "channel planes differ in size: {:?}, {:?}, {:?}",
            red.dim(),
            green.dim(),
            blue.dim()
        )));
    }
    let mut gray = Array2::zeros(red.dim());
    ndarray::Zip::from(&mut gray)
        .and(red)
        .and(green)
        .and(blue)
        .for_each(|g, &r, &gr, &b| *g = LUMA[0] * r + LUMA[1] * gr + LUMA[2] * b);
    GrayImage::new(gray)
}

/// Removes `margin` pixels from every side.
pub fn crop_border(image: &GrayImage, margin: usize) -> Result<GrayImage> {
    let (rows, cols) = (image.rows(), image.cols());
    let min = 2 * margin + 3;
    if rows < min || cols < min {
        return Err(Error::dimension(format!(
            "image is {rows}x{cols}; cropping {margin} px per side needs at least {min}x{min}"
        )));
    }
    let interior = image
        .pixels()
        .slice(ndarray::s![margin..rows - margin, margin..cols - margin])
        .to_owned();
    GrayImage::new(interior)
}

/// Statistic features of one painting.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    levels: Levels,
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(levels: Levels, values: Vec<f64>) -> Result<Self> {
        if values.len() != levels.dimension() {
            return Err(Error::dimension(format!(
                "{} values given for a {}-feature vector",
                values.len(),
                levels.dimension()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("feature vector contains non-finite values"));
        }
        Ok(FeatureVector { levels, values })
    }

    pub fn levels(&self) -> Levels {
        self.levels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, stat: Statistic, channel: usize) -> f64 {
        let s = Statistic::ALL.iter().position(|&x| x == stat).unwrap();
        self.values[s * self.levels.channels() + channel]
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Runs the transform and reduces every channel to its statistics.
///
/// Channels are produced one at a time into a reused buffer, so peak memory
/// stays at a few copies of the image regardless of the channel count.
pub fn feature_vector(
    image: &GrayImage,
    levels: Levels,
    boundary: Boundary,
) -> Result<FeatureVector> {
    let bank = filter_bank();
    let analyzer = Analyzer::new(image.pixels(), boundary)?;
    let mut buf = Array2::zeros(analyzer.dim());
    let mut stats = Vec::with_capacity(levels.channels());

    match levels {
        Levels::One => {
            for k in &bank {
                analyzer.channel_into(k, &mut buf);
                stats.push(channel_stats(buf.view())?);
            }
        }
        Levels::Two => {
            for k in &bank[1..] {
                analyzer.channel_into(k, &mut buf);
                stats.push(channel_stats(buf.view())?);
            }
            analyzer.channel_into(&bank[0], &mut buf);
            let second = Analyzer::new(buf.view(), boundary)?;
            for k in &bank {
                second.channel_into(k, &mut buf);
                stats.push(channel_stats(buf.view())?);
            }
        }
    }

    let mut values = Vec::with_capacity(levels.dimension());
    values.extend(stats.iter().map(|s| s.mean));
    values.extend(stats.iter().map(|s| s.std));
    values.extend(stats.iter().map(|s| s.tail_fraction));
    FeatureVector::new(levels, values)
}
