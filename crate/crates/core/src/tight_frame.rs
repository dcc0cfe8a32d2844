//! The 18-filter geometric tight frame and its undecimated analysis transform.
//!
//! The bank consists of a low-pass filter (`τ0`) and seventeen high-pass
//! filters capturing first- and second-order differences along the
//! horizontal, vertical and diagonal directions of a 3×3 neighbourhood.
//! Squared norms of the filters sum to one, and with periodic boundary
//! handling the analysis operator is an isometry.
//!
//! Coefficients are produced by true 2D convolution (kernel rotated by 180°),
//! with the output kept at the input resolution.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// Number of filters in the bank.
pub const FILTER_COUNT: usize = 18;

/// Number of coefficient matrices produced by the two-level transform:
/// the seventeen level-1 high-pass outputs plus the full bank applied to the
/// level-1 low-pass output.
pub const TWO_LEVEL_CHANNELS: usize = (FILTER_COUNT - 1) + FILTER_COUNT;

/// Integer stencils and their scale factors, in bank order.
const STENCILS: [(Scale, [[i8; 3]; 3]); FILTER_COUNT] = [
    (Scale::Rational(1, 16), [[1, 2, 1], [2, 4, 2], [1, 2, 1]]),
    (Scale::Rational(1, 16), [[1, 0, -1], [2, 0, -2], [1, 0, -1]]),
    (Scale::Rational(1, 16), [[1, 2, 1], [0, 0, 0], [-1, -2, -1]]),
    (Scale::Sqrt(2, 16), [[1, 1, 0], [1, 0, -1], [0, -1, -1]]),
    (Scale::Sqrt(2, 16), [[0, 1, 1], [-1, 0, 1], [-1, -1, 0]]),
    (Scale::Sqrt(7, 24), [[1, 0, -1], [0, 0, 0], [-1, 0, 1]]),
    (Scale::Rational(1, 48), [[-1, 2, -1], [-2, 4, -2], [-1, 2, -1]]),
    (Scale::Rational(1, 48), [[-1, -2, -1], [2, 4, 2], [-1, -2, -1]]),
    (Scale::Rational(1, 12), [[0, 0, -1], [0, 2, 0], [-1, 0, 0]]),
    (Scale::Rational(1, 12), [[-1, 0, 0], [0, 2, 0], [0, 0, -1]]),
    (Scale::Sqrt(2, 12), [[0, 1, 0], [-1, 0, -1], [0, 1, 0]]),
    (Scale::Sqrt(2, 16), [[-1, 0, 1], [2, 0, -2], [-1, 0, 1]]),
    (Scale::Sqrt(2, 16), [[-1, 2, -1], [0, 0, 0], [1, -2, 1]]),
    (Scale::Rational(1, 48), [[1, -2, 1], [-2, 4, -2], [1, -2, 1]]),
    (Scale::Sqrt(2, 12), [[0, 0, 0], [-1, 2, -1], [0, 0, 0]]),
    (Scale::Sqrt(2, 24), [[-1, 2, -1], [0, 0, 0], [-1, 2, -1]]),
    (Scale::Sqrt(2, 12), [[0, -1, 0], [0, 2, 0], [0, -1, 0]]),
    (Scale::Sqrt(2, 24), [[-1, 0, -1], [2, 0, 2], [-1, 0, -1]]),
];

#[derive(Clone, Copy)]
enum Scale {
    /// `num / den`
    Rational(u32, u32),
    /// `sqrt(radicand) / den`
    Sqrt(u32, u32),
}

impl Scale {
    fn value(self) -> f64 {
        match self {
            Scale::Rational(num, den) => f64::from(num) / f64::from(den),
            Scale::Sqrt(radicand, den) => f64::from(radicand).sqrt() / f64::from(den),
        }
    }
}

/// A 3×3 filter of the bank.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    index: usize,
    coefficients: [[f64; 3]; 3],
}

impl Kernel {
    pub fn index(&self) -> usize {
        self.index
    }

    /// Row-major filter taps.
    pub fn coefficients(&self) -> &[[f64; 3]; 3] {
        &self.coefficients
    }

    /// The kernel rotated by 180°.
    pub fn rotated(&self) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for (r, row) in self.coefficients.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                out[2 - r][2 - c] = v;
            }
        }
        out
    }

    /// `+1` when the kernel is centrally symmetric, `-1` when antisymmetric.
    ///
    /// Every filter of the bank is one or the other, so correlating instead of
    /// convolving changes a coefficient matrix by exactly this factor.
    pub fn rotation_parity(&self) -> f64 {
        if self.rotated() == self.coefficients {
            1.0
        } else {
            -1.0
        }
    }

    pub fn squared_norm(&self) -> f64 {
        self.coefficients.iter().flatten().map(|v| v * v).sum()
    }

    pub fn sum(&self) -> f64 {
        self.coefficients.iter().flatten().sum()
    }

    /// Nonzero taps as `(row, col, weight)`, row-major.
    fn taps(&self) -> Vec<(usize, usize, f64)> {
        let mut taps = Vec::with_capacity(9);
        for (r, row) in self.coefficients.iter().enumerate() {
            for (c, &w) in row.iter().enumerate() {
                if w != 0.0 {
                    taps.push((r, c, w));
                }
            }
        }
        taps
    }
}

/// Returns `τ0 … τ17` in index order.
pub fn filter_bank() -> Vec<Kernel> {
    STENCILS
        .iter()
        .enumerate()
        .map(|(index, (scale, stencil))| {
            let s = scale.value();
            let mut coefficients = [[0.0; 3]; 3];
            for (r, row) in stencil.iter().enumerate() {
                for (c, &v) in row.iter().enumerate() {
                    coefficients[r][c] = s * f64::from(v);
                }
            }
            Kernel {
                index,
                coefficients,
            }
        })
        .collect()
}

/// How the image is extended past its border before filtering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Mirror about the outer pixel edge, repeating the border pixel.
    #[default]
    Reflect,
    /// Periodic wrap-around.
    Circular,
}

impl Boundary {
    /// Maps a (possibly out of range by one) coordinate into `0..len`.
    fn index(self, i: isize, len: usize) -> usize {
        let len = len as isize;
        let mapped = if i < 0 {
            match self {
                Boundary::Reflect => -i - 1,
                Boundary::Circular => i + len,
            }
        } else if i >= len {
            match self {
                Boundary::Reflect => 2 * len - i - 1,
                Boundary::Circular => i - len,
            }
        } else {
            i
        };
        mapped as usize
    }
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reflect" => Ok(Boundary::Reflect),
            "circular" => Ok(Boundary::Circular),
            other => Err(Error::invalid(format!(
                "unknown boundary mode `{other}` (expected `reflect` or `circular`)"
            ))),
        }
    }
}

/// Grayscale intensities of one painting, one value per pixel.
///
/// Intensities are nominally in `[0, 255]`; only finiteness is enforced so
/// that scaled or shifted copies remain representable.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pixels: Array2<f64>,
}

impl GrayImage {
    pub fn new(pixels: Array2<f64>) -> Result<Self> {
        if pixels.is_empty() {
            return Err(Error::dimension("image has no pixels"));
        }
        if pixels.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("image contains non-finite intensities"));
        }
        Ok(GrayImage { pixels })
    }

    pub fn rows(&self) -> usize {
        self.pixels.nrows()
    }

    pub fn cols(&self) -> usize {
        self.pixels.ncols()
    }

    pub fn pixels(&self) -> ArrayView2<'_, f64> {
        self.pixels.view()
    }

    pub fn into_pixels(self) -> Array2<f64> {
        self.pixels
    }
}

/// The coefficient matrices of one transform, all shaped like the source image.
#[derive(Debug, Clone)]
pub struct CoefficientStack {
    level: u8,
    matrices: Vec<Array2<f64>>,
}

impl CoefficientStack {
    /// 1 for the plain transform, 2 for the two-level variant.
    pub fn level(&self) -> u8 {
        self.level
    }

    pub fn matrices(&self) -> &[Array2<f64>] {
        &self.matrices
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn into_matrices(self) -> Vec<Array2<f64>> {
        self.matrices
    }
}

/// An image extended by one pixel on every side, ready for repeated filtering.
///
/// Holding the padded copy lets callers pull channels one at a time without
/// ever materialising the whole stack, which matters for multi-megapixel scans.
pub struct Analyzer {
    padded: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl Analyzer {
    pub fn new(image: ArrayView2<'_, f64>, boundary: Boundary) -> Result<Self> {
        let (rows, cols) = image.dim();
        if rows < 3 || cols < 3 {
            return Err(Error::dimension(format!(
                "image is {rows}x{cols}, smaller than the 3x3 filter support"
            )));
        }
        let stride = cols + 2;
        let mut padded = vec![0.0; (rows + 2) * stride];
        for pr in 0..rows + 2 {
            let r = boundary.index(pr as isize - 1, rows);
            let src = image.row(r);
            let dst = &mut padded[pr * stride..(pr + 1) * stride];
            dst[0] = src[boundary.index(-1, cols)];
            for (d, &s) in dst[1..=cols].iter_mut().zip(src.iter()) {
                *d = s;
            }
            dst[cols + 1] = src[boundary.index(cols as isize, cols)];
        }
        Ok(Analyzer { padded, rows, cols })
    }

    pub fn dim(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Convolves with `kernel`, writing into `out` (reshaped if needed).
    pub fn channel_into(&self, kernel: &Kernel, out: &mut Array2<f64>) {
        if out.dim() != (self.rows, self.cols) {
            *out = Array2::zeros((self.rows, self.cols));
        }
        let taps = kernel.taps();
        let stride = self.cols + 2;
        let cols = self.cols;
        for (r, mut out_row) in out.rows_mut().into_iter().enumerate() {
            let out_row = out_row
                .as_slice_mut()
                .expect("freshly allocated arrays are contiguous");
            out_row.fill(0.0);
            // out(r, c) = Σ k(i, j) · x(r + 1 - i, c + 1 - j); in padded
            // coordinates the source pixel is (r + 2 - i, c + 2 - j).
            for &(i, j, w) in &taps {
                let start = (r + 2 - i) * stride + (2 - j);
                let src = &self.padded[start..start + cols];
                for (o, &s) in out_row.iter_mut().zip(src) {
                    *o += w * s;
                }
            }
        }
    }

    pub fn channel(&self, kernel: &Kernel) -> Array2<f64> {
        let mut out = Array2::zeros((self.rows, self.cols));
        self.channel_into(kernel, &mut out);
        out
    }
}

/// One-level analysis: the 18 coefficient matrices of `image`.
pub fn analyze(image: &GrayImage, boundary: Boundary) -> Result<CoefficientStack> {
    let analyzer = Analyzer::new(image.pixels(), boundary)?;
    let matrices = filter_bank().iter().map(|k| analyzer.channel(k)).collect();
    Ok(CoefficientStack { level: 1, matrices })
}

/// Two-level undecimated analysis.
///
/// Channels 0–16 are `τ1 … τ17` applied to the image; channels 17–34 are
/// `τ0 … τ17` applied to the level-1 low-pass output.
pub fn analyze_two_level(image: &GrayImage, boundary: Boundary) -> Result<CoefficientStack> {
    let bank = filter_bank();
    let first = Analyzer::new(image.pixels(), boundary)?;
    let mut matrices: Vec<_> = bank[1..].iter().map(|k| first.channel(k)).collect();
    let low = first.channel(&bank[0]);
    let second = Analyzer::new(low.view(), boundary)?;
    matrices.extend(bank.iter().map(|k| second.channel(k)));
    Ok(CoefficientStack { level: 2, matrices })
}
