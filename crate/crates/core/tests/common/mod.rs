//! Reference implementations and fixtures shared by the integration tests.
//!
//! Every oracle here is written independently of the library code path it
//! checks: plain nested loops, pair counting and exhaustive enumeration.

#![allow(dead_code)]

use framestylo::{Boundary, Label, TrainingSet};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(rng: &mut impl Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.gen_range(0.0..255.0))
}

fn wrap(i: isize, len: usize, boundary: Boundary) -> usize {
    let n = len as isize;
    let j = match boundary {
        Boundary::Circular => i.rem_euclid(n),
        Boundary::Reflect => {
            if i < 0 {
                -i - 1
            } else if i >= n {
                2 * n - i - 1
            } else {
                i
            }
        }
    };
    j as usize
}

/// out(r, c) = Σ_{a, b ∈ {-1, 0, 1}} k(a + 1, b + 1) · x(r - a, c - b)
pub fn convolve_reference(x: &Array2<f64>, k: &[[f64; 3]; 3], boundary: Boundary) -> Array2<f64> {
    let (m, n) = x.dim();
    let mut out = Array2::zeros((m, n));
    for r in 0..m {
        for c in 0..n {
            let mut acc = 0.0;
            for a in -1isize..=1 {
                for b in -1isize..=1 {
                    let rr = wrap(r as isize - a, m, boundary);
                    let cc = wrap(c as isize - b, n, boundary);
                    acc += k[(a + 1) as usize][(b + 1) as usize] * x[[rr, cc]];
                }
            }
            out[[r, c]] = acc;
        }
    }
    out
}

/// (mean, std with N-1, fraction of entries strictly beyond one std)
pub fn stats_reference(x: &Array2<f64>) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mut sum = 0.0;
    for v in x.iter() {
        sum += v;
    }
    let mean = sum / n;
    let mut ss = 0.0;
    for v in x.iter() {
        ss += (v - mean) * (v - mean);
    }
    let std = (ss / (n - 1.0)).sqrt();
    let mut tails = 0usize;
    for v in x.iter() {
        if (v - mean).abs() > std {
            tails += 1;
        }
    }
    (mean, std, tails as f64 / n)
}

/// Mann–Whitney: P(d_genuine < d_imitation) + ½ P(tie), by pair counting.
pub fn auc_pairs(d: &[f64], labels: &[Label]) -> f64 {
    let mut twice = 0u64;
    let mut pairs = 0u64;
    for (i, li) in labels.iter().enumerate() {
        if *li != Label::Genuine {
            continue;
        }
        for (j, lj) in labels.iter().enumerate() {
            if *lj != Label::Imitation {
                continue;
            }
            pairs += 1;
            if d[i] < d[j] {
                twice += 2;
            } else if d[i] == d[j] {
                twice += 1;
            }
        }
    }
    twice as f64 / (2 * pairs) as f64
}

/// Training accuracy of `d < rho`.
pub fn threshold_accuracy(d: &[f64], labels: &[Label], rho: f64) -> f64 {
    let correct = d
        .iter()
        .zip(labels)
        .filter(|(&di, &l)| (di < rho) == (l == Label::Genuine))
        .count();
    correct as f64 / d.len() as f64
}

/// Every threshold worth trying: below all, each value, each midpoint, above all.
pub fn candidate_thresholds(d: &[f64]) -> Vec<f64> {
    let mut s = d.to_vec();
    s.sort_by(f64::total_cmp);
    let mut out = vec![s[0] - 1.0, s[s.len() - 1] + 1.0];
    out.extend(s.iter().copied());
    out.extend(s.windows(2).map(|w| (w[0] + w[1]) / 2.0));
    out
}

/// Plain normalisation, centre and distance for one subset, from scratch.
pub fn subset_distances(x: &Array2<f64>, labels: &[Label], subset: &[usize]) -> Vec<f64> {
    let (n, _) = x.dim();
    let mut scaled = Vec::new();
    for &f in subset {
        let col: Vec<f64> = (0..n).map(|r| x[[r, f]]).collect();
        let mean = col.iter().sum::<f64>() / n as f64;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let s = if col.iter().all(|&v| v == col[0]) { 1.0 } else { var.sqrt() };
        scaled.push(col.iter().map(|v| v / s).collect::<Vec<_>>());
    }
    let genuine: Vec<usize> = (0..n).filter(|&r| labels[r] == Label::Genuine).collect();
    let center: Vec<f64> = scaled
        .iter()
        .map(|col| genuine.iter().map(|&r| col[r]).sum::<f64>() / genuine.len() as f64)
        .collect();
    (0..n)
        .map(|r| {
            scaled
                .iter()
                .zip(&center)
                .map(|(col, c)| (col[r] - c).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

/// Columns planted as informative in [`planted_experiment`]: the mean of τ3 and the
/// tail fractions of τ16, τ0, τ1 and τ8 in the 54-feature layout.
pub const PLANTED: [usize; 5] = [3, 52, 36, 37, 44];

/// 64 genuine rows tightly clustered (sd 0.1) in the planted columns and 15
/// imitation rows displaced from them. Each imitation strays far in one planted
/// column (rotating through them) and is shifted by ±0.15 in the other four, so
/// every planted column keeps adding separation. The remaining 49 columns are
/// label-independent standard normal noise.
pub fn planted_experiment(seed: u64) -> TrainingSet {
    let mut rng = rng(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let n_genuine = 64;
    let n = 79;
    let mut x = Array2::zeros((n, 54));
    let mut labels = Vec::with_capacity(n);
    for r in 0..n {
        let genuine = r < n_genuine;
        labels.push(if genuine { Label::Genuine } else { Label::Imitation });
        for c in 0..54 {
            x[[r, c]] = noise.sample(&mut rng);
        }
        for (p, &c) in PLANTED.iter().enumerate() {
            let v: f64 = noise.sample(&mut rng);
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            x[[r, c]] = if genuine {
                0.1 * v
            } else if (r - n_genuine) % PLANTED.len() == p {
                sign * (1.0 + 0.5 * v.abs())
            } else {
                sign * 0.15 + 0.1 * v
            };
        }
    }
    let ids = (0..n).map(|i| format!("s{i:02}")).collect();
    TrainingSet::new(x, labels, ids).unwrap()
}

/// Small random dataset with a few informative columns.
pub fn small_fixture(seed: u64, n_genuine: usize, n_imitation: usize, dim: usize) -> TrainingSet {
    let mut rng = rng(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let n = n_genuine + n_imitation;
    let mut labels = vec![Label::Genuine; n_genuine];
    labels.extend(vec![Label::Imitation; n_imitation]);
    let x = Array2::from_shape_fn((n, dim), |(r, c)| {
        let v: f64 = noise.sample(&mut rng);
        if c % 3 == 0 && r >= n_genuine {
            2.5 * v + 1.0
        } else {
            v
        }
    });
    TrainingSet::new(x, labels, (0..n).map(|i| format!("p{i}")).collect()).unwrap()
}
