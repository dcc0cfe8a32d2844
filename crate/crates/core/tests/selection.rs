mod common;

use framestylo::selection::class_counts;
use framestylo::{
    auc, distances, feature_frequencies, forward_select, normalize_columns, vg_center, Label,
    SelectionConfig,
};
use ndarray::Array2;
use proptest::prelude::*;
use rand::Rng;
use Label::{Genuine as G, Imitation as I};

fn random_labels(rng: &mut impl Rng, n: usize) -> Vec<Label> {
    let mut labels: Vec<Label> = (0..n).map(|_| if rng.gen_bool(0.6) { G } else { I }).collect();
    labels[0] = G;
    labels[1] = G;
    labels[n - 1] = I;
    labels
}

fn genuine(labels: &[Label]) -> Vec<usize> {
    (0..labels.len()).filter(|&r| labels[r] == G).collect()
}

fn subset_auc(x: &Array2<f64>, labels: &[Label], subset: &[usize]) -> f64 {
    let xn = normalize_columns(x.view()).unwrap();
    let c = vg_center(&xn, &genuine(labels), subset).unwrap();
    auc(&distances(&xn, subset, &c).unwrap(), labels).unwrap()
}

#[test]
fn auc_equals_pair_counting_with_ties() {
    let mut rng = common::rng(200);
    for case in 0..200 {
        let n = rng.gen_range(3..=50);
        let labels = random_labels(&mut rng, n);
        // coarse grids force ties within and across classes
        let levels = if case % 2 == 0 { 4 } else { 1000 };
        let d: Vec<f64> = (0..n).map(|_| rng.gen_range(0..levels) as f64 * 0.25).collect();
        assert_eq!(auc(&d, &labels).unwrap(), common::auc_pairs(&d, &labels), "case {case}");
    }
}

#[test]
fn auc_edge_cases() {
    assert_eq!(auc(&[1.0, 2.0, 3.0], &[G, G, I]).unwrap(), 1.0);
    assert_eq!(auc(&[3.0, 2.0, 1.0], &[G, G, I]).unwrap(), 0.0);
    assert_eq!(auc(&[1.0, 1.0, 1.0, 1.0], &[G, I, G, I]).unwrap(), 0.5);
    assert!(auc(&[1.0, 2.0], &[G, G]).is_err());
    assert!(auc(&[1.0], &[G, I]).is_err());
}

proptest! {
    #[test]
    fn swapping_classes_complements_auc(seed in any::<u64>(), n in 3usize..40) {
        let mut rng = common::rng(seed);
        let labels = random_labels(&mut rng, n);
        let d: Vec<f64> = (0..n).map(|_| rng.gen_range(0..8) as f64).collect();
        let flipped: Vec<Label> = labels.iter().map(|&l| if l == G { I } else { G }).collect();
        let a = auc(&d, &labels).unwrap();
        let b = auc(&d, &flipped).unwrap();
        prop_assert!((a + b - 1.0).abs() < 1e-15);
    }

    #[test]
    fn auc_ignores_monotone_rescaling(seed in any::<u64>(), n in 3usize..40) {
        let mut rng = common::rng(seed);
        let labels = random_labels(&mut rng, n);
        let d: Vec<f64> = (0..n).map(|_| rng.gen_range(0..10) as f64).collect();
        let squashed: Vec<f64> = d.iter().map(|v| (v * 0.3).exp() + 2.0).collect();
        prop_assert_eq!(auc(&d, &labels).unwrap(), auc(&squashed, &labels).unwrap());
    }

    // each pick beats every remaining candidate, and every candidate that ties
    // it has a larger index
    #[test]
    fn every_greedy_step_is_optimal(seed in any::<u64>(), f in 2usize..=12, n in 6usize..30) {
        let mut rng = common::rng(seed);
        let labels = random_labels(&mut rng, n);
        let x = Array2::from_shape_fn((n, f), |(_, c)| {
            if c % 4 == 1 { rng.gen_range(0..3) as f64 } else { rng.gen_range(-1.0..1.0) }
        });
        let k = rng.gen_range(1..=f.min(5));
        let xn = normalize_columns(x.view()).unwrap();
        let sel = forward_select(&xn, &labels, SelectionConfig { k, exclude_degenerate: false }).unwrap();
        prop_assert_eq!(sel.indices.len(), k);
        for step in 0..k {
            let prefix = &sel.indices[..step];
            let chosen = sel.indices[step];
            let mut with_chosen = prefix.to_vec();
            with_chosen.push(chosen);
            prop_assert_eq!(subset_auc(&x, &labels, &with_chosen), sel.auc_trace[step]);
            for cand in (0..f).filter(|c| !prefix.contains(c) && *c != chosen) {
                let mut s = prefix.to_vec();
                s.push(cand);
                let a = subset_auc(&x, &labels, &s);
                prop_assert!(a < sel.auc_trace[step] || (a == sel.auc_trace[step] && cand > chosen));
            }
        }
    }

    #[test]
    fn incremental_distances_match_the_from_scratch_oracle(seed in any::<u64>(), f in 3usize..10, n in 6usize..25) {
        let mut rng = common::rng(seed);
        let labels = random_labels(&mut rng, n);
        let x = Array2::from_shape_fn((n, f), |_| rng.gen_range(-5.0..5.0));
        let xn = normalize_columns(x.view()).unwrap();
        let sel = forward_select(&xn, &labels, SelectionConfig { k: 3, exclude_degenerate: false }).unwrap();
        let want = common::subset_distances(&x, &labels, &sel.indices);
        let c = vg_center(&xn, &genuine(&labels), &sel.indices).unwrap();
        let got = distances(&xn, &sel.indices, &c).unwrap();
        for (a, b) in got.iter().zip(&want) {
            prop_assert!((a - b).abs() < 1e-12 * (1.0 + b));
        }
    }

    #[test]
    fn negating_a_column_changes_nothing(seed in any::<u64>(), f in 2usize..10, n in 6usize..25) {
        let mut rng = common::rng(seed);
        let labels = random_labels(&mut rng, n);
        let x = Array2::from_shape_fn((n, f), |_| rng.gen_range(-5.0..5.0));
        let col = rng.gen_range(0..f);
        let mut y = x.clone();
        y.column_mut(col).mapv_inplace(|v| -v);
        let cfg = SelectionConfig { k: f.min(3), exclude_degenerate: false };
        let a = forward_select(&normalize_columns(x.view()).unwrap(), &labels, cfg).unwrap();
        let b = forward_select(&normalize_columns(y.view()).unwrap(), &labels, cfg).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn greedy_never_beats_and_first_pick_matches_exhaustive_search() {
    let mut rng = common::rng(6);
    let mut worst_gap = 0.0f64;
    for _ in 0..60 {
        let f = rng.gen_range(2..=6);
        let n = rng.gen_range(8..20);
        let labels = random_labels(&mut rng, n);
        let x = Array2::from_shape_fn((n, f), |_| rng.gen_range(-1.0..1.0));
        let xn = normalize_columns(x.view()).unwrap();
        for k in 1..=f.min(3) {
            let sel = forward_select(&xn, &labels, SelectionConfig { k, exclude_degenerate: false }).unwrap();
            let mut best = 0.0f64;
            for mask in 0u32..(1 << f) {
                if mask.count_ones() as usize != k {
                    continue;
                }
                let s: Vec<usize> = (0..f).filter(|b| mask & (1 << b) != 0).collect();
                best = best.max(subset_auc(&x, &labels, &s));
            }
            let greedy = *sel.auc_trace.last().unwrap();
            assert!(greedy <= best + 1e-15);
            if k == 1 {
                assert_eq!(greedy, best);
            }
            worst_gap = worst_gap.max(best - greedy);
        }
    }
    println!("largest greedy shortfall against exhaustive search: {worst_gap:.4}");
}

#[test]
fn planted_separating_column_is_picked_first() {
    let mut rng = common::rng(7);
    let n = 30;
    let labels: Vec<Label> = (0..n).map(|r| if r < 20 { G } else { I }).collect();
    let mut x = Array2::from_shape_fn((n, 12), |_| rng.gen_range(-1.0..1.0));
    for r in 0..n {
        x[[r, 7]] = if r < 20 { rng.gen_range(-0.1..0.1) } else { 5.0 + rng.gen::<f64>() };
    }
    let sel = forward_select(&normalize_columns(x.view()).unwrap(), &labels, SelectionConfig::default()).unwrap();
    assert_eq!(sel.indices[0], 7);
    assert_eq!(sel.auc_trace[0], 1.0);

    let mut twin = x.clone();
    for r in 0..n {
        twin[[r, 3]] = x[[r, 7]];
        twin[[r, 9]] = x[[r, 7]];
    }
    let sel = forward_select(&normalize_columns(twin.view()).unwrap(), &labels, SelectionConfig { k: 1, exclude_degenerate: false }).unwrap();
    assert_eq!(sel.indices, vec![3]);

    let all = forward_select(&normalize_columns(x.view()).unwrap(), &labels, SelectionConfig { k: 12, exclude_degenerate: false }).unwrap();
    let mut idx = all.indices.clone();
    idx.sort();
    assert_eq!(idx, (0..12).collect::<Vec<_>>());
    assert!(forward_select(&normalize_columns(x.view()).unwrap(), &labels, SelectionConfig { k: 13, exclude_degenerate: false }).is_err());
}

#[test]
fn constant_columns_can_be_excluded() {
    let labels = vec![G, G, G, I, I];
    let x = ndarray::arr2(&[[1.0, 0.1], [1.0, 0.2], [1.0, 0.0], [1.0, 0.15], [1.0, 0.05]]);
    let xn = normalize_columns(x.view()).unwrap();
    assert_eq!(xn.degenerate(), &[true, false]);
    assert_eq!(xn.scales()[0], 1.0);
    let keep = forward_select(&xn, &labels, SelectionConfig { k: 1, exclude_degenerate: false }).unwrap();
    // the constant column ties every distance at 0 (AUC 0.5), which beats the
    // second column's 1/3
    assert_eq!(keep.indices, vec![0]);
    assert_eq!(keep.auc_trace, vec![0.5]);
    let skip = forward_select(&xn, &labels, SelectionConfig { k: 1, exclude_degenerate: true }).unwrap();
    assert_eq!(skip.indices, vec![1]);
    assert!(forward_select(&xn, &labels, SelectionConfig { k: 2, exclude_degenerate: true }).is_err());
}

#[test]
fn frequencies_count_and_order() {
    let sets: Vec<Vec<usize>> = vec![vec![3, 1], vec![1, 2], vec![3, 2], vec![3]];
    let table = feature_frequencies(sets.iter().map(Vec::as_slice));
    let pairs: Vec<(usize, usize)> = table.iter().map(|c| (c.index, c.count)).collect();
    assert_eq!(pairs, vec![(3, 3), (1, 2), (2, 2)]);
    let many = vec![vec![3usize]; 79];
    assert_eq!(feature_frequencies(many.iter().map(Vec::as_slice))[0].count, 79);
    assert!(feature_frequencies(std::iter::empty::<&[usize]>()).is_empty());
    assert_eq!(class_counts(&[G, I, G]), (2, 1));
}
