//! Brute-force oracles and small fixtures for the classifiers.

use qrm_forecast::market_data::{Label, LabeledDataset};
use qrm_forecast::tree::{ClassCounts, Criterion};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn data(rows: Vec<Vec<f64>>, labels: &[i64]) -> LabeledDataset {
    let labels = labels
        .iter()
        .map(|&l| Label::from_signed(l).unwrap())
        .collect();
    LabeledDataset::from_rows(rows, labels).unwrap()
}

/// x = 1, 2, 3, 4 labeled −1, −1, +1, +1.
pub fn separable() -> LabeledDataset {
    data(
        vec![vec![1.0], vec![2.0], vec![3.0], vec![4.0]],
        &[-1, -1, 1, 1],
    )
}

/// The four corners of the unit square labeled by parity.
pub fn xor() -> LabeledDataset {
    data(
        vec![
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
        ],
        &[-1, 1, 1, -1],
    )
}

/// Random table whose features take few distinct values, so ties and
/// repeated values are common.
pub fn random_table(rng: &mut ChaCha8Rng, max_rows: usize, max_features: usize) -> LabeledDataset {
    let n = rng.random_range(2..=max_rows);
    let d = rng.random_range(1..=max_features);
    let levels = rng.random_range(1..=6);
    let p_up: f64 = rng.random_range(0.1..0.9);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..d)
                .map(|_| rng.random_range(0..levels) as f64 * 0.25)
                .collect()
        })
        .collect();
    let labels: Vec<i64> = (0..n)
        .map(|_| if rng.random_bool(p_up) { 1 } else { -1 })
        .collect();
    data(rows, &labels)
}

/// Noisy labels driven by the first feature, with `d` features in total.
pub fn noisy_table(rng: &mut ChaCha8Rng, n: usize, d: usize) -> LabeledDataset {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let labels: Vec<i64> = rows
        .iter()
        .map(|r: &Vec<f64>| {
            let score = r[0] + 0.5 * rng.random_range(-1.0..1.0);
            if score > 0.0 {
                1
            } else {
                -1
            }
        })
        .collect();
    data(rows, &labels)
}

/// Best split found by scoring every (feature, threshold) pair on its own.
/// Returns `(feature, threshold, gain)`; the first strictly larger gain wins.
pub fn brute_force_split(
    data: &LabeledDataset,
    rows: &[usize],
    features: &[usize],
    criterion: Criterion,
) -> Option<(usize, f64, f64)> {
    let parent = ClassCounts::of(rows.iter().map(|&r| data.label(r)));
    if rows.len() < 2 || parent.n_pos == 0 || parent.n_neg == 0 {
        return None;
    }
    let mut features = features.to_vec();
    features.sort_unstable();
    features.dedup();
    let mut best: Option<(usize, f64, f64)> = None;
    for f in features {
        let mut values: Vec<f64> = rows.iter().map(|&r| data.row(r)[f]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for pair in values.windows(2) {
            let t = (pair[0] + pair[1]) / 2.0;
            let left = ClassCounts::of(
                rows.iter()
                    .filter(|&&r| data.row(r)[f] <= t)
                    .map(|&r| data.label(r)),
            );
            let right = ClassCounts::of(
                rows.iter()
                    .filter(|&&r| data.row(r)[f] > t)
                    .map(|&r| data.label(r)),
            );
            let gain = criterion.split_gain(parent, left, right);
            if best.is_none_or(|b| gain > b.2) {
                best = Some((f, t, gain));
            }
        }
    }
    best
}

/// Two-class entropy in bits, written out independently.
pub fn entropy_bits(n_pos: usize, n_neg: usize) -> f64 {
    let n = (n_pos + n_neg) as f64;
    [n_pos, n_neg]
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// Two-class Gini impurity, written out independently.
pub fn gini_index(n_pos: usize, n_neg: usize) -> f64 {
    let n = (n_pos + n_neg) as f64;
    let (p, q) = (n_pos as f64 / n, n_neg as f64 / n);
    1.0 - p * p - q * q
}

/// Total log-loss of a constant log-odds `g` for the given class counts.
pub fn constant_loss(n_pos: usize, n_neg: usize, g: f64) -> f64 {
    // log(1 + e^z), stable for large |z|
    let softplus = |z: f64| {
        if z > 0.0 {
            z + (-z).exp().ln_1p()
        } else {
            z.exp().ln_1p()
        }
    };
    n_pos as f64 * softplus(-g) + n_neg as f64 * softplus(g)
}

/// Minimizes a unimodal function on `[lo, hi]` by repeatedly refining a
/// uniform grid around its best point.
pub fn grid_minimize(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let points = 400;
    let mut best = lo;
    for _ in 0..12 {
        let step = (hi - lo) / points as f64;
        best = (0..=points)
            .map(|k| lo + k as f64 * step)
            .min_by(|a, b| f(*a).total_cmp(&f(*b)))
            .unwrap();
        lo = best - step;
        hi = best + step;
    }
    best
}
