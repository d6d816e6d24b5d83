use super::criterion::{ClassCounts, Criterion};
use crate::market_data::{Label, LabeledDataset};

/// A scored binary split `x[feature] ≤ threshold`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature_index: usize,
    pub threshold: f64,
    pub gain: f64,
    pub left_counts: ClassCounts,
    pub right_counts: ClassCounts,
}

/// Threshold between two consecutive distinct sorted values.
///
/// Always satisfies `lo ≤ t < hi`, so `lo` routes left and `hi` routes right
/// even when the two values are adjacent floats.
pub fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid < hi {
        mid
    } else {
        lo
    }
}

/// Exhaustive search over midpoint thresholds of the allowed features.
///
/// Returns the highest-gain candidate; equal gains keep the lower feature
/// index, then the lower threshold. Zero-gain candidates are returned when the
/// parent is impure, so that parity-style structure (where no single split
/// helps) can still be split. `None` means the parent is pure, there are fewer
/// than two rows, or every allowed feature is constant.
pub fn best_split(
    data: &LabeledDataset,
    rows: &[usize],
    allowed_features: &[usize],
    criterion: Criterion,
) -> Option<SplitCandidate> {
    if rows.len() < 2 {
        return None;
    }
    let parent = ClassCounts::of(rows.iter().map(|&r| data.label(r)));
    if parent.is_pure() {
        return None;
    }
    let mut features = allowed_features.to_vec();
    features.sort_unstable();
    features.dedup();

    let mut best: Option<SplitCandidate> = None;
    let mut column: Vec<(f64, Label)> = Vec::with_capacity(rows.len());
    for feature in features {
        column.clear();
        column.extend(rows.iter().map(|&r| (data.row(r)[feature], data.label(r))));
        column.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut left = ClassCounts::default();
        let mut right = parent;
        for k in 0..column.len() - 1 {
            left.add(column[k].1);
            right.remove(column[k].1);
            let (lo, hi) = (column[k].0, column[k + 1].0);
            if lo == hi {
                continue;
            }
            let gain = criterion.split_gain(parent, left, right);
            if best.is_none_or(|b| gain > b.gain) {
                best = Some(SplitCandidate {
                    feature_index: feature,
                    threshold: midpoint(lo, hi),
                    gain,
                    left_counts: left,
                    right_counts: right,
                });
            }
        }
    }
    best
}
