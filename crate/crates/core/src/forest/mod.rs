//! Bagged random-subspace forests with majority voting and impurity-based
//! feature importance.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::market_data::{Label, LabeledDataset};
use crate::seed::derive_seed;
use crate::tree::{
    grow_tree, header_value, parse_error, parse_header, ClassCounts, ModelLines, Node,
    TreeHyperparams, TreeModel,
};

/// `⌈√d⌉ / d`, the customary per-node feature fraction for forests.
pub fn default_feature_fraction(n_features: usize) -> f64 {
    if n_features == 0 {
        return 1.0;
    }
    (n_features as f64).sqrt().ceil() / n_features as f64
}

/// `N` rows drawn with replacement.
pub fn bootstrap_sample(train: &LabeledDataset, seed: u64) -> Result<LabeledDataset> {
    Ok(train.subset(&bootstrap_indices(train.len(), seed)?))
}

fn bootstrap_indices(n: usize, seed: u64) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::invalid("cannot bootstrap an empty dataset"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| rng.random_range(0..n)).collect())
}

/// Seed used for tree `k` of a forest trained with `seed`.
pub fn tree_seed(seed: u64, k: usize) -> u64 {
    derive_seed(seed, k as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub trees: Vec<TreeModel>,
    pub bootstrap: bool,
    pub feature_fraction: f64,
}

/// Trains `n_trees` trees in parallel. Tree `k` sees a bootstrap resample
/// (or the full set) and uses its own seed, so results do not depend on
/// scheduling.
pub fn train_forest(
    train: &LabeledDataset,
    n_trees: usize,
    tree_hp: &TreeHyperparams,
    bootstrap: bool,
    seed: u64,
) -> Result<ForestModel> {
    if n_trees == 0 {
        return Err(Error::invalid("a forest needs at least one tree"));
    }
    tree_hp.validate()?;
    if train.is_empty() {
        return Err(Error::invalid(
            "cannot train a forest on an empty training set",
        ));
    }
    let trees = (0..n_trees)
        .into_par_iter()
        .map(|k| {
            let s = tree_seed(seed, k);
            if bootstrap {
                let sample = bootstrap_sample(train, derive_seed(s, 0))?;
                grow_tree(&sample, tree_hp, derive_seed(s, 1))
            } else {
                grow_tree(train, tree_hp, derive_seed(s, 1))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ForestModel {
        trees,
        bootstrap,
        feature_fraction: tree_hp.feature_fraction,
    })
}

impl ForestModel {
    /// Wraps already-grown trees, which must share one schema.
    pub fn from_trees(
        trees: Vec<TreeModel>,
        bootstrap: bool,
        feature_fraction: f64,
    ) -> Result<Self> {
        let Some(first) = trees.first() else {
            return Err(Error::invalid("a forest needs at least one tree"));
        };
        let d = first.n_features();
        if let Some(bad) = trees.iter().find(|t| t.n_features() != d) {
            return Err(Error::SchemaMismatch {
                expected: d,
                found: bad.n_features(),
            });
        }
        Ok(ForestModel {
            trees,
            bootstrap,
            feature_fraction,
        })
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn n_features(&self) -> usize {
        self.trees[0].n_features()
    }

    /// Number of trees voting for an increase, out of [`ForestModel::n_trees`].
    pub fn votes_up(&self, x: &[f64]) -> Result<usize> {
        let mut up = 0;
        for t in &self.trees {
            up += (t.predict(x)? == Label::Up) as usize;
        }
        Ok(up)
    }

    /// Majority vote; an exact tie predicts a decrease.
    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        let up = self.votes_up(x)?;
        Ok(if 2 * up > self.trees.len() {
            Label::Up
        } else {
            Label::Down
        })
    }

    pub fn write<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(
            out,
            "forest v1 n_trees={} bootstrap={} feature_fraction={:?}",
            self.trees.len(),
            self.bootstrap as u8,
            self.feature_fraction
        )?;
        for t in &self.trees {
            t.write(out)?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("model text is ascii")
    }

    pub(crate) fn read_from(lines: &mut ModelLines<'_>) -> Result<Self> {
        let (line, header) = parse_header(
            lines,
            "forest",
            &["n_trees", "bootstrap", "feature_fraction"],
        )?;
        let n: usize = header_value(&header, "n_trees", line)?;
        let bootstrap = match header["bootstrap"].as_str() {
            "0" => false,
            "1" => true,
            other => {
                return Err(parse_error(
                    line,
                    format!("bootstrap must be 0 or 1, got `{other}`"),
                ))
            }
        };
        let feature_fraction: f64 = header_value(&header, "feature_fraction", line)?;
        let trees = (0..n)
            .map(|_| TreeModel::read_from(lines))
            .collect::<Result<Vec<_>>>()?;
        ForestModel::from_trees(trees, bootstrap, feature_fraction)
            .map_err(|e| parse_error(line, e.to_string()))
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = ModelLines::new(text);
        let model = Self::read_from(&mut lines)?;
        lines.expect_end()?;
        Ok(model)
    }
}

pub fn predict_majority(model: &ForestModel, x: &[f64]) -> Result<Label> {
    model.predict(x)
}

/// Class counts of `data` routed through every node of `tree`.
pub fn routed_counts(tree: &TreeModel, data: &LabeledDataset) -> Result<Vec<ClassCounts>> {
    let mut counts = vec![ClassCounts::default(); tree.tree.nodes().len()];
    for r in 0..data.len() {
        for id in tree.tree.path(data.row(r))? {
            counts[id].add(data.label(r));
        }
    }
    Ok(counts)
}

/// Weighted impurity decrease of each internal node,
/// `w·N − w_left·N_left − w_right·N_right`, where `w` is the fraction of the
/// routed rows reaching a node and `N` its impurity. Leaves map to `None`.
pub fn node_importances(tree: &TreeModel, data: &LabeledDataset) -> Result<Vec<Option<f64>>> {
    let counts = routed_counts(tree, data)?;
    let total = data.len() as f64;
    let weighted =
        |id: usize| counts[id].total() as f64 / total * tree.criterion.impurity(counts[id]);
    Ok(tree
        .tree
        .nodes()
        .iter()
        .enumerate()
        .map(|(id, node)| match *node {
            Node::Internal { left, right, .. } => {
                Some(weighted(id) - weighted(left) - weighted(right))
            }
            Node::Leaf(_) => None,
        })
        .collect())
}

/// Per-feature importance scores, nonnegative and summing to 1 unless all zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceReport {
    pub scores: Vec<f64>,
}

impl ImportanceReport {
    /// Feature indices by decreasing score; ties keep index order.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.scores.len()).collect();
        idx.sort_by(|&a, &b| self.scores[b].total_cmp(&self.scores[a]));
        idx
    }
}

/// Per-tree node decreases summed by split feature, averaged over trees and
/// normalized. Negative node values, which routing the full training set
/// through a bootstrap-grown tree can produce, count as zero.
pub fn feature_importance(model: &ForestModel, train: &LabeledDataset) -> Result<ImportanceReport> {
    if train.is_empty() {
        return Err(Error::invalid("feature importance needs training rows"));
    }
    let d = model.n_features();
    let per_tree = model
        .trees
        .iter()
        .map(|t| {
            let imps = node_importances(t, train)?;
            let mut scores = vec![0.0; d];
            for (node, imp) in t.tree.nodes().iter().zip(imps) {
                if let (Node::Internal { feature, .. }, Some(v)) = (node, imp) {
                    scores[*feature] += v.max(0.0);
                }
            }
            Ok(scores)
        })
        .collect::<Result<Vec<_>>>()?;
    let n = per_tree.len() as f64;
    let mut scores: Vec<f64> = (0..d)
        .map(|f| {
            // summing in sorted order makes the result independent of tree order
            let mut column: Vec<f64> = per_tree.iter().map(|s| s[f]).collect();
            column.sort_by(f64::total_cmp);
            column.iter().sum::<f64>() / n
        })
        .collect();
    let total: f64 = scores.iter().sum();
    if total > 0.0 {
        scores.iter_mut().for_each(|s| *s /= total);
    }
    Ok(ImportanceReport { scores })
}
