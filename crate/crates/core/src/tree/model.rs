use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::criterion::{ClassCounts, Criterion};
use super::split::best_split;
use crate::error::{Error, Result};
use crate::market_data::{Label, LabeledDataset};

/// A binary tree node. Children are indices into [`Tree::nodes`].
#[derive(Debug, Clone, PartialEq)]
pub enum Node<L> {
    Internal {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf(L),
}

/// Binary decision tree with leaf payload `L`, stored in preorder with the
/// root at index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree<L> {
    n_features: usize,
    nodes: Vec<Node<L>>,
}

impl<L> Tree<L> {
    pub fn single_leaf(n_features: usize, payload: L) -> Self {
        Tree {
            n_features,
            nodes: vec![Node::Leaf(payload)],
        }
    }

    /// Checks that `nodes` form one binary tree rooted at 0 and that every
    /// split feature exists.
    pub fn from_nodes(n_features: usize, nodes: Vec<Node<L>>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::invalid("tree has no nodes"));
        }
        let mut parents = vec![0usize; nodes.len()];
        for (id, node) in nodes.iter().enumerate() {
            if let Node::Internal {
                feature,
                threshold,
                left,
                right,
            } = *node
            {
                if feature >= n_features {
                    return Err(Error::invalid(format!(
                        "node {id} splits on feature {feature} but the tree has {n_features}"
                    )));
                }
                if !threshold.is_finite() {
                    return Err(Error::invalid(format!(
                        "node {id} has a non-finite threshold"
                    )));
                }
                for child in [left, right] {
                    if child == 0 || child >= nodes.len() || child == id {
                        return Err(Error::invalid(format!(
                            "node {id} has invalid child {child}"
                        )));
                    }
                    parents[child] += 1;
                }
            }
        }
        if parents[0] != 0 || parents[1..].iter().any(|&p| p != 1) {
            return Err(Error::invalid("nodes do not form a single binary tree"));
        }
        let tree = Tree { n_features, nodes };
        // every node reachable from the root rules out detached cycles
        let mut seen = 0;
        let mut stack = vec![0];
        while let Some(id) = stack.pop() {
            seen += 1;
            if let Node::Internal { left, right, .. } = tree.nodes[id] {
                stack.extend([left, right]);
            }
        }
        if seen != tree.nodes.len() {
            return Err(Error::invalid("nodes do not form a single binary tree"));
        }
        Ok(tree)
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn nodes(&self) -> &[Node<L>] {
        &self.nodes
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf(_)))
            .count()
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        let mut deepest = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((id, d)) = stack.pop() {
            deepest = deepest.max(d);
            if let Node::Internal { left, right, .. } = self.nodes[id] {
                stack.push((left, d + 1));
                stack.push((right, d + 1));
            }
        }
        deepest
    }

    fn check_schema(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_features {
            return Err(Error::SchemaMismatch {
                expected: self.n_features,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Node ids visited from the root to the leaf reached by `x`.
    /// `x[feature] ≤ threshold` goes left.
    pub fn path(&self, x: &[f64]) -> Result<Vec<usize>> {
        self.check_schema(x)?;
        let mut path = vec![0];
        let mut id = 0;
        while let Node::Internal {
            feature,
            threshold,
            left,
            right,
        } = self.nodes[id]
        {
            id = if x[feature] <= threshold { left } else { right };
            path.push(id);
        }
        Ok(path)
    }

    pub fn leaf_index(&self, x: &[f64]) -> Result<usize> {
        self.check_schema(x)?;
        let mut id = 0;
        while let Node::Internal {
            feature,
            threshold,
            left,
            right,
        } = self.nodes[id]
        {
            id = if x[feature] <= threshold { left } else { right };
        }
        Ok(id)
    }

    pub fn leaf(&self, x: &[f64]) -> Result<&L> {
        match &self.nodes[self.leaf_index(x)?] {
            Node::Leaf(payload) => Ok(payload),
            Node::Internal { .. } => unreachable!("routing stops at leaves"),
        }
    }

    pub fn leaves_mut(&mut self) -> impl Iterator<Item = (usize, &mut L)> {
        self.nodes
            .iter_mut()
            .enumerate()
            .filter_map(|(id, n)| match n {
                Node::Leaf(payload) => Some((id, payload)),
                Node::Internal { .. } => None,
            })
    }

    pub fn map_leaves<M>(self, mut f: impl FnMut(usize, L) -> M) -> Tree<M> {
        let nodes = self
            .nodes
            .into_iter()
            .enumerate()
            .map(|(id, n)| match n {
                Node::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => Node::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                },
                Node::Leaf(payload) => Node::Leaf(f(id, payload)),
            })
            .collect();
        Tree {
            n_features: self.n_features,
            nodes,
        }
    }
}

/// Greedy top-down growth shared by classification and regression trees.
///
/// `choose` returns the split for a node's rows at a given depth, or `None`
/// to make a leaf; `make_leaf` builds the leaf payload.
pub(crate) fn grow<L>(
    data: &LabeledDataset,
    rows: Vec<usize>,
    mut choose: impl FnMut(&[usize], usize) -> Option<(usize, f64)>,
    mut make_leaf: impl FnMut(&[usize]) -> L,
) -> Tree<L> {
    struct Task {
        rows: Vec<usize>,
        depth: usize,
        parent: Option<(usize, bool)>,
    }
    let mut nodes: Vec<Node<L>> = Vec::new();
    let mut stack = vec![Task {
        rows,
        depth: 0,
        parent: None,
    }];
    while let Some(task) = stack.pop() {
        let id = nodes.len();
        if let Some((parent, is_left)) = task.parent {
            if let Node::Internal { left, right, .. } = &mut nodes[parent] {
                *(if is_left { left } else { right }) = id;
            }
        }
        match choose(&task.rows, task.depth) {
            Some((feature, threshold)) => {
                let (l, r): (Vec<usize>, Vec<usize>) = task
                    .rows
                    .iter()
                    .partition(|&&i| data.row(i)[feature] <= threshold);
                nodes.push(Node::Internal {
                    feature,
                    threshold,
                    left: 0,
                    right: 0,
                });
                stack.push(Task {
                    rows: r,
                    depth: task.depth + 1,
                    parent: Some((id, false)),
                });
                stack.push(Task {
                    rows: l,
                    depth: task.depth + 1,
                    parent: Some((id, true)),
                });
            }
            None => nodes.push(Node::Leaf(make_leaf(&task.rows))),
        }
    }
    Tree {
        n_features: data.n_features(),
        nodes,
    }
}

/// Leaf of a classification tree: predicted label and training class counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassLeaf {
    pub label: Label,
    pub counts: ClassCounts,
}

impl ClassLeaf {
    pub fn from_counts(counts: ClassCounts) -> Self {
        ClassLeaf {
            label: counts.majority(),
            counts,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeHyperparams {
    pub criterion: Criterion,
    /// Use [`TreeHyperparams::UNLIMITED_DEPTH`] for no limit.
    pub max_depth: usize,
    pub min_samples_split: usize,
    /// Fraction of features offered to each node, in (0, 1].
    pub feature_fraction: f64,
}

impl Default for TreeHyperparams {
    fn default() -> Self {
        TreeHyperparams {
            criterion: Criterion::Gini,
            max_depth: 8,
            min_samples_split: 2,
            feature_fraction: 1.0,
        }
    }
}

impl TreeHyperparams {
    pub const UNLIMITED_DEPTH: usize = usize::MAX;

    pub fn validate(&self) -> Result<()> {
        if self.max_depth < 1 {
            return Err(Error::invalid("max_depth must be at least 1"));
        }
        if self.min_samples_split < 2 {
            return Err(Error::invalid("min_samples_split must be at least 2"));
        }
        if !(self.feature_fraction > 0.0 && self.feature_fraction <= 1.0) {
            return Err(Error::invalid(format!(
                "feature_fraction must be in (0, 1], got {}",
                self.feature_fraction
            )));
        }
        Ok(())
    }
}

/// Features offered per node: `⌈fraction·d⌉`, at least one.
pub fn subset_size(feature_fraction: f64, n_features: usize) -> usize {
    // guard against 0.3·10 = 3.0000000000000004 rounding up to 4
    let k = (feature_fraction * n_features as f64 - 1e-9).ceil() as usize;
    k.clamp(1, n_features.max(1))
}

/// Trained classification tree.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeModel {
    pub criterion: Criterion,
    pub tree: Tree<ClassLeaf>,
}

/// Grows a classification tree.
///
/// A node becomes a leaf when it reaches `max_depth`, holds fewer than
/// `min_samples_split` rows, is pure, or no threshold exists on the offered
/// features. Otherwise it takes the best split, even at zero gain.
pub fn grow_tree(train: &LabeledDataset, hp: &TreeHyperparams, seed: u64) -> Result<TreeModel> {
    hp.validate()?;
    if train.is_empty() {
        return Err(Error::invalid(
            "cannot grow a tree on an empty training set",
        ));
    }
    let d = train.n_features();
    let k = subset_size(hp.feature_fraction, d);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all: Vec<usize> = (0..d).collect();
    let choose = |rows: &[usize], depth: usize| {
        if depth >= hp.max_depth || rows.len() < hp.min_samples_split {
            return None;
        }
        let offered = if k >= d {
            all.clone()
        } else {
            let mut f = index::sample(&mut rng, d, k).into_vec();
            f.sort_unstable();
            f
        };
        best_split(train, rows, &offered, hp.criterion).map(|s| (s.feature_index, s.threshold))
    };
    let leaf = |rows: &[usize]| {
        ClassLeaf::from_counts(ClassCounts::of(rows.iter().map(|&r| train.label(r))))
    };
    let tree = grow(train, (0..train.len()).collect(), choose, leaf);
    Ok(TreeModel {
        criterion: hp.criterion,
        tree,
    })
}

impl TreeModel {
    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        Ok(self.tree.leaf(x)?.label)
    }

    pub fn n_features(&self) -> usize {
        self.tree.n_features()
    }
}

pub fn predict(model: &TreeModel, x: &[f64]) -> Result<Label> {
    model.predict(x)
}
