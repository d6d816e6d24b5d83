//! Classification trees: impurity criteria, exhaustive split search, greedy
//! growth and a line-oriented text format.

mod codec;
mod criterion;
mod model;
mod split;

pub use codec::LeafCodec;
pub(crate) use codec::{header_value, parse_error, parse_field, parse_header, ModelLines};
pub use criterion::{entropy, gini, information_gain, ClassCounts, Criterion};
pub(crate) use model::grow;
pub use model::{
    grow_tree, predict, subset_size, ClassLeaf, Node, Tree, TreeHyperparams, TreeModel,
};
pub use split::{best_split, midpoint, SplitCandidate};
