//! One handle over the three classifier families: training from a parameter
//! set, prediction, and model files whose first word names the family.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::boosting::{train_boosted, BoostHyperparams, BoostedModel};
use crate::error::{Error, Result};
use crate::forest::{train_forest, ForestModel};
use crate::market_data::{Label, LabeledDataset};
use crate::tree::{grow_tree, parse_error, ModelLines, TreeHyperparams, TreeModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelFamily {
    Tree,
    Gbm,
    Forest,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 3] = [ModelFamily::Tree, ModelFamily::Gbm, ModelFamily::Forest];

    pub fn name(self) -> &'static str {
        match self {
            ModelFamily::Tree => "tree",
            ModelFamily::Gbm => "gbm",
            ModelFamily::Forest => "forest",
        }
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tree" => Ok(ModelFamily::Tree),
            "gbm" => Ok(ModelFamily::Gbm),
            "forest" => Ok(ModelFamily::Forest),
            other => Err(Error::invalid(format!(
                "unknown model family `{other}` (expected tree, gbm or forest)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestParams {
    pub n_trees: usize,
    pub bootstrap: bool,
    pub tree: TreeHyperparams,
}

/// Hyperparameters for one family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelParams {
    Tree(TreeHyperparams),
    Gbm(BoostHyperparams),
    Forest(ForestParams),
}

impl ModelParams {
    pub fn family(&self) -> ModelFamily {
        match self {
            ModelParams::Tree(_) => ModelFamily::Tree,
            ModelParams::Gbm(_) => ModelFamily::Gbm,
            ModelParams::Forest(_) => ModelFamily::Forest,
        }
    }

    /// Defaults for a family; forests offer `⌈√d⌉/d` of the features per node.
    pub fn defaults(family: ModelFamily, n_features: usize) -> Self {
        match family {
            ModelFamily::Tree => ModelParams::Tree(TreeHyperparams::default()),
            ModelFamily::Gbm => ModelParams::Gbm(BoostHyperparams::default()),
            ModelFamily::Forest => ModelParams::Forest(ForestParams {
                n_trees: 100,
                bootstrap: true,
                tree: TreeHyperparams {
                    max_depth: 12,
                    feature_fraction: crate::forest::default_feature_fraction(n_features),
                    ..TreeHyperparams::default()
                },
            }),
        }
    }

    /// Sets one named hyperparameter from its text form. Names are shared
    /// with config files and search spaces.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::invalid(format!("bad value `{value}` for `{key}`")))
        }
        fn flag(key: &str, value: &str) -> Result<bool> {
            match value {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                _ => Err(Error::invalid(format!(
                    "bad value `{value}` for `{key}` (expected true/false)"
                ))),
            }
        }
        fn depth(key: &str, value: &str) -> Result<usize> {
            if value == "none" || value == "unlimited" {
                Ok(TreeHyperparams::UNLIMITED_DEPTH)
            } else {
                num(key, value)
            }
        }
        let family = self.family();
        let unknown = || Error::invalid(format!("`{key}` is not a {family} hyperparameter"));
        match self {
            ModelParams::Tree(hp) | ModelParams::Forest(ForestParams { tree: hp, .. }) => match key
            {
                "criterion" => hp.criterion = value.parse()?,
                "max_depth" => hp.max_depth = depth(key, value)?,
                "min_samples_split" => hp.min_samples_split = num(key, value)?,
                "feature_fraction" => hp.feature_fraction = num(key, value)?,
                _ => match self {
                    ModelParams::Forest(f) => match key {
                        "n_trees" | "trees" => f.n_trees = num(key, value)?,
                        "bootstrap" => f.bootstrap = flag(key, value)?,
                        _ => return Err(unknown()),
                    },
                    _ => return Err(unknown()),
                },
            },
            ModelParams::Gbm(hp) => match key {
                "n_stages" | "stages" => hp.n_stages = num(key, value)?,
                "learning_rate" => hp.learning_rate = num(key, value)?,
                "max_depth" => hp.max_depth = num(key, value)?,
                "min_samples_split" => hp.min_samples_split = num(key, value)?,
                "leaf_step" => hp.leaf_step = value.parse()?,
                _ => return Err(unknown()),
            },
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelParams::Tree(hp) => hp.validate(),
            ModelParams::Gbm(hp) => hp.validate(),
            ModelParams::Forest(f) => {
                if f.n_trees == 0 {
                    return Err(Error::invalid("n_trees must be at least 1"));
                }
                f.tree.validate()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Tree(TreeModel),
    Gbm(BoostedModel),
    Forest(ForestModel),
}

pub fn train_model(
    params: &ModelParams,
    train: &LabeledDataset,
    seed: u64,
) -> Result<TrainedModel> {
    params.validate()?;
    Ok(match params {
        ModelParams::Tree(hp) => TrainedModel::Tree(grow_tree(train, hp, seed)?),
        ModelParams::Gbm(hp) => TrainedModel::Gbm(train_boosted(train, hp, seed)?),
        ModelParams::Forest(f) => {
            TrainedModel::Forest(train_forest(train, f.n_trees, &f.tree, f.bootstrap, seed)?)
        }
    })
}

impl TrainedModel {
    pub fn family(&self) -> ModelFamily {
        match self {
            TrainedModel::Tree(_) => ModelFamily::Tree,
            TrainedModel::Gbm(_) => ModelFamily::Gbm,
            TrainedModel::Forest(_) => ModelFamily::Forest,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            TrainedModel::Tree(m) => m.n_features(),
            TrainedModel::Gbm(m) => m.n_features(),
            TrainedModel::Forest(m) => m.n_features(),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        match self {
            TrainedModel::Tree(m) => m.predict(x),
            TrainedModel::Gbm(m) => Ok(m.predict(x)?.0),
            TrainedModel::Forest(m) => m.predict(x),
        }
    }

    pub fn predict_all(&self, data: &LabeledDataset) -> Result<Vec<Label>> {
        if data.n_features() != self.n_features() {
            return Err(Error::SchemaMismatch {
                expected: self.n_features(),
                found: data.n_features(),
            });
        }
        data.rows().map(|x| self.predict(x)).collect()
    }

    pub fn to_text(&self) -> String {
        match self {
            TrainedModel::Tree(m) => m.to_text(),
            TrainedModel::Gbm(m) => m.to_text(),
            TrainedModel::Forest(m) => m.to_text(),
        }
    }

    /// Parses any model file, choosing the family from the header's first word.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = ModelLines::new(text);
        let kind = lines
            .peek_line()
            .and_then(|l| l.split_whitespace().next())
            .unwrap_or("");
        let model = match kind {
            "tree" => TrainedModel::Tree(TreeModel::read_from(&mut lines)?),
            "gbm" => TrainedModel::Gbm(BoostedModel::read_from(&mut lines)?),
            "forest" => TrainedModel::Forest(ForestModel::read_from(&mut lines)?),
            other => return Err(parse_error(1, format!("unknown model kind `{other}`"))),
        };
        lines.expect_end()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}
