//! Gradient-boosted classification in log-odds space with regression-tree
//! stages fitted to log-loss pseudo-residuals.

mod loss;
mod model;

pub use loss::{
    initial_log_odds, log_loss, point_loss, pseudo_residuals, sigmoid, LogOdds, PROB_EPS,
};
pub use model::{
    fit_stage, predict_boosted, train_boosted, BoostHyperparams, BoostedModel, LeafStep, Stage,
    StageLeaf,
};
