#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boosting;
pub mod cli;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod forest;
pub mod market_data;
pub mod model;
pub mod qrm;
mod seed;
pub mod tree;

pub use error::{Error, Result};
