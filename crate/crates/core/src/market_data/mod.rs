//! Quote ingestion, three-day windows, next-day labels, dataset splits and
//! synthetic market data.

mod dataset;
mod quote;
mod synth;
mod window;

pub use dataset::{
    split_dataset, split_dataset_ordered, FeatureVector, Label, LabeledDataset, SplitFractions,
    Splits,
};
pub use quote::{
    parse_quotes, read_quotes, read_quotes_skipping, write_quotes, MidPrice, OptionQuote,
    QUOTE_HEADER,
};
pub use synth::synthesize_quotes;
pub use window::{build_windows, label, next_trading_day, OptionWindow, WINDOW_DAYS};
