//! Joins QRM forecasts with market quotes into a labeled feature table.

use std::collections::HashMap;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::market_data::{
    build_windows, label, FeatureVector, LabeledDataset, OptionQuote, OptionWindow,
};
use crate::qrm::{nondimensionalize, ForecastRecord};

/// Column names of the feature table, in order.
pub const FEATURE_NAMES: [&str; 10] = [
    "qrm_forecast",
    "qrm_relative",
    "mid_t",
    "o_b",
    "o_a",
    "x_b",
    "x_a",
    "sigma",
    "f_x",
    "f_o",
];

/// Feature row for one window given its QRM forecast.
pub fn window_features(window: &OptionWindow, forecast: f64) -> Result<FeatureVector> {
    let q = window.today();
    let mid = q.option_mid().value();
    let (f_x, f_o) = nondimensionalize(window)?;
    FeatureVector::new(vec![
        forecast,
        forecast / mid - 1.0,
        mid,
        q.option_bid,
        q.option_ask,
        q.stock_bid,
        q.stock_ask,
        q.implied_vol,
        f_x,
        f_o,
    ])
}

/// Result of [`featurize`]: the table plus the number of labeled windows that
/// had no forecast.
#[derive(Debug, Clone)]
pub struct Featurized {
    pub dataset: LabeledDataset,
    pub missing_forecasts: usize,
}

/// One row per labeled window with a forecast, ordered by date then option.
pub fn featurize(quotes: &[OptionQuote], forecasts: &[ForecastRecord]) -> Result<Featurized> {
    let mut by_key: HashMap<(&str, NaiveDate), f64> = HashMap::with_capacity(forecasts.len());
    for f in forecasts {
        if by_key
            .insert((f.option_id.as_str(), f.date), f.forecast)
            .is_some()
        {
            return Err(Error::invalid(format!(
                "duplicate forecast for {} on {}",
                f.option_id, f.date
            )));
        }
    }
    let mut windows: Vec<OptionWindow> = build_windows(quotes)
        .into_iter()
        .filter(|w| w.is_labeled())
        .collect();
    windows.sort_by(|a, b| (a.today().date, &a.option_id).cmp(&(b.today().date, &b.option_id)));

    let mut dataset = LabeledDataset::new(FEATURE_NAMES.iter().map(|s| s.to_string()).collect());
    let mut missing_forecasts = 0;
    for w in &windows {
        match by_key.get(&(w.option_id.as_str(), w.today().date)) {
            Some(&forecast) => dataset.push(window_features(w, forecast)?, label(w)?)?,
            None => missing_forecasts += 1,
        }
    }
    Ok(Featurized {
        dataset,
        missing_forecasts,
    })
}
