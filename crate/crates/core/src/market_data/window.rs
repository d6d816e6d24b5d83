use chrono::{Datelike, Duration, NaiveDate, Weekday};

use super::dataset::Label;
use super::quote::{MidPrice, OptionQuote};
use crate::error::{Error, Result};

/// Number of observed trading days per window.
pub const WINDOW_DAYS: usize = 3;

/// Three consecutive trading days of one option. `quotes[2]` is "today".
#[derive(Debug, Clone, PartialEq)]
pub struct OptionWindow {
    pub option_id: String,
    pub quotes: [OptionQuote; WINDOW_DAYS],
    /// Option mid on the next trading day, when it is known.
    pub next_mid: Option<MidPrice>,
}

impl OptionWindow {
    pub fn today(&self) -> &OptionQuote {
        &self.quotes[WINDOW_DAYS - 1]
    }

    pub fn is_labeled(&self) -> bool {
        self.next_mid.is_some()
    }

    /// Checks ordering, identity and per-quote invariants.
    pub fn validate(&self) -> Result<()> {
        for (k, q) in self.quotes.iter().enumerate() {
            if q.option_id != self.option_id {
                return Err(Error::invalid(format!(
                    "window for {} contains quote for {}",
                    self.option_id, q.option_id
                )));
            }
            q.validate()
                .map_err(|m| Error::invalid(format!("{} on {}: {m}", self.option_id, q.date)))?;
            if k > 0 && self.quotes[k - 1].date >= q.date {
                return Err(Error::invalid(format!(
                    "window for {} is not strictly increasing in date",
                    self.option_id
                )));
            }
        }
        Ok(())
    }
}

/// The weekday following `date`, skipping Saturday and Sunday.
pub fn next_trading_day(date: NaiveDate) -> NaiveDate {
    let step = match date.weekday() {
        Weekday::Fri => 3,
        Weekday::Sat => 2,
        _ => 1,
    };
    date + Duration::days(step)
}

fn consecutive(prev: &OptionQuote, next: &OptionQuote) -> bool {
    prev.option_id == next.option_id && next_trading_day(prev.date) == next.date
}

/// Groups quotes into three-day windows.
///
/// Every three consecutive trading days of an option produce a window. The
/// window is labeled when the following trading day is also present; the
/// trailing triple of each run is forecast-only. Input order does not matter.
pub fn build_windows(quotes: &[OptionQuote]) -> Vec<OptionWindow> {
    let mut sorted: Vec<&OptionQuote> = quotes.iter().collect();
    sorted.sort_by(|a, b| a.option_id.cmp(&b.option_id).then(a.date.cmp(&b.date)));

    let mut windows = Vec::new();
    for start in 0..sorted.len().saturating_sub(WINDOW_DAYS - 1) {
        let triple = &sorted[start..start + WINDOW_DAYS];
        if !triple.windows(2).all(|p| consecutive(p[0], p[1])) {
            continue;
        }
        let next_mid = sorted
            .get(start + WINDOW_DAYS)
            .filter(|next| consecutive(triple[WINDOW_DAYS - 1], next))
            .map(|next| next.option_mid());
        windows.push(OptionWindow {
            option_id: triple[0].option_id.clone(),
            quotes: [triple[0].clone(), triple[1].clone(), triple[2].clone()],
            next_mid,
        });
    }
    windows
}

/// Next-day direction of the option mid. Unchanged prices count as a decrease.
pub fn label(window: &OptionWindow) -> Result<Label> {
    let next = window.next_mid.ok_or_else(|| {
        Error::invalid(format!(
            "window for {} on {} has no next-day price",
            window.option_id,
            window.today().date
        ))
    })?;
    Ok(direction(window.today().option_mid().value(), next.value()))
}

fn direction(today: f64, next: f64) -> Label {
    if next > today {
        Label::Up
    } else {
        Label::Down
    }
}
