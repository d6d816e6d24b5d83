use std::io::{Read, Write};

use chrono::NaiveDate;

use crate::error::{Error, Result};

/// Column set of the quote CSV, in order.
pub const QUOTE_HEADER: [&str; 7] = [
    "date",
    "option_id",
    "stock_bid",
    "stock_ask",
    "option_bid",
    "option_ask",
    "implied_vol",
];

/// One trading day of market data for a single option contract.
#[derive(Debug, Clone, PartialEq)]
pub struct OptionQuote {
    pub date: NaiveDate,
    pub option_id: String,
    pub stock_bid: f64,
    pub stock_ask: f64,
    pub option_bid: f64,
    pub option_ask: f64,
    /// Annualized implied volatility.
    pub implied_vol: f64,
}

/// Average of a bid and an ask.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct MidPrice(pub f64);

impl MidPrice {
    pub fn of(bid: f64, ask: f64) -> Self {
        MidPrice(0.5 * (bid + ask))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl OptionQuote {
    pub fn option_mid(&self) -> MidPrice {
        MidPrice::of(self.option_bid, self.option_ask)
    }

    pub fn stock_mid(&self) -> MidPrice {
        MidPrice::of(self.stock_bid, self.stock_ask)
    }

    /// Checks the quote invariants, returning the first violation found.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let prices = [
            ("stock bid", self.stock_bid),
            ("stock ask", self.stock_ask),
            ("option bid", self.option_bid),
            ("option ask", self.option_ask),
        ];
        for (name, value) in prices {
            if !value.is_finite() || value <= 0.0 {
                return Err(format!(
                    "{name} must be a positive finite price, got {value}"
                ));
            }
        }
        if self.stock_bid >= self.stock_ask {
            return Err(format!(
                "stock bid ≥ ask ({} ≥ {})",
                self.stock_bid, self.stock_ask
            ));
        }
        if self.option_bid >= self.option_ask {
            return Err(format!(
                "option bid ≥ ask ({} ≥ {})",
                self.option_bid, self.option_ask
            ));
        }
        if !self.implied_vol.is_finite() || self.implied_vol < 0.0 {
            return Err(format!(
                "implied vol must be finite and nonnegative, got {}",
                self.implied_vol
            ));
        }
        Ok(())
    }
}

/// Parses quote CSV text. The header row must match [`QUOTE_HEADER`].
pub fn parse_quotes(text: &str) -> Result<Vec<OptionQuote>> {
    read_quotes(text.as_bytes())
}

pub fn read_quotes<R: Read>(reader: R) -> Result<Vec<OptionQuote>> {
    read_rows(reader, false).map(|(quotes, _)| quotes)
}

/// Like [`read_quotes`], but rows that fail to parse or validate are skipped
/// and returned as errors. A bad header is still fatal.
pub fn read_quotes_skipping<R: Read>(reader: R) -> Result<(Vec<OptionQuote>, Vec<Error>)> {
    read_rows(reader, true)
}

fn read_rows<R: Read>(reader: R, skip_bad: bool) -> Result<(Vec<OptionQuote>, Vec<Error>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();

    let header = match records.next() {
        Some(record) => record?,
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "missing header row".into(),
            })
        }
    };
    if header.iter().ne(QUOTE_HEADER.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{}`", QUOTE_HEADER.join(",")),
        });
    }

    let mut quotes = Vec::new();
    let mut skipped = Vec::new();
    for record in records {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        match parse_row(&record, line) {
            Ok(q) => quotes.push(q),
            Err(e) if skip_bad => skipped.push(e),
            Err(e) => return Err(e),
        }
    }
    Ok((quotes, skipped))
}

fn parse_row(record: &csv::StringRecord, line: usize) -> Result<OptionQuote> {
    if record.len() != QUOTE_HEADER.len() {
        return Err(Error::Parse {
            line,
            message: format!(
                "expected {} fields, found {}",
                QUOTE_HEADER.len(),
                record.len()
            ),
        });
    }
    let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d").map_err(|e| Error::Parse {
        line,
        message: format!("bad date `{}`: {e}", &record[0]),
    })?;
    let number = |idx: usize| -> Result<f64> {
        record[idx].parse::<f64>().map_err(|_| Error::Parse {
            line,
            message: format!(
                "bad number `{}` in column {}",
                &record[idx], QUOTE_HEADER[idx]
            ),
        })
    };
    let quote = OptionQuote {
        date,
        option_id: record[1].to_string(),
        stock_bid: number(2)?,
        stock_ask: number(3)?,
        option_bid: number(4)?,
        option_ask: number(5)?,
        implied_vol: number(6)?,
    };
    quote
        .validate()
        .map_err(|message| Error::Validation { line, message })?;
    Ok(quote)
}

/// Writes quotes as CSV. Floats use the shortest round-trip representation.
pub fn write_quotes<W: Write>(mut out: W, quotes: &[OptionQuote]) -> Result<()> {
    writeln!(out, "{}", QUOTE_HEADER.join(","))?;
    for q in quotes {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            q.date.format("%Y-%m-%d"),
            q.option_id,
            q.stock_bid,
            q.stock_ask,
            q.option_bid,
            q.option_ask,
            q.implied_vol
        )?;
    }
    Ok(())
}
