use std::io::{Read, Write};
use std::ops::Deref;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Next-day movement of an option price: +1 increase, −1 decrease.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Down,
    Up,
}

impl Label {
    pub fn signed(self) -> i8 {
        match self {
            Label::Up => 1,
            Label::Down => -1,
        }
    }

    pub fn from_signed(value: i64) -> Option<Label> {
        match value {
            1 => Some(Label::Up),
            -1 => Some(Label::Down),
            _ => None,
        }
    }

    /// 1.0 for an increase, 0.0 otherwise.
    pub fn as_binary(self) -> f64 {
        match self {
            Label::Up => 1.0,
            Label::Down => 0.0,
        }
    }
}

/// Ordered, finite feature values for one observation.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("feature {bad} is not finite")));
        }
        Ok(FeatureVector(values))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for FeatureVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Feature matrix with ±1 labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    feature_names: Vec<String>,
    rows: Vec<FeatureVector>,
    labels: Vec<Label>,
}

impl LabeledDataset {
    pub fn new(feature_names: Vec<String>) -> Self {
        LabeledDataset {
            feature_names,
            rows: Vec::new(),
            labels: Vec::new(),
        }
    }

    /// Builds a dataset from raw rows. Feature names default to `f0, f1, ...`.
    pub fn from_rows(rows: Vec<Vec<f64>>, labels: Vec<Label>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::invalid(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let width = rows.first().map_or(0, Vec::len);
        let mut ds = LabeledDataset::new((0..width).map(|k| format!("f{k}")).collect());
        for (row, label) in rows.into_iter().zip(labels) {
            ds.push(FeatureVector::new(row)?, label)?;
        }
        Ok(ds)
    }

    pub fn push(&mut self, row: FeatureVector, label: Label) -> Result<()> {
        if row.len() != self.feature_names.len() {
            return Err(Error::SchemaMismatch {
                expected: self.feature_names.len(),
                found: row.len(),
            });
        }
        self.rows.push(row);
        self.labels.push(label);
        Ok(())
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn label(&self, i: usize) -> Label {
        self.labels[i]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.rows.iter().map(|r| &r[..])
    }

    /// New dataset holding the given rows, in the given order. Repeats are allowed.
    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            feature_names: self.feature_names.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub fn count_up(&self) -> usize {
        self.labels.iter().filter(|&&l| l == Label::Up).count()
    }

    /// Reads a dataset CSV: feature columns followed by a `label` column of ±1.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().next_back() != Some("label") {
            return Err(Error::Parse {
                line: 1,
                message: "last column must be `label`".into(),
            });
        }
        let names: Vec<String> = headers
            .iter()
            .take(headers.len() - 1)
            .map(String::from)
            .collect();
        let width = names.len();
        let mut ds = LabeledDataset::new(names);
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            let parse_err = |message: String| Error::Parse { line, message };
            let mut values = Vec::with_capacity(width);
            for field in record.iter().take(width) {
                values.push(
                    field
                        .parse::<f64>()
                        .map_err(|_| parse_err(format!("bad number `{field}`")))?,
                );
            }
            let label = record[width]
                .parse::<i64>()
                .ok()
                .and_then(Label::from_signed)
                .ok_or_else(|| {
                    parse_err(format!("label must be 1 or -1, got `{}`", &record[width]))
                })?;
            let row = FeatureVector::new(values).map_err(|e| parse_err(e.to_string()))?;
            ds.push(row, label)?;
        }
        Ok(ds)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut header = self.feature_names.join(",");
        if !header.is_empty() {
            header.push(',');
        }
        header.push_str("label");
        writeln!(out, "{header}")?;
        for (row, label) in self.rows.iter().zip(&self.labels) {
            for v in row.iter() {
                write!(out, "{v},")?;
            }
            writeln!(out, "{}", label.signed())?;
        }
        Ok(())
    }
}

/// Train / validation / test proportions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl SplitFractions {
    pub fn new(train: f64, val: f64, test: f64) -> Result<Self> {
        let f = SplitFractions { train, val, test };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.val, self.test];
        if parts.iter().any(|p| !p.is_finite() || *p <= 0.0) {
            return Err(Error::invalid(format!(
                "split fractions must be positive: {parts:?}"
            )));
        }
        if (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "split fractions must sum to 1: {parts:?}"
            )));
        }
        Ok(())
    }

    /// Part sizes: floor for validation and test, remainder to training.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let part = |f: f64| ((f * n as f64) + 1e-9).floor() as usize;
        let val = part(self.val);
        let test = part(self.test).min(n - val);
        (n - val - test, val, test)
    }
}

impl Default for SplitFractions {
    fn default() -> Self {
        SplitFractions {
            train: 0.7,
            val: 0.15,
            test: 0.15,
        }
    }
}

/// Dataset partition in the order (train, validation, test).
#[derive(Debug, Clone, PartialEq)]
pub struct Splits {
    pub train: LabeledDataset,
    pub val: LabeledDataset,
    pub test: LabeledDataset,
}

/// Shuffled split, deterministic in `seed`.
pub fn split_dataset(ds: &LabeledDataset, fractions: SplitFractions, seed: u64) -> Result<Splits> {
    let mut order: Vec<usize> = (0..ds.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    split_by_order(ds, fractions, &order)
}

/// Split that keeps row order: the earliest rows train, the latest test.
pub fn split_dataset_ordered(ds: &LabeledDataset, fractions: SplitFractions) -> Result<Splits> {
    let order: Vec<usize> = (0..ds.len()).collect();
    split_by_order(ds, fractions, &order)
}

fn split_by_order(
    ds: &LabeledDataset,
    fractions: SplitFractions,
    order: &[usize],
) -> Result<Splits> {
    fractions.validate()?;
    let (n_train, n_val, _) = fractions.sizes(ds.len());
    let (train, rest) = order.split_at(n_train);
    let (val, test) = rest.split_at(n_val);
    Ok(Splits {
        train: ds.subset(train),
        val: ds.subset(val),
        test: ds.subset(test),
    })
}
