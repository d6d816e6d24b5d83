use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::market_data::Label;

/// Class counts at a node.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassCounts {
    pub n_pos: usize,
    pub n_neg: usize,
}

impl ClassCounts {
    pub fn new(n_pos: usize, n_neg: usize) -> Self {
        ClassCounts { n_pos, n_neg }
    }

    pub fn of(labels: impl IntoIterator<Item = Label>) -> Self {
        let mut c = ClassCounts::default();
        for l in labels {
            c.add(l);
        }
        c
    }

    pub fn total(&self) -> usize {
        self.n_pos + self.n_neg
    }

    pub fn add(&mut self, label: Label) {
        match label {
            Label::Up => self.n_pos += 1,
            Label::Down => self.n_neg += 1,
        }
    }

    pub fn remove(&mut self, label: Label) {
        match label {
            Label::Up => self.n_pos -= 1,
            Label::Down => self.n_neg -= 1,
        }
    }

    pub fn is_pure(&self) -> bool {
        self.n_pos == 0 || self.n_neg == 0
    }

    /// Majority class; ties go to [`Label::Down`].
    pub fn majority(&self) -> Label {
        if self.n_pos > self.n_neg {
            Label::Up
        } else {
            Label::Down
        }
    }

    fn probabilities(&self) -> [f64; 2] {
        let n = self.total() as f64;
        [self.n_pos as f64 / n, self.n_neg as f64 / n]
    }
}

fn require_nonempty(counts: ClassCounts) -> Result<()> {
    if counts.total() == 0 {
        Err(Error::invalid("impurity of an empty node is undefined"))
    } else {
        Ok(())
    }
}

/// Shannon entropy in bits, with `0·log 0 = 0`.
pub fn entropy(counts: ClassCounts) -> Result<f64> {
    require_nonempty(counts)?;
    Ok(entropy_unchecked(counts))
}

/// Gini impurity `1 − Σ p²`.
pub fn gini(counts: ClassCounts) -> Result<f64> {
    require_nonempty(counts)?;
    Ok(gini_unchecked(counts))
}

fn entropy_unchecked(counts: ClassCounts) -> f64 {
    counts
        .probabilities()
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * (1.0 / p).log2())
        .sum()
}

fn gini_unchecked(counts: ClassCounts) -> f64 {
    let [p, q] = counts.probabilities();
    1.0 - (p * p + q * q)
}

/// Parent entropy minus the size-weighted entropy of the children.
pub fn information_gain(parent: ClassCounts, children: &[ClassCounts]) -> Result<f64> {
    require_nonempty(parent)?;
    let sum = children.iter().fold(ClassCounts::default(), |acc, c| {
        ClassCounts::new(acc.n_pos + c.n_pos, acc.n_neg + c.n_neg)
    });
    if sum != parent {
        return Err(Error::invalid(format!(
            "children counts {sum:?} do not add up to parent {parent:?}"
        )));
    }
    let n = parent.total() as f64;
    let weighted: f64 = children
        .iter()
        .filter(|c| c.total() > 0)
        .map(|c| c.total() as f64 / n * entropy_unchecked(*c))
        .sum();
    Ok(entropy_unchecked(parent) - weighted)
}

/// Split-quality criterion for classification trees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Criterion {
    #[default]
    Gini,
    Entropy,
    /// Ranks splits exactly like entropy; kept as its own name for configs.
    LogLoss,
}

impl Criterion {
    /// Node impurity; zero for an empty node.
    pub fn impurity(self, counts: ClassCounts) -> f64 {
        if counts.total() == 0 {
            return 0.0;
        }
        match self {
            Criterion::Gini => gini_unchecked(counts),
            Criterion::Entropy | Criterion::LogLoss => entropy_unchecked(counts),
        }
    }

    /// Impurity decrease of a binary split: information gain for entropy,
    /// weighted Gini decrease for Gini.
    pub fn split_gain(self, parent: ClassCounts, left: ClassCounts, right: ClassCounts) -> f64 {
        let n = parent.total() as f64;
        // two-term sum is order independent, so mirrored splits score identically
        let children =
            left.total() as f64 * self.impurity(left) + right.total() as f64 * self.impurity(right);
        self.impurity(parent) - children / n
    }

    pub fn name(self) -> &'static str {
        match self {
            Criterion::Gini => "gini",
            Criterion::Entropy => "entropy",
            Criterion::LogLoss => "log_loss",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gini" => Ok(Criterion::Gini),
            "entropy" => Ok(Criterion::Entropy),
            "log_loss" => Ok(Criterion::LogLoss),
            other => Err(Error::invalid(format!("unknown criterion `{other}`"))),
        }
    }
}
