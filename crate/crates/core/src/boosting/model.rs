use std::io::Write;
use std::str::FromStr;

use super::loss::{initial_log_odds, point_loss, sigmoid, LogOdds};
use crate::error::{Error, Result};
use crate::market_data::{Label, LabeledDataset};
use crate::tree::{
    grow, header_value, parse_error, parse_field, parse_header, ClassCounts, LeafCodec, ModelLines,
    Tree,
};

/// Floor on the Newton denominator `Σ p(1−p)`.
const HESSIAN_FLOOR: f64 = 1e-12;
/// Bracket for the exact line search on the log-odds scale.
const LINE_SEARCH_BOUND: f64 = 40.0;

/// How leaf values are chosen once a stage tree is grown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LeafStep {
    /// One Newton step on the leaf's log-loss.
    #[default]
    Newton,
    /// Exact one-dimensional minimization of the leaf's log-loss.
    LineSearch,
}

impl FromStr for LeafStep {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "newton" => Ok(LeafStep::Newton),
            "line_search" => Ok(LeafStep::LineSearch),
            other => Err(Error::invalid(format!("unknown leaf step `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostHyperparams {
    pub n_stages: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub leaf_step: LeafStep,
}

impl Default for BoostHyperparams {
    fn default() -> Self {
        BoostHyperparams {
            n_stages: 100,
            learning_rate: 0.1,
            max_depth: 3,
            min_samples_split: 2,
            leaf_step: LeafStep::Newton,
        }
    }
}

impl BoostHyperparams {
    /// Checks the stage-tree limits and the learning rate. `n_stages = 0` is
    /// allowed and yields a prior-only model.
    pub fn validate(&self) -> Result<()> {
        if self.max_depth < 1 {
            return Err(Error::invalid("stage trees need max_depth ≥ 1"));
        }
        if self.min_samples_split < 2 {
            return Err(Error::invalid("min_samples_split must be at least 2"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::invalid(format!(
                "learning_rate must be in (0, 1], got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

/// Leaf of a stage tree: the additive log-odds step and the class counts of
/// the training rows that reached it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageLeaf {
    pub gamma: f64,
    pub counts: ClassCounts,
}

impl LeafCodec for StageLeaf {
    fn encode(&self) -> String {
        format!(
            "{:?} {} {}",
            self.gamma, self.counts.n_pos, self.counts.n_neg
        )
    }

    fn decode(fields: &[&str]) -> std::result::Result<Self, String> {
        let [gamma, n_pos, n_neg] = fields else {
            return Err(format!(
                "expected `<gamma> <n_pos> <n_neg>`, got {} fields",
                fields.len()
            ));
        };
        let gamma: f64 = parse_field(gamma, "gamma")?;
        if !gamma.is_finite() {
            return Err("gamma must be finite".into());
        }
        Ok(StageLeaf {
            gamma,
            counts: ClassCounts::new(parse_field(n_pos, "n_pos")?, parse_field(n_neg, "n_neg")?),
        })
    }
}

pub type Stage = Tree<StageLeaf>;

#[derive(Debug, Clone, PartialEq)]
pub struct BoostedModel {
    pub f0: LogOdds,
    pub learning_rate: f64,
    pub stages: Vec<Stage>,
    n_features: usize,
}

/// Variance-reducing split on `targets`: maximizes `S_l²/n_l + S_r²/n_r − S²/n`.
/// Ties keep the lower feature, then the lower threshold.
fn best_regression_split(
    data: &LabeledDataset,
    rows: &[usize],
    targets: &[f64],
) -> Option<(usize, f64)> {
    let n = rows.len() as f64;
    let total: f64 = rows.iter().map(|&r| targets[r]).sum();
    let scale: f64 = rows.iter().map(|&r| targets[r] * targets[r]).sum();
    // gains below this are summation noise, e.g. when all targets are equal
    let floor = 1e-12 * scale;
    let base = total * total / n;
    let mut best: Option<(usize, f64, f64)> = None;
    let mut column: Vec<(f64, f64)> = Vec::with_capacity(rows.len());
    for feature in 0..data.n_features() {
        column.clear();
        column.extend(rows.iter().map(|&r| (data.row(r)[feature], targets[r])));
        column.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut left = 0.0;
        for k in 0..column.len() - 1 {
            left += column[k].1;
            let (lo, hi) = (column[k].0, column[k + 1].0);
            if lo == hi {
                continue;
            }
            let nl = (k + 1) as f64;
            let right = total - left;
            let gain = left * left / nl + right * right / (n - nl) - base;
            if gain > floor && best.is_none_or(|b| gain > b.2) {
                best = Some((feature, crate::tree::midpoint(lo, hi), gain));
            }
        }
    }
    best.map(|(f, t, _)| (f, t))
}

fn leaf_loss(rows: &[usize], labels: &[f64], log_odds: &[f64], gamma: f64) -> f64 {
    rows.iter()
        .map(|&r| point_loss(labels[r], sigmoid(log_odds[r] + gamma)))
        .sum()
}

fn newton_gamma(rows: &[usize], labels: &[f64], log_odds: &[f64]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for &r in rows {
        let p = sigmoid(log_odds[r]);
        num += labels[r] - p;
        den += p * (1.0 - p);
    }
    num / den.max(HESSIAN_FLOOR)
}

/// Bisection on the monotone leaf gradient; the step is kept only if it
/// lowers the leaf loss.
fn line_search_gamma(rows: &[usize], labels: &[f64], log_odds: &[f64]) -> f64 {
    let grad = |g: f64| -> f64 {
        rows.iter()
            .map(|&r| sigmoid(log_odds[r] + g) - labels[r])
            .sum()
    };
    let (mut lo, mut hi) = (-LINE_SEARCH_BOUND, LINE_SEARCH_BOUND);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if grad(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let gamma = 0.5 * (lo + hi);
    if leaf_loss(rows, labels, log_odds, gamma) < leaf_loss(rows, labels, log_odds, 0.0) {
        gamma
    } else {
        0.0
    }
}

fn binary_labels(train: &LabeledDataset) -> Vec<f64> {
    train.labels().iter().map(|l| l.as_binary()).collect()
}

/// Grows one stage tree on the pseudo-residuals at the current log-odds and
/// sets each leaf's step.
pub fn fit_stage(train: &LabeledDataset, log_odds: &[f64], hp: &BoostHyperparams) -> Result<Stage> {
    hp.validate()?;
    if log_odds.len() != train.len() {
        return Err(Error::invalid(format!(
            "{} log-odds for {} training rows",
            log_odds.len(),
            train.len()
        )));
    }
    if train.is_empty() {
        return Err(Error::invalid(
            "cannot fit a stage on an empty training set",
        ));
    }
    let labels = binary_labels(train);
    let residuals: Vec<f64> = labels
        .iter()
        .zip(log_odds)
        .map(|(&y, &f)| y - sigmoid(f))
        .collect();
    let choose = |rows: &[usize], depth: usize| {
        if depth >= hp.max_depth || rows.len() < hp.min_samples_split {
            return None;
        }
        best_regression_split(train, rows, &residuals)
    };
    let leaf = |rows: &[usize]| {
        let gamma = match hp.leaf_step {
            LeafStep::Newton => newton_gamma(rows, &labels, log_odds),
            LeafStep::LineSearch => line_search_gamma(rows, &labels, log_odds),
        };
        StageLeaf {
            gamma,
            counts: ClassCounts::of(rows.iter().map(|&r| train.label(r))),
        }
    };
    Ok(grow(train, (0..train.len()).collect(), choose, leaf))
}

fn mean_loss(labels: &[f64], log_odds: &[f64]) -> f64 {
    let total: f64 = labels
        .iter()
        .zip(log_odds)
        .map(|(&y, &f)| point_loss(y, sigmoid(f)))
        .sum();
    total / labels.len() as f64
}

/// Additive log-odds model: prior plus `M` shrunken stage trees.
///
/// Training is deterministic; `seed` is accepted for interface parity with the
/// other model families.
pub fn train_boosted(
    train: &LabeledDataset,
    hp: &BoostHyperparams,
    _seed: u64,
) -> Result<BoostedModel> {
    hp.validate()?;
    if train.is_empty() {
        return Err(Error::invalid("cannot train on an empty training set"));
    }
    let labels = binary_labels(train);
    let f0 = initial_log_odds(&labels)?;
    let mut log_odds = vec![f0.0; train.len()];
    let mut stages = Vec::with_capacity(hp.n_stages);
    let mut loss = mean_loss(&labels, &log_odds);
    for _ in 0..hp.n_stages {
        let mut stage = fit_stage(train, &log_odds, hp)?;
        let leaf_of: Vec<usize> = (0..train.len())
            .map(|r| stage.leaf_index(train.row(r)))
            .collect::<Result<_>>()?;
        let gammas: Vec<f64> = leaf_of.iter().map(|&id| leaf_gamma(&stage, id)).collect();
        let next: Vec<f64> = log_odds
            .iter()
            .zip(&gammas)
            .map(|(&f, &g)| f + hp.learning_rate * g)
            .collect();
        let next_loss = mean_loss(&labels, &next);
        if hp.leaf_step == LeafStep::LineSearch && next_loss > loss {
            // rounding across leaves can outweigh tiny per-leaf gains
            for (_, leaf) in stage.leaves_mut() {
                leaf.gamma = 0.0;
            }
        } else {
            log_odds = next;
            loss = next_loss;
        }
        stages.push(stage);
    }
    Ok(BoostedModel {
        f0,
        learning_rate: hp.learning_rate,
        stages,
        n_features: train.n_features(),
    })
}

fn leaf_gamma(stage: &Stage, id: usize) -> f64 {
    match &stage.nodes()[id] {
        crate::tree::Node::Leaf(l) => l.gamma,
        crate::tree::Node::Internal { .. } => unreachable!("leaf_index returns leaves"),
    }
}

impl BoostedModel {
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_stages(&self) -> usize {
        self.stages.len()
    }

    fn check_schema(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_features {
            return Err(Error::SchemaMismatch {
                expected: self.n_features,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Log-odds after the prior and each stage: `M + 1` values.
    pub fn staged_log_odds(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_schema(x)?;
        let mut f = self.f0.0;
        let mut out = Vec::with_capacity(self.stages.len() + 1);
        out.push(f);
        for stage in &self.stages {
            f += self.learning_rate * stage.leaf(x)?.gamma;
            out.push(f);
        }
        Ok(out)
    }

    pub fn log_odds(&self, x: &[f64]) -> Result<LogOdds> {
        self.check_schema(x)?;
        let mut f = self.f0.0;
        for stage in &self.stages {
            f += self.learning_rate * stage.leaf(x)?.gamma;
        }
        Ok(LogOdds(f))
    }

    /// Label and probability of an increase; `p = 0.5` predicts a decrease.
    pub fn predict(&self, x: &[f64]) -> Result<(Label, f64)> {
        let p = self.log_odds(x)?.probability();
        Ok((if p > 0.5 { Label::Up } else { Label::Down }, p))
    }

    /// Mean training log-loss after the prior and after each stage.
    pub fn staged_log_loss(&self, data: &LabeledDataset) -> Result<Vec<f64>> {
        let labels = binary_labels(data);
        let mut per_stage = vec![0.0; self.stages.len() + 1];
        let staged: Vec<Vec<f64>> = (0..data.len())
            .map(|r| self.staged_log_odds(data.row(r)))
            .collect::<Result<_>>()?;
        for (k, slot) in per_stage.iter_mut().enumerate() {
            let f: Vec<f64> = staged.iter().map(|s| s[k]).collect();
            *slot = mean_loss(&labels, &f);
        }
        Ok(per_stage)
    }

    pub fn write<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(
            out,
            "gbm v1 f0={:?} M={} lr={:?} n_features={}",
            self.f0.0,
            self.stages.len(),
            self.learning_rate,
            self.n_features
        )?;
        for stage in &self.stages {
            writeln!(
                out,
                "tree v1 n_features={} criterion=squared_error",
                self.n_features
            )?;
            stage.write_nodes(out)?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("model text is ascii")
    }

    pub(crate) fn read_from(lines: &mut ModelLines<'_>) -> Result<Self> {
        let (line, header) = parse_header(lines, "gbm", &["f0", "M", "lr", "n_features"])?;
        let f0: f64 = header_value(&header, "f0", line)?;
        let m: usize = header_value(&header, "M", line)?;
        let learning_rate: f64 = header_value(&header, "lr", line)?;
        let n_features: usize = header_value(&header, "n_features", line)?;
        if !f0.is_finite() || !(learning_rate > 0.0 && learning_rate <= 1.0) {
            return Err(parse_error(line, "f0 must be finite and lr in (0, 1]"));
        }
        let mut stages = Vec::with_capacity(m);
        for _ in 0..m {
            let (line, h) = parse_header(lines, "tree", &["n_features", "criterion"])?;
            if h["criterion"] != "squared_error" {
                return Err(parse_error(
                    line,
                    "stage trees must use criterion=squared_error",
                ));
            }
            let k: usize = header_value(&h, "n_features", line)?;
            if k != n_features {
                return Err(parse_error(
                    line,
                    format!("stage has {k} features, model has {n_features}"),
                ));
            }
            stages.push(Tree::read_nodes(lines, n_features)?);
        }
        Ok(BoostedModel {
            f0: LogOdds(f0),
            learning_rate,
            stages,
            n_features,
        })
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = ModelLines::new(text);
        let model = Self::read_from(&mut lines)?;
        lines.expect_end()?;
        Ok(model)
    }
}

pub fn predict_boosted(model: &BoostedModel, x: &[f64]) -> Result<(Label, f64)> {
    model.predict(x)
}
