use std::fmt;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::metrics::{evaluate_model, format_metric, metrics, ConfusionMatrix, MetricReport};
use crate::error::{Error, Result};
use crate::market_data::LabeledDataset;
use crate::model::{train_model, ModelParams};

#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Int(i64),
    Real(f64),
    Text(String),
}

impl ParamValue {
    /// Integer if it parses as one, else real, else text.
    pub fn parse(s: &str) -> Self {
        if let Ok(i) = s.parse() {
            ParamValue::Int(i)
        } else if let Ok(x) = s.parse::<f64>() {
            ParamValue::Real(x)
        } else {
            ParamValue::Text(s.to_string())
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Int(i) => write!(f, "{i}"),
            ParamValue::Real(x) => write!(f, "{x:?}"),
            ParamValue::Text(s) => f.write_str(s),
        }
    }
}

/// How one hyperparameter is enumerated or sampled.
#[derive(Debug, Clone, PartialEq)]
pub enum Dimension {
    Values(Vec<ParamValue>),
    /// Inclusive integer range, sampled uniformly.
    UniformInt {
        lo: i64,
        hi: i64,
    },
    /// Positive real range, sampled uniformly in log space.
    LogUniform {
        lo: f64,
        hi: f64,
    },
}

impl Dimension {
    fn validate(&self, name: &str) -> Result<()> {
        let bad = |m: &str| Err(Error::invalid(format!("search dimension `{name}`: {m}")));
        match self {
            Dimension::Values(v) if v.is_empty() => bad("no values"),
            Dimension::UniformInt { lo, hi } if lo > hi => bad("empty integer range"),
            Dimension::LogUniform { lo, hi } if !(*lo > 0.0 && lo <= hi && hi.is_finite()) => {
                bad("log-uniform range needs 0 < lo ≤ hi")
            }
            _ => Ok(()),
        }
    }

    fn grid_values(&self) -> Option<Vec<ParamValue>> {
        match self {
            Dimension::Values(v) => Some(v.clone()),
            Dimension::UniformInt { lo, hi } => Some((*lo..=*hi).map(ParamValue::Int).collect()),
            Dimension::LogUniform { lo, hi } if lo == hi => Some(vec![ParamValue::Real(*lo)]),
            Dimension::LogUniform { .. } => None,
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> ParamValue {
        match self {
            Dimension::Values(v) => v[rng.random_range(0..v.len())].clone(),
            Dimension::UniformInt { lo, hi } => ParamValue::Int(rng.random_range(*lo..=*hi)),
            Dimension::LogUniform { lo, hi } => {
                if lo == hi {
                    ParamValue::Real(*lo)
                } else {
                    ParamValue::Real(rng.random_range(lo.ln()..hi.ln()).exp())
                }
            }
        }
    }
}

/// Named hyperparameter values, in search-space order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamSet(pub Vec<(String, ParamValue)>);

impl ParamSet {
    pub fn get(&self, name: &str) -> Option<&ParamValue> {
        self.0.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn apply(&self, base: &ModelParams) -> Result<ModelParams> {
        let mut p = *base;
        for (name, value) in &self.0 {
            p.set(name, &value.to_string())?;
        }
        p.validate()?;
        Ok(p)
    }
}

impl fmt::Display for ParamSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (name, value)) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{name}={value}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SearchSpace {
    dims: Vec<(String, Dimension)>,
}

impl SearchSpace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, dim: Dimension) -> Self {
        self.dims.push((name.to_string(), dim));
        self
    }

    pub fn with_values<V: Into<ParamValue>>(
        self,
        name: &str,
        values: impl IntoIterator<Item = V>,
    ) -> Self {
        self.with(
            name,
            Dimension::Values(values.into_iter().map(Into::into).collect()),
        )
    }

    pub fn dimensions(&self) -> &[(String, Dimension)] {
        &self.dims
    }

    /// Parses `name=spec;name=spec`, where a spec is `int:lo:hi`,
    /// `log:lo:hi` or a comma-separated value list.
    pub fn parse(text: &str) -> Result<Self> {
        let mut space = SearchSpace::new();
        for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, spec) = part.split_once('=').ok_or_else(|| {
                Error::invalid(format!("search dimension `{part}` needs name=spec"))
            })?;
            let (name, spec) = (name.trim(), spec.trim());
            let range = |rest: &str| -> Result<(String, String)> {
                let (lo, hi) = rest
                    .split_once(':')
                    .ok_or_else(|| Error::invalid(format!("range for `{name}` needs lo:hi")))?;
                Ok((lo.trim().to_string(), hi.trim().to_string()))
            };
            let bad = |v: &str| Error::invalid(format!("bad bound `{v}` for `{name}`"));
            let dim = if let Some(rest) = spec.strip_prefix("int:") {
                let (lo, hi) = range(rest)?;
                Dimension::UniformInt {
                    lo: lo.parse().map_err(|_| bad(&lo))?,
                    hi: hi.parse().map_err(|_| bad(&hi))?,
                }
            } else if let Some(rest) = spec.strip_prefix("log:") {
                let (lo, hi) = range(rest)?;
                Dimension::LogUniform {
                    lo: lo.parse().map_err(|_| bad(&lo))?,
                    hi: hi.parse().map_err(|_| bad(&hi))?,
                }
            } else {
                Dimension::Values(
                    spec.split(',')
                        .map(str::trim)
                        .filter(|v| !v.is_empty())
                        .map(ParamValue::parse)
                        .collect(),
                )
            };
            space = space.with(name, dim);
        }
        space.validate()?;
        Ok(space)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() {
            return Err(Error::invalid("search space has no dimensions"));
        }
        for (name, dim) in &self.dims {
            dim.validate(name)?;
        }
        Ok(())
    }

    /// Cartesian product, first dimension varying slowest.
    pub fn grid(&self) -> Result<Vec<ParamSet>> {
        self.validate()?;
        let mut points = vec![ParamSet::default()];
        for (name, dim) in &self.dims {
            let values = dim.grid_values().ok_or_else(|| {
                Error::invalid(format!(
                    "dimension `{name}` is continuous and cannot be enumerated"
                ))
            })?;
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |v| {
                        let mut q = p.clone();
                        q.0.push((name.clone(), v.clone()));
                        q
                    })
                })
                .collect();
        }
        Ok(points)
    }

    /// `n` independent draws, reproducible from `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<ParamSet>> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..n)
            .map(|_| {
                ParamSet(
                    self.dims
                        .iter()
                        .map(|(name, d)| (name.clone(), d.sample(&mut rng)))
                        .collect(),
                )
            })
            .collect())
    }
}

impl From<i64> for ParamValue {
    fn from(v: i64) -> Self {
        ParamValue::Int(v)
    }
}

impl From<f64> for ParamValue {
    fn from(v: f64) -> Self {
        ParamValue::Real(v)
    }
}

impl From<&str> for ParamValue {
    fn from(v: &str) -> Self {
        ParamValue::Text(v.to_string())
    }
}

/// One evaluated cell or draw.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub params: ParamSet,
    pub confusion: ConfusionMatrix,
    pub report: MetricReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub best_index: usize,
    pub best_params: ModelParams,
    pub trials: Vec<Trial>,
}

impl SearchOutcome {
    pub fn best(&self) -> &Trial {
        &self.trials[self.best_index]
    }

    /// Trace CSV: one row per trial with its hyperparameters and metrics.
    pub fn write_trace<W: Write>(&self, mut out: W) -> Result<()> {
        let names: Vec<&str> = self.trials[0]
            .params
            .0
            .iter()
            .map(|(n, _)| n.as_str())
            .collect();
        writeln!(
            out,
            "trial,{},accuracy,precision,recall,tp,fp,fn,tn",
            names.join(",")
        )?;
        for (k, t) in self.trials.iter().enumerate() {
            let values: Vec<String> = t.params.0.iter().map(|(_, v)| v.to_string()).collect();
            writeln!(
                out,
                "{k},{},{},{},{},{},{},{},{}",
                values.join(","),
                format_metric(t.report.accuracy),
                format_metric(t.report.precision),
                format_metric(t.report.recall),
                t.confusion.tp,
                t.confusion.fp,
                t.confusion.fn_,
                t.confusion.tn
            )?;
        }
        Ok(())
    }
}

/// Trains every candidate (in parallel), then keeps the first with the
/// highest validation accuracy.
fn run_trials(
    candidates: Vec<ParamSet>,
    train: &LabeledDataset,
    val: &LabeledDataset,
    base: &ModelParams,
    seed: u64,
) -> Result<SearchOutcome> {
    if candidates.is_empty() {
        return Err(Error::invalid("no search candidates"));
    }
    if val.is_empty() {
        return Err(Error::invalid("validation set is empty"));
    }
    let trials = candidates
        .into_par_iter()
        .map(|params| {
            let model = train_model(&params.apply(base)?, train, seed)?;
            let confusion = evaluate_model(&model, val)?;
            Ok(Trial {
                params,
                confusion,
                report: metrics(&confusion),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best_index = 0;
    let score = |t: &Trial| t.report.accuracy.unwrap_or(f64::NEG_INFINITY);
    for (k, t) in trials.iter().enumerate() {
        if score(t) > score(&trials[best_index]) {
            best_index = k;
        }
    }
    let best_params = trials[best_index].params.apply(base)?;
    Ok(SearchOutcome {
        best_index,
        best_params,
        trials,
    })
}

/// Exhaustive search over the space's grid; `base` fixes the family and every
/// hyperparameter the space leaves out.
pub fn grid_search(
    space: &SearchSpace,
    train: &LabeledDataset,
    val: &LabeledDataset,
    base: &ModelParams,
    seed: u64,
) -> Result<SearchOutcome> {
    run_trials(space.grid()?, train, val, base, seed)
}

/// `n_samples` draws from the space, reproducible from `seed`.
pub fn random_search(
    space: &SearchSpace,
    n_samples: usize,
    train: &LabeledDataset,
    val: &LabeledDataset,
    base: &ModelParams,
    seed: u64,
) -> Result<SearchOutcome> {
    if n_samples == 0 {
        return Err(Error::invalid("random search needs at least one sample"));
    }
    run_trials(space.sample(n_samples, seed)?, train, val, base, seed)
}
