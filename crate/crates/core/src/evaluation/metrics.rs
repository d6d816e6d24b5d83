use std::io::Write;

use crate::error::{Error, Result};
use crate::market_data::{Label, LabeledDataset};
use crate::model::TrainedModel;

/// 2×2 counts with +1 (increase) as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn record(&mut self, predicted: Label, actual: Label) {
        match (predicted, actual) {
            (Label::Up, Label::Up) => self.tp += 1,
            (Label::Up, Label::Down) => self.fp += 1,
            (Label::Down, Label::Up) => self.fn_ += 1,
            (Label::Down, Label::Down) => self.tn += 1,
        }
    }
}

pub fn confusion(preds: &[Label], truths: &[Label]) -> Result<ConfusionMatrix> {
    if preds.len() != truths.len() {
        return Err(Error::invalid(format!(
            "{} predictions for {} labels",
            preds.len(),
            truths.len()
        )));
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &t) in preds.iter().zip(truths) {
        cm.record(p, t);
    }
    Ok(cm)
}

/// Same as [`confusion`] on raw ±1 integers.
pub fn confusion_signed(preds: &[i64], truths: &[i64]) -> Result<ConfusionMatrix> {
    let convert = |v: &[i64]| -> Result<Vec<Label>> {
        v.iter()
            .map(|&x| {
                Label::from_signed(x)
                    .ok_or_else(|| Error::invalid(format!("label must be +1 or -1, got {x}")))
            })
            .collect()
    };
    confusion(&convert(preds)?, &convert(truths)?)
}

/// Accuracy, precision and recall; `None` where the denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn metrics(cm: &ConfusionMatrix) -> MetricReport {
    MetricReport {
        accuracy: ratio(cm.tp + cm.tn, cm.total()),
        precision: ratio(cm.tp, cm.tp + cm.fp),
        recall: ratio(cm.tp, cm.tp + cm.fn_),
    }
}

pub fn evaluate_model(model: &TrainedModel, data: &LabeledDataset) -> Result<ConfusionMatrix> {
    confusion(&model.predict_all(data)?, data.labels())
}

/// Accuracy of always predicting the more frequent class of `data`.
pub fn majority_baseline(data: &LabeledDataset) -> Option<f64> {
    let up = data.count_up();
    ratio(up.max(data.len() - up), data.len())
}

pub const REPORT_HEADER: &str = "model,accuracy,precision,recall,tp,fp,fn,tn";

/// Text form of an optional metric; undefined values print as `NA`.
pub fn format_metric(value: Option<f64>) -> String {
    value.map_or_else(|| "NA".to_string(), |v| format!("{v:?}"))
}

/// Report row for one model, without a trailing newline.
pub fn report_row(model: &str, cm: &ConfusionMatrix) -> String {
    let m = metrics(cm);
    format!(
        "{model},{},{},{},{},{},{},{}",
        format_metric(m.accuracy),
        format_metric(m.precision),
        format_metric(m.recall),
        cm.tp,
        cm.fp,
        cm.fn_,
        cm.tn
    )
}

pub fn write_report<W: Write>(mut out: W, rows: &[(String, ConfusionMatrix)]) -> Result<()> {
    writeln!(out, "{REPORT_HEADER}")?;
    for (name, cm) in rows {
        writeln!(out, "{}", report_row(name, cm))?;
    }
    Ok(())
}
