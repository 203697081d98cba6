//! Binary emotion scoring with `Positive` as the positive class.
//!
//! Zero denominators are defined as zero: precision is 0 when nothing was
//! predicted positive, recall is 0 when there are no positive labels, and F1
//! is 0 when precision and recall are both 0.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::annotations::Emotion;
use crate::error::{Error, Result};
use crate::pipeline::AblationMode;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        (self.tp + self.tn) as f64 / total as f64
    }

    pub fn precision(&self) -> f64 {
        let denom = self.tp + self.fp;
        if denom == 0 {
            0.0
        } else {
            self.tp as f64 / denom as f64
        }
    }

    pub fn recall(&self) -> f64 {
        let denom = self.tp + self.fn_;
        if denom == 0 {
            0.0
        } else {
            self.tp as f64 / denom as f64
        }
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

pub fn confusion(predictions: &[Emotion], labels: &[Emotion]) -> Result<ConfusionCounts> {
    if predictions.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: labels.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::EmptyInput("no predictions to evaluate"));
    }
    let mut c = ConfusionCounts::default();
    for (p, l) in predictions.iter().zip(labels) {
        match (p, l) {
            (Emotion::Positive, Emotion::Positive) => c.tp += 1,
            (Emotion::Negative, Emotion::Negative) => c.tn += 1,
            (Emotion::Positive, Emotion::Negative) => c.fp += 1,
            (Emotion::Negative, Emotion::Positive) => c.fn_ += 1,
        }
    }
    Ok(c)
}

pub fn accuracy(c: &ConfusionCounts) -> f64 {
    c.accuracy()
}

pub fn precision(c: &ConfusionCounts) -> f64 {
    c.precision()
}

pub fn recall(c: &ConfusionCounts) -> f64 {
    c.recall()
}

pub fn f1(c: &ConfusionCounts) -> f64 {
    c.f1()
}

/// One scored prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scored {
    pub prediction: Emotion,
    pub label: Emotion,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub counts: ConfusionCounts,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mean_confidence: f64,
}

impl EvalReport {
    pub fn from_counts(counts: ConfusionCounts, mean_confidence: f64) -> Self {
        Self {
            counts,
            accuracy: counts.accuracy(),
            precision: counts.precision(),
            recall: counts.recall(),
            f1: counts.f1(),
            mean_confidence,
        }
    }

    pub fn evaluate(items: &[Scored]) -> Result<Self> {
        let preds: Vec<Emotion> = items.iter().map(|s| s.prediction).collect();
        let labels: Vec<Emotion> = items.iter().map(|s| s.label).collect();
        let counts = confusion(&preds, &labels)?;
        let mean = items.iter().map(|s| s.confidence).sum::<f64>() / items.len() as f64;
        Ok(Self::from_counts(counts, mean))
    }

    pub fn to_text(&self) -> String {
        let c = &self.counts;
        format!(
            "items {}  (TP {}  TN {}  FP {}  FN {})\n\
             Accuracy(%)   {}\n\
             F-score(%)    {}\n\
             Precision(%)  {}\n\
             Recall(%)     {}\n\
             Confidence    {:.2} (mean)\n",
            c.total(),
            c.tp,
            c.tn,
            c.fp,
            c.fn_,
            pct(self.accuracy),
            pct(self.f1),
            pct(self.precision),
            pct(self.recall),
            self.mean_confidence
        )
    }
}

/// Percentage with two decimals, e.g. `0.5 -> "50.00"`.
pub fn pct(x: f64) -> String {
    format!("{:.2}", x * 100.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    pub mode: AblationMode,
    pub report: EvalReport,
}

/// Per-mode results in the fixed order video, video+audio, video+audio+NFBL.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationTable {
    pub rows: Vec<AblationRow>,
}

pub const ABLATION_COLUMNS: [&str; 4] = ["Accuracy(%)", "F-score(%)", "Precision(%)", "Confidence (mean)"];

pub fn ablation_report(results: &BTreeMap<AblationMode, Vec<Scored>>) -> Result<AblationTable> {
    let mut rows = Vec::new();
    for mode in AblationMode::ALL {
        if let Some(items) = results.get(&mode) {
            rows.push(AblationRow {
                mode,
                report: EvalReport::evaluate(items)?,
            });
        }
    }
    Ok(AblationTable { rows })
}

impl AblationTable {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{:<18} {:>12} {:>11} {:>13} {:>18}\n",
            "Mode", ABLATION_COLUMNS[0], ABLATION_COLUMNS[1], ABLATION_COLUMNS[2], ABLATION_COLUMNS[3]
        );
        for row in &self.rows {
            let r = &row.report;
            let _ = writeln!(
                out,
                "{:<18} {:>12} {:>11} {:>13} {:>18.2}",
                row.mode.label(),
                pct(r.accuracy),
                pct(r.f1),
                pct(r.precision),
                r.mean_confidence
            );
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("mode,accuracy_pct,f_score_pct,precision_pct,mean_confidence\n");
        for row in &self.rows {
            let r = &row.report;
            let _ = writeln!(
                out,
                "{},{},{},{},{:.2}",
                row.mode.label(),
                pct(r.accuracy),
                pct(r.f1),
                pct(r.precision),
                r.mean_confidence
            );
        }
        out
    }
}
