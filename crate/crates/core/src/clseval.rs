//! Classifier-agnostic evaluation: confusion matrices, precision/recall/F1,
//! accuracy, and balanced inverse-frequency class weights.

use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClsevalError {
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("confusion matrix has no observations")]
    EmptyMatrix,
    #[error("class {0:?} has a zero sample count")]
    ZeroCount(String),
    #[error("no class list could be derived (empty input)")]
    NoClasses,
    #[error("predictions CSV needs `true` and `predicted` columns")]
    MissingColumns,
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// K x K confusion counts; rows are true classes, columns predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    classes: Vec<String>,
    index: BTreeMap<String, usize>,
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new<S: Into<String>>(classes: Vec<S>) -> Result<Self, ClsevalError> {
        let classes: Vec<String> = classes.into_iter().map(Into::into).collect();
        if classes.is_empty() {
            return Err(ClsevalError::NoClasses);
        }
        let index: BTreeMap<String, usize> = classes
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i))
            .collect();
        if index.len() != classes.len() {
            return Err(ClsevalError::NoClasses);
        }
        let k = classes.len();
        Ok(Self {
            classes,
            index,
            counts: vec![vec![0; k]; k],
        })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn accumulate(&mut self, true_label: &str, predicted_label: &str) -> Result<(), ClsevalError> {
        let t = *self
            .index
            .get(true_label)
            .ok_or_else(|| ClsevalError::UnknownLabel(true_label.to_owned()))?;
        let p = *self
            .index
            .get(predicted_label)
            .ok_or_else(|| ClsevalError::UnknownLabel(predicted_label.to_owned()))?;
        self.counts[t][p] += 1;
        Ok(())
    }

    /// Merge a matrix with the same class list (for per-producer matrices
    /// accumulated concurrently and summed at the end).
    pub fn merge(&mut self, other: &ConfusionMatrix) -> Result<(), ClsevalError> {
        if self.classes != other.classes {
            return Err(ClsevalError::NoClasses);
        }
        for (row, other_row) in self.counts.iter_mut().zip(&other.counts) {
            for (cell, other_cell) in row.iter_mut().zip(other_row) {
                *cell += other_cell;
            }
        }
        Ok(())
    }
}

/// Per-class precision/recall/F1 plus overall accuracy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub per_class: Vec<ClassScore>,
    pub accuracy: f64,
    pub total: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScore {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// False when the denominator was zero and the value was pinned to 0.
    pub precision_defined: bool,
    pub recall_defined: bool,
}

/// Compute precision, recall, F1 and accuracy from a confusion matrix.
///
/// `precision = TP/(TP+FP)`, `recall = TP/(TP+FN)`, `f1 = 2PR/(P+R)`;
/// zero denominators yield 0 with the corresponding `*_defined` flag
/// cleared. Accuracy is `trace/total`.
pub fn compute_metrics(cm: &ConfusionMatrix) -> Result<ClassMetrics, ClsevalError> {
    let total = cm.total();
    if total == 0 {
        return Err(ClsevalError::EmptyMatrix);
    }
    let k = cm.classes.len();
    let mut per_class = Vec::with_capacity(k);
    let mut trace = 0u64;
    for c in 0..k {
        let tp = cm.counts[c][c];
        trace += tp;
        let predicted: u64 = (0..k).map(|r| cm.counts[r][c]).sum();
        let actual: u64 = cm.counts[c].iter().sum();
        let precision_defined = predicted > 0;
        let recall_defined = actual > 0;
        let precision = if precision_defined {
            tp as f64 / predicted as f64
        } else {
            0.0
        };
        let recall = if recall_defined {
            tp as f64 / actual as f64
        } else {
            0.0
        };
        per_class.push(ClassScore {
            class: cm.classes[c].clone(),
            precision,
            recall,
            f1: f1_score(precision, recall),
            precision_defined,
            recall_defined,
        });
    }
    Ok(ClassMetrics {
        per_class,
        accuracy: trace as f64 / total as f64,
        total,
    })
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

/// Balanced inverse-frequency class weights: `w_c = N / (K * n_c)`.
pub fn compute_class_weights(
    counts: &BTreeMap<String, u64>,
) -> Result<BTreeMap<String, f64>, ClsevalError> {
    if counts.is_empty() {
        return Err(ClsevalError::NoClasses);
    }
    if let Some((class, _)) = counts.iter().find(|(_, &n)| n == 0) {
        return Err(ClsevalError::ZeroCount(class.clone()));
    }
    let total: u64 = counts.values().sum();
    let k = counts.len() as f64;
    Ok(counts
        .iter()
        .map(|(class, &n)| (class.clone(), total as f64 / (k * n as f64)))
        .collect())
}

/// Text table plus full-precision machine record for a metrics set.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub text: String,
    pub record: ClassMetrics,
}

/// Render metrics as a fixed-layout table, values rounded to 2 decimals,
/// with an accuracy row at the bottom. The machine record keeps full
/// precision and round-trips through JSON.
pub fn report(metrics: &ClassMetrics) -> Report {
    let width = metrics
        .per_class
        .iter()
        .map(|s| s.class.len())
        .chain(["Accuracy".len()].into_iter())
        .max()
        .unwrap_or(8);
    let mut text = format!("{:width$}  Precision  Recall  F1-score\n", "");
    for score in &metrics.per_class {
        text.push_str(&format!(
            "{:width$}  {:9.2}  {:6.2}  {:8.2}\n",
            score.class, score.precision, score.recall, score.f1
        ));
    }
    text.push_str(&format!("{:width$}  {:9}  {:6}  {:8.2}\n", "Accuracy", "", "", metrics.accuracy));
    Report {
        text,
        record: metrics.clone(),
    }
}

/// Read `(true, predicted)` label pairs from CSV.
///
/// The header must name `true` and `predicted` columns (an `id`/`image`
/// column is allowed and ignored). Returns the pairs in file order.
pub fn read_predictions_csv<R: Read>(reader: R) -> Result<Vec<(String, String)>, ClsevalError> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = csv_reader.headers()?.clone();
    let position = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let true_col = position("true").ok_or(ClsevalError::MissingColumns)?;
    let pred_col = position("predicted").ok_or(ClsevalError::MissingColumns)?;
    let mut pairs = Vec::new();
    for row in csv_reader.records() {
        let row = row?;
        let t = row.get(true_col).ok_or(ClsevalError::MissingColumns)?;
        let p = row.get(pred_col).ok_or(ClsevalError::MissingColumns)?;
        pairs.push((t.to_owned(), p.to_owned()));
    }
    Ok(pairs)
}

/// Build a confusion matrix from labeled pairs.
///
/// With `classes == None` the class list is the sorted union of all labels
/// seen; otherwise labels outside the given list are an error.
pub fn matrix_from_pairs(
    pairs: &[(String, String)],
    classes: Option<Vec<String>>,
) -> Result<ConfusionMatrix, ClsevalError> {
    let classes = match classes {
        Some(c) => c,
        None => {
            let mut set: Vec<String> = pairs
                .iter()
                .flat_map(|(t, p)| [t.clone(), p.clone()])
                .collect();
            set.sort();
            set.dedup();
            set
        }
    };
    let mut cm = ConfusionMatrix::new(classes)?;
    for (t, p) in pairs {
        cm.accumulate(t, p)?;
    }
    Ok(cm)
}
