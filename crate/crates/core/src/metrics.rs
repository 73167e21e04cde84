//! Confusion counts, balanced accuracy and friends, and Jaccard stability.
//!
//! Class 1 is the positive class: `tn`/`fp` count true Class-0 samples,
//! `fn`/`tp` true Class-1 samples.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tp: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassificationReport {
    pub counts: ConfusionCounts,
    pub balanced_accuracy: f64,
    pub specificity: f64,
    pub recall: f64,
    /// `None` when nothing was predicted positive.
    pub precision: Option<f64>,
}

pub fn confusion(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionCounts> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Input(format!(
            "label sequences differ in length: {} vs {}",
            y_true.len(),
            y_pred.len()
        )));
    }
    if y_true.is_empty() {
        return Err(Error::Input("no labels to compare".into()));
    }
    let mut c = ConfusionCounts::default();
    for (i, (&t, &p)) in y_true.iter().zip(y_pred).enumerate() {
        match (t, p) {
            (0, 0) => c.tn += 1,
            (0, 1) => c.fp += 1,
            (1, 0) => c.fn_ += 1,
            (1, 1) => c.tp += 1,
            _ => return Err(Error::Input(format!("non-binary label at position {i}: ({t}, {p})"))),
        }
    }
    Ok(c)
}

pub fn report(counts: ConfusionCounts) -> Result<ClassificationReport> {
    let ConfusionCounts { tn, fp, fn_, tp } = counts;
    if tp + fn_ == 0 {
        return Err(Error::UndefinedMetric("recall: no Class-1 samples"));
    }
    if tn + fp == 0 {
        return Err(Error::UndefinedMetric("specificity: no Class-0 samples"));
    }
    let recall = tp as f64 / (tp + fn_) as f64;
    let specificity = tn as f64 / (tn + fp) as f64;
    let precision = (tp + fp > 0).then(|| tp as f64 / (tp + fp) as f64);
    Ok(ClassificationReport {
        counts,
        balanced_accuracy: 0.5 * (recall + specificity),
        specificity,
        recall,
        precision,
    })
}

/// Percentage with two decimals, as printed in reports.
pub fn percent(value: f64) -> String {
    format!("{:.2}", 100.0 * value)
}

pub const REPORT_HEADER: &str = "split,bal_acc,specificity,recall,precision,tn,fp,fn,tp";

impl ClassificationReport {
    /// One CSV row under [`REPORT_HEADER`]; an undefined precision is written as `NA`.
    pub fn csv_row(&self, split: &str) -> String {
        let c = self.counts;
        format!(
            "{split},{},{},{},{},{},{},{},{}",
            percent(self.balanced_accuracy),
            percent(self.specificity),
            percent(self.recall),
            self.precision.map_or_else(|| "NA".to_string(), percent),
            c.tn,
            c.fp,
            c.fn_,
            c.tp
        )
    }

    /// Parses a row written by [`Self::csv_row`]. Metrics are recomputed from
    /// the counts, so the result is exact.
    pub fn parse_csv_row(line: &str) -> Result<(String, Self)> {
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 9 {
            return Err(Error::Input(format!(
                "report row needs 9 fields, got {}: `{line}`",
                fields.len()
            )));
        }
        let count = |i: usize| {
            fields[i]
                .parse::<u64>()
                .map_err(|e| Error::Input(format!("bad count `{}`: {e}", fields[i])))
        };
        let counts = ConfusionCounts {
            tn: count(5)?,
            fp: count(6)?,
            fn_: count(7)?,
            tp: count(8)?,
        };
        Ok((fields[0].to_string(), report(counts)?))
    }
}

/// Fixed-width table with the columns of a classification report.
pub fn format_table(rows: &[(String, ClassificationReport)]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<12} {:>9} {:>11} {:>8} {:>9} {:>5} {:>5} {:>5} {:>5}",
        "Split", "Bal. Acc.", "Specificity", "Recall", "Precision", "TN", "FP", "FN", "TP"
    );
    for (name, r) in rows {
        let c = r.counts;
        let _ = writeln!(
            out,
            "{:<12} {:>9} {:>11} {:>8} {:>9} {:>5} {:>5} {:>5} {:>5}",
            name,
            percent(r.balanced_accuracy),
            percent(r.specificity),
            percent(r.recall),
            r.precision.map_or_else(|| "NA".to_string(), percent),
            c.tn,
            c.fp,
            c.fn_,
            c.tp
        );
    }
    out
}

/// `|S1 & S2| / |S1 | S2|`; two empty sets are identical and score 1.
pub fn jaccard(s1: &BTreeSet<usize>, s2: &BTreeSet<usize>) -> f64 {
    let union = s1.union(s2).count();
    if union == 0 {
        return 1.0;
    }
    s1.intersection(s2).count() as f64 / union as f64
}

/// Mean Jaccard index over all unordered pairs.
pub fn avg_jaccard(family: &[BTreeSet<usize>]) -> Result<f64> {
    if family.len() < 2 {
        return Err(Error::Input(format!(
            "need at least 2 feature sets, got {}",
            family.len()
        )));
    }
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..family.len() {
        for j in i + 1..family.len() {
            total += jaccard(&family[i], &family[j]);
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}

/// Symmetric matrix of pairwise Jaccard indices.
pub fn jaccard_matrix(family: &[BTreeSet<usize>]) -> Vec<Vec<f64>> {
    family
        .iter()
        .map(|a| family.iter().map(|b| jaccard(a, b)).collect())
        .collect()
}
