use crate::error::{Error, Result};
use crate::hierarchy::{Hierarchy, LabelVector};
use crate::matrix::Matrix;

/// Pooled (micro) confusion counts over every label and row.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Confusion {
    /// Precision, 1 when nothing is predicted positive.
    pub fn precision(&self) -> f64 {
        if self.tp + self.fp == 0 {
            1.0
        } else {
            self.tp as f64 / (self.tp + self.fp) as f64
        }
    }

    /// Recall, 1 when there is nothing to find.
    pub fn recall(&self) -> f64 {
        if self.tp + self.fn_ == 0 {
            1.0
        } else {
            self.tp as f64 / (self.tp + self.fn_) as f64
        }
    }
}

fn check(pred: &Matrix, truth: &[LabelVector]) -> Result<()> {
    if pred.rows() != truth.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} prediction rows vs {} truth rows",
            pred.rows(),
            truth.len()
        )));
    }
    for (i, y) in truth.iter().enumerate() {
        if y.len() != pred.cols() {
            return Err(Error::ShapeMismatch(format!(
                "truth row {i} has {} labels, predictions have {}",
                y.len(),
                pred.cols()
            )));
        }
    }
    for i in 0..pred.rows() {
        for (j, &v) in pred.row(i).iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Range { row: i, col: j, value: v });
            }
        }
    }
    Ok(())
}

/// Micro precision and recall after predicting positive wherever `pred >= t`.
pub fn micro_pr_at_threshold(pred: &Matrix, truth: &[LabelVector], t: f64) -> Result<(f64, f64)> {
    check(pred, truth)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Config(format!("threshold {t} not in [0, 1]")));
    }
    let mut c = Confusion::default();
    for (i, y) in truth.iter().enumerate() {
        for (j, &p) in pred.row(i).iter().enumerate() {
            match (p >= t, y.get(j)) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => {}
            }
        }
    }
    Ok((c.precision(), c.recall()))
}

/// Area under the micro precision-recall step curve, `Σ (R_n − R_{n−1}) P_n`,
/// over every distinct score taken as a threshold in descending order.
pub fn average_precision(pred: &Matrix, truth: &[LabelVector]) -> Result<f64> {
    check(pred, truth)?;
    let truth_flat: Vec<bool> = truth.iter().flat_map(|y| y.0.iter().copied()).collect();
    average_precision_scores(pred.as_slice(), &truth_flat)
}

/// [`average_precision`] over flat score/truth slices.
pub fn average_precision_scores(scores: &[f64], truth: &[bool]) -> Result<f64> {
    if scores.len() != truth.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} scores vs {} truth cells",
            scores.len(),
            truth.len()
        )));
    }
    let total_pos = truth.iter().filter(|t| **t).count();
    if total_pos == 0 {
        return Err(Error::EmptyTruth);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut prev_recall = 0.0;
    let mut ap = 0.0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if truth[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let precision = tp as f64 / (tp + fp) as f64;
        let recall = tp as f64 / total_pos as f64;
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    Ok(ap)
}

/// Number of (row, node, parent) triples where a node's score exceeds a parent's.
pub fn count_violations(h: &Hierarchy, pred: &Matrix) -> usize {
    let mut n = 0;
    for row in pred.iter_rows() {
        for l in 0..h.len() {
            n += h.real_parents(l).filter(|&p| row[l] > row[p]).count();
        }
    }
    n
}

/// Metrics reported for one model on one test set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalSummary {
    pub average_precision: f64,
    pub precision_at_half: f64,
    pub recall_at_half: f64,
    pub violations: usize,
    pub rows: usize,
}

impl EvalSummary {
    pub fn compute(h: &Hierarchy, pred: &Matrix, truth: &[LabelVector]) -> Result<Self> {
        if truth.is_empty() {
            return Err(Error::ShapeMismatch("empty test set".into()));
        }
        let ap = average_precision(pred, truth)?;
        let (p, r) = micro_pr_at_threshold(pred, truth, 0.5)?;
        Ok(EvalSummary {
            average_precision: ap,
            precision_at_half: p,
            recall_at_half: r,
            violations: count_violations(h, pred),
            rows: truth.len(),
        })
    }

    pub const CSV_HEADER: &'static str = "average_precision,micro_precision@0.5,micro_recall@0.5,violations,rows";

    pub fn csv_row(&self) -> String {
        format!(
            "{:?},{:?},{:?},{},{}",
            self.average_precision,
            self.precision_at_half,
            self.recall_at_half,
            self.violations,
            self.rows
        )
    }
}
