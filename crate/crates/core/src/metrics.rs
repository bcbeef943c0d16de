//! Detection metrics over (label, score) pairs.
//!
//! Point metrics use a decision threshold (score ≥ threshold is an alert).
//! AUROC is computed from rank sums with mid-ranks for ties, and the ROC
//! curve is a separate staircase over distinct score thresholds; the two
//! agree because ties get half credit in both.

use serde::Serialize;
use thiserror::Error;

use crate::ingest::Label;

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("{labels} labels but {scores} scores")]
    LengthMismatch { labels: usize, scores: usize },
    #[error("no samples")]
    EmptyInput,
    #[error("score {value} at index {index} is not finite")]
    NonFiniteScore { index: usize, value: f64 },
    #[error("need at least one positive and one negative label")]
    SingleClass,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Confusion {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

fn check(labels: &[Label], scores: &[f64]) -> Result<(), MetricsError> {
    if labels.len() != scores.len() {
        return Err(MetricsError::LengthMismatch {
            labels: labels.len(),
            scores: scores.len(),
        });
    }
    if labels.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    if let Some((index, &value)) = scores.iter().enumerate().find(|(_, s)| !s.is_finite()) {
        return Err(MetricsError::NonFiniteScore { index, value });
    }
    Ok(())
}

pub fn confusion(labels: &[Label], scores: &[f64], threshold: f64) -> Result<Confusion, MetricsError> {
    check(labels, scores)?;
    let mut c = Confusion::default();
    for (l, &s) in labels.iter().zip(scores) {
        match (*l == Label::Injected, s >= threshold) {
            (true, true) => c.tp += 1,
            (true, false) => c.fn_ += 1,
            (false, true) => c.fp += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Metrics whose denominator was zero and were reported as 0.0.
    pub zero_division: Vec<&'static str>,
}

pub fn prf1(c: &Confusion) -> PointMetrics {
    let mut zero_division = Vec::new();
    let mut ratio = |num: u64, den: u64, name: &'static str| {
        if den == 0 {
            zero_division.push(name);
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let accuracy = ratio(c.tp + c.tn, c.total(), "accuracy");
    let precision = ratio(c.tp, c.tp + c.fp, "precision");
    let recall = ratio(c.tp, c.tp + c.fn_, "recall");
    let f1 = if precision + recall == 0.0 {
        zero_division.push("f1");
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    PointMetrics {
        accuracy,
        precision,
        recall,
        f1,
        zero_division,
    }
}

fn class_counts(labels: &[Label]) -> Result<(u64, u64), MetricsError> {
    let pos = labels.iter().filter(|l| **l == Label::Injected).count() as u64;
    let neg = labels.len() as u64 - pos;
    if pos == 0 || neg == 0 {
        return Err(MetricsError::SingleClass);
    }
    Ok((pos, neg))
}

/// Indices sorted by score, ascending.
fn order_by_score(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    idx
}

/// Area under the ROC curve as the Mann–Whitney statistic
/// `P(s⁺ > s⁻) + ½·P(s⁺ = s⁻)`, via mid-rank sums.
pub fn auroc(labels: &[Label], scores: &[f64]) -> Result<f64, MetricsError> {
    check(labels, scores)?;
    let (pos, neg) = class_counts(labels)?;
    let idx = order_by_score(scores);

    // Twice the positive rank sum keeps mid-ranks integral.
    let mut rank_sum_x2: u128 = 0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && scores[idx[j + 1]] == scores[idx[i]] {
            j += 1;
        }
        // 1-based ranks i+1 ..= j+1 share the mid-rank (i + j + 2) / 2.
        let pos_in_group = idx[i..=j]
            .iter()
            .filter(|&&k| labels[k] == Label::Injected)
            .count() as u128;
        rank_sum_x2 += pos_in_group * (i + j + 2) as u128;
        i = j + 1;
    }
    let u_x2 = rank_sum_x2 - (pos as u128) * (pos as u128 + 1);
    Ok(u_x2 as f64 / (2.0 * pos as f64 * neg as f64))
}

/// ROC staircase from (0, 0) to (1, 1), one point per distinct score.
pub fn roc_curve(labels: &[Label], scores: &[f64]) -> Result<Vec<(f64, f64)>, MetricsError> {
    check(labels, scores)?;
    let (pos, neg) = class_counts(labels)?;
    let mut idx = order_by_score(scores);
    idx.reverse();

    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut i = 0;
    while i < idx.len() {
        let s = scores[idx[i]];
        while i < idx.len() && scores[idx[i]] == s {
            if labels[idx[i]] == Label::Injected {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
    }
    Ok(points)
}

/// Trapezoidal area under a polyline of (fpr, tpr) points.
pub fn trapezoid_area(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
        .sum()
}

/// Everything reported for one detector run. Serializes with keys in the
/// order accuracy, precision, recall, f1, auroc, roc_points, then extras.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// `None` when only one class is present.
    pub auroc: Option<f64>,
    pub roc_points: Vec<(f64, f64)>,
    pub threshold: f64,
    pub confusion: Confusion,
    pub zero_division: Vec<&'static str>,
}

impl MetricsReport {
    pub fn evaluate(labels: &[Label], scores: &[f64], threshold: f64) -> Result<Self, MetricsError> {
        let c = confusion(labels, scores, threshold)?;
        let p = prf1(&c);
        let (auroc, roc_points) = match (auroc(labels, scores), roc_curve(labels, scores)) {
            (Ok(a), Ok(r)) => (Some(a), r),
            (Err(MetricsError::SingleClass), _) => (None, Vec::new()),
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        Ok(MetricsReport {
            accuracy: p.accuracy,
            precision: p.precision,
            recall: p.recall,
            f1: p.f1,
            auroc,
            roc_points,
            threshold,
            confusion: c,
            zero_division: p.zero_division,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report is plain data")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is plain data")
    }

    pub fn roc_csv(&self) -> String {
        let mut s = String::from("fpr,tpr\n");
        for (f, t) in &self.roc_points {
            s.push_str(&format!("{f},{t}\n"));
        }
        s
    }
}
