//! Precision, recall and F per relation type, micro-averaged over the
//! three positive types. NoRel is never a scored class.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::candidates::CandidatePair;
use crate::corpus::{largest_remainder_percentages, RelationType};
use crate::emitter::Prediction;

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f_measure(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// `num / den`, or 0 when `den` is 0.
fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Relative shrinkage of the gap to a perfect score:
/// `(f_new - f_base) / (1 - f_base)`.
pub fn error_reduction(f_new: f64, f_base: f64) -> Result<f64, ScoreError> {
    let gap = 1.0 - f_base;
    if gap == 0.0 {
        return Err(ScoreError::DivisionByZero);
    }
    Ok((f_new - f_base) / gap)
}

type Key = (String, String, String);

fn show(key: &Key) -> String {
    format!("({}, {}, {})", key.0, key.1, key.2)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScoreError {
    #[error("no prediction for gold pair {}", show(.0))]
    MissingPrediction(Key),
    #[error("prediction for {} has no gold pair", show(.0))]
    UnknownKey(Key),
    #[error("more than one prediction for {}", show(.0))]
    DuplicatePrediction(Key),
    #[error("more than one gold pair for {}", show(.0))]
    DuplicateGold(Key),
    #[error("error reduction is undefined for a baseline F of 1")]
    DivisionByZero,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScoreOptions {
    /// Treat gold pairs without a prediction as predicted NOREL.
    pub missing_as_norel: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f: f64,
}

impl Counts {
    pub fn prf(&self) -> Prf {
        let precision = ratio(self.tp, self.tp + self.fp);
        let recall = ratio(self.tp, self.tp + self.fn_);
        Prf { precision, recall, f: f_measure(precision, recall) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeMetrics {
    pub label: RelationType,
    /// Gold pairs of this type.
    pub support: usize,
    #[serde(flatten)]
    pub counts: Counts,
    #[serde(flatten)]
    pub prf: Prf,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Coverage {
    pub gold_pairs: usize,
    pub predicted_pairs: usize,
    /// Gold pairs with no prediction, scored as NOREL.
    pub unmatched_gold: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    /// Before, After, Overlap.
    pub per_type: Vec<TypeMetrics>,
    pub micro: TypeTotals,
    pub coverage: Coverage,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeTotals {
    pub support: usize,
    #[serde(flatten)]
    pub counts: Counts,
    #[serde(flatten)]
    pub prf: Prf,
}

impl MetricsReport {
    pub fn get(&self, label: RelationType) -> Option<&TypeMetrics> {
        self.per_type.iter().find(|t| t.label == label)
    }
}

fn slot(rel: RelationType) -> usize {
    match rel {
        RelationType::Before => 0,
        RelationType::After => 1,
        RelationType::Overlap => 2,
        RelationType::NoRel => unreachable!("NoRel has no scoring slot"),
    }
}

/// Builds the report from per-type counts and gold supports.
pub fn report_from_counts(counts: [Counts; 3], support: [usize; 3], coverage: Coverage) -> MetricsReport {
    let per_type = RelationType::POSITIVE
        .iter()
        .map(|&label| {
            let c = counts[slot(label)];
            TypeMetrics { label, support: support[slot(label)], counts: c, prf: c.prf() }
        })
        .collect();
    let total = Counts {
        tp: counts.iter().map(|c| c.tp).sum(),
        fp: counts.iter().map(|c| c.fp).sum(),
        fn_: counts.iter().map(|c| c.fn_).sum(),
    };
    MetricsReport {
        per_type,
        micro: TypeTotals { support: support.iter().sum(), counts: total, prf: total.prf() },
        coverage,
    }
}

/// Scores `preds` against `gold`, matching on (doc_id, event_id, timex_id).
pub fn score(gold: &[CandidatePair], preds: &[Prediction], opts: ScoreOptions) -> Result<MetricsReport, ScoreError> {
    let mut predicted: HashMap<Key, RelationType> = HashMap::with_capacity(preds.len());
    for p in preds {
        let key = (p.doc_id.clone(), p.event_id.clone(), p.timex_id.clone());
        if predicted.insert(key.clone(), p.predicted).is_some() {
            return Err(ScoreError::DuplicatePrediction(key));
        }
    }

    let mut counts = [Counts::default(); 3];
    let mut support = [0usize; 3];
    let mut coverage = Coverage { gold_pairs: gold.len(), predicted_pairs: preds.len(), unmatched_gold: 0 };
    let mut seen: HashMap<Key, ()> = HashMap::with_capacity(gold.len());
    for g in gold {
        let key = (g.doc_id.clone(), g.event_id.clone(), g.timex_id.clone());
        let pred = match predicted.get(&key) {
            Some(&p) => p,
            None if opts.missing_as_norel => {
                coverage.unmatched_gold += 1;
                RelationType::NoRel
            }
            None => return Err(ScoreError::MissingPrediction(key)),
        };
        if seen.insert(key.clone(), ()).is_some() {
            return Err(ScoreError::DuplicateGold(key));
        }
        if g.label.is_positive() {
            support[slot(g.label)] += 1;
        }
        match (g.label.is_positive(), pred.is_positive()) {
            (true, true) if g.label == pred => counts[slot(g.label)].tp += 1,
            (true, true) => {
                counts[slot(g.label)].fn_ += 1;
                counts[slot(pred)].fp += 1;
            }
            (true, false) => counts[slot(g.label)].fn_ += 1,
            (false, true) => counts[slot(pred)].fp += 1,
            (false, false) => {}
        }
    }
    if let Some(key) = predicted.keys().filter(|k| !seen.contains_key(*k)).min() {
        return Err(ScoreError::UnknownKey(key.clone()));
    }
    Ok(report_from_counts(counts, support, coverage))
}

impl fmt::Display for MetricsReport {
    /// Type, share of gold positives, P, R, F; rows After, Before, Overlap,
    /// Total, at four decimals.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let order = [RelationType::After, RelationType::Before, RelationType::Overlap];
        let rows: Vec<&TypeMetrics> = order.iter().filter_map(|r| self.get(*r)).collect();
        let shares = largest_remainder_percentages(&rows.iter().map(|r| r.support).collect::<Vec<_>>());
        writeln!(f, "{:<8} {:>6} {:>9} {:>9} {:>9}", "Type", "Share", "P", "R", "F")?;
        for (row, share) in rows.iter().zip(shares) {
            writeln!(
                f,
                "{:<8} {:>5}% {:>9.4} {:>9.4} {:>9.4}",
                row.label.display_name(),
                share,
                row.prf.precision,
                row.prf.recall,
                row.prf.f
            )?;
        }
        let total_share = if self.micro.support > 0 { 100 } else { 0 };
        writeln!(
            f,
            "{:<8} {:>5}% {:>9.4} {:>9.4} {:>9.4}",
            "Total", total_share, self.micro.prf.precision, self.micro.prf.recall, self.micro.prf.f
        )
    }
}
