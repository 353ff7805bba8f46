use std::fmt;

use serde::Serialize;

use super::RelationType;
use crate::candidates::CandidatePair;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LabelCounts {
    pub before: usize,
    pub after: usize,
    pub overlap: usize,
    pub norel: usize,
}

impl LabelCounts {
    pub fn from_labels(labels: impl IntoIterator<Item = RelationType>) -> Self {
        let mut c = LabelCounts::default();
        for l in labels {
            *c.get_mut(l) += 1;
        }
        c
    }

    pub fn get(&self, rel: RelationType) -> usize {
        match rel {
            RelationType::Before => self.before,
            RelationType::After => self.after,
            RelationType::Overlap => self.overlap,
            RelationType::NoRel => self.norel,
        }
    }

    pub fn get_mut(&mut self, rel: RelationType) -> &mut usize {
        match rel {
            RelationType::Before => &mut self.before,
            RelationType::After => &mut self.after,
            RelationType::Overlap => &mut self.overlap,
            RelationType::NoRel => &mut self.norel,
        }
    }

    pub fn positive_total(&self) -> usize {
        self.before + self.after + self.overlap
    }

    /// Whole-number shares of the positive total for Before, After, Overlap.
    pub fn positive_percentages(&self) -> [usize; 3] {
        let p = largest_remainder_percentages(&[self.before, self.after, self.overlap]);
        [p[0], p[1], p[2]]
    }

    fn add(&mut self, other: &LabelCounts) {
        self.before += other.before;
        self.after += other.after;
        self.overlap += other.overlap;
        self.norel += other.norel;
    }
}

/// Integer percentages that sum to exactly 100: floor every share, then hand
/// the leftover points to the largest remainders (earlier entries win ties).
/// All zeros when the counts sum to zero.
pub fn largest_remainder_percentages(counts: &[usize]) -> Vec<usize> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return vec![0; counts.len()];
    }
    let mut pct: Vec<usize> = counts.iter().map(|c| c * 100 / total).collect();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(counts[i] * 100 % total));
    let leftover = 100 - pct.iter().sum::<usize>();
    for &i in order.iter().take(leftover) {
        pct[i] += 1;
    }
    pct
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StatsTable {
    pub splits: Vec<(String, LabelCounts)>,
}

impl StatsTable {
    pub fn total(&self) -> LabelCounts {
        let mut t = LabelCounts::default();
        for (_, c) in &self.splits {
            t.add(c);
        }
        t
    }

    fn columns(&self) -> Vec<(String, LabelCounts)> {
        let mut cols: Vec<(String, LabelCounts)> = self
            .splits
            .iter()
            .map(|(name, c)| {
                let title = match name.as_str() {
                    "train" => "Training set".to_string(),
                    "test" => "Test set".to_string(),
                    other => other.to_string(),
                };
                (title, *c)
            })
            .collect();
        if self.splits.len() > 1 {
            cols.push(("Total".to_string(), self.total()));
        }
        cols
    }
}

/// Tallies candidate labels per split.
pub fn stats(splits: &[(String, Vec<CandidatePair>)]) -> StatsTable {
    StatsTable {
        splits: splits
            .iter()
            .map(|(name, pairs)| (name.clone(), LabelCounts::from_labels(pairs.iter().map(|p| p.label))))
            .collect(),
    }
}

impl fmt::Display for StatsTable {
    /// Tab-separated table: one row per positive type with its share of the
    /// positive total, then the positive total and the NoRel count.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cols = self.columns();
        write!(f, "Temporal relation type")?;
        for (title, _) in &cols {
            write!(f, "\t{title}")?;
        }
        writeln!(f)?;
        let pcts: Vec<[usize; 3]> = cols.iter().map(|(_, c)| c.positive_percentages()).collect();
        for (row, rel) in RelationType::POSITIVE.iter().enumerate() {
            write!(f, "{}", rel.display_name())?;
            for ((_, c), p) in cols.iter().zip(&pcts) {
                write!(f, "\t{} ({}%)", c.get(*rel), p[row])?;
            }
            writeln!(f)?;
        }
        write!(f, "Total")?;
        for (_, c) in &cols {
            let pct = if c.positive_total() > 0 { 100 } else { 0 };
            write!(f, "\t{} ({pct}%)", c.positive_total())?;
        }
        writeln!(f)?;
        write!(f, "Potential NoRel")?;
        for (_, c) in &cols {
            write!(f, "\t{}", c.norel)?;
        }
        writeln!(f)
    }
}
