//! Word-level augmenters that leave the tagged regions alone.
//!
//! A tagged text is split into whitespace-delimited units. Each `<e> … </e>`
//! and `<t> … </t>` region is kept as one protected unit, byte for byte.
//! Every unit remembers the whitespace that preceded it, so an unmodified
//! sequence renders back to the exact input.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rand::seq::index;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SamplingError;
use crate::emitter::{tag_layout, TagError, TAGS};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unit {
    /// Whitespace between the previous unit and this one.
    pub lead: String,
    pub text: String,
    pub protected: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSeq {
    pub units: Vec<Unit>,
    pub trailing: String,
}

impl TokenSeq {
    pub fn parse(tagged: &str) -> Result<TokenSeq, TagError> {
        let layout = tag_layout(tagged)?;
        let mut regions = [layout.event, layout.timex];
        regions.sort();
        let mut seq = TokenSeq { units: Vec::new(), trailing: String::new() };
        let mut at = 0;
        for r in regions {
            let lead = seq.push_free(&tagged[at..r.start]);
            seq.units.push(Unit { lead, text: tagged[r.start..r.end].to_string(), protected: true });
            at = r.end;
        }
        seq.trailing = seq.push_free(&tagged[at..]);
        Ok(seq)
    }

    /// Pushes the tokens of `segment` and returns its unconsumed trailing
    /// whitespace.
    fn push_free(&mut self, segment: &str) -> String {
        let mut lead_start = 0;
        let mut token_start: Option<usize> = None;
        for (i, c) in segment.char_indices() {
            match (c.is_whitespace(), token_start) {
                (false, None) => token_start = Some(i),
                (true, Some(s)) => {
                    self.units.push(Unit {
                        lead: segment[lead_start..s].to_string(),
                        text: segment[s..i].to_string(),
                        protected: false,
                    });
                    token_start = None;
                    lead_start = i;
                }
                _ => {}
            }
        }
        match token_start {
            Some(s) => {
                self.units.push(Unit {
                    lead: segment[lead_start..s].to_string(),
                    text: segment[s..].to_string(),
                    protected: false,
                });
                String::new()
            }
            None => segment[lead_start..].to_string(),
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for u in &self.units {
            out.push_str(&u.lead);
            out.push_str(&u.text);
        }
        out.push_str(&self.trailing);
        out
    }

    /// Positions of the unprotected units.
    pub fn free_indices(&self) -> Vec<usize> {
        (0..self.units.len()).filter(|&i| !self.units[i].protected).collect()
    }

    /// Removes unit `i`. A unit glued to the removed one, or the new first
    /// unit, takes over its leading whitespace.
    pub fn delete(&mut self, i: usize) {
        let removed = self.units.remove(i);
        if let Some(next) = self.units.get_mut(i) {
            if i == 0 || next.lead.is_empty() {
                next.lead = removed.lead;
            }
        }
    }

    pub fn swap(&mut self, i: usize, j: usize) {
        let a = std::mem::take(&mut self.units[i].text);
        self.units[i].text = std::mem::replace(&mut self.units[j].text, a);
    }

    /// Inserts a free unit so that it becomes unit `pos`.
    pub fn insert(&mut self, pos: usize, word: &str) {
        let mut unit = Unit { lead: " ".into(), text: word.to_string(), protected: false };
        if pos == 0 {
            if let Some(first) = self.units.first_mut() {
                unit.lead = std::mem::replace(&mut first.lead, " ".into());
            } else {
                unit.lead.clear();
            }
        } else if let Some(next) = self.units.get_mut(pos).filter(|u| u.lead.is_empty()) {
            // A unit glued to a tag region must not glue to the new word.
            next.lead = " ".into();
        }
        self.units.insert(pos, unit);
    }
}

/// Word → synonyms, loaded from a tab-separated file:
/// `word<TAB>synonym[<TAB>synonym…]`. `#` lines and blank lines are skipped.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    entries: BTreeMap<String, Vec<String>>,
}

impl Lexicon {
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Lexicon {
        let mut lex = Lexicon::default();
        for (w, s) in pairs {
            lex.entries.entry(w.to_string()).or_default().push(s.to_string());
        }
        lex
    }

    pub fn parse(content: &str) -> Result<Lexicon, String> {
        let mut lex = Lexicon::default();
        for (i, line) in content.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split('\t');
            let word = fields.next().unwrap_or_default();
            let syns: Vec<&str> = fields.collect();
            if word.is_empty() || syns.is_empty() {
                return Err(format!("line {}: expected word<TAB>synonym", i + 1));
            }
            for s in syns {
                if s.is_empty() || s.contains(char::is_whitespace) || TAGS.iter().any(|t| s.contains(t)) {
                    return Err(format!("line {}: synonym {s:?} must be a single non-tag token", i + 1));
                }
                lex.entries.entry(word.to_string()).or_default().push(s.to_string());
            }
        }
        Ok(lex)
    }

    pub fn load(path: &Path) -> Result<Lexicon, SamplingError> {
        let content = std::fs::read_to_string(path)
            .map_err(|e| SamplingError::Lexicon { path: path.display().to_string(), message: e.to_string() })?;
        Lexicon::parse(&content).map_err(|message| SamplingError::Lexicon { path: path.display().to_string(), message })
    }

    pub fn synonyms(&self, word: &str) -> Option<&[String]> {
        self.entries.get(word).map(Vec::as_slice).filter(|s| !s.is_empty())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// One step of an augmentation chain. Implementations must only touch
/// unprotected units.
pub trait Augmenter: Send + Sync + fmt::Debug {
    fn augment(&self, seq: &mut TokenSeq, rng: &mut dyn RngCore);
}

/// Number of operations for `rate` over `eligible` items, rounded half up.
fn op_count(rate: f64, eligible: usize) -> usize {
    ((rate * eligible as f64).round() as usize).min(eligible)
}

#[derive(Debug, Clone)]
pub struct RandomSwap {
    pub rate: f64,
}

impl Augmenter for RandomSwap {
    fn augment(&self, seq: &mut TokenSeq, rng: &mut dyn RngCore) {
        let free = seq.free_indices();
        if free.len() < 2 {
            return;
        }
        for _ in 0..op_count(self.rate, free.len()) {
            let pick = index::sample(rng, free.len(), 2);
            seq.swap(free[pick.index(0)], free[pick.index(1)]);
        }
    }
}

#[derive(Debug, Clone)]
pub struct RandomDelete {
    pub rate: f64,
}

impl Augmenter for RandomDelete {
    fn augment(&self, seq: &mut TokenSeq, rng: &mut dyn RngCore) {
        let free = seq.free_indices();
        let n = op_count(self.rate, free.len());
        let mut doomed: Vec<usize> = index::sample(rng, free.len(), n).into_iter().map(|k| free[k]).collect();
        doomed.sort_unstable_by(|a, b| b.cmp(a));
        for i in doomed {
            seq.delete(i);
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynonymReplace {
    pub rate: f64,
    pub lexicon: Lexicon,
}

impl Augmenter for SynonymReplace {
    fn augment(&self, seq: &mut TokenSeq, rng: &mut dyn RngCore) {
        let eligible: Vec<usize> =
            seq.free_indices().into_iter().filter(|&i| self.lexicon.synonyms(&seq.units[i].text).is_some()).collect();
        let n = op_count(self.rate, eligible.len());
        for k in index::sample(rng, eligible.len(), n) {
            let i = eligible[k];
            let syns = self.lexicon.synonyms(&seq.units[i].text).expect("filtered above");
            let pick = syns[rng.random_range(0..syns.len())].clone();
            seq.units[i].text = pick;
        }
    }
}

/// Inserts a synonym of a random free word at a random position.
#[derive(Debug, Clone)]
pub struct RandomInsert {
    pub rate: f64,
    pub lexicon: Lexicon,
}

impl Augmenter for RandomInsert {
    fn augment(&self, seq: &mut TokenSeq, rng: &mut dyn RngCore) {
        let n = op_count(self.rate, seq.free_indices().len());
        for _ in 0..n {
            let sources: Vec<usize> = seq
                .free_indices()
                .into_iter()
                .filter(|&i| self.lexicon.synonyms(&seq.units[i].text).is_some())
                .collect();
            if sources.is_empty() {
                return;
            }
            let src = sources[rng.random_range(0..sources.len())];
            let syns = self.lexicon.synonyms(&seq.units[src].text).expect("filtered above");
            let word = syns[rng.random_range(0..syns.len())].clone();
            let pos = rng.random_range(0..=seq.units.len());
            seq.insert(pos, &word);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Augmented {
    pub text: String,
    /// No unprotected token existed, so the text was returned unchanged.
    pub no_eligible_tokens: bool,
}

/// Runs `chain` in order over the unprotected tokens of `tagged`.
pub fn augment_with(tagged: &str, chain: &[Box<dyn Augmenter>], rng: &mut dyn RngCore) -> Result<Augmented, TagError> {
    let mut seq = TokenSeq::parse(tagged)?;
    if seq.free_indices().is_empty() {
        log::warn!("no unprotected tokens to augment in {tagged:?}");
        return Ok(Augmented { text: tagged.to_string(), no_eligible_tokens: true });
    }
    for step in chain {
        step.augment(&mut seq, rng);
    }
    Ok(Augmented { text: seq.render(), no_eligible_tokens: false })
}

/// [`augment_with`] on a ChaCha8 generator seeded from `seed`.
pub fn augment_text(tagged: &str, chain: &[Box<dyn Augmenter>], seed: u64) -> Result<Augmented, TagError> {
    augment_with(tagged, chain, &mut ChaCha8Rng::seed_from_u64(seed))
}
