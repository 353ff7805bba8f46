//! Intra-sentential (event, timex) candidate pairs.
//!
//! Labels are event-relative: `BEFORE` means the event precedes the timex.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::closure::{close_links, Closure};
use crate::corpus::{Document, RelationType, Span};
use crate::parallel::{self, Exec};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct CandidatePair {
    pub doc_id: String,
    pub sent_index: usize,
    pub event_id: String,
    pub timex_id: String,
    pub label: RelationType,
}

impl CandidatePair {
    pub fn key(&self) -> (&str, &str, &str) {
        (&self.doc_id, &self.event_id, &self.timex_id)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CandidateOptions {
    /// Label pairs whose closed relation is contradictory as NOREL instead of
    /// dropping them.
    pub conflicted_as_norel: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CandidateSet {
    pub pairs: Vec<CandidatePair>,
    /// Pairs dropped because their closed relation is contradictory.
    pub excluded_conflicted: usize,
    /// Pairs dropped because the event and timex spans overlap, which the
    /// tag scheme cannot represent.
    pub excluded_overlapping: usize,
    /// Entities not contained in any single sentence.
    pub cross_sentence_entities: usize,
}

impl CandidateSet {
    pub fn merge(sets: impl IntoIterator<Item = CandidateSet>) -> CandidateSet {
        let mut out = CandidateSet::default();
        for s in sets {
            out.pairs.extend(s.pairs);
            out.excluded_conflicted += s.excluded_conflicted;
            out.excluded_overlapping += s.excluded_overlapping;
            out.cross_sentence_entities += s.cross_sentence_entities;
        }
        out
    }
}

/// Index of the sentence that fully contains `span`, if any.
pub fn entity_sentence(doc: &Document, span: &Span) -> Option<usize> {
    doc.sentences.iter().position(|s| s.contains(span))
}

pub fn generate_candidates(doc: &Document, closure: &Closure, opts: CandidateOptions) -> CandidateSet {
    let mut out = CandidateSet::default();
    let mut sent_of = |span: &Span| {
        let s = entity_sentence(doc, span);
        if s.is_none() {
            out.cross_sentence_entities += 1;
        }
        s
    };
    let events: Vec<_> = doc.events.iter().filter_map(|e| sent_of(&e.span).map(|s| (s, e))).collect();
    let timexes: Vec<_> = doc.timexes.iter().filter_map(|t| sent_of(&t.span).map(|s| (s, t))).collect();

    let mut keyed = Vec::new();
    for &(es, e) in &events {
        for &(ts, t) in &timexes {
            if es != ts {
                continue;
            }
            if e.span.overlaps(&t.span) {
                out.excluded_overlapping += 1;
                continue;
            }
            let label = match closure.query(&e.id, &t.id) {
                Ok(rel) => rel.unwrap_or(RelationType::NoRel),
                Err(_) if opts.conflicted_as_norel => RelationType::NoRel,
                Err(_) => {
                    out.excluded_conflicted += 1;
                    continue;
                }
            };
            let order = (es, e.span.start, t.span.start, e.span.end, t.span.end);
            keyed.push((
                order,
                CandidatePair {
                    doc_id: doc.doc_id.clone(),
                    sent_index: es,
                    event_id: e.id.clone(),
                    timex_id: t.id.clone(),
                    label,
                },
            ));
        }
    }
    keyed.sort_by(|(ka, a), (kb, b)| {
        ka.cmp(kb).then_with(|| (&a.event_id, &a.timex_id).cmp(&(&b.event_id, &b.timex_id)))
    });
    out.pairs = keyed.into_iter().map(|(_, p)| p).collect();
    out
}

/// Closes each document's links and generates its candidates, keeping
/// corpus order.
pub fn corpus_candidates(corpus: &[Document], opts: CandidateOptions, exec: Exec) -> Vec<CandidateSet> {
    parallel::map(exec, corpus, |_, doc| {
        let closure = close_links(&doc.links);
        generate_candidates(doc, &closure, opts)
    })
}

/// Tab-separated `doc_id sent_index event_id timex_id label` lines, preceded
/// by `header` as a `#` comment when given.
pub fn to_tsv(pairs: &[CandidatePair], header: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(h) = header {
        let _ = writeln!(out, "# {h}");
    }
    for p in pairs {
        let _ = writeln!(out, "{}\t{}\t{}\t{}\t{}", p.doc_id, p.sent_index, p.event_id, p.timex_id, p.label);
    }
    out
}

#[derive(Debug, thiserror::Error)]
pub enum TsvError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

pub fn parse_tsv(content: &str) -> Result<Vec<CandidatePair>, TsvError> {
    let mut out = Vec::new();
    for (i, raw) in content.lines().enumerate() {
        let line = i + 1;
        if raw.is_empty() || raw.starts_with('#') {
            continue;
        }
        let malformed = |message: String| TsvError::Malformed { line, message };
        let f: Vec<&str> = raw.split('\t').collect();
        if f.len() != 5 {
            return Err(malformed(format!("expected 5 fields, found {}", f.len())));
        }
        let sent_index = f[1].parse().map_err(|_| malformed(format!("bad sentence index {:?}", f[1])))?;
        let label = f[4].parse().map_err(|e| malformed(format!("{e}")))?;
        out.push(CandidatePair {
            doc_id: f[0].to_string(),
            sent_index,
            event_id: f[2].to_string(),
            timex_id: f[3].to_string(),
            label,
        });
    }
    Ok(out)
}

pub fn read_tsv(path: &Path) -> Result<Vec<CandidatePair>, TsvError> {
    let content =
        std::fs::read_to_string(path).map_err(|source| TsvError::Io { path: path.display().to_string(), source })?;
    parse_tsv(&content)
}
