//! Entity-marker tagged instances and their JSON Lines files.
//!
//! A tagged sentence wraps the event in `<e> … </e>` and the timex in
//! `<t> … </t>`. Exactly the strings `"<e> "`, `" </e>"`, `"<t> "` and
//! `" </t>"` are inserted, so removing them restores the sentence.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::candidates::CandidatePair;
use crate::corpus::{Document, RelationType, Span};

pub const EVENT_OPEN: &str = "<e>";
pub const EVENT_CLOSE: &str = "</e>";
pub const TIMEX_OPEN: &str = "<t>";
pub const TIMEX_CLOSE: &str = "</t>";
pub const TAGS: [&str; 4] = [EVENT_OPEN, EVENT_CLOSE, TIMEX_OPEN, TIMEX_CLOSE];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TagError {
    #[error("event and timex spans overlap")]
    OverlappingSpans,
    #[error("span [{0}, {1}) is empty or not a valid slice of the sentence")]
    InvalidSpan(usize, usize),
    #[error("sentence already contains the tag token {0}")]
    TagInText(&'static str),
    #[error("{0}")]
    Invariant(String),
}

/// Byte ranges of the two marked regions in a tagged string, each running
/// from the start of its open tag to the end of its close tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TagLayout {
    pub event: Span,
    pub timex: Span,
}

pub fn tag_sentence(sentence: &str, event: Span, timex: Span) -> Result<String, TagError> {
    for span in [event, timex] {
        if span.is_empty() || span.slice(sentence).is_none() {
            return Err(TagError::InvalidSpan(span.start, span.end));
        }
    }
    if event.overlaps(&timex) {
        return Err(TagError::OverlappingSpans);
    }
    if let Some(tag) = TAGS.iter().find(|t| sentence.contains(**t)) {
        return Err(TagError::TagInText(tag));
    }
    let mut inserts = [(event.start, "<e> "), (event.end, " </e>"), (timex.start, "<t> "), (timex.end, " </t>")];
    // Right to left keeps earlier offsets valid. At a shared offset the close
    // tag of the earlier region must land before the open tag of the later.
    inserts.sort_by_key(|&(pos, s)| (std::cmp::Reverse(pos), s.starts_with(' ')));
    let mut out = sentence.to_string();
    for (pos, s) in inserts {
        out.insert_str(pos, s);
    }
    Ok(out)
}

/// Checks the four-tag structure and returns the marked regions.
pub fn tag_layout(text: &str) -> Result<TagLayout, TagError> {
    let find_once = |tag: &'static str| -> Result<usize, TagError> {
        let mut hits = text.match_indices(tag).map(|(i, _)| i);
        match (hits.next(), hits.next()) {
            (Some(i), None) => Ok(i),
            (None, _) => Err(TagError::Invariant(format!("missing {tag}"))),
            (Some(_), Some(_)) => Err(TagError::Invariant(format!("more than one {tag}"))),
        }
    };
    let region = |open: &'static str, close: &'static str| -> Result<Span, TagError> {
        let (o, c) = (find_once(open)?, find_once(close)?);
        let inner_start = o + open.len() + 1;
        if c == 0 || inner_start >= c - 1 {
            return Err(TagError::Invariant(format!("{open} must precede {close} around a non-empty span")));
        }
        if text.as_bytes()[o + open.len()] != b' ' || text.as_bytes()[c - 1] != b' ' {
            return Err(TagError::Invariant(format!("{open} and {close} must be separated from the span by a space")));
        }
        Ok(Span::new(o, c + close.len()))
    };
    let event = region(EVENT_OPEN, EVENT_CLOSE)?;
    let timex = region(TIMEX_OPEN, TIMEX_CLOSE)?;
    if event.overlaps(&timex) {
        return Err(TagError::Invariant("tagged regions overlap or nest".into()));
    }
    Ok(TagLayout { event, timex })
}

/// Removes the inserted tag strings, recovering the untagged sentence.
pub fn strip_tags(text: &str) -> Result<String, TagError> {
    let layout = tag_layout(text)?;
    let mut cuts = Vec::with_capacity(4);
    for region in [layout.event, layout.timex] {
        cuts.push((region.start, region.start + 4));
        cuts.push((region.end - 5, region.end));
    }
    cuts.sort();
    let mut out = String::with_capacity(text.len());
    let mut at = 0;
    for (s, e) in cuts {
        out.push_str(&text[at..s]);
        at = e;
    }
    out.push_str(&text[at..]);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub doc_id: String,
    pub sent_index: usize,
    pub event_id: String,
    pub timex_id: String,
    pub label: RelationType,
    pub text: String,
}

/// One line of a predictions file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Prediction {
    pub doc_id: String,
    pub sent_index: usize,
    pub event_id: String,
    pub timex_id: String,
    pub predicted: RelationType,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EmitReport {
    pub emitted: usize,
    /// Pairs that could not be tagged.
    pub skipped: usize,
}

/// Tags every candidate's sentence. Pairs that cannot be tagged are skipped
/// and counted. Candidates must belong to `doc`.
pub fn build_instances(doc: &Document, pairs: &[CandidatePair]) -> (Vec<Instance>, EmitReport) {
    let mut out = Vec::with_capacity(pairs.len());
    let mut report = EmitReport::default();
    for p in pairs {
        let tagged = (|| {
            let sent = *doc.sentences.get(p.sent_index)?;
            let e = doc.event(&p.event_id)?;
            let t = doc.timex(&p.timex_id)?;
            if !sent.contains(&e.span) || !sent.contains(&t.span) {
                return None;
            }
            let text = sent.slice(&doc.text)?;
            tag_sentence(text, e.span.relative_to(&sent), t.span.relative_to(&sent)).ok()
        })();
        match tagged {
            Some(text) => out.push(Instance {
                doc_id: p.doc_id.clone(),
                sent_index: p.sent_index,
                event_id: p.event_id.clone(),
                timex_id: p.timex_id.clone(),
                label: p.label,
                text,
            }),
            None => {
                log::warn!("{}: cannot tag pair ({}, {})", p.doc_id, p.event_id, p.timex_id);
                report.skipped += 1;
            }
        }
    }
    report.emitted = out.len();
    (out, report)
}

pub fn to_jsonl<T: Serialize>(records: &[T]) -> String {
    let mut out = String::new();
    for r in records {
        let line = serde_json::to_string(r).expect("records serialize to JSON");
        let _ = writeln!(out, "{line}");
    }
    out
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> std::io::Result<()> {
    fs::write(path, to_jsonl(records))
}

#[derive(Debug, thiserror::Error)]
pub enum ReadError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: malformed JSON record: {message}")]
    MalformedJsonLine { line: usize, message: String },
    #[error("line {line}: unknown label {label:?}")]
    UnknownLabel { line: usize, label: String },
    #[error("line {line}: {message}")]
    TagInvariantViolated { line: usize, message: String },
}

impl ReadError {
    pub fn line(&self) -> Option<usize> {
        match self {
            ReadError::Io { .. } => None,
            ReadError::MalformedJsonLine { line, .. }
            | ReadError::UnknownLabel { line, .. }
            | ReadError::TagInvariantViolated { line, .. } => Some(*line),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    doc_id: String,
    sent_index: usize,
    event_id: String,
    timex_id: String,
    label: String,
    text: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPrediction {
    doc_id: String,
    sent_index: usize,
    event_id: String,
    timex_id: String,
    predicted: String,
}

fn parse_lines<R, T>(
    content: &str,
    mut convert: impl FnMut(usize, R) -> Result<T, ReadError>,
) -> Result<Vec<T>, ReadError>
where
    R: for<'de> Deserialize<'de>,
{
    let mut out = Vec::new();
    for (i, raw) in content.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let rec: R =
            serde_json::from_str(raw).map_err(|e| ReadError::MalformedJsonLine { line, message: e.to_string() })?;
        out.push(convert(line, rec)?);
    }
    Ok(out)
}

fn parse_label(line: usize, label: String) -> Result<RelationType, ReadError> {
    label.parse().map_err(|_| ReadError::UnknownLabel { line, label })
}

pub fn parse_instances(content: &str) -> Result<Vec<Instance>, ReadError> {
    parse_lines(content, |line, r: RawInstance| {
        let label = parse_label(line, r.label)?;
        tag_layout(&r.text).map_err(|e| ReadError::TagInvariantViolated { line, message: e.to_string() })?;
        Ok(Instance {
            doc_id: r.doc_id,
            sent_index: r.sent_index,
            event_id: r.event_id,
            timex_id: r.timex_id,
            label,
            text: r.text,
        })
    })
}

pub fn parse_predictions(content: &str) -> Result<Vec<Prediction>, ReadError> {
    parse_lines(content, |line, r: RawPrediction| {
        Ok(Prediction {
            predicted: parse_label(line, r.predicted)?,
            doc_id: r.doc_id,
            sent_index: r.sent_index,
            event_id: r.event_id,
            timex_id: r.timex_id,
        })
    })
}

fn read_file(path: &Path) -> Result<String, ReadError> {
    fs::read_to_string(path).map_err(|source| ReadError::Io { path: path.display().to_string(), source })
}

pub fn read_instances(path: &Path) -> Result<Vec<Instance>, ReadError> {
    parse_instances(&read_file(path)?)
}

pub fn read_predictions(path: &Path) -> Result<Vec<Prediction>, ReadError> {
    parse_predictions(&read_file(path)?)
}

/// Checks every line of an instance file, collecting all problems instead of
/// stopping at the first.
pub fn validate_instances(content: &str) -> Vec<ReadError> {
    content
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .filter_map(|(i, l)| {
            parse_instances(l).err().map(|e| match e {
                ReadError::MalformedJsonLine { message, .. } => ReadError::MalformedJsonLine { line: i + 1, message },
                ReadError::UnknownLabel { label, .. } => ReadError::UnknownLabel { line: i + 1, label },
                ReadError::TagInvariantViolated { message, .. } => {
                    ReadError::TagInvariantViolated { line: i + 1, message }
                }
                io => io,
            })
        })
        .collect()
}
