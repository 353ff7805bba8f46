//! Standoff-annotated documents: types, parsing, sentence segmentation,
//! validation and label statistics.

mod sentences;
mod standoff;
mod stats;
mod validate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use sentences::split_sentences;
pub use standoff::{parse_corpus, parse_document, parse_split_corpus, to_ann, ParseError, ParseErrorKind};
pub use stats::{largest_remainder_percentages, stats, LabelCounts, StatsTable};
pub use validate::{validate, validate_document, Diagnostic, DiagnosticKind, Severity};

/// Half-open byte range `[start, end)` into a document's raw text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }

    /// `other` lies entirely inside `self`.
    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    /// Re-expresses `self` relative to the start of `outer`.
    pub fn relative_to(&self, outer: &Span) -> Span {
        Span::new(self.start - outer.start, self.end - outer.start)
    }

    pub fn slice<'a>(&self, text: &'a str) -> Option<&'a str> {
        text.get(self.start..self.end)
    }
}

/// Temporal relation label. `NoRel` is only ever a candidate label, never a link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RelationType {
    #[serde(rename = "BEFORE")]
    Before,
    #[serde(rename = "AFTER")]
    After,
    #[serde(rename = "OVERLAP")]
    Overlap,
    #[serde(rename = "NOREL")]
    NoRel,
}

impl RelationType {
    pub const POSITIVE: [RelationType; 3] = [RelationType::Before, RelationType::After, RelationType::Overlap];
    pub const ALL: [RelationType; 4] =
        [RelationType::Before, RelationType::After, RelationType::Overlap, RelationType::NoRel];

    pub fn is_positive(self) -> bool {
        self != RelationType::NoRel
    }

    /// Relation seen from the other end of the pair.
    pub fn converse(self) -> RelationType {
        match self {
            RelationType::Before => RelationType::After,
            RelationType::After => RelationType::Before,
            other => other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RelationType::Before => "BEFORE",
            RelationType::After => "AFTER",
            RelationType::Overlap => "OVERLAP",
            RelationType::NoRel => "NOREL",
        }
    }

    /// Title-case name used in printed tables.
    pub fn display_name(self) -> &'static str {
        match self {
            RelationType::Before => "Before",
            RelationType::After => "After",
            RelationType::Overlap => "Overlap",
            RelationType::NoRel => "NoRel",
        }
    }
}

impl fmt::Display for RelationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown relation label {0:?}")]
pub struct UnknownLabel(pub String);

impl FromStr for RelationType {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "BEFORE" => Ok(RelationType::Before),
            "AFTER" => Ok(RelationType::After),
            "OVERLAP" => Ok(RelationType::Overlap),
            "NOREL" => Ok(RelationType::NoRel),
            other => Err(UnknownLabel(other.to_string())),
        }
    }
}

/// A clinically relevant occurrence mention.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub id: String,
    pub span: Span,
    pub surface: String,
}

/// A date, time, duration or frequency mention.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Timex {
    pub id: String,
    pub span: Span,
    pub surface: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalLink {
    pub id: String,
    pub source: String,
    pub target: String,
    pub rel: RelationType,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntityKind {
    Event,
    Timex,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Document {
    pub doc_id: String,
    pub text: String,
    pub sentences: Vec<Span>,
    pub events: Vec<Event>,
    pub timexes: Vec<Timex>,
    pub links: Vec<TemporalLink>,
}

impl Document {
    /// Builds a document whose sentences come from [`split_sentences`].
    pub fn new(doc_id: impl Into<String>, text: impl Into<String>) -> Self {
        let text = text.into();
        let sentences = split_sentences(&text);
        Document { doc_id: doc_id.into(), text, sentences, ..Default::default() }
    }

    pub fn event(&self, id: &str) -> Option<&Event> {
        self.events.iter().find(|e| e.id == id)
    }

    pub fn timex(&self, id: &str) -> Option<&Timex> {
        self.timexes.iter().find(|t| t.id == id)
    }

    pub fn entity_kind(&self, id: &str) -> Option<EntityKind> {
        if self.event(id).is_some() {
            Some(EntityKind::Event)
        } else if self.timex(id).is_some() {
            Some(EntityKind::Timex)
        } else {
            None
        }
    }

    /// Adds an event whose surface is sliced from the text.
    ///
    /// Panics if `span` is not a valid slice of the text.
    pub fn push_event(&mut self, id: &str, start: usize, end: usize) -> &mut Self {
        let span = Span::new(start, end);
        let surface = span.slice(&self.text).expect("event span out of bounds").to_string();
        self.events.push(Event { id: id.to_string(), span, surface });
        self
    }

    /// Adds a timex whose surface is sliced from the text.
    ///
    /// Panics if `span` is not a valid slice of the text.
    pub fn push_timex(&mut self, id: &str, start: usize, end: usize) -> &mut Self {
        let span = Span::new(start, end);
        let surface = span.slice(&self.text).expect("timex span out of bounds").to_string();
        self.timexes.push(Timex { id: id.to_string(), span, surface });
        self
    }

    pub fn push_link(&mut self, id: &str, source: &str, target: &str, rel: RelationType) -> &mut Self {
        self.links.push(TemporalLink {
            id: id.to_string(),
            source: source.to_string(),
            target: target.to_string(),
            rel,
        });
        self
    }
}

/// Documents ordered by `doc_id`.
pub type Corpus = Vec<Document>;
