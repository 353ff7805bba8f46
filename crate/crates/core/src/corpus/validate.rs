use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use super::{Corpus, Document, RelationType, Span};
use crate::candidates::entity_sentence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum DiagnosticKind {
    SpanOutOfBounds,
    SurfaceMismatch,
    DuplicateId,
    DanglingLinkRef,
    SelfLink,
    NoRelLink,
    InvalidSentences,
    CrossSentenceEntity,
    ConflictingLinks,
}

impl DiagnosticKind {
    pub fn severity(self) -> Severity {
        match self {
            DiagnosticKind::CrossSentenceEntity | DiagnosticKind::ConflictingLinks => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub kind: DiagnosticKind,
    pub doc_id: String,
    pub id: Option<String>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}: {}: {:?}", self.doc_id, self.kind)?;
        if let Some(id) = &self.id {
            write!(f, " [{id}]")?;
        }
        write!(f, ": {}", self.message)
    }
}

/// Checks every document invariant. An empty result means the corpus is valid.
pub fn validate(corpus: &Corpus) -> Vec<Diagnostic> {
    corpus.iter().flat_map(validate_document).collect()
}

pub fn validate_document(doc: &Document) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |kind: DiagnosticKind, id: Option<&str>, message: String| {
        out.push(Diagnostic {
            severity: kind.severity(),
            kind,
            doc_id: doc.doc_id.clone(),
            id: id.map(str::to_string),
            message,
        })
    };

    let mut prev: Option<Span> = None;
    for (i, s) in doc.sentences.iter().enumerate() {
        let in_bounds = s.start < s.end && s.slice(&doc.text).is_some();
        let ordered = prev.is_none_or(|p| p.end <= s.start);
        if !in_bounds || !ordered {
            push(
                DiagnosticKind::InvalidSentences,
                None,
                format!("sentence {i} [{}, {}) is empty, out of bounds or out of order", s.start, s.end),
            );
        }
        prev = Some(*s);
    }

    let mut seen: HashMap<&str, usize> = HashMap::new();
    let entities = doc
        .events
        .iter()
        .map(|e| (e.id.as_str(), e.span, e.surface.as_str()))
        .chain(doc.timexes.iter().map(|t| (t.id.as_str(), t.span, t.surface.as_str())));
    for (id, span, surface) in entities {
        *seen.entry(id).or_default() += 1;
        if seen[id] == 2 {
            push(DiagnosticKind::DuplicateId, Some(id), "entity id used more than once".into());
        }
        let Some(slice) = span.slice(&doc.text).filter(|_| span.start < span.end) else {
            push(
                DiagnosticKind::SpanOutOfBounds,
                Some(id),
                format!("span [{}, {}) is not a valid slice of {} bytes", span.start, span.end, doc.text.len()),
            );
            continue;
        };
        if slice != surface {
            push(DiagnosticKind::SurfaceMismatch, Some(id), format!("surface {surface:?} differs from text {slice:?}"));
        }
        if entity_sentence(doc, &span).is_none() {
            push(
                DiagnosticKind::CrossSentenceEntity,
                Some(id),
                format!("span [{}, {}) is not inside a single sentence", span.start, span.end),
            );
        }
    }

    let mut link_ids: BTreeSet<&str> = BTreeSet::new();
    // Relation on each unordered pair, expressed from the smaller id.
    let mut pair_rels: BTreeMap<(&str, &str), BTreeSet<RelationType>> = BTreeMap::new();
    for l in &doc.links {
        if !link_ids.insert(&l.id) {
            push(DiagnosticKind::DuplicateId, Some(&l.id), "link id used more than once".into());
        }
        let mut ok = true;
        for end in [&l.source, &l.target] {
            if !seen.contains_key(end.as_str()) {
                push(DiagnosticKind::DanglingLinkRef, Some(end), format!("link {} refers to unknown entity", l.id));
                ok = false;
            }
        }
        if l.source == l.target {
            push(DiagnosticKind::SelfLink, Some(&l.id), "link source equals target".into());
            ok = false;
        }
        if l.rel == RelationType::NoRel {
            push(DiagnosticKind::NoRelLink, Some(&l.id), "NOREL is not a link type".into());
            ok = false;
        }
        if ok {
            let (key, rel) = if l.source < l.target {
                ((l.source.as_str(), l.target.as_str()), l.rel)
            } else {
                ((l.target.as_str(), l.source.as_str()), l.rel.converse())
            };
            pair_rels.entry(key).or_default().insert(rel);
        }
    }
    for ((a, b), rels) in pair_rels {
        if rels.len() > 1 {
            let names: Vec<_> = rels.iter().map(|r| r.as_str()).collect();
            push(
                DiagnosticKind::ConflictingLinks,
                Some(a),
                format!("links between {a} and {b} disagree: {}", names.join(", ")),
            );
        }
    }
    out
}
