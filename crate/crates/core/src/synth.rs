//! Seeded synthetic documents for tests, benchmarks and the demo corpus.

use std::fs;
use std::io;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{to_ann, Document, RelationType, Span};

const WORDS: &[&str] = &[
    "patient", "was", "seen", "with", "mild", "pain", "and", "noted", "the", "after", "prior", "to", "stable", "given",
    "dose", "follow", "up", "in", "clinic", "denies", "fever", "on", "exam",
];
const EVENTS: &[&str] = &[
    "admitted",
    "discharged",
    "an MRI",
    "a CT scan",
    "surgery",
    "chest pain",
    "the biopsy",
    "intubated",
    "a magnetic resonance imaging",
    "antibiotics",
];
const TIMEXES: &[&str] = &[
    "today",
    "yesterday",
    "October 18, 1996",
    "two days",
    "the morning",
    "3 pm",
    "postoperative day 2",
    "last week",
    "daily",
    "01/02/2003",
];

#[derive(Debug, Clone, Copy)]
pub struct SynthParams {
    pub max_sentences: usize,
    /// Filler words per sentence, at most.
    pub max_words: usize,
    /// Chance that a slot holds an event; the same chance applies to timexes.
    pub entity_rate: f64,
    /// Links drawn per entity, on average.
    pub links_per_entity: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams { max_sentences: 6, max_words: 8, entity_rate: 0.25, links_per_entity: 0.8 }
    }
}

pub fn random_document(doc_id: &str, params: &SynthParams, rng: &mut impl Rng) -> Document {
    let mut text = String::new();
    let mut events: Vec<Span> = Vec::new();
    let mut timexes: Vec<Span> = Vec::new();
    let n_sent = rng.random_range(1..=params.max_sentences.max(1));
    for s in 0..n_sent {
        let n_words = rng.random_range(1..=params.max_words.max(1));
        for w in 0..n_words {
            if w > 0 {
                text.push(' ');
            }
            let start = text.len();
            let roll: f64 = rng.random();
            if roll < params.entity_rate {
                text.push_str(EVENTS[rng.random_range(0..EVENTS.len())]);
                events.push(Span::new(start, text.len()));
            } else if roll < 2.0 * params.entity_rate {
                text.push_str(TIMEXES[rng.random_range(0..TIMEXES.len())]);
                timexes.push(Span::new(start, text.len()));
            } else {
                text.push_str(WORDS[rng.random_range(0..WORDS.len())]);
            }
        }
        text.push('.');
        if s + 1 < n_sent {
            text.push_str(if rng.random_bool(0.3) { "\n" } else { " " });
        }
    }

    let mut doc = Document::new(doc_id, text);
    for (i, span) in events.iter().enumerate() {
        doc.push_event(&format!("E{i}"), span.start, span.end);
    }
    for (i, span) in timexes.iter().enumerate() {
        doc.push_timex(&format!("T{i}"), span.start, span.end);
    }
    let ids: Vec<String> =
        doc.events.iter().map(|e| e.id.clone()).chain(doc.timexes.iter().map(|t| t.id.clone())).collect();
    if ids.len() >= 2 {
        let n_links = (ids.len() as f64 * params.links_per_entity).round() as usize;
        for l in 0..n_links {
            let a = rng.random_range(0..ids.len());
            let mut b = rng.random_range(0..ids.len() - 1);
            if b >= a {
                b += 1;
            }
            let rel = RelationType::POSITIVE[rng.random_range(0..3)];
            doc.push_link(&format!("L{l}"), &ids[a], &ids[b], rel);
        }
    }
    doc
}

/// `count` documents named `{prefix}{index:03}`, all drawn from one seeded
/// ChaCha8 stream.
pub fn random_corpus(prefix: &str, count: usize, params: &SynthParams, seed: u64) -> Vec<Document> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|i| random_document(&format!("{prefix}{i:03}"), params, &mut rng)).collect()
}

/// Writes each document as `{doc_id}.txt` and `{doc_id}.ann` under `dir`.
pub fn write_corpus(dir: &Path, docs: &[Document]) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    for d in docs {
        fs::write(dir.join(format!("{}.txt", d.doc_id)), &d.text)?;
        let ann = to_ann(d).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
        fs::write(dir.join(format!("{}.ann", d.doc_id)), ann)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::validate_document;

    #[test]
    fn generated_documents_are_structurally_valid() {
        for d in random_corpus("s", 50, &SynthParams::default(), 3) {
            for diag in validate_document(&d) {
                // Random links may disagree with each other; nothing else may fail.
                assert_eq!(diag.kind, crate::corpus::DiagnosticKind::ConflictingLinks, "{diag}");
            }
        }
    }

    #[test]
    fn same_seed_same_corpus() {
        let p = SynthParams::default();
        assert_eq!(random_corpus("s", 5, &p, 9), random_corpus("s", 5, &p, 9));
    }
}
