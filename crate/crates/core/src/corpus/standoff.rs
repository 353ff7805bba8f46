//! Reader and writer for the `{id}.txt` + `{id}.ann` standoff format.
//!
//! `.ann` records are tab separated, one per line, in any order:
//!
//! ```text
//! EVENT  <id> <start> <end> <surface>
//! TIMEX  <id> <start> <end> <surface>
//! TLINK  <id> <source_id> <target_id> <BEFORE|AFTER|OVERLAP>
//! SENT   <start> <end>
//! ```
//!
//! Offsets are byte offsets into the `.txt` file. Lines starting with `#`
//! and blank lines are skipped. SENT records, when present, replace the
//! computed sentence boundaries.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use super::{split_sentences, Corpus, Document, Event, RelationType, Span, TemporalLink, Timex};
use crate::parallel::{self, Exec};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("I/O error: {0}")]
    Io(String),
    #[error("malformed record: {0}")]
    MalformedRecord(String),
    #[error("span [{start}, {end}) out of bounds for text of {len} bytes")]
    SpanOutOfBounds { start: usize, end: usize, len: usize },
    #[error("surface {found:?} does not match text slice {expected:?}")]
    SurfaceMismatch { expected: String, found: String },
    #[error("duplicate id")]
    DuplicateId,
    #[error("link refers to unknown entity {0:?}")]
    DanglingLinkRef(String),
    #[error("missing companion file {0}")]
    MissingPair(String),
    #[error("sentence spans overlap")]
    OverlappingSentences,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub file: PathBuf,
    pub line: Option<usize>,
    pub id: Option<String>,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.file.display())?;
        if let Some(line) = self.line {
            write!(f, ":{line}")?;
        }
        write!(f, ": {}", self.kind)?;
        if let Some(id) = &self.id {
            write!(f, " [id {id}]")?;
        }
        Ok(())
    }
}

impl ParseError {
    fn new(file: &Path, line: Option<usize>, id: Option<&str>, kind: ParseErrorKind) -> Self {
        ParseError { file: file.to_path_buf(), line, id: id.map(str::to_string), kind }
    }
}

/// Parses every `{id}.txt`/`{id}.ann` pair directly inside `root`.
/// Subdirectories are ignored. Documents come back ordered by id.
pub fn parse_corpus(root: &Path) -> Result<Corpus, ParseError> {
    parse_corpus_with(root, Exec::default())
}

pub fn parse_corpus_with(root: &Path, exec: Exec) -> Result<Corpus, ParseError> {
    let io_err = |e: std::io::Error| ParseError::new(root, None, None, ParseErrorKind::Io(e.to_string()));
    let mut stems: BTreeMap<String, (bool, bool)> = BTreeMap::new();
    for entry in fs::read_dir(root).map_err(io_err)? {
        let path = entry.map_err(io_err)?.path();
        if !path.is_file() {
            continue;
        }
        let (Some(stem), Some(ext)) = (path.file_stem(), path.extension()) else {
            continue;
        };
        let stem = stem.to_string_lossy().into_owned();
        match ext.to_str() {
            Some("txt") => stems.entry(stem).or_default().0 = true,
            Some("ann") => stems.entry(stem).or_default().1 = true,
            _ => {}
        }
    }
    let mut ids = Vec::with_capacity(stems.len());
    for (stem, (has_txt, has_ann)) in stems {
        if !has_txt || !has_ann {
            let (present, missing) = if has_txt { ("txt", "ann") } else { ("ann", "txt") };
            return Err(ParseError::new(
                &root.join(format!("{stem}.{present}")),
                None,
                Some(&stem),
                ParseErrorKind::MissingPair(format!("{stem}.{missing}")),
            ));
        }
        ids.push(stem);
    }
    parallel::map(exec, &ids, |_, id| read_document(root, id)).into_iter().collect()
}

/// Parses a corpus with `train/` and `test/` subdirectories into named
/// splits. A directory without either is read as a single split named `all`.
pub fn parse_split_corpus(root: &Path) -> Result<Vec<(String, Corpus)>, ParseError> {
    let mut splits = Vec::new();
    for name in ["train", "test"] {
        let dir = root.join(name);
        if dir.is_dir() {
            splits.push((name.to_string(), parse_corpus(&dir)?));
        }
    }
    if splits.is_empty() {
        splits.push(("all".to_string(), parse_corpus(root)?));
    }
    Ok(splits)
}

fn read_document(root: &Path, id: &str) -> Result<Document, ParseError> {
    let txt_path = root.join(format!("{id}.txt"));
    let ann_path = root.join(format!("{id}.ann"));
    let text = read_utf8(&txt_path)?;
    let ann = read_utf8(&ann_path)?;
    parse_document(id, text, &ann, &ann_path)
}

fn read_utf8(path: &Path) -> Result<String, ParseError> {
    let bytes = fs::read(path).map_err(|e| ParseError::new(path, None, None, ParseErrorKind::Io(e.to_string())))?;
    String::from_utf8(bytes)
        .map_err(|e| ParseError::new(path, None, None, ParseErrorKind::MalformedRecord(format!("invalid UTF-8: {e}"))))
}

/// Parses one document from its text and `.ann` content. `ann_path` is only
/// used to label errors.
pub fn parse_document(doc_id: &str, text: String, ann: &str, ann_path: &Path) -> Result<Document, ParseError> {
    let mut doc = Document { doc_id: doc_id.to_string(), ..Default::default() };
    let mut sentences: Vec<(Span, usize)> = Vec::new();
    let mut entity_ids: HashSet<String> = HashSet::new();
    let mut link_ids: HashSet<String> = HashSet::new();
    let mut link_lines = Vec::new();

    for (idx, raw) in ann.lines().enumerate() {
        let lineno = idx + 1;
        if raw.is_empty() || raw.starts_with('#') {
            continue;
        }
        let err = |id: Option<&str>, kind| ParseError::new(ann_path, Some(lineno), id, kind);
        let malformed = |id: Option<&str>, msg: String| err(id, ParseErrorKind::MalformedRecord(msg));
        let fields: Vec<&str> = raw.split('\t').collect();
        let expect = |n: usize| {
            if fields.len() == n {
                Ok(())
            } else {
                Err(malformed(
                    fields.get(1).copied(),
                    format!("{} record needs {n} fields, found {}", fields[0], fields.len()),
                ))
            }
        };
        match fields[0] {
            kind @ ("EVENT" | "TIMEX") => {
                expect(5)?;
                let id = fields[1];
                if id.is_empty() {
                    return Err(malformed(None, "empty id".into()));
                }
                let span = parse_span(fields[2], fields[3], &text).map_err(|k| err(Some(id), k))?;
                let expected = &text[span.start..span.end];
                if fields[4] != expected {
                    return Err(err(
                        Some(id),
                        ParseErrorKind::SurfaceMismatch {
                            expected: expected.to_string(),
                            found: fields[4].to_string(),
                        },
                    ));
                }
                if !entity_ids.insert(id.to_string()) {
                    return Err(err(Some(id), ParseErrorKind::DuplicateId));
                }
                let surface = fields[4].to_string();
                if kind == "EVENT" {
                    doc.events.push(Event { id: id.to_string(), span, surface });
                } else {
                    doc.timexes.push(Timex { id: id.to_string(), span, surface });
                }
            }
            "TLINK" => {
                expect(5)?;
                let id = fields[1];
                if id.is_empty() {
                    return Err(malformed(None, "empty id".into()));
                }
                let rel = match fields[4] {
                    "BEFORE" => RelationType::Before,
                    "AFTER" => RelationType::After,
                    "OVERLAP" => RelationType::Overlap,
                    other => return Err(malformed(Some(id), format!("unknown TLINK type {other:?}"))),
                };
                if fields[2] == fields[3] {
                    return Err(malformed(Some(id), "link source equals target".into()));
                }
                if !link_ids.insert(id.to_string()) {
                    return Err(err(Some(id), ParseErrorKind::DuplicateId));
                }
                doc.links.push(TemporalLink {
                    id: id.to_string(),
                    source: fields[2].to_string(),
                    target: fields[3].to_string(),
                    rel,
                });
                link_lines.push(lineno);
            }
            "SENT" => {
                expect(3)?;
                let span = parse_span(fields[1], fields[2], &text).map_err(|k| err(None, k))?;
                sentences.push((span, lineno));
            }
            other => return Err(malformed(None, format!("unknown record type {other:?}"))),
        }
    }

    for (link, &lineno) in doc.links.iter().zip(&link_lines) {
        for end in [&link.source, &link.target] {
            if !entity_ids.contains(end.as_str()) {
                return Err(ParseError::new(
                    ann_path,
                    Some(lineno),
                    Some(end),
                    ParseErrorKind::DanglingLinkRef(end.clone()),
                ));
            }
        }
    }

    if sentences.is_empty() {
        doc.sentences = split_sentences(&text);
    } else {
        sentences.sort();
        for pair in sentences.windows(2) {
            if pair[0].0.overlaps(&pair[1].0) {
                return Err(ParseError::new(ann_path, Some(pair[1].1), None, ParseErrorKind::OverlappingSentences));
            }
        }
        doc.sentences = sentences.into_iter().map(|(s, _)| s).collect();
    }
    doc.text = text;
    Ok(doc)
}

fn parse_span(start: &str, end: &str, text: &str) -> Result<Span, ParseErrorKind> {
    let parse = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| ParseErrorKind::MalformedRecord(format!("offset {s:?} is not a non-negative integer")))
    };
    let (start, end) = (parse(start)?, parse(end)?);
    if start >= end {
        return Err(ParseErrorKind::MalformedRecord(format!("empty or inverted span [{start}, {end})")));
    }
    if end > text.len() {
        return Err(ParseErrorKind::SpanOutOfBounds { start, end, len: text.len() });
    }
    if !text.is_char_boundary(start) || !text.is_char_boundary(end) {
        return Err(ParseErrorKind::MalformedRecord(format!("span [{start}, {end}) splits a UTF-8 character")));
    }
    Ok(Span::new(start, end))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot serialize {id}: surface contains a tab or newline")]
pub struct UnrepresentableSurface {
    pub id: String,
}

/// Serializes a document's annotations in `.ann` form. Sentence spans are
/// always written so a re-parse reproduces them exactly.
pub fn to_ann(doc: &Document) -> Result<String, UnrepresentableSurface> {
    let mut out = String::new();
    for s in &doc.sentences {
        out.push_str(&format!("SENT\t{}\t{}\n", s.start, s.end));
    }
    let entities = doc
        .events
        .iter()
        .map(|e| ("EVENT", &e.id, e.span, &e.surface))
        .chain(doc.timexes.iter().map(|t| ("TIMEX", &t.id, t.span, &t.surface)));
    for (tag, id, span, surface) in entities {
        if surface.contains(['\t', '\n', '\r']) {
            return Err(UnrepresentableSurface { id: id.clone() });
        }
        out.push_str(&format!("{tag}\t{id}\t{}\t{}\t{surface}\n", span.start, span.end));
    }
    for l in &doc.links {
        out.push_str(&format!("TLINK\t{}\t{}\t{}\t{}\n", l.id, l.source, l.target, l.rel));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, ann: &str) -> Result<Document, ParseError> {
        parse_document("d1", text.to_string(), ann, Path::new("d1.ann"))
    }

    #[test]
    fn minimal_document() {
        let doc = parse("A before B.", "EVENT\te1\t0\t1\tA\nTIMEX\tt1\t9\t10\tB\nTLINK\tl1\te1\tt1\tBEFORE\n").unwrap();
        assert_eq!(doc.events.len(), 1);
        assert_eq!(doc.timexes.len(), 1);
        assert_eq!(doc.links.len(), 1);
        assert_eq!(doc.events[0].span, Span::new(0, 1));
        assert_eq!(doc.timexes[0].surface, "B");
        assert_eq!(doc.links[0].rel, RelationType::Before);
        assert_eq!(doc.sentences, vec![Span::new(0, 11)]);
    }

    #[test]
    fn dangling_reference_names_the_id() {
        let e = parse("A before B.", "EVENT\te1\t0\t1\tA\nTLINK\tl1\te1\te9\tBEFORE\n").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::DanglingLinkRef("e9".into()));
        assert_eq!(e.line, Some(2));
        assert_eq!(e.id.as_deref(), Some("e9"));
    }

    #[test]
    fn links_may_precede_their_entities() {
        let doc = parse("A before B.", "TLINK\tl1\te1\tt1\tAFTER\nEVENT\te1\t0\t1\tA\nTIMEX\tt1\t9\t10\tB\n").unwrap();
        assert_eq!(doc.links[0].rel, RelationType::After);
    }

    #[test]
    fn record_errors() {
        let kind = |ann: &str| parse("A before B.", ann).unwrap_err().kind;
        assert!(matches!(kind("EVENT\te1\t0\t1\n"), ParseErrorKind::MalformedRecord(_)));
        assert!(matches!(kind("EVENT\te1\tx\t1\tA\n"), ParseErrorKind::MalformedRecord(_)));
        assert!(matches!(kind("EVENT\te1\t1\t1\tA\n"), ParseErrorKind::MalformedRecord(_)));
        assert!(matches!(kind("FOO\tx\n"), ParseErrorKind::MalformedRecord(_)));
        assert!(matches!(
            kind("EVENT\te1\t0\t1\tA\nTIMEX\tt1\t9\t10\tB\nTLINK\tl\te1\tt1\tDURING\n"),
            ParseErrorKind::MalformedRecord(_)
        ));
        assert_eq!(kind("EVENT\te1\t9\t40\tB\n"), ParseErrorKind::SpanOutOfBounds { start: 9, end: 40, len: 11 });
        assert!(matches!(kind("EVENT\te1\t0\t1\tZ\n"), ParseErrorKind::SurfaceMismatch { .. }));
        assert_eq!(kind("EVENT\te1\t0\t1\tA\nTIMEX\te1\t9\t10\tB\n"), ParseErrorKind::DuplicateId);
        assert_eq!(kind("SENT\t0\t5\nSENT\t3\t8\n"), ParseErrorKind::OverlappingSentences);
    }

    #[test]
    fn non_boundary_offsets_are_rejected() {
        let e = parse("é b", "EVENT\te1\t1\t2\tx\n").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::MalformedRecord(_)));
    }

    #[test]
    fn comments_and_sentence_override() {
        let doc = parse("One. Two.", "# header\n\nSENT\t5\t9\nSENT\t0\t4\n").unwrap();
        assert_eq!(doc.sentences, vec![Span::new(0, 4), Span::new(5, 9)]);
        let doc = parse("One. Two.", "SENT\t0\t9\n").unwrap();
        assert_eq!(doc.sentences, vec![Span::new(0, 9)]);
    }

    #[test]
    fn serialize_then_parse_is_identity() {
        let text = "He had an MRI on 18 Oct. Pain resolved\nafter surgery today.";
        let ann = "EVENT\te1\t7\t13\tan MRI\nTIMEX\tt1\t17\t23\t18 Oct\nEVENT\te2\t25\t29\tPain\nTIMEX\tt2\t53\t58\ttoday\nTLINK\tl1\te1\tt1\tOVERLAP\nTLINK\tl2\tt2\te2\tAFTER\n";
        let doc = parse(text, ann).unwrap();
        let again = parse(text, &to_ann(&doc).unwrap()).unwrap();
        assert_eq!(doc, again);
    }

    #[test]
    fn surfaces_with_control_characters_cannot_be_written() {
        let mut doc = Document::new("d", "a\tb");
        doc.push_event("e1", 0, 3);
        assert_eq!(to_ann(&doc).unwrap_err().id, "e1");
    }

    #[test]
    fn directory_parsing() {
        let dir = tempfile::tempdir().unwrap();
        assert!(parse_corpus(dir.path()).unwrap().is_empty());
        fs::write(dir.path().join("b.txt"), "B text.").unwrap();
        fs::write(dir.path().join("b.ann"), "").unwrap();
        fs::write(dir.path().join("a.txt"), "A before B.").unwrap();
        fs::write(dir.path().join("a.ann"), "EVENT\te1\t0\t1\tA\n").unwrap();
        let corpus = parse_corpus(dir.path()).unwrap();
        let ids: Vec<_> = corpus.iter().map(|d| d.doc_id.as_str()).collect();
        assert_eq!(ids, ["a", "b"]);

        fs::write(dir.path().join("c.txt"), "orphan").unwrap();
        let e = parse_corpus(dir.path()).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::MissingPair("c.ann".into()));
    }
}
