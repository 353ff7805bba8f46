//! Independent brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use temprel::{CandidatePair, Document, RelationType, TemporalLink};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum R {
    B,
    A,
    O,
}

fn of(rel: RelationType) -> R {
    match rel {
        RelationType::Before => R::B,
        RelationType::After => R::A,
        RelationType::Overlap => R::O,
        RelationType::NoRel => panic!("NoRel is not a link"),
    }
}

fn inverse(r: R) -> R {
    match r {
        R::B => R::A,
        R::A => R::B,
        R::O => R::O,
    }
}

/// Composition written out case by case: time points, Overlap as equality.
fn table(r1: R, r2: R) -> Option<R> {
    match (r1, r2) {
        (R::B, R::B) => Some(R::B),
        (R::B, R::O) => Some(R::B),
        (R::O, R::B) => Some(R::B),
        (R::A, R::A) => Some(R::A),
        (R::A, R::O) => Some(R::A),
        (R::O, R::A) => Some(R::A),
        (R::O, R::O) => Some(R::O),
        (R::B, R::A) | (R::A, R::B) => None,
    }
}

/// Directed facts closed by applying the table to every triple until nothing
/// changes.
#[derive(Debug, Clone, Default)]
pub struct Facts(pub BTreeSet<(String, R, String)>);

impl Facts {
    pub fn closed(links: &[TemporalLink]) -> Facts {
        let mut facts = BTreeSet::new();
        for l in links {
            let r = of(l.rel);
            facts.insert((l.source.clone(), r, l.target.clone()));
            facts.insert((l.target.clone(), inverse(r), l.source.clone()));
        }
        loop {
            let mut new = Vec::new();
            for (a, r1, b) in &facts {
                for (b2, r2, c) in &facts {
                    if b != b2 {
                        continue;
                    }
                    if let Some(r) = table(*r1, *r2) {
                        let f = (a.clone(), r, c.clone());
                        if !facts.contains(&f) {
                            new.push(f);
                        }
                    }
                }
            }
            if new.is_empty() {
                return Facts(facts);
            }
            facts.extend(new);
        }
    }

    pub fn holds(&self, a: &str, r: R, b: &str) -> bool {
        self.0.contains(&(a.to_string(), r, b.to_string()))
    }

    pub fn before_pairs(&self) -> BTreeSet<(String, String)> {
        self.0.iter().filter(|(_, r, _)| *r == R::B).map(|(a, _, b)| (a.clone(), b.clone())).collect()
    }

    pub fn overlap_pairs(&self) -> BTreeSet<(String, String)> {
        self.0.iter().filter(|(a, r, b)| *r == R::O && a < b).map(|(a, _, b)| (a.clone(), b.clone())).collect()
    }

    /// Conflict names per unordered pair (equal members for self-precedence).
    pub fn conflicts(&self) -> BTreeMap<(String, String), BTreeSet<&'static str>> {
        let mut out: BTreeMap<(String, String), BTreeSet<&'static str>> = BTreeMap::new();
        let ids: BTreeSet<&String> = self.0.iter().flat_map(|(a, _, b)| [a, b]).collect();
        for a in &ids {
            if self.holds(a, R::B, a) {
                out.entry(((*a).clone(), (*a).clone())).or_default().insert("SelfBefore");
            }
            for b in &ids {
                if a >= b {
                    continue;
                }
                let key = ((*a).clone(), (*b).clone());
                if self.holds(a, R::B, b) && self.holds(b, R::B, a) {
                    out.entry(key.clone()).or_default().insert("CyclicBefore");
                }
                if self.holds(a, R::O, b) && (self.holds(a, R::B, b) || self.holds(b, R::B, a)) {
                    out.entry(key).or_default().insert("BeforeVsOverlap");
                }
            }
        }
        out
    }

    /// Event-relative label for `(e, t)`, `Err` when conflicted.
    pub fn label(&self, e: &str, t: &str) -> Result<RelationType, ()> {
        let key = if e < t { (e.to_string(), t.to_string()) } else { (t.to_string(), e.to_string()) };
        if self.conflicts().contains_key(&key) {
            return Err(());
        }
        Ok(if self.holds(e, R::B, t) {
            RelationType::Before
        } else if self.holds(e, R::A, t) {
            RelationType::After
        } else if self.holds(e, R::O, t) {
            RelationType::Overlap
        } else {
            RelationType::NoRel
        })
    }
}

/// Random links among `n` entities named `X0..`, self-links excluded.
pub fn random_links(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<TemporalLink> {
    (0..m)
        .map(|i| {
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            TemporalLink {
                id: format!("L{i}"),
                source: format!("X{a}"),
                target: format!("X{b}"),
                rel: RelationType::POSITIVE[rng.random_range(0..3)],
            }
        })
        .collect()
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every event and timex compared in a plain double loop.
pub fn brute_force_candidates(doc: &Document) -> Vec<CandidatePair> {
    let facts = Facts::closed(&doc.links);
    let sentence_of = |start: usize, end: usize| doc.sentences.iter().position(|s| s.start <= start && end <= s.end);
    let mut rows = Vec::new();
    for e in &doc.events {
        for t in &doc.timexes {
            let (Some(se), Some(st)) = (sentence_of(e.span.start, e.span.end), sentence_of(t.span.start, t.span.end))
            else {
                continue;
            };
            if se != st || (e.span.start < t.span.end && t.span.start < e.span.end) {
                continue;
            }
            let Ok(label) = facts.label(&e.id, &t.id) else { continue };
            rows.push((
                (se, e.span.start, t.span.start, e.span.end, t.span.end, e.id.clone(), t.id.clone()),
                CandidatePair {
                    doc_id: doc.doc_id.clone(),
                    sent_index: se,
                    event_id: e.id.clone(),
                    timex_id: t.id.clone(),
                    label,
                },
            ));
        }
    }
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    rows.into_iter().map(|(_, p)| p).collect()
}
