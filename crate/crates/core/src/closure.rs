//! Transitive closure of temporal links over {Before, After, Overlap}.
//!
//! Links are first normalized: `After(a, b)` becomes `Before(b, a)` and
//! `Overlap` is stored once per unordered pair. Overlap is read as
//! approximate simultaneity, which gives the composition table
//!
//! | ∘       | Before | Overlap |
//! |---------|--------|---------|
//! | Before  | Before | Before  |
//! | Overlap | Before | Overlap |
//!
//! `Overlap ∘ Overlap` never yields a self pair; Overlap is not reflexive.
//!
//! Under this table the closure has a direct characterization. Overlap
//! holds between any two distinct members of a connected component of the
//! overlap graph. Before holds from `a` to `c` exactly when a path of
//! Before edges, each possibly preceded or followed by overlap hops, leads
//! from `a`'s component to `c`'s. [`close`] computes it that way instead of
//! iterating rules to a fixpoint.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::corpus::{RelationType, TemporalLink};

type Pair = (String, String);

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NormalizedLinkSet {
    /// Ordered `(earlier, later)` pairs.
    pub before: BTreeSet<Pair>,
    /// Unordered pairs, stored with the smaller id first.
    pub overlap: BTreeSet<Pair>,
}

impl NormalizedLinkSet {
    pub fn is_empty(&self) -> bool {
        self.before.is_empty() && self.overlap.is_empty()
    }

    pub fn insert(&mut self, a: &str, b: &str, rel: RelationType) {
        match rel {
            RelationType::Before => {
                self.before.insert((a.to_string(), b.to_string()));
            }
            RelationType::After => {
                self.before.insert((b.to_string(), a.to_string()));
            }
            RelationType::Overlap => {
                if a != b {
                    self.overlap.insert(unordered(a, b));
                }
            }
            RelationType::NoRel => {}
        }
    }

    pub fn has_before(&self, a: &str, b: &str) -> bool {
        self.before.contains(&(a.to_string(), b.to_string()))
    }

    pub fn has_overlap(&self, a: &str, b: &str) -> bool {
        a != b && self.overlap.contains(&unordered(a, b))
    }

    /// Every id mentioned by some pair, sorted.
    pub fn entities(&self) -> BTreeSet<&str> {
        self.before.iter().chain(&self.overlap).flat_map(|(a, b)| [a.as_str(), b.as_str()]).collect()
    }

    pub fn is_superset(&self, other: &NormalizedLinkSet) -> bool {
        self.before.is_superset(&other.before) && self.overlap.is_superset(&other.overlap)
    }
}

fn unordered(a: &str, b: &str) -> Pair {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ConflictKind {
    /// Before holds in both directions.
    CyclicBefore,
    /// Before (either direction) and Overlap both hold.
    BeforeVsOverlap,
    /// An entity is derived to precede itself.
    SelfBefore,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Conflict {
    /// Smaller id first; both members equal for [`ConflictKind::SelfBefore`].
    pub pair: Pair,
    pub kinds: BTreeSet<ConflictKind>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("relation between {0} and {1} is contradictory")]
pub struct ConflictedPair(pub String, pub String);

/// A closed link set and the contradictions it contains.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Closure {
    pub links: NormalizedLinkSet,
    /// Sorted by pair.
    pub conflicts: Vec<Conflict>,
}

impl Closure {
    pub fn is_conflicted(&self, a: &str, b: &str) -> bool {
        let key = unordered(a, b);
        self.conflicts.binary_search_by(|c| c.pair.cmp(&key)).is_ok()
    }

    /// Relation of `a` with respect to `b`, if the closure holds one.
    pub fn query(&self, a: &str, b: &str) -> Result<Option<RelationType>, ConflictedPair> {
        if self.is_conflicted(a, b) {
            return Err(ConflictedPair(a.to_string(), b.to_string()));
        }
        Ok(if self.links.has_before(a, b) {
            Some(RelationType::Before)
        } else if self.links.has_before(b, a) {
            Some(RelationType::After)
        } else if self.links.has_overlap(a, b) {
            Some(RelationType::Overlap)
        } else {
            None
        })
    }
}

pub fn normalize(links: &[TemporalLink]) -> NormalizedLinkSet {
    let mut set = NormalizedLinkSet::default();
    for l in links {
        set.insert(&l.source, &l.target, l.rel);
    }
    set
}

/// Composes `r1(a, b)` with `r2(b, c)` into a relation on `(a, c)`.
pub fn compose(r1: RelationType, r2: RelationType) -> Option<RelationType> {
    use RelationType::*;
    match (r1, r2) {
        (Overlap, Overlap) => Some(Overlap),
        (Before, Before) | (Before, Overlap) | (Overlap, Before) => Some(Before),
        (After, After) | (After, Overlap) | (Overlap, After) => Some(After),
        _ => None,
    }
}

/// Least fixpoint of `set` under [`compose`], plus every conflicted pair.
/// Conflicts do not stop derivation.
pub fn close(set: &NormalizedLinkSet) -> Closure {
    let ids: Vec<&str> = set.entities().into_iter().collect();
    let index: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let n = ids.len();

    let mut uf = UnionFind::new(n);
    for (a, b) in &set.overlap {
        uf.union(index[a.as_str()], index[b.as_str()]);
    }
    let mut comp_of = vec![0; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut root_to_comp: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, slot) in comp_of.iter_mut().enumerate() {
        let root = uf.find(i);
        let c = *root_to_comp.entry(root).or_insert_with(|| {
            members.push(Vec::new());
            members.len() - 1
        });
        *slot = c;
        members[c].push(i);
    }

    let k = members.len();
    let mut succ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); k];
    for (a, b) in &set.before {
        succ[comp_of[index[a.as_str()]]].insert(comp_of[index[b.as_str()]]);
    }

    let mut closed = NormalizedLinkSet::default();
    for group in &members {
        for (x, &a) in group.iter().enumerate() {
            for &b in &group[x + 1..] {
                closed.overlap.insert(unordered(ids[a], ids[b]));
            }
        }
    }
    for (start, reach) in reachable(&succ).into_iter().enumerate() {
        for target in reach {
            for &a in &members[start] {
                for &c in &members[target] {
                    closed.before.insert((ids[a].to_string(), ids[c].to_string()));
                }
            }
        }
    }

    let conflicts = find_conflicts(&closed);
    Closure { links: closed, conflicts }
}

/// Convenience for `close(&normalize(links))`.
pub fn close_links(links: &[TemporalLink]) -> Closure {
    close(&normalize(links))
}

/// Components reachable from each component along one or more edges.
fn reachable(succ: &[BTreeSet<usize>]) -> Vec<Vec<usize>> {
    let k = succ.len();
    let mut out = Vec::with_capacity(k);
    for start in 0..k {
        let mut seen = vec![false; k];
        let mut stack: Vec<usize> = succ[start].iter().copied().collect();
        while let Some(c) = stack.pop() {
            if !seen[c] {
                seen[c] = true;
                stack.extend(succ[c].iter().copied().filter(|&d| !seen[d]));
            }
        }
        out.push((0..k).filter(|&c| seen[c]).collect());
    }
    out
}

fn find_conflicts(closed: &NormalizedLinkSet) -> Vec<Conflict> {
    let mut by_pair: BTreeMap<Pair, BTreeSet<ConflictKind>> = BTreeMap::new();
    for (a, b) in &closed.before {
        if a == b {
            by_pair.entry((a.clone(), b.clone())).or_default().insert(ConflictKind::SelfBefore);
            continue;
        }
        let key = unordered(a, b);
        if closed.has_before(b, a) {
            by_pair.entry(key.clone()).or_default().insert(ConflictKind::CyclicBefore);
        }
        if closed.overlap.contains(&key) {
            by_pair.entry(key).or_default().insert(ConflictKind::BeforeVsOverlap);
        }
    }
    by_pair.into_iter().map(|(pair, kinds)| Conflict { pair, kinds }).collect()
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}
