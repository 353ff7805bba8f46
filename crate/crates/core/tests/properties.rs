mod common;

use std::collections::BTreeMap;
use std::path::Path;

use common::{fixtures, random_links, seeded, Facts};
use proptest::prelude::*;
use rand::Rng;
use temprel::candidates::{corpus_candidates, parse_tsv, to_tsv};
use temprel::corpus::{parse_corpus, parse_document, to_ann, validate_document, DiagnosticKind, Severity};
use temprel::emitter::{build_instances, tag_layout, Instance};
use temprel::parallel::Exec;
use temprel::sampling::{augment_with, build_chain, up_sample, AugmenterKind, AugmenterSpec};
use temprel::synth::{random_corpus, random_document, write_corpus, SynthParams};
use temprel::{close, close_links, normalize, CandidateOptions, Event, RelationType, Span, TemporalLink};

fn synth_doc(seed: u64) -> temprel::Document {
    let params = SynthParams { entity_rate: 0.3, ..SynthParams::default() };
    random_document(&format!("p{seed}"), &params, &mut seeded(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn standoff_round_trip(seed in any::<u64>()) {
        let doc = synth_doc(seed);
        let ann = to_ann(&doc).unwrap();
        let back = parse_document(&doc.doc_id, doc.text.clone(), &ann, Path::new("x.ann")).unwrap();
        prop_assert_eq!(back, doc);
    }

    #[test]
    fn closure_is_monotone_and_idempotent(seed in any::<u64>(), n in 2usize..8, m in 0usize..10, extra in 0usize..5) {
        let mut rng = seeded(seed);
        let links = random_links(&mut rng, n, m);
        let more: Vec<TemporalLink> = links.iter().cloned().chain(random_links(&mut rng, n, extra)).collect();
        let small = close_links(&links);
        let big = close_links(&more);
        prop_assert!(big.links.is_superset(&small.links));
        prop_assert!(small.links.is_superset(&normalize(&links)));
        for c in &small.conflicts {
            prop_assert!(big.is_conflicted(&c.pair.0, &c.pair.1));
        }
        prop_assert_eq!(close(&small.links), small);
    }

    #[test]
    fn closure_queries_are_converse_coherent(seed in any::<u64>(), n in 2usize..8, m in 0usize..10) {
        let links = random_links(&mut seeded(seed), n, m);
        let c = close_links(&links);
        for a in 0..n {
            for b in 0..n {
                let (a, b) = (format!("X{a}"), format!("X{b}"));
                match (c.query(&a, &b), c.query(&b, &a)) {
                    (Ok(x), Ok(y)) => prop_assert_eq!(x, y.map(RelationType::converse)),
                    (Err(_), Err(_)) => {}
                    other => prop_assert!(false, "asymmetric conflict {:?}", other),
                }
            }
        }
    }

    #[test]
    fn candidate_tsv_round_trip(seed in any::<u64>()) {
        let doc = synth_doc(seed);
        let pairs = temprel::generate_candidates(&doc, &close_links(&doc.links), CandidateOptions::default()).pairs;
        prop_assert_eq!(parse_tsv(&to_tsv(&pairs, Some("generated"))).unwrap(), pairs);
    }

    #[test]
    fn conflicted_pairs_become_norel_when_asked(seed in any::<u64>()) {
        let params = SynthParams { entity_rate: 0.35, links_per_entity: 1.5, ..SynthParams::default() };
        let doc = random_document("c", &params, &mut seeded(seed));
        let closure = close_links(&doc.links);
        let strict = temprel::generate_candidates(&doc, &closure, CandidateOptions::default());
        let lenient = temprel::generate_candidates(&doc, &closure, CandidateOptions { conflicted_as_norel: true });
        prop_assert_eq!(lenient.pairs.len(), strict.pairs.len() + strict.excluded_conflicted);
        prop_assert_eq!(lenient.excluded_conflicted, 0);
        for p in &lenient.pairs {
            if closure.is_conflicted(&p.event_id, &p.timex_id) {
                prop_assert_eq!(p.label, RelationType::NoRel);
            } else {
                prop_assert!(strict.pairs.contains(p));
            }
        }
    }

    #[test]
    fn validate_reports_exactly_the_injected_defects(seed in any::<u64>(), defects in prop::collection::vec(0usize..7, 0..8)) {
        let mut doc = synth_doc(seed);
        let errors = |d: &temprel::Document| -> BTreeMap<DiagnosticKind, usize> {
            let mut m = BTreeMap::new();
            for diag in validate_document(d).into_iter().filter(|x| x.severity == Severity::Error) {
                *m.entry(diag.kind).or_insert(0) += 1;
            }
            m
        };
        prop_assert!(errors(&doc).is_empty());
        prop_assume!(!doc.events.is_empty());
        let anchor = doc.events[0].clone();
        let other = doc.timexes.first().map(|t| t.id.clone()).unwrap_or_else(|| anchor.id.clone());
        let mut want: BTreeMap<DiagnosticKind, usize> = BTreeMap::new();
        for (k, defect) in defects.iter().enumerate() {
            let link = |id: String, source: &str, target: &str, rel| TemporalLink { id, source: source.into(), target: target.into(), rel };
            let kind = match defect {
                0 => {
                    doc.links.push(link(format!("G{k}"), &anchor.id, &format!("missing{k}"), RelationType::Before));
                    DiagnosticKind::DanglingLinkRef
                }
                1 => {
                    doc.links.push(link(format!("G{k}"), &anchor.id, &anchor.id, RelationType::Before));
                    DiagnosticKind::SelfLink
                }
                2 => {
                    if other == anchor.id {
                        continue;
                    }
                    doc.links.push(link(format!("G{k}"), &anchor.id, &other, RelationType::NoRel));
                    DiagnosticKind::NoRelLink
                }
                3 => {
                    let dup = Event { id: format!("D{k}"), ..anchor.clone() };
                    doc.events.push(dup.clone());
                    doc.events.push(dup);
                    DiagnosticKind::DuplicateId
                }
                4 => {
                    doc.events.push(Event { id: format!("S{k}"), surface: format!("{}~", anchor.surface), ..anchor.clone() });
                    DiagnosticKind::SurfaceMismatch
                }
                5 => {
                    let len = doc.text.len();
                    doc.events.push(Event { id: format!("O{k}"), span: Span::new(len + 1, len + 4), surface: "abc".into() });
                    DiagnosticKind::SpanOutOfBounds
                }
                _ => {
                    let l = link(format!("G{k}"), &anchor.id, &format!("D{k}x"), RelationType::Overlap);
                    doc.events.push(Event { id: format!("D{k}x"), ..anchor.clone() });
                    doc.links.push(l.clone());
                    doc.links.push(l);
                    DiagnosticKind::DuplicateId
                }
            };
            *want.entry(kind).or_insert(0) += 1;
        }
        prop_assert_eq!(errors(&doc), want);
    }
}

#[test]
fn corpus_directory_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let docs = random_corpus("r", 25, &SynthParams::default(), 12);
    write_corpus(dir.path(), &docs).unwrap();
    assert_eq!(parse_corpus(dir.path()).unwrap(), docs);
}

#[test]
fn candidates_match_oracle_labels_with_conflicts() {
    let params = SynthParams { entity_rate: 0.35, links_per_entity: 1.5, ..SynthParams::default() };
    let corpus = random_corpus("k", 60, &params, 21);
    let seq = corpus_candidates(&corpus, CandidateOptions::default(), Exec::Sequential);
    let par = corpus_candidates(&corpus, CandidateOptions::default(), Exec::Parallel);
    assert_eq!(seq, par);
    let mut conflicted = 0;
    for (doc, set) in corpus.iter().zip(&seq) {
        assert_eq!(set.pairs, common::brute_force_candidates(doc));
        conflicted += set.excluded_conflicted;
        let facts = Facts::closed(&doc.links);
        for p in &set.pairs {
            assert_eq!(facts.label(&p.event_id, &p.timex_id), Ok(p.label));
        }
    }
    assert!(conflicted > 0, "fixture should exercise conflict exclusion");
}

fn region_texts(tagged: &str) -> (String, String) {
    let layout = tag_layout(tagged).unwrap();
    (layout.event.slice(tagged).unwrap().to_string(), layout.timex.slice(tagged).unwrap().to_string())
}

#[test]
fn augmentation_never_touches_tagged_regions() {
    let corpus = random_corpus("a", 80, &SynthParams::default(), 3);
    let instances: Vec<Instance> = corpus_candidates(&corpus, CandidateOptions::default(), Exec::default())
        .iter()
        .zip(&corpus)
        .flat_map(|(c, d)| build_instances(d, &c.pairs).0)
        .collect();
    let kinds = [
        AugmenterKind::RandomSwap,
        AugmenterKind::RandomDelete,
        AugmenterKind::RandomInsert,
        AugmenterKind::SynonymReplace,
    ];
    let mut rng = seeded(10);
    for i in 0..10_000 {
        let specs: Vec<AugmenterSpec> = (0..rng.random_range(1..4))
            .map(|_| AugmenterSpec {
                lexicon_path: Some("lexicon.tsv".into()),
                ..AugmenterSpec::new(kinds[rng.random_range(0..4)], rng.random_range(0.0..=1.0))
            })
            .map(|s| match s.kind {
                AugmenterKind::RandomInsert | AugmenterKind::SynonymReplace => s,
                _ => AugmenterSpec { lexicon_path: None, ..s },
            })
            .collect();
        let chain = build_chain(&specs, &fixtures()).unwrap();
        let inst = &instances[i % instances.len()];
        let out = augment_with(&inst.text, &chain, &mut seeded(i as u64)).unwrap();
        assert_eq!(region_texts(&out.text), region_texts(&inst.text), "{} -> {}", inst.text, out.text);
    }
}

#[test]
fn up_sampling_is_the_same_sequential_and_parallel() {
    let corpus = random_corpus("u", 40, &SynthParams::default(), 6);
    let instances: Vec<Instance> = corpus_candidates(&corpus, CandidateOptions::default(), Exec::default())
        .iter()
        .zip(&corpus)
        .flat_map(|(c, d)| build_instances(d, &c.pairs).0)
        .collect();
    let chain = build_chain(
        &[AugmenterSpec::new(AugmenterKind::RandomSwap, 0.3), AugmenterSpec::new(AugmenterKind::RandomDelete, 0.2)],
        Path::new("."),
    )
    .unwrap();
    let a = up_sample(&instances, &chain, 42, Exec::Sequential).unwrap();
    let b = up_sample(&instances, &chain, 42, Exec::Parallel).unwrap();
    assert_eq!(a, b);
    assert!(a.len() > instances.len());
}

/// Reference counts for the licensed corpus. Set TEMPREL_LICENSED_CORPUS to a
/// directory with train/ and test/ subdirectories to run it.
#[test]
#[ignore = "needs the license-restricted corpus"]
fn licensed_corpus_counts() {
    let Ok(root) = std::env::var("TEMPREL_LICENSED_CORPUS") else {
        eprintln!("TEMPREL_LICENSED_CORPUS not set; skipping");
        return;
    };
    let splits = temprel::corpus::parse_split_corpus(Path::new(&root)).unwrap();
    let by_split: BTreeMap<String, temprel::corpus::LabelCounts> = splits
        .iter()
        .map(|(name, docs)| {
            let pairs: Vec<_> = corpus_candidates(docs, CandidateOptions::default(), Exec::default())
                .into_iter()
                .flat_map(|c| c.pairs)
                .collect();
            (name.clone(), temprel::corpus::LabelCounts::from_labels(pairs.iter().map(|p| p.label)))
        })
        .collect();
    let train = &by_split["train"];
    let test = &by_split["test"];
    assert_eq!((train.before, train.after, train.overlap, train.norel), (387, 345, 1517, 2153));
    assert_eq!((test.before, test.after, test.overlap, test.norel), (355, 299, 1173, 2066));
}
