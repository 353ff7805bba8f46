use std::path::Path;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use temprel::candidates::corpus_candidates;
use temprel::emitter::{build_instances, Instance};
use temprel::parallel::{self, Exec};
use temprel::sampling::{build_chain, up_sample, AugmenterKind, AugmenterSpec};
use temprel::synth::{random_corpus, SynthParams};
use temprel::{CandidateOptions, Document};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn corpus() -> Vec<Document> {
    let params = SynthParams { max_sentences: 20, max_words: 14, entity_rate: 0.2, links_per_entity: 1.0 };
    random_corpus("b", 400, &params, 1)
}

fn instances(corpus: &[Document], exec: Exec) -> Vec<Instance> {
    let sets = corpus_candidates(corpus, CandidateOptions::default(), exec);
    parallel::map(exec, corpus, |i, d| build_instances(d, &sets[i].pairs).0).into_iter().flatten().collect()
}

fn candidates_and_instances(c: &mut Criterion) {
    let docs = corpus();
    let mut group = c.benchmark_group("candidates_and_instances");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| b.iter(|| instances(&docs, exec)));
    }
    group.finish();
}

fn augmentation(c: &mut Criterion) {
    let items = instances(&corpus(), Exec::default());
    let chain = build_chain(
        &[AugmenterSpec::new(AugmenterKind::RandomSwap, 0.2), AugmenterSpec::new(AugmenterKind::RandomDelete, 0.1)],
        Path::new("."),
    )
    .unwrap();
    let mut group = c.benchmark_group("up_sample");
    group.sample_size(20);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| up_sample(&items, &chain, 3, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, candidates_and_instances, augmentation);
criterion_main!(benches);
