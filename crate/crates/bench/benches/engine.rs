//! Benchmarks over synthetic snapshots at realistic scale.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use workgraph_core::aggregate::tally;
use workgraph_core::agreement::wup;
use workgraph_core::classify::{batch_classify, Strategy};
use workgraph_core::ingest::{emit_prompt_ontology, load_snapshot, save_snapshot};
use workgraph_core::ontology::NodeId;
use workgraph_core::search::{semantic_search, HashEmbedder, SearchIndex};
use workgraph_core::synth;
use workgraph_core::viz::{build_sunburst, emit_svg, AngularWeighting};

fn bench_tally(c: &mut Criterion) {
    let snapshot = synth::layered_snapshot(5_000, 1);
    let assignments = synth::random_assignments(&snapshot, 10_000, 2);
    c.bench_function("tally 10k items over 5k nodes", |b| {
        b.iter(|| tally(black_box(&snapshot), black_box(&assignments)).unwrap())
    });
}

fn bench_wup(c: &mut Criterion) {
    let snapshot = synth::layered_snapshot(5_000, 3);
    let ids: Vec<NodeId> = snapshot.nodes().map(|n| n.id.clone()).collect();
    let pairs: Vec<(&NodeId, &NodeId)> = ids
        .iter()
        .zip(ids.iter().rev())
        .take(200)
        .collect();
    c.bench_function("wup 200 pairs over 5k nodes", |b| {
        b.iter(|| {
            for (x, y) in &pairs {
                black_box(wup(&snapshot, x, y).unwrap());
            }
        })
    });
}

fn bench_classify(c: &mut Criterion) {
    let snapshot = synth::layered_snapshot(5_000, 5);
    let records = synth::app_records(500, 6);
    let model = synth::scripted_replies(&snapshot, &records, 7);
    let embedder = HashEmbedder::default();
    c.bench_function("spfo stub classify 500 records", |b| {
        b.iter(|| {
            batch_classify(
                black_box(&snapshot),
                black_box(&records),
                Strategy::Spfo,
                &model,
                &embedder,
                None,
                4,
            )
            .unwrap()
        })
    });
}

fn bench_search(c: &mut Criterion) {
    let snapshot = synth::layered_snapshot(5_000, 8);
    let embedder = HashEmbedder::default();
    let index = SearchIndex::build(&snapshot, &embedder);
    c.bench_function("semantic top-100 over 5k nodes", |b| {
        b.iter(|| semantic_search(&index, black_box("perform activity a1234"), &embedder, 100))
    });
}

fn bench_snapshot_io(c: &mut Criterion) {
    let snapshot = synth::layered_snapshot(5_000, 9);
    let bytes = save_snapshot(&snapshot);
    c.bench_function("save 5k-node snapshot", |b| {
        b.iter_batched(|| &snapshot, |s| save_snapshot(black_box(s)), BatchSize::SmallInput)
    });
    c.bench_function("load 5k-node snapshot", |b| {
        b.iter(|| load_snapshot(black_box(&bytes)).unwrap())
    });
    c.bench_function("emit prompt hierarchy 5k nodes", |b| {
        b.iter(|| emit_prompt_ontology(black_box(&snapshot)))
    });
}

fn bench_sunburst(c: &mut Criterion) {
    let snapshot = synth::layered_snapshot(5_000, 10);
    let assignments = synth::random_assignments(&snapshot, 2_000, 11);
    let tallies = tally(&snapshot, &assignments).unwrap();
    c.bench_function("sunburst depth-5 build + svg", |b| {
        b.iter(|| {
            let model = build_sunburst(
                black_box(&snapshot),
                &tallies,
                5,
                0.2,
                AngularWeighting::DescendantActivities,
            )
            .unwrap();
            emit_svg(&model)
        })
    });
}

criterion_group!(
    benches,
    bench_tally,
    bench_wup,
    bench_classify,
    bench_search,
    bench_snapshot_io,
    bench_sunburst
);
criterion_main!(benches);
