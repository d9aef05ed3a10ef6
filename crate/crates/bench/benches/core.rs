//! Benchmarks for the three hot paths: the autodiff tape (one full
//! cross-entropy forward/backward), CIDEr scoring, and template mining.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use hrgr_bench::bench_world;
use hrgr_core::corpus::mine_templates;
use hrgr_core::metrics::{cider, CiderOpts, NgramStats};
use hrgr_core::model::{rollout, ActionConstraint, RolloutOptions};
use hrgr_core::numerics::Rng;
use hrgr_core::training::{sample_xe_loss, XeContext};

fn bench_tape(c: &mut Criterion) {
    let world = bench_world(200, 64);
    let ctx = XeContext::new(&world.templates, ActionConstraint::None);
    let sample = &world.samples[0];

    c.bench_function("xe_forward", |b| {
        b.iter(|| {
            let (fw, loss) = sample_xe_loss(&world.params, sample, &ctx, &world.vocab).unwrap();
            std::hint::black_box(fw.tape.value(loss).item())
        })
    });

    c.bench_function("xe_forward_backward", |b| {
        b.iter(|| {
            let (fw, loss) = sample_xe_loss(&world.params, sample, &ctx, &world.vocab).unwrap();
            std::hint::black_box(fw.tape.backward(loss).unwrap())
        })
    });

    c.bench_function("greedy_rollout", |b| {
        let opts = RolloutOptions::greedy(Default::default());
        b.iter_batched(
            || Rng::new(0),
            |mut rng| {
                let (_, trace) = rollout(
                    &world.params,
                    &sample.features_array(),
                    &world.templates,
                    &world.vocab,
                    &opts,
                    &mut rng,
                )
                .unwrap();
                std::hint::black_box(trace.sentences.len())
            },
            BatchSize::SmallInput,
        )
    });
}

fn bench_metrics(c: &mut Criterion) {
    let world = bench_world(400, 16);
    let refs: Vec<Vec<String>> = world.samples.iter().map(|s| s.flat_tokens()).collect();
    let stats = NgramStats::build(&refs);
    // Candidates: each report scored against its neighbor's text, so the
    // scorer sees realistic partial overlap.
    let cands: Vec<Vec<String>> = (0..refs.len())
        .map(|i| refs[(i + 1) % refs.len()].clone())
        .collect();

    c.bench_function("ngram_stats_build_400_docs", |b| {
        b.iter(|| std::hint::black_box(NgramStats::build(&refs)))
    });

    c.bench_function("cider_400_docs", |b| {
        b.iter(|| std::hint::black_box(cider(&cands, &refs, &stats, &CiderOpts::default())))
    });
}

fn bench_mining(c: &mut Criterion) {
    let world = bench_world(1000, 16);
    let docs: Vec<Vec<Vec<String>>> =
        world.samples.iter().map(|s| s.sentence_tokens()).collect();

    c.bench_function("mine_templates_1000_docs", |b| {
        b.iter(|| std::hint::black_box(mine_templates(&docs, 10)))
    });
}

criterion_group!(benches, bench_tape, bench_metrics, bench_mining);
criterion_main!(benches);
