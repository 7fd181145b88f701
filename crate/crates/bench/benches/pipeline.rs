use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use sbd_bench::{random_labels, rng};
use sbd_core::embeddings::{train, InductionConfig, MethodTag};
use sbd_core::eval::compute_metrics;
use sbd_core::model::train as train_model;
use sbd_core::synth::{induction_documents, sanity_corpus, sbd_dataset, SbdSynthConfig};
use sbd_core::ModelConfig;

fn embedding_epoch(c: &mut Criterion) {
    let corpus = sanity_corpus(20_000, 1).documents;
    let mut group = c.benchmark_group("embedding epoch, 20k tokens, d=50");
    group.sample_size(10);
    for method in [MethodTag::W2vSg, MethodTag::W2vCbow, MethodTag::OrderSsg, MethodTag::SubwordSg] {
        let mut cfg = InductionConfig::new(method.family(), method.mode(), 50);
        cfg.epochs = 1;
        cfg.min_count = 1;
        cfg.buckets = 50_000;
        group.bench_function(method.as_str(), |b| b.iter(|| train(black_box(&corpus), &cfg).unwrap()));
    }
    group.finish();
}

fn metrics(c: &mut Criterion) {
    let mut r = rng(5);
    let pred = random_labels(&mut r, 100_000, 0.12);
    let gold = random_labels(&mut r, 100_000, 0.12);
    c.bench_function("compute_metrics 100k tokens", |b| {
        b.iter(|| compute_metrics(black_box(&pred), black_box(&gold)).unwrap())
    });
}

fn prediction(c: &mut Criterion) {
    let synth = SbdSynthConfig { transcripts: 60, ..Default::default() };
    let data = sbd_dataset(&synth).unwrap();
    let mut ecfg = InductionConfig::new(MethodTag::W2vSg.family(), MethodTag::W2vSg.mode(), 50);
    ecfg.min_count = 1;
    let table = train(&induction_documents(&synth, 300, 2).unwrap(), &ecfg).unwrap();
    let mut cfg = ModelConfig::new(50);
    cfg.epochs = 1;
    let model = train_model(&data, &table, &cfg).unwrap().model;
    let tokens: Vec<_> = data.transcripts().iter().flat_map(|t| t.tokens().to_vec()).take(1_000).collect();
    let mut group = c.benchmark_group("prediction");
    group.sample_size(10);
    group.bench_function("predict 1000 tokens, default model", |b| {
        b.iter_batched(|| tokens.clone(), |t| model.predict(&t).unwrap(), BatchSize::SmallInput)
    });
    group.finish();
}

criterion_group!(benches, embedding_epoch, metrics, prediction);
criterion_main!(benches);
