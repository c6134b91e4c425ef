use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use cskit_bench::{en_zh, lexicon, monolingual_corpus, planted_corpus, DictionaryBackends};
use cskit_core::align::alignment_score;
use cskit_core::detect::{Detector, LexiconEncoder};
use cskit_core::seed::Stream;
use cskit_core::synth::{allocate_and_synthesize, Backends, BuiltinCounter, CsType, PlanSide, SynthesisPlan};
use cskit_core::tagging::Tagger;
use cskit_core::{DetectorConfig, Document, EmbeddingMatrix};

fn detect(c: &mut Criterion) {
    let docs: Vec<Document> = planted_corpus(2_000, [0.09, 0.09, 0.43, 0.20, 0.19], 1)
        .unwrap()
        .into_iter()
        .map(|p| p.doc)
        .collect();
    let bytes: usize = docs.iter().map(|d| d.text.len()).sum();
    let detector = Detector::new(en_zh(), Arc::new(LexiconEncoder::new(lexicon())), DetectorConfig::default()).unwrap();
    let mut group = c.benchmark_group("detect");
    group.throughput(Throughput::Bytes(bytes as u64));
    for threads in [1, 4] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        group.bench_with_input(BenchmarkId::new("threads", threads), &docs, |b, docs| {
            b.iter(|| {
                pool.install(|| {
                    let mut segments = 0;
                    detector
                        .detect_corpus(docs.iter().cloned().map(Ok), |d| {
                            segments += d.segments.len();
                            Ok(())
                        })
                        .unwrap();
                    black_box(segments)
                })
            })
        });
    }
    group.finish();
}

fn align(c: &mut Criterion) {
    let mut rng = Stream::new(3);
    let mut group = c.benchmark_group("alignment_score");
    for n in [256usize, 1024] {
        let d = 64;
        let mut random = || EmbeddingMatrix::new(n, d, (0..n * d).map(|_| rng.next_f64() as f32 - 0.5).collect()).unwrap();
        let (e, f) = (random(), random());
        group.bench_function(BenchmarkId::from_parameter(n), |b| b.iter(|| alignment_score(black_box(&e), black_box(&f)).unwrap()));
    }
    group.finish();
}

fn synthesize(c: &mut Criterion) {
    let docs = monolingual_corpus(2_000, "en", 12, 5);
    let backends = DictionaryBackends::new();
    let tagger = Tagger::new(en_zh());
    let plan = SynthesisPlan::new(PlanSide::InPrimary, CsType::TokenRepl).with_budget(2_000).with_seed(1);
    c.bench_function("synthesize/token-repl", |b| {
        b.iter(|| {
            allocate_and_synthesize(
                &docs,
                &plan,
                &tagger,
                &Backends {
                    translator: &backends.translator,
                    generator: &backends.generator,
                    counter: &BuiltinCounter,
                },
            )
            .unwrap()
        })
    });
}

criterion_group!(benches, detect, align, synthesize);
criterion_main!(benches);
