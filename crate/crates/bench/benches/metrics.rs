use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use labelforge_bench::sentence_corpus;
use labelforge_core::metrics::{bleu, cider_d, evaluate_corpus, meteor_lite, rouge_l, CIDER_SIGMA, ROUGE_BETA};
use std::hint::black_box;

fn sentence_level(c: &mut Criterion) {
    let (preds, refs) = sentence_corpus(256, 3);
    let refs: Vec<Vec<Vec<String>>> = refs.into_iter().map(|r| vec![r]).collect();
    let mut group = c.benchmark_group("sentence");
    group.bench_function("bleu4", |b| {
        b.iter(|| preds.iter().zip(&refs).map(|(p, r)| bleu(black_box(p), r, 4)).sum::<f64>())
    });
    group.bench_function("rouge_l", |b| {
        b.iter(|| preds.iter().zip(&refs).map(|(p, r)| rouge_l(black_box(p), r, ROUGE_BETA)).sum::<f64>())
    });
    group.bench_function("meteor_lite", |b| {
        b.iter(|| preds.iter().zip(&refs).map(|(p, r)| meteor_lite(black_box(p), r)).sum::<f64>())
    });
    group.finish();
}

fn corpus_level(c: &mut Criterion) {
    let mut group = c.benchmark_group("corpus");
    for n in [100, 1000] {
        let (preds, refs) = sentence_corpus(n, 5);
        let multi: Vec<Vec<Vec<String>>> = refs.iter().map(|r| vec![r.clone()]).collect();
        group.bench_with_input(BenchmarkId::new("cider_d", n), &n, |b, _| {
            b.iter(|| cider_d(black_box(&preds), &multi, CIDER_SIGMA).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("all_metrics", n), &n, |b, _| {
            b.iter(|| evaluate_corpus(black_box(&preds), &refs).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, sentence_level, corpus_level);
criterion_main!(benches);
