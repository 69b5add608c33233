use criterion::{criterion_group, criterion_main, Criterion};
use labelforge_core::corpus::START;
use labelforge_core::decoding::greedy_decode;
use labelforge_core::synth::icon_samples;
use labelforge_core::training::{train_step, Adam, TrainConfig};
use labelforge_core::{Captioner, ModelConfig};
use std::hint::black_box;

fn tiny_model(c: &mut Criterion) {
    let (samples, vocab) = icon_samples(32);
    let model = Captioner::new(ModelConfig::tiny(vocab.len()), 0).unwrap();
    let image = &samples[0].image;
    let memory = model.encode_image(image).unwrap();
    let prefix: Vec<u32> = std::iter::once(START).chain(samples[8].content_ids().iter().copied()).collect();

    let mut group = c.benchmark_group("tiny");
    group.sample_size(20);
    group.bench_function("encode_image", |b| b.iter(|| model.encode_image(black_box(image)).unwrap()));
    group.bench_function("decoder_forward", |b| {
        b.iter(|| model.decoder_forward(black_box(&memory), &prefix).unwrap())
    });
    group.bench_function("greedy_decode", |b| b.iter(|| greedy_decode(&model, black_box(image)).unwrap()));
    group.bench_function("train_step_batch16", |b| {
        let cfg = TrainConfig {
            warmup_steps: 400,
            ..Default::default()
        };
        let batch: Vec<_> = samples.iter().collect();
        let mut m = model.clone();
        let mut adam = Adam::new(m.params(), cfg.adam);
        let mut step = 0;
        b.iter(|| {
            step += 1;
            train_step(&mut m, &mut adam, &batch, step, &cfg).unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, tiny_model);
criterion_main!(benches);
