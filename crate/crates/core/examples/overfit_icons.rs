//! Overfits the tiny model on the sixteen synthetic icons and reports
//! training exact match.
//!
//! `cargo run --release -p labelforge-core --example overfit_icons [max_steps] [warmup]`

use std::time::Instant;

use labelforge_core::corpus::Split;
use labelforge_core::model::{Captioner, ModelConfig};
use labelforge_core::synth::icon_samples;
use labelforge_core::training::{train_loop, TrainConfig};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let mut args = std::env::args().skip(1).map(|a| a.parse::<u64>().expect("integer argument"));
    let max_steps = args.next().unwrap_or(2000);
    let warmup = args.next().unwrap_or(200);
    let (samples, vocab) = icon_samples(32);
    let mut model = Captioner::new(ModelConfig::tiny(vocab.len()), 0).unwrap();
    let config = TrainConfig {
        warmup_steps: warmup,
        batch_size: 16,
        max_steps,
        eval_every: 25,
        patience: None,
        eval_split: Split::Train,
        target_exact_match: Some(0.95),
        ..Default::default()
    };
    let start = Instant::now();
    let outcome = train_loop(&mut model, &samples, &samples, &vocab, &config, None).unwrap();
    println!(
        "steps {} best step {:?} exact match {:?} in {:.1}s",
        outcome.steps_run,
        outcome.best_step,
        outcome.best_exact_match,
        start.elapsed().as_secs_f64()
    );
}
