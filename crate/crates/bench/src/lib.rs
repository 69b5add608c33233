//! Fixtures shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n` prediction/reference pairs of 1..=15 words over a 50-word vocabulary,
/// with references overlapping their predictions.
pub fn sentence_corpus(n: usize, seed: u64) -> (Vec<Vec<String>>, Vec<Vec<String>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sentence = |rng: &mut ChaCha8Rng| -> Vec<String> {
        let len = rng.gen_range(1..=15);
        (0..len).map(|_| format!("w{}", rng.gen_range(0..50))).collect()
    };
    let preds: Vec<Vec<String>> = (0..n).map(|_| sentence(&mut rng)).collect();
    let refs = preds
        .iter()
        .map(|p| {
            let mut r: Vec<String> = p.iter().filter(|_| rng.gen_bool(0.7)).cloned().collect();
            r.extend(sentence(&mut rng).into_iter().take(3));
            r
        })
        .collect();
    (preds, refs)
}
