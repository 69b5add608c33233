use std::collections::{HashMap, VecDeque};

use super::Words;

/// Exact-match alignment: each prediction word, left to right, takes the
/// leftmost unused reference position holding the same word.
/// Returns `(pred_index, ref_index)` pairs in prediction order.
pub fn meteor_alignment(pred: &Words, reference: &Words) -> Vec<(usize, usize)> {
    let mut slots: HashMap<&str, VecDeque<usize>> = HashMap::new();
    for (j, word) in reference.iter().enumerate() {
        slots.entry(word.as_str()).or_default().push_back(j);
    }
    pred.iter()
        .enumerate()
        .filter_map(|(i, word)| slots.get_mut(word.as_str()).and_then(|q| q.pop_front()).map(|j| (i, j)))
        .collect()
}

fn score_one(pred: &Words, reference: &Words) -> f64 {
    let pairs = meteor_alignment(pred, reference);
    let m = pairs.len();
    if m == 0 {
        return 0.0;
    }
    let chunks = 1 + pairs
        .windows(2)
        .filter(|p| !(p[1].0 == p[0].0 + 1 && p[1].1 == p[0].1 + 1))
        .count();
    let precision = m as f64 / pred.len() as f64;
    let recall = m as f64 / reference.len() as f64;
    let f_mean = 10.0 * precision * recall / (recall + 9.0 * precision);
    let penalty = 0.5 * (chunks as f64 / m as f64).powi(3);
    f_mean * (1.0 - penalty)
}

/// Exact-match METEOR without stemming or synonyms, best over references.
pub fn meteor_lite(pred: &Words, references: &[Vec<String>]) -> f64 {
    references.iter().map(|r| score_one(pred, r)).fold(0.0, f64::max)
}
