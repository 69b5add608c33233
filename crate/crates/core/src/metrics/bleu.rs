use super::{ngram_counts, Words};

/// Sentence BLEU@`n` with clipped counts and the brevity penalty.
///
/// Predictions shorter than `n` use orders `1..=len`. Any zero precision
/// makes the score 0. The reference length is the closest one, shorter on ties.
pub fn bleu(pred: &Words, references: &[Vec<String>], n: usize) -> f64 {
    if pred.is_empty() || references.is_empty() || n == 0 {
        return 0.0;
    }
    let orders = n.min(pred.len());
    let mut log_sum = 0.0;
    for k in 1..=orders {
        let cand = ngram_counts(pred, k);
        let ref_counts: Vec<_> = references.iter().map(|r| ngram_counts(r, k)).collect();
        let clipped: usize = cand
            .iter()
            .map(|(g, &c)| {
                let max_ref = ref_counts.iter().map(|r| r.get(g).copied().unwrap_or(0)).max().unwrap_or(0);
                c.min(max_ref)
            })
            .sum();
        if clipped == 0 {
            return 0.0;
        }
        log_sum += (clipped as f64 / (pred.len() + 1 - k) as f64).ln();
    }
    let c = pred.len();
    let r = references
        .iter()
        .map(|r| r.len())
        .min_by_key(|&len| (len.abs_diff(c), len))
        .unwrap_or(0);
    let bp = if c >= r { 1.0 } else { (1.0 - r as f64 / c as f64).exp() };
    bp * (log_sum / orders as f64).exp()
}
