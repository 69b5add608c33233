use super::Words;

pub const ROUGE_BETA: f64 = 1.2;

/// Longest common subsequence length.
pub fn lcs_len(a: &Words, b: &Words) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { cur[j].max(prev[j + 1]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// LCS F-measure `(1+b^2)RP / (R + b^2 P)`, best over references.
pub fn rouge_l(pred: &Words, references: &[Vec<String>], beta: f64) -> f64 {
    references
        .iter()
        .map(|r| {
            let l = lcs_len(pred, r);
            if l == 0 {
                return 0.0;
            }
            let recall = l as f64 / r.len() as f64;
            let precision = l as f64 / pred.len() as f64;
            let b2 = beta * beta;
            (1.0 + b2) * recall * precision / (recall + b2 * precision)
        })
        .fold(0.0, f64::max)
}
