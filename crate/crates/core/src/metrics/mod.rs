//! Caption evaluation: exact match, BLEU@1-4, ROUGE-L, CIDEr-D and METEOR-lite.
//!
//! All scores operate on already-normalized word lists and fall in `[0, 1]`.
//! Every scorer accepts several references per prediction; the corpus has one.

mod bleu;
mod cider;
mod meteor;
mod rouge;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bleu::bleu;
pub use cider::{cider_d, cider_d_scores, CIDER_SIGMA};
pub use meteor::{meteor_alignment, meteor_lite};
pub use rouge::{lcs_len, rouge_l, ROUGE_BETA};

pub type Words = [String];

/// Counts of every contiguous `n`-gram.
pub(crate) fn ngram_counts(words: &Words, n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if n > 0 && words.len() >= n {
        for w in words.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

pub fn exact_match(pred: &Words, reference: &Words) -> f64 {
    if pred == reference {
        1.0
    } else {
        0.0
    }
}

/// Tunable constants of the metric suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    pub rouge_beta: f64,
    pub cider_sigma: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            rouge_beta: ROUGE_BETA,
            cider_sigma: CIDER_SIGMA,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub n: usize,
    pub exact_match: f64,
    /// BLEU@1 through BLEU@4.
    pub bleu: [f64; 4],
    pub rouge_l: f64,
    /// CIDEr-D divided by 10.
    pub cider_d: f64,
    pub meteor_lite: f64,
}

impl MetricReport {
    pub fn values(&self) -> [(&'static str, f64); 8] {
        [
            ("exact_match", self.exact_match),
            ("bleu_1", self.bleu[0]),
            ("bleu_2", self.bleu[1]),
            ("bleu_3", self.bleu[2]),
            ("bleu_4", self.bleu[3]),
            ("rouge_l", self.rouge_l),
            ("cider_d", self.cider_d),
            ("meteor_lite", self.meteor_lite),
        ]
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Scores aligned predictions against several references each.
pub fn evaluate_corpus_multi(
    predictions: &[Vec<String>],
    references: &[Vec<Vec<String>>],
    config: &MetricConfig,
) -> Result<MetricReport> {
    if predictions.len() != references.len() {
        return Err(Error::InvalidArgument(format!(
            "{} predictions but {} references",
            predictions.len(),
            references.len()
        )));
    }
    if predictions.len() < 2 {
        return Err(Error::InvalidArgument(
            "corpus needs at least 2 items for CIDEr-D document frequencies".into(),
        ));
    }
    let pairs = || predictions.iter().zip(references);
    let mut bleu_scores = [0.0; 4];
    for (n, slot) in bleu_scores.iter_mut().enumerate() {
        *slot = mean(pairs().map(|(p, r)| bleu(p, r, n + 1)));
    }
    Ok(MetricReport {
        n: predictions.len(),
        exact_match: mean(pairs().map(|(p, r)| {
            r.iter().map(|r| exact_match(p, r)).fold(0.0, f64::max)
        })),
        bleu: bleu_scores,
        rouge_l: mean(pairs().map(|(p, r)| rouge_l(p, r, config.rouge_beta))),
        cider_d: cider_d(predictions, references, config.cider_sigma)?,
        meteor_lite: mean(pairs().map(|(p, r)| meteor_lite(p, r))),
    })
}

/// Scores aligned predictions against one reference each.
pub fn evaluate_corpus(predictions: &[Vec<String>], references: &[Vec<String>]) -> Result<MetricReport> {
    let refs: Vec<Vec<Vec<String>>> = references.iter().map(|r| vec![r.clone()]).collect();
    evaluate_corpus_multi(predictions, &refs, &MetricConfig::default())
}
