use std::collections::{HashMap, HashSet};

use super::{ngram_counts, Words};
use crate::error::{Error, Result};

pub const CIDER_SIGMA: f64 = 6.0;
const MAX_ORDER: usize = 4;

struct TfIdf<'a> {
    weights: HashMap<&'a [String], f64>,
    norm: f64,
}

fn tf_idf<'a>(words: &'a Words, k: usize, df: &HashMap<&[String], usize>, log_n: f64) -> TfIdf<'a> {
    let weights: HashMap<&[String], f64> = ngram_counts(words, k)
        .into_iter()
        .map(|(g, c)| {
            let d = df.get(g).copied().unwrap_or(0).max(1) as f64;
            (g, c as f64 * (log_n - d.ln()))
        })
        .collect();
    let norm = weights.values().map(|v| v * v).sum::<f64>().sqrt();
    TfIdf { weights, norm }
}

/// Per-item CIDEr-D, already divided by 10.
///
/// Document frequencies come from the references of the whole corpus, so at
/// least two items are required. Predictions shorter than four words average
/// over the orders they have.
pub fn cider_d_scores(
    predictions: &[Vec<String>],
    references: &[Vec<Vec<String>>],
    sigma: f64,
) -> Result<Vec<f64>> {
    if predictions.len() != references.len() {
        return Err(Error::InvalidArgument("predictions and references differ in length".into()));
    }
    if predictions.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "CIDEr-D needs a corpus of at least 2 items, got {}",
            predictions.len()
        )));
    }
    let mut df: HashMap<&[String], usize> = HashMap::new();
    for refs in references {
        let mut seen: HashSet<&[String]> = HashSet::new();
        for r in refs {
            for k in 1..=MAX_ORDER {
                seen.extend(ngram_counts(r, k).into_keys());
            }
        }
        for g in seen {
            *df.entry(g).or_insert(0) += 1;
        }
    }
    let log_n = (predictions.len() as f64).ln();

    let scores = predictions
        .iter()
        .zip(references)
        .map(|(pred, refs)| {
            let orders = MAX_ORDER.min(pred.len());
            if orders == 0 || refs.is_empty() {
                return 0.0;
            }
            let hyp: Vec<TfIdf> = (1..=orders).map(|k| tf_idf(pred, k, &df, log_n)).collect();
            let per_ref: f64 = refs
                .iter()
                .map(|r| {
                    let delta = pred.len() as f64 - r.len() as f64;
                    let gauss = (-(delta * delta) / (2.0 * sigma * sigma)).exp();
                    let sum: f64 = hyp
                        .iter()
                        .enumerate()
                        .map(|(i, h)| {
                            let rv = tf_idf(r, i + 1, &df, log_n);
                            if h.norm == 0.0 || rv.norm == 0.0 {
                                return 0.0;
                            }
                            let dot: f64 = h
                                .weights
                                .iter()
                                .filter_map(|(g, &hv)| rv.weights.get(g).map(|&rw| hv.min(rw) * rw))
                                .sum();
                            dot / (h.norm * rv.norm) * gauss
                        })
                        .sum();
                    sum / orders as f64 * 10.0
                })
                .sum();
            per_ref / refs.len() as f64 / 10.0
        })
        .collect();
    Ok(scores)
}

/// Corpus CIDEr-D: mean of per-item scores, divided by 10.
pub fn cider_d(predictions: &[Vec<String>], references: &[Vec<Vec<String>>], sigma: f64) -> Result<f64> {
    let scores = cider_d_scores(predictions, references, sigma)?;
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}
