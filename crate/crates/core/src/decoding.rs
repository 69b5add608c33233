//! Autoregressive label generation.

use std::cmp::Ordering;

use ndarray::{Array1, Array2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Vocabulary, END, MAX_WORDS, START};
use crate::error::{Error, Result};
use crate::model::Captioner;

/// Anything that can encode an image once and score next tokens for a prefix.
pub trait NextToken {
    type Memory;

    fn encode(&self, image: &Array2<f64>) -> Result<Self::Memory>;

    /// Logits over the vocabulary for the token following `prefix`.
    fn next_logits(&self, memory: &Self::Memory, prefix: &[u32]) -> Result<Array1<f64>>;
}

impl NextToken for Captioner {
    type Memory = Array2<f64>;

    fn encode(&self, image: &Array2<f64>) -> Result<Array2<f64>> {
        self.encode_image(image)
    }

    fn next_logits(&self, memory: &Array2<f64>, prefix: &[u32]) -> Result<Array1<f64>> {
        let logits = self.decoder_forward(memory, prefix)?;
        Ok(logits.row(logits.nrows() - 1).to_owned())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeOptions {
    /// Beam width; `None` decodes greedily.
    pub beam: Option<usize>,
}

/// Index of the largest finite logit, lowest id on ties.
fn argmax(logits: &Array1<f64>) -> Result<u32> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in logits.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("logit for token {i}")));
        }
        if best.map_or(true, |(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i as u32).ok_or_else(|| Error::Empty("logits".into()))
}

fn strip(prefix: &[u32]) -> Vec<u32> {
    prefix.iter().copied().filter(|&id| !Vocabulary::is_special(id)).collect()
}

/// Greedy decoding from START until END or [`MAX_WORDS`] generated tokens.
/// Returns content ids with special tokens removed.
pub fn greedy_decode<M: NextToken>(model: &M, image: &Array2<f64>) -> Result<Vec<u32>> {
    let memory = model.encode(image)?;
    let mut prefix = vec![START];
    while prefix.len() <= MAX_WORDS {
        let next = argmax(&model.next_logits(&memory, &prefix)?)?;
        if next == END {
            break;
        }
        prefix.push(next);
    }
    Ok(strip(&prefix))
}

fn log_softmax(logits: &Array1<f64>) -> Result<Array1<f64>> {
    if let Some(i) = logits.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("logit for token {i}")));
    }
    let max = logits.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let lse = max + logits.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
    Ok(logits.mapv(|v| v - lse))
}

#[derive(Clone)]
struct Hypothesis {
    tokens: Vec<u32>,
    score: f64,
    done: bool,
}

fn rank(a: &Hypothesis, b: &Hypothesis) -> Ordering {
    b.score.total_cmp(&a.score).then_with(|| a.tokens.cmp(&b.tokens))
}

/// Beam search by total log-probability; ties prefer the lexicographically
/// smaller token sequence. Width 1 reproduces greedy decoding.
pub fn beam_decode<M: NextToken>(model: &M, image: &Array2<f64>, width: usize) -> Result<Vec<u32>> {
    if width == 0 {
        return Err(Error::InvalidArgument("beam width must be at least 1".into()));
    }
    let memory = model.encode(image)?;
    let mut beams = vec![Hypothesis {
        tokens: vec![START],
        score: 0.0,
        done: false,
    }];
    while beams.iter().any(|h| !h.done) {
        let mut candidates = Vec::new();
        for h in &beams {
            if h.done {
                candidates.push(h.clone());
                continue;
            }
            let lp = log_softmax(&model.next_logits(&memory, &h.tokens)?)?;
            for (id, &l) in lp.iter().enumerate() {
                let mut tokens = h.tokens.clone();
                let id = id as u32;
                let done = id == END || tokens.len() == MAX_WORDS;
                if id != END {
                    tokens.push(id);
                }
                candidates.push(Hypothesis {
                    tokens,
                    score: h.score + l,
                    done,
                });
            }
        }
        candidates.sort_by(rank);
        candidates.truncate(width);
        beams = candidates;
    }
    Ok(strip(&beams[0].tokens))
}

pub fn decode<M: NextToken>(model: &M, image: &Array2<f64>, options: &DecodeOptions) -> Result<Vec<u32>> {
    match options.beam {
        Some(w) => beam_decode(model, image, w),
        None => greedy_decode(model, image),
    }
}

/// One line of a predictions file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub crop_id: String,
    pub app_id: String,
    pub label: String,
    pub token_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl PredictionRecord {
    pub fn words(&self) -> Vec<String> {
        self.label.split_whitespace().map(String::from).collect()
    }
}

/// An input to [`batch_predict`]; a failed image load is carried through so
/// it shows up as an error record instead of aborting the batch.
pub struct PredictInput {
    pub crop_id: String,
    pub app_id: String,
    pub image: Result<Array2<f64>>,
}

/// Decodes every input, preserving order. Per-item failures become records
/// with an empty label and the error message.
pub fn batch_predict<M>(model: &M, vocab: &Vocabulary, inputs: Vec<PredictInput>, options: &DecodeOptions) -> Vec<PredictionRecord>
where
    M: NextToken + Sync,
{
    inputs
        .into_par_iter()
        .map(|input| {
            let result = input
                .image
                .and_then(|img| decode(model, &img, options))
                .and_then(|ids| vocab.decode(&ids));
            match result {
                Ok(words) => PredictionRecord {
                    crop_id: input.crop_id,
                    app_id: input.app_id,
                    token_count: words.len(),
                    label: words.join(" "),
                    error: None,
                },
                Err(e) => PredictionRecord {
                    crop_id: input.crop_id,
                    app_id: input.app_id,
                    label: String::new(),
                    token_count: 0,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}
