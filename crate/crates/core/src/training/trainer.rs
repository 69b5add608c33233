use std::path::{Path, PathBuf};

use log::{info, warn};
use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adam::{Adam, AdamConfig};
use super::schedule::lr_at;
use crate::capture::store::write_jsonl;
use crate::corpus::{LabeledSample, Split, Vocabulary, VOCAB_FILE};
use crate::decoding::{decode, DecodeOptions};
use crate::error::{Error, Result};
use crate::model::{Captioner, Checkpoint};

pub const CHECKPOINT_FILE: &str = "model.lfck";
pub const BEST_FILE: &str = "best.json";
pub const LOG_FILE: &str = "train_log.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub warmup_steps: u64,
    pub batch_size: usize,
    pub max_steps: u64,
    pub seed: u64,
    /// Steps between validation passes.
    pub eval_every: u64,
    /// Validation passes without improvement before stopping.
    pub patience: Option<u64>,
    pub label_smoothing: f64,
    /// Global gradient-norm ceiling.
    pub grad_clip: Option<f64>,
    /// Split scored for model selection; `train` is for overfitting checks.
    pub eval_split: Split,
    /// Stop once selection exact match reaches this value.
    pub target_exact_match: Option<f64>,
    pub adam: AdamConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            warmup_steps: 4000,
            batch_size: 32,
            max_steps: 100_000,
            seed: 0,
            eval_every: 1000,
            patience: Some(10),
            label_smoothing: 0.0,
            grad_clip: None,
            eval_split: Split::Val,
            target_exact_match: None,
            adam: AdamConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if self.warmup_steps == 0 {
            return bad("warmup_steps must be positive");
        }
        if self.eval_every == 0 {
            return bad("eval_every must be positive");
        }
        if !(0.0..1.0).contains(&self.label_smoothing) {
            return bad("label_smoothing must be in [0, 1)");
        }
        if matches!(self.grad_clip, Some(c) if c <= 0.0 || !c.is_finite()) {
            return bad("grad_clip must be a positive finite number");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub step: u64,
    pub lr: f64,
    pub loss: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub val_exact_match: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestPointer {
    pub step: u64,
    pub exact_match: f64,
    pub checkpoint: String,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub steps_run: u64,
    pub best_step: Option<u64>,
    pub best_exact_match: Option<f64>,
    pub log: Vec<LogEntry>,
}

/// Epoch-wise shuffled batches of similar label length.
///
/// Each epoch shuffles the indices, sorts windows of `8 * batch_size` by
/// length, cuts them into batches and shuffles the batch order.
pub struct Batcher {
    lengths: Vec<usize>,
    batch_size: usize,
    rng: ChaCha8Rng,
    queue: Vec<Vec<usize>>,
}

impl Batcher {
    pub fn new(lengths: Vec<usize>, batch_size: usize, seed: u64) -> Self {
        Self {
            lengths,
            batch_size,
            rng: ChaCha8Rng::seed_from_u64(seed),
            queue: Vec::new(),
        }
    }

    fn refill(&mut self) {
        let mut order: Vec<usize> = (0..self.lengths.len()).collect();
        order.shuffle(&mut self.rng);
        let mut batches = Vec::new();
        for pool in order.chunks_mut(self.batch_size * 8) {
            pool.sort_by_key(|&i| self.lengths[i]);
            batches.extend(pool.chunks(self.batch_size).map(|c| c.to_vec()));
        }
        batches.shuffle(&mut self.rng);
        batches.reverse();
        self.queue = batches;
    }

    pub fn next_batch(&mut self) -> Vec<usize> {
        if self.queue.is_empty() {
            self.refill();
        }
        self.queue.pop().unwrap_or_default()
    }
}

fn clip(grads: &mut [Array2<f64>], max_norm: f64) {
    let norm = grads.iter().flat_map(|g| g.iter()).map(|x| x * x).sum::<f64>().sqrt();
    if norm > max_norm {
        let k = max_norm / norm;
        grads.iter_mut().for_each(|g| g.mapv_inplace(|x| x * k));
    }
}

/// One optimizer update on `batch`. Returns the mean per-position KL before
/// the update.
pub fn train_step(
    model: &mut Captioner,
    adam: &mut Adam,
    batch: &[&LabeledSample],
    step: u64,
    config: &TrainConfig,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::Empty("training batch".into()));
    }
    let positions: usize = batch.iter().map(|s| s.length.saturating_sub(1)).sum();
    let weight = 1.0 / positions.max(1) as f64;
    let frozen = &*model;
    let parts: Vec<(f64, Vec<Array2<f64>>)> = batch
        .par_iter()
        .map(|s| frozen.loss_and_grads(&s.image, &s.token_ids, s.length, config.label_smoothing, weight))
        .collect::<Result<_>>()?;
    let mut loss = 0.0;
    let mut grads = model.params().zeros_like();
    for (l, g) in parts {
        loss += l;
        for (acc, gi) in grads.iter_mut().zip(g) {
            *acc += &gi;
        }
    }
    if let Some(c) = config.grad_clip {
        clip(&mut grads, c);
    }
    let lr = lr_at(step, model.config().d_model, config.warmup_steps)?;
    adam.step(model.params_mut(), &grads, lr)?;
    Ok(loss)
}

/// Fraction of samples whose decoded label equals the reference exactly.
pub fn exact_match_rate(model: &Captioner, samples: &[LabeledSample], options: &DecodeOptions) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Empty("evaluation split".into()));
    }
    let hits: Vec<bool> = samples
        .par_iter()
        .map(|s| decode(model, &s.image, options).map(|ids| ids == s.content_ids()))
        .collect::<Result<_>>()?;
    Ok(hits.iter().filter(|&&h| h).count() as f64 / samples.len() as f64)
}

fn checkpoint_dir(out: &Path, step: u64) -> PathBuf {
    out.join("ckpt").join(format!("step-{step}"))
}

/// Runs the teacher-forced loop, scoring `eval` every `eval_every` steps and
/// at the end. The best-scoring parameters (earliest on ties) are restored
/// into `model` before returning. With `out`, each scored checkpoint, the
/// `best.json` pointer, the vocabulary and `train_log.jsonl` are written there.
pub fn train_loop(
    model: &mut Captioner,
    train: &[LabeledSample],
    eval: &[LabeledSample],
    vocab: &Vocabulary,
    config: &TrainConfig,
    out: Option<&Path>,
) -> Result<TrainOutcome> {
    config.validate()?;
    if train.is_empty() {
        return Err(Error::Empty("train split".into()));
    }
    if eval.is_empty() {
        return Err(Error::Empty("selection split".into()));
    }
    if vocab.len() != model.config().vocab_size {
        return Err(Error::InvalidArgument(format!(
            "vocabulary has {} tokens but the model expects {}",
            vocab.len(),
            model.config().vocab_size
        )));
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        vocab.save(&dir.join(VOCAB_FILE))?;
    }
    let digest = vocab.digest();
    let mut adam = Adam::new(model.params(), config.adam);
    let mut batcher = Batcher::new(train.iter().map(|s| s.length).collect(), config.batch_size, config.seed);
    let mut log = Vec::new();
    let mut best: Option<(u64, f64, crate::model::ParamSet)> = None;
    let mut stale = 0u64;
    let mut steps_run = 0;

    for step in 1..=config.max_steps {
        let batch: Vec<&LabeledSample> = batcher.next_batch().into_iter().map(|i| &train[i]).collect();
        let loss = train_step(model, &mut adam, &batch, step, config)?;
        steps_run = step;
        let lr = lr_at(step, model.config().d_model, config.warmup_steps)?;
        let mut entry = LogEntry {
            step,
            lr,
            loss,
            val_exact_match: None,
        };
        let mut stop = false;
        if step % config.eval_every == 0 || step == config.max_steps {
            let em = exact_match_rate(model, eval, &DecodeOptions::default())?;
            entry.val_exact_match = Some(em);
            info!("step {step} loss {loss:.4} lr {lr:.3e} exact_match {em:.4}");
            if let Some(dir) = out {
                let ck = Checkpoint {
                    model: model.clone(),
                    vocab_digest: digest.clone(),
                    step,
                };
                ck.save(&checkpoint_dir(dir, step).join(CHECKPOINT_FILE))?;
            }
            if best.as_ref().map_or(true, |(_, b, _)| em > *b) {
                best = Some((step, em, model.params().clone()));
                stale = 0;
                if let Some(dir) = out {
                    let pointer = BestPointer {
                        step,
                        exact_match: em,
                        checkpoint: format!("ckpt/step-{step}/{CHECKPOINT_FILE}"),
                    };
                    let path = dir.join(BEST_FILE);
                    std::fs::write(&path, serde_json::to_string_pretty(&pointer)?).map_err(|e| Error::io(&path, e))?;
                }
            } else {
                stale += 1;
            }
            if config.target_exact_match.is_some_and(|t| em >= t) {
                info!("target exact match reached at step {step}");
                stop = true;
            }
            if config.patience.is_some_and(|p| stale >= p) {
                warn!("no improvement for {stale} evaluations, stopping at step {step}");
                stop = true;
            }
        }
        log.push(entry);
        if stop {
            break;
        }
    }

    if let Some(dir) = out {
        write_jsonl(&dir.join(LOG_FILE), &log)?;
    }
    let (best_step, best_em) = match best {
        Some((s, em, params)) => {
            model.set_params(params)?;
            (Some(s), Some(em))
        }
        None => (None, None),
    };
    Ok(TrainOutcome {
        steps_run,
        best_step,
        best_exact_match: best_em,
        log,
    })
}

/// Loads the checkpoint a `best.json` pointer refers to.
pub fn load_best(dir: &Path) -> Result<Checkpoint> {
    let path = dir.join(BEST_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let pointer: BestPointer = serde_json::from_str(&text)?;
    Checkpoint::load(&dir.join(pointer.checkpoint))
}
