//! CNN + Transformer encoder-decoder captioning model.

pub mod checkpoint;
pub mod config;
pub mod layers;
pub mod loss;
pub mod network;
pub(crate) mod params;

pub use checkpoint::Checkpoint;
pub use config::{CnnConfig, ModelConfig};
pub use layers::{
    attention, attention_weights, avg_pool, causal_mask, conv2d, feed_forward, layer_norm,
    max_pool, multi_head, positional_encoding, AttentionWeights, FeedForwardWeights,
};
pub use loss::{kl_loss, reference_distribution, LOG_EPS};
pub use network::{Captioner, FeatureSequence};
pub use params::ParamSet;

/// Row-wise softmax of logits.
pub fn softmax(logits: &ndarray::Array2<f64>) -> ndarray::Array2<f64> {
    crate::autodiff::softmax_rows(logits, None)
}
