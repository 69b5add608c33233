//! Core library for mining image-based buttons out of mobile UI captures,
//! building a caption corpus from their accessibility labels, training a
//! CNN + Transformer encoder-decoder that predicts those labels, and scoring
//! predictions with the usual captioning metrics.
//!
//! The pipeline is split into modules that mirror its stages:
//!
//! * [`capture`]: hierarchy parsing, button extraction, deduplication and the crop store.
//! * [`corpus`]: label cleaning, vocabulary, encoding and per-category splits.
//! * [`model`]: the visual encoder, Transformer layers, loss and checkpoints.
//! * [`training`]: learning-rate schedule, Adam and the teacher-forced loop.
//! * [`decoding`]: greedy and beam decoding plus batch prediction.
//! * [`metrics`]: exact match, BLEU, ROUGE-L, CIDEr-D and METEOR-lite.
//! * [`audit`]: missing-label statistics and the installs correlation.

pub mod audit;
pub mod autodiff;
pub mod capture;
pub mod corpus;
pub mod decoding;
pub mod error;
pub mod metrics;
pub mod model;
pub mod raster;
pub mod synth;
pub mod training;

pub use capture::{ElementCrop, ScreenCapture, UIElement};
pub use corpus::{LabeledSample, SplitManifest, Vocabulary};
pub use error::{Error, Result};
pub use metrics::MetricReport;
pub use model::{Captioner, ModelConfig};
pub use raster::{Bounds, Raster};

/// Version tag written into every file this crate produces.
pub const FORMAT_VERSION: u32 = 1;
