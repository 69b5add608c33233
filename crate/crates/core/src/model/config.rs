use serde::{Deserialize, Serialize};

use crate::corpus::SEQ_CAPACITY;
use crate::error::{Error, Result};

/// Small residual convolutional stack standing in for a pretrained backbone.
///
/// A stem convolution (stride 1) and optional max-pool are followed by one
/// stage per entry of `stage_channels`; each stage halves the grid with a
/// stride-2 convolution and, when `residual` is set, adds a two-convolution
/// identity-shortcut block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CnnConfig {
    pub stem_channels: usize,
    /// Max-pool window after the stem; 1 disables pooling.
    pub stem_pool: usize,
    pub stage_channels: Vec<usize>,
    pub kernel: usize,
    pub residual: bool,
}

impl Default for CnnConfig {
    fn default() -> Self {
        Self {
            stem_channels: 32,
            stem_pool: 2,
            stage_channels: vec![32, 64, 128, 256],
            kernel: 3,
            residual: true,
        }
    }
}

impl CnnConfig {
    pub fn out_channels(&self) -> usize {
        self.stage_channels.last().copied().unwrap_or(self.stem_channels)
    }

    /// Side length of the output grid for a square input.
    pub fn grid_side(&self, resolution: usize) -> usize {
        let mut side = resolution / self.stem_pool.max(1);
        for _ in &self.stage_channels {
            side = (side - 1) / 2 + 1;
        }
        side
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub encoder_layers: usize,
    pub decoder_layers: usize,
    pub d_model: usize,
    /// Per-head query/key width.
    pub d_k: usize,
    /// Per-head value width; heads are concatenated to `heads * d_v` before the output projection.
    pub d_v: usize,
    pub d_ff: usize,
    pub heads: usize,
    pub vocab_size: usize,
    pub max_seq: usize,
    pub input_resolution: usize,
    /// ReLU between the two feed-forward projections. Off keeps the
    /// position-wise transform purely affine.
    pub ff_relu: bool,
    /// Accepted for config compatibility; must be 0.
    pub dropout: f64,
    pub cnn: CnnConfig,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            encoder_layers: 3,
            decoder_layers: 3,
            d_model: 512,
            d_k: 512,
            d_v: 512,
            d_ff: 2048,
            heads: 8,
            vocab_size: 4,
            max_seq: SEQ_CAPACITY,
            input_resolution: 224,
            ff_relu: false,
            dropout: 0.0,
            cnn: CnnConfig::default(),
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("d_model", self.d_model),
            ("d_k", self.d_k),
            ("d_v", self.d_v),
            ("d_ff", self.d_ff),
            ("heads", self.heads),
            ("vocab_size", self.vocab_size),
            ("max_seq", self.max_seq),
            ("input_resolution", self.input_resolution),
            ("cnn.stem_channels", self.cnn.stem_channels),
            ("cnn.stem_pool", self.cnn.stem_pool),
            ("cnn.kernel", self.cnn.kernel),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::InvalidArgument(format!("{name} must be positive")));
            }
        }
        if self.cnn.stage_channels.contains(&0) {
            return Err(Error::InvalidArgument("cnn stage widths must be positive".into()));
        }
        if self.cnn.kernel % 2 == 0 {
            return Err(Error::InvalidArgument("cnn.kernel must be odd".into()));
        }
        if self.input_resolution % self.cnn.stem_pool != 0 {
            return Err(Error::InvalidArgument(
                "input_resolution must be divisible by cnn.stem_pool".into(),
            ));
        }
        if self.vocab_size < 4 {
            return Err(Error::InvalidArgument("vocab_size must cover the 4 special tokens".into()));
        }
        if self.dropout != 0.0 {
            return Err(Error::InvalidArgument("dropout is not supported".into()));
        }
        Ok(())
    }

    /// Width of the concatenated attention heads.
    pub fn concat_width(&self) -> usize {
        self.heads * self.d_v
    }

    pub fn grid_side(&self) -> usize {
        self.cnn.grid_side(self.input_resolution)
    }

    /// Small configuration for desk-scale experiments.
    pub fn tiny(vocab_size: usize) -> Self {
        Self {
            encoder_layers: 2,
            decoder_layers: 2,
            d_model: 64,
            d_k: 16,
            d_v: 16,
            d_ff: 128,
            heads: 4,
            vocab_size,
            max_seq: SEQ_CAPACITY,
            input_resolution: 32,
            ff_relu: false,
            dropout: 0.0,
            cnn: CnnConfig {
                stem_channels: 16,
                stem_pool: 2,
                stage_channels: vec![32, 64],
                kernel: 3,
                residual: true,
            },
        }
    }
}
