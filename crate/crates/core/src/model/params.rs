//! Named parameter storage and the layout derived from a [`ModelConfig`].

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::ModelConfig;
use crate::error::{Error, Result};

/// Ordered, named parameter tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    names: Vec<String>,
    values: Vec<Array2<f64>>,
}

impl ParamSet {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[Array2<f64>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Array2<f64>] {
        &mut self.values
    }

    pub fn get(&self, name: &str) -> Option<&Array2<f64>> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| &self.values[i])
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Array2<f64>> {
        let i = self.names.iter().position(|n| n == name)?;
        Some(&mut self.values[i])
    }

    pub fn zeros_like(&self) -> Vec<Array2<f64>> {
        self.values.iter().map(|v| Array2::zeros(v.dim())).collect()
    }

    pub fn count_scalars(&self) -> usize {
        self.values.iter().map(Array2::len).sum()
    }

    pub(crate) fn from_parts(names: Vec<String>, values: Vec<Array2<f64>>) -> Self {
        Self { names, values }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Init {
    /// Uniform with limit `sqrt(6 / (fan_in + fan_out))`.
    Xavier,
    /// Uniform with limit `sqrt(6 / fan_in)`, `fan_in = rows`.
    He,
    Uniform(f64),
    Zeros,
    Ones,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct AttnIdx {
    pub wq: usize,
    pub wk: usize,
    pub wv: usize,
    pub wo: usize,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct FfIdx {
    pub w1: usize,
    pub b1: usize,
    pub w2: usize,
    pub b2: usize,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct NormIdx {
    pub gain: usize,
    pub bias: usize,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct ConvIdx {
    pub w: usize,
    pub b: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct StageIdx {
    pub down: ConvIdx,
    pub res: Option<(ConvIdx, ConvIdx)>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct EncLayerIdx {
    pub attn: AttnIdx,
    pub norm1: NormIdx,
    pub ff: FfIdx,
    pub norm2: NormIdx,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct DecLayerIdx {
    pub self_attn: AttnIdx,
    pub norm1: NormIdx,
    pub cross: AttnIdx,
    pub norm2: NormIdx,
    pub ff: FfIdx,
    pub norm3: NormIdx,
}

/// Where every parameter group lives in a [`ParamSet`].
#[derive(Debug, Clone)]
pub(crate) struct Layout {
    pub stem: ConvIdx,
    pub stages: Vec<StageIdx>,
    pub feat_w: usize,
    pub feat_b: usize,
    pub encoder: Vec<EncLayerIdx>,
    pub tok_embed: usize,
    pub decoder: Vec<DecLayerIdx>,
    pub out_w: usize,
    pub out_b: usize,
    pub specs: Vec<(String, (usize, usize), Init)>,
}

struct Builder {
    specs: Vec<(String, (usize, usize), Init)>,
}

impl Builder {
    fn add(&mut self, name: String, shape: (usize, usize), init: Init) -> usize {
        self.specs.push((name, shape, init));
        self.specs.len() - 1
    }

    fn conv(&mut self, prefix: &str, patch: usize, out: usize) -> ConvIdx {
        ConvIdx {
            w: self.add(format!("{prefix}.w"), (patch, out), Init::He),
            b: self.add(format!("{prefix}.b"), (1, out), Init::Zeros),
        }
    }

    fn attn(&mut self, prefix: &str, c: &ModelConfig) -> AttnIdx {
        let (d, hk, hv) = (c.d_model, c.heads * c.d_k, c.heads * c.d_v);
        AttnIdx {
            wq: self.add(format!("{prefix}.w_q"), (d, hk), Init::Xavier),
            wk: self.add(format!("{prefix}.w_k"), (d, hk), Init::Xavier),
            wv: self.add(format!("{prefix}.w_v"), (d, hv), Init::Xavier),
            wo: self.add(format!("{prefix}.w_o"), (hv, d), Init::Xavier),
        }
    }

    fn ff(&mut self, prefix: &str, c: &ModelConfig) -> FfIdx {
        FfIdx {
            w1: self.add(format!("{prefix}.w_1"), (c.d_model, c.d_ff), Init::Xavier),
            b1: self.add(format!("{prefix}.b_1"), (1, c.d_ff), Init::Zeros),
            w2: self.add(format!("{prefix}.w_2"), (c.d_ff, c.d_model), Init::Xavier),
            b2: self.add(format!("{prefix}.b_2"), (1, c.d_model), Init::Zeros),
        }
    }

    fn norm(&mut self, prefix: &str, d: usize) -> NormIdx {
        NormIdx {
            gain: self.add(format!("{prefix}.gain"), (1, d), Init::Ones),
            bias: self.add(format!("{prefix}.bias"), (1, d), Init::Zeros),
        }
    }
}

impl Layout {
    pub fn new(c: &ModelConfig) -> Self {
        let mut b = Builder { specs: Vec::new() };
        let k2 = c.cnn.kernel * c.cnn.kernel;
        let stem = b.conv("cnn.stem", k2 * 3, c.cnn.stem_channels);
        let mut width = c.cnn.stem_channels;
        let mut stages = Vec::new();
        for (i, &out) in c.cnn.stage_channels.iter().enumerate() {
            let down = b.conv(&format!("cnn.stage{i}.down"), k2 * width, out);
            let res = c.cnn.residual.then(|| {
                (
                    b.conv(&format!("cnn.stage{i}.res1"), k2 * out, out),
                    b.conv(&format!("cnn.stage{i}.res2"), k2 * out, out),
                )
            });
            stages.push(StageIdx { down, res });
            width = out;
        }
        let feat_w = b.add("encoder.embed.w".into(), (width, c.d_model), Init::Xavier);
        let feat_b = b.add("encoder.embed.b".into(), (1, c.d_model), Init::Zeros);
        let encoder = (0..c.encoder_layers)
            .map(|l| {
                let p = format!("encoder.layer{l}");
                EncLayerIdx {
                    attn: b.attn(&format!("{p}.self_attn"), c),
                    norm1: b.norm(&format!("{p}.norm1"), c.d_model),
                    ff: b.ff(&format!("{p}.ff"), c),
                    norm2: b.norm(&format!("{p}.norm2"), c.d_model),
                }
            })
            .collect();
        let tok_embed = b.add(
            "decoder.token_embed".into(),
            (c.vocab_size, c.d_model),
            Init::Uniform(1.0),
        );
        let decoder = (0..c.decoder_layers)
            .map(|l| {
                let p = format!("decoder.layer{l}");
                DecLayerIdx {
                    self_attn: b.attn(&format!("{p}.self_attn"), c),
                    norm1: b.norm(&format!("{p}.norm1"), c.d_model),
                    cross: b.attn(&format!("{p}.cross_attn"), c),
                    norm2: b.norm(&format!("{p}.norm2"), c.d_model),
                    ff: b.ff(&format!("{p}.ff"), c),
                    norm3: b.norm(&format!("{p}.norm3"), c.d_model),
                }
            })
            .collect();
        let out_w = b.add(
            "decoder.out.w".into(),
            (c.d_model, c.vocab_size),
            Init::Uniform(0.05),
        );
        let out_b = b.add("decoder.out.b".into(), (1, c.vocab_size), Init::Zeros);
        Layout {
            stem,
            stages,
            feat_w,
            feat_b,
            encoder,
            tok_embed,
            decoder,
            out_w,
            out_b,
            specs: b.specs,
        }
    }

    pub fn init(&self, seed: u64) -> ParamSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut names = Vec::with_capacity(self.specs.len());
        let mut values = Vec::with_capacity(self.specs.len());
        for (name, (rows, cols), init) in &self.specs {
            let limit = match init {
                Init::Xavier => (6.0 / (rows + cols) as f64).sqrt(),
                Init::He => (6.0 / *rows as f64).sqrt(),
                Init::Uniform(a) => *a,
                Init::Zeros | Init::Ones => 0.0,
            };
            let value = match init {
                Init::Zeros => Array2::zeros((*rows, *cols)),
                Init::Ones => Array2::ones((*rows, *cols)),
                _ => Array2::from_shape_simple_fn((*rows, *cols), || rng.gen_range(-limit..=limit)),
            };
            names.push(name.clone());
            values.push(value);
        }
        ParamSet { names, values }
    }

    /// Checks that `params` has exactly this layout's names and shapes.
    pub fn check(&self, params: &ParamSet) -> Result<()> {
        if params.len() != self.specs.len() {
            return Err(Error::shape(
                "parameters",
                format!("expected {} groups, found {}", self.specs.len(), params.len()),
            ));
        }
        for ((name, shape, _), (pname, value)) in
            self.specs.iter().zip(params.names.iter().zip(&params.values))
        {
            if name != pname || *shape != value.dim() {
                return Err(Error::shape(
                    "parameters",
                    format!(
                        "expected {name} {:?}, found {pname} {:?}",
                        shape,
                        value.dim()
                    ),
                ));
            }
            if value.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("parameter {name}")));
            }
        }
        Ok(())
    }
}
