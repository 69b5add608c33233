//! The captioning network: convolutional grid encoder, Transformer encoder
//! over the flattened grid, and a causally-masked Transformer decoder.

use ndarray::Array2;

use super::config::ModelConfig;
use super::layers::{
    causal_mask, conv_on, feed_forward_on, multi_head_on, positional_encoding, residual_norm_on,
    AttnVars, FfVars,
};
use super::loss::reference_distribution;
use super::params::{AttnIdx, ConvIdx, FfIdx, Layout, NormIdx, ParamSet};
use crate::autodiff::{ConvGeom, PoolGeom, Tape, Var};
use crate::error::{Error, Result};

/// CNN output: one vector per grid cell, raster order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSequence {
    pub vectors: Array2<f64>,
    pub grid_shape: (usize, usize),
}

#[derive(Debug, Clone)]
pub struct Captioner {
    config: ModelConfig,
    layout: Layout,
    params: ParamSet,
    grid_pe: Array2<f64>,
    seq_pe: Array2<f64>,
}

/// Lazily registers parameters on a tape so each is cloned at most once.
struct Binder<'a> {
    params: &'a ParamSet,
    vars: Vec<Option<Var>>,
}

impl<'a> Binder<'a> {
    fn new(params: &'a ParamSet) -> Self {
        Self {
            params,
            vars: vec![None; params.len()],
        }
    }

    fn get(&mut self, t: &mut Tape, id: usize) -> Var {
        *self.vars[id].get_or_insert_with(|| t.param(id, self.params.values()[id].clone()))
    }

    fn attn(&mut self, t: &mut Tape, i: AttnIdx) -> AttnVars {
        AttnVars {
            w_q: self.get(t, i.wq),
            w_k: self.get(t, i.wk),
            w_v: self.get(t, i.wv),
            w_o: self.get(t, i.wo),
        }
    }

    fn ff(&mut self, t: &mut Tape, i: FfIdx) -> FfVars {
        FfVars {
            w_1: self.get(t, i.w1),
            b_1: self.get(t, i.b1),
            w_2: self.get(t, i.w2),
            b_2: self.get(t, i.b2),
        }
    }

    fn norm(&mut self, t: &mut Tape, i: NormIdx) -> (Var, Var) {
        (self.get(t, i.gain), self.get(t, i.bias))
    }

    fn conv(&mut self, t: &mut Tape, i: ConvIdx) -> (Var, Var) {
        (self.get(t, i.w), self.get(t, i.b))
    }
}

fn ensure_finite(t: &Tape, v: Var, what: impl FnOnce() -> String) -> Result<()> {
    if t.value(v).iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what()))
    }
}

impl Captioner {
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let layout = Layout::new(&config);
        let params = layout.init(seed);
        Ok(Self::assemble(config, layout, params))
    }

    pub fn from_params(config: ModelConfig, params: ParamSet) -> Result<Self> {
        config.validate()?;
        let layout = Layout::new(&config);
        layout.check(&params)?;
        Ok(Self::assemble(config, layout, params))
    }

    fn assemble(config: ModelConfig, layout: Layout, params: ParamSet) -> Self {
        let side = config.grid_side();
        Self {
            grid_pe: positional_encoding(side * side, config.d_model),
            seq_pe: positional_encoding(config.max_seq, config.d_model),
            config,
            layout,
            params,
        }
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }

    pub fn set_params(&mut self, params: ParamSet) -> Result<()> {
        self.layout.check(&params)?;
        self.params = params;
        Ok(())
    }

    fn check_image(&self, image: &Array2<f64>) -> Result<()> {
        let r = self.config.input_resolution;
        if image.dim() != (r * r, 3) {
            return Err(Error::shape(
                "cnn_encode",
                format!("expected {}x3 pixels for {r}x{r} input, got {:?}", r * r, image.dim()),
            ));
        }
        if let Some(i) = image.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("input pixel {} channel {}", i / 3, i % 3)));
        }
        Ok(())
    }

    fn cnn_on(&self, t: &mut Tape, b: &mut Binder, image: &Array2<f64>) -> Result<(Var, (usize, usize))> {
        self.check_image(image)?;
        let cfg = &self.config.cnn;
        let k = cfg.kernel;
        let mut side = self.config.input_resolution;
        let mut x = t.constant(image.clone());
        let (w, bias) = b.conv(t, self.layout.stem);
        let geom = ConvGeom {
            in_h: side,
            in_w: side,
            channels: 3,
            kernel: k,
            stride: 1,
            pad: k / 2,
        };
        x = conv_on(t, x, geom, w, bias);
        x = t.relu(x);
        if cfg.stem_pool > 1 {
            x = t.max_pool(
                x,
                PoolGeom {
                    in_h: side,
                    in_w: side,
                    window: cfg.stem_pool,
                },
            );
            side /= cfg.stem_pool;
        }
        let mut width = cfg.stem_channels;
        for (stage, &out) in self.layout.stages.iter().zip(&cfg.stage_channels) {
            let geom = ConvGeom {
                in_h: side,
                in_w: side,
                channels: width,
                kernel: k,
                stride: 2,
                pad: k / 2,
            };
            let (w, bias) = b.conv(t, stage.down);
            x = conv_on(t, x, geom, w, bias);
            x = t.relu(x);
            side = geom.out_h();
            width = out;
            if let Some((r1, r2)) = stage.res {
                let same = ConvGeom {
                    in_h: side,
                    in_w: side,
                    channels: width,
                    kernel: k,
                    stride: 1,
                    pad: k / 2,
                };
                let (w1, b1) = b.conv(t, r1);
                let h = conv_on(t, x, same, w1, b1);
                let h = t.relu(h);
                let (w2, b2) = b.conv(t, r2);
                let h = conv_on(t, h, same, w2, b2);
                let sum = t.add(x, h);
                x = t.relu(sum);
            }
        }
        ensure_finite(t, x, || "cnn".into())?;
        Ok((x, (side, side)))
    }

    fn encoder_on(&self, t: &mut Tape, b: &mut Binder, features: Var) -> Result<Var> {
        let n = t.value(features).nrows();
        let (fw, fb) = (b.get(t, self.layout.feat_w), b.get(t, self.layout.feat_b));
        let e = t.matmul(features, fw);
        let e = t.add_row(e, fb);
        let pe = if n == self.grid_pe.nrows() {
            self.grid_pe.clone()
        } else {
            positional_encoding(n, self.config.d_model)
        };
        let pe = t.constant(pe);
        let mut x = t.add(e, pe);
        for (l, layer) in self.layout.encoder.iter().enumerate() {
            let w = b.attn(t, layer.attn);
            let att = multi_head_on(t, x, x, w, self.config.heads, None);
            let (g, bb) = b.norm(t, layer.norm1);
            let z = residual_norm_on(t, x, att, g, bb);
            let ff = b.ff(t, layer.ff);
            let f = feed_forward_on(t, z, ff, self.config.ff_relu);
            let (g, bb) = b.norm(t, layer.norm2);
            x = residual_norm_on(t, z, f, g, bb);
            ensure_finite(t, x, || format!("encoder layer {l}"))?;
        }
        Ok(x)
    }

    fn check_prefix(&self, prefix: &[u32]) -> Result<()> {
        if prefix.is_empty() {
            return Err(Error::InvalidArgument("empty decoder prefix".into()));
        }
        if prefix.len() > self.config.max_seq {
            return Err(Error::InvalidArgument(format!(
                "prefix of {} tokens exceeds max_seq {}",
                prefix.len(),
                self.config.max_seq
            )));
        }
        if let Some(&bad) = prefix.iter().find(|&&id| id as usize >= self.config.vocab_size) {
            return Err(Error::UnknownId(bad));
        }
        Ok(())
    }

    fn decoder_on(&self, t: &mut Tape, b: &mut Binder, memory: Var, prefix: &[u32]) -> Result<Var> {
        self.check_prefix(prefix)?;
        let len = prefix.len();
        let ids: Vec<usize> = prefix.iter().map(|&i| i as usize).collect();
        let table = b.get(t, self.layout.tok_embed);
        let emb = t.gather(table, &ids);
        let pe = t.constant(self.seq_pe.slice(ndarray::s![..len, ..]).to_owned());
        let mut x = t.add(emb, pe);
        let mask = causal_mask(len);
        for (l, layer) in self.layout.decoder.iter().enumerate() {
            let w = b.attn(t, layer.self_attn);
            let s = multi_head_on(t, x, x, w, self.config.heads, Some(&mask));
            let (g, bb) = b.norm(t, layer.norm1);
            let s = residual_norm_on(t, x, s, g, bb);
            let w = b.attn(t, layer.cross);
            let c = multi_head_on(t, s, memory, w, self.config.heads, None);
            let (g, bb) = b.norm(t, layer.norm2);
            let c = residual_norm_on(t, s, c, g, bb);
            let ff = b.ff(t, layer.ff);
            let f = feed_forward_on(t, c, ff, self.config.ff_relu);
            let (g, bb) = b.norm(t, layer.norm3);
            x = residual_norm_on(t, c, f, g, bb);
            ensure_finite(t, x, || format!("decoder layer {l}"))?;
        }
        let (ow, ob) = (b.get(t, self.layout.out_w), b.get(t, self.layout.out_b));
        let logits = t.matmul(x, ow);
        Ok(t.add_row(logits, ob))
    }

    /// Visual features of a `(res*res) x 3` image with values in `[0, 1]`.
    pub fn cnn_encode(&self, image: &Array2<f64>) -> Result<FeatureSequence> {
        let mut t = Tape::new();
        let mut b = Binder::new(&self.params);
        let (v, grid_shape) = self.cnn_on(&mut t, &mut b, image)?;
        Ok(FeatureSequence {
            vectors: t.value(v).clone(),
            grid_shape,
        })
    }

    /// Encoder memory (`n x d_model`) for a feature sequence.
    pub fn encoder_forward(&self, features: &FeatureSequence) -> Result<Array2<f64>> {
        let (h, w) = features.grid_shape;
        if features.vectors.nrows() != h * w || features.vectors.ncols() != self.config.cnn.out_channels() {
            return Err(Error::shape(
                "encoder_forward",
                format!("features {:?} for grid {h}x{w}", features.vectors.dim()),
            ));
        }
        let mut t = Tape::new();
        let mut b = Binder::new(&self.params);
        let f = t.constant(features.vectors.clone());
        let out = self.encoder_on(&mut t, &mut b, f)?;
        Ok(t.value(out).clone())
    }

    /// CNN followed by the encoder stack.
    pub fn encode_image(&self, image: &Array2<f64>) -> Result<Array2<f64>> {
        let mut t = Tape::new();
        let mut b = Binder::new(&self.params);
        let (f, _) = self.cnn_on(&mut t, &mut b, image)?;
        let out = self.encoder_on(&mut t, &mut b, f)?;
        Ok(t.value(out).clone())
    }

    /// Next-token logits (`prefix.len() x vocab_size`) for a decoder prefix.
    pub fn decoder_forward(&self, memory: &Array2<f64>, prefix: &[u32]) -> Result<Array2<f64>> {
        if memory.ncols() != self.config.d_model || memory.nrows() == 0 {
            return Err(Error::shape("decoder_forward", format!("memory {:?}", memory.dim())));
        }
        let mut t = Tape::new();
        let mut b = Binder::new(&self.params);
        let m = t.constant(memory.clone());
        let out = self.decoder_on(&mut t, &mut b, m, prefix)?;
        Ok(t.value(out).clone())
    }

    /// Teacher-forced loss of one encoded label and its parameter gradients.
    ///
    /// The decoder sees `token_ids[..length-1]` and is scored against
    /// `token_ids[1..length]`; every scored position is weighted by `weight`,
    /// so the return value is `weight * sum of per-position KL`. Positions at
    /// or beyond `length` (padding) are never evaluated.
    pub fn loss_and_grads(
        &self,
        image: &Array2<f64>,
        token_ids: &[u32],
        length: usize,
        smoothing: f64,
        weight: f64,
    ) -> Result<(f64, Vec<Array2<f64>>)> {
        if length < 2 || length > token_ids.len() {
            return Err(Error::InvalidArgument(format!(
                "sequence length {length} invalid for {} ids",
                token_ids.len()
            )));
        }
        let mut t = Tape::new();
        let mut b = Binder::new(&self.params);
        let (f, _) = self.cnn_on(&mut t, &mut b, image)?;
        let memory = self.encoder_on(&mut t, &mut b, f)?;
        let logits = self.decoder_on(&mut t, &mut b, memory, &token_ids[..length - 1])?;
        let target = reference_distribution(&token_ids[1..length], self.config.vocab_size, smoothing);
        let loss = t.kl_div(logits, target, vec![weight; length - 1]);
        let value = t.value(loss)[[0, 0]];
        if !value.is_finite() {
            return Err(Error::NonFinite("loss".into()));
        }
        let grads = t.backward(loss);
        let mut out = self.params.zeros_like();
        grads.accumulate_params(&mut out);
        Ok((value, out))
    }
}
