//! Transformer and convolution building blocks.
//!
//! Each block has a tape form (used by the network so gradients flow) and a
//! plain matrix form for direct evaluation. The plain forms run the same tape
//! code on constants.

use ndarray::Array2;

use crate::autodiff::{ConvGeom, PoolGeom, Tape, Var};
use crate::error::{Error, Result};

/// Scaled dot-product attention on the tape: `softmax(Q K^T / sqrt(d_k)) V`.
pub fn attention_on(
    t: &mut Tape,
    q: Var,
    k: Var,
    v: Var,
    allowed: Option<&Array2<bool>>,
) -> Var {
    let d_k = t.value(q).ncols() as f64;
    let scores = t.matmul_t(q, k);
    let scaled = t.scale(scores, 1.0 / d_k.sqrt());
    let weights = t.softmax(scaled, allowed);
    t.matmul(weights, v)
}

/// Projection matrices of one multi-head attention block. Heads occupy
/// consecutive column ranges of `w_q`/`w_k` (`d_k` wide) and `w_v` (`d_v` wide).
#[derive(Debug, Clone, Copy)]
pub struct AttnVars {
    pub w_q: Var,
    pub w_k: Var,
    pub w_v: Var,
    pub w_o: Var,
}

/// Multi-head attention with queries from `x_q` and keys/values from `x_kv`.
pub fn multi_head_on(
    t: &mut Tape,
    x_q: Var,
    x_kv: Var,
    w: AttnVars,
    heads: usize,
    allowed: Option<&Array2<bool>>,
) -> Var {
    let q = t.matmul(x_q, w.w_q);
    let k = t.matmul(x_kv, w.w_k);
    let v = t.matmul(x_kv, w.w_v);
    let d_k = t.value(q).ncols() / heads;
    let d_v = t.value(v).ncols() / heads;
    let outs: Vec<Var> = (0..heads)
        .map(|h| {
            let qh = t.slice_cols(q, h * d_k, (h + 1) * d_k);
            let kh = t.slice_cols(k, h * d_k, (h + 1) * d_k);
            let vh = t.slice_cols(v, h * d_v, (h + 1) * d_v);
            attention_on(t, qh, kh, vh, allowed)
        })
        .collect();
    let cat = if outs.len() == 1 {
        outs[0]
    } else {
        t.concat_cols(&outs)
    };
    t.matmul(cat, w.w_o)
}

#[derive(Debug, Clone, Copy)]
pub struct FfVars {
    pub w_1: Var,
    pub b_1: Var,
    pub w_2: Var,
    pub b_2: Var,
}

/// Position-wise `W_2 (W_1 z + b_1) + b_2`, optionally with a ReLU in between.
pub fn feed_forward_on(t: &mut Tape, z: Var, w: FfVars, relu: bool) -> Var {
    let h = t.matmul(z, w.w_1);
    let mut h = t.add_row(h, w.b_1);
    if relu {
        h = t.relu(h);
    }
    let o = t.matmul(h, w.w_2);
    t.add_row(o, w.b_2)
}

/// `LayerNorm(x + sublayer)`.
pub fn residual_norm_on(t: &mut Tape, x: Var, sub: Var, gain: Var, bias: Var) -> Var {
    let s = t.add(x, sub);
    t.layer_norm(s, gain, bias)
}

/// Convolution of a `(h*w) x c_in` feature map with a `(k*k*c_in) x c_out` kernel.
pub fn conv_on(t: &mut Tape, x: Var, geom: ConvGeom, w: Var, b: Var) -> Var {
    let cols = t.im2col(x, geom);
    let y = t.matmul(cols, w);
    t.add_row(y, b)
}

/// Sinusoidal encoding: `sin(pos / 10000^(2i/d))` on even columns, `cos` on odd.
pub fn positional_encoding(len: usize, d: usize) -> Array2<f64> {
    Array2::from_shape_fn((len, d), |(pos, col)| {
        let i = (col / 2) as f64;
        let angle = pos as f64 / 10000f64.powf(2.0 * i / d as f64);
        if col % 2 == 0 {
            angle.sin()
        } else {
            angle.cos()
        }
    })
}

/// Lower-triangular allow-mask: position `t` may attend to positions `<= t`.
pub fn causal_mask(len: usize) -> Array2<bool> {
    Array2::from_shape_fn((len, len), |(r, c)| c <= r)
}

fn check_mask(mask: Option<&Array2<bool>>, rows: usize, cols: usize) -> Result<()> {
    if let Some(m) = mask {
        if m.dim() != (rows, cols) {
            return Err(Error::shape(
                "attention mask",
                format!("expected {rows}x{cols}, got {:?}", m.dim()),
            ));
        }
        if let Some(r) = m.rows().into_iter().position(|row| !row.iter().any(|&b| b)) {
            return Err(Error::InvalidArgument(format!(
                "attention row {r} has every position masked"
            )));
        }
    }
    Ok(())
}

/// Scaled dot-product attention on plain matrices. `mask[i][j]` false blocks
/// query `i` from key `j`.
pub fn attention(
    q: &Array2<f64>,
    k: &Array2<f64>,
    v: &Array2<f64>,
    mask: Option<&Array2<bool>>,
) -> Result<Array2<f64>> {
    if q.ncols() != k.ncols() {
        return Err(Error::shape("attention", "Q and K widths differ"));
    }
    if k.nrows() != v.nrows() {
        return Err(Error::shape("attention", "K and V lengths differ"));
    }
    check_mask(mask, q.nrows(), k.nrows())?;
    let mut t = Tape::new();
    let (qv, kv, vv) = (t.constant(q.clone()), t.constant(k.clone()), t.constant(v.clone()));
    let out = attention_on(&mut t, qv, kv, vv, mask);
    Ok(t.value(out).clone())
}

/// Attention-weight matrix `softmax(Q K^T / sqrt(d_k))` with masking.
pub fn attention_weights(
    q: &Array2<f64>,
    k: &Array2<f64>,
    mask: Option<&Array2<bool>>,
) -> Result<Array2<f64>> {
    let n = k.nrows();
    attention(q, k, &Array2::eye(n), mask)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionWeights {
    pub w_q: Array2<f64>,
    pub w_k: Array2<f64>,
    pub w_v: Array2<f64>,
    pub w_o: Array2<f64>,
}

/// Multi-head self-attention on plain matrices; output has the shape of `x`.
pub fn multi_head(
    x: &Array2<f64>,
    w: &AttentionWeights,
    heads: usize,
    mask: Option<&Array2<bool>>,
) -> Result<Array2<f64>> {
    let d = x.ncols();
    let ok = heads > 0
        && w.w_q.nrows() == d
        && w.w_k.nrows() == d
        && w.w_v.nrows() == d
        && w.w_q.dim() == w.w_k.dim()
        && w.w_q.ncols() % heads == 0
        && w.w_v.ncols() % heads == 0
        && w.w_o.dim() == (w.w_v.ncols(), d);
    if !ok {
        return Err(Error::shape(
            "multi_head",
            format!(
                "x {:?}, w_q {:?}, w_k {:?}, w_v {:?}, w_o {:?}, heads {heads}",
                x.dim(),
                w.w_q.dim(),
                w.w_k.dim(),
                w.w_v.dim(),
                w.w_o.dim()
            ),
        ));
    }
    check_mask(mask, x.nrows(), x.nrows())?;
    let mut t = Tape::new();
    let xv = t.constant(x.clone());
    let vars = AttnVars {
        w_q: t.constant(w.w_q.clone()),
        w_k: t.constant(w.w_k.clone()),
        w_v: t.constant(w.w_v.clone()),
        w_o: t.constant(w.w_o.clone()),
    };
    let out = multi_head_on(&mut t, xv, xv, vars, heads, mask);
    Ok(t.value(out).clone())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeedForwardWeights {
    pub w_1: Array2<f64>,
    pub b_1: Array2<f64>,
    pub w_2: Array2<f64>,
    pub b_2: Array2<f64>,
}

pub fn feed_forward(z: &Array2<f64>, w: &FeedForwardWeights, relu: bool) -> Result<Array2<f64>> {
    let d = z.ncols();
    let hidden = w.w_1.ncols();
    if w.w_1.nrows() != d
        || w.b_1.dim() != (1, hidden)
        || w.w_2.dim() != (hidden, d)
        || w.b_2.dim() != (1, d)
    {
        return Err(Error::shape("feed_forward", "weight shapes do not match input width"));
    }
    let mut t = Tape::new();
    let zv = t.constant(z.clone());
    let vars = FfVars {
        w_1: t.constant(w.w_1.clone()),
        b_1: t.constant(w.b_1.clone()),
        w_2: t.constant(w.w_2.clone()),
        b_2: t.constant(w.b_2.clone()),
    };
    let out = feed_forward_on(&mut t, zv, vars, relu);
    Ok(t.value(out).clone())
}

pub fn layer_norm(x: &Array2<f64>, gain: &Array2<f64>, bias: &Array2<f64>) -> Result<Array2<f64>> {
    if gain.dim() != (1, x.ncols()) || bias.dim() != (1, x.ncols()) {
        return Err(Error::shape("layer_norm", "gain/bias must be 1 x width"));
    }
    let mut t = Tape::new();
    let (xv, g, b) = (t.constant(x.clone()), t.constant(gain.clone()), t.constant(bias.clone()));
    let out = t.layer_norm(xv, g, b);
    Ok(t.value(out).clone())
}

/// Convolution on a `height x width` feature map stored as `(h*w) x c_in`.
pub fn conv2d(
    x: &Array2<f64>,
    height: usize,
    width: usize,
    kernel: &Array2<f64>,
    bias: &Array2<f64>,
    size: usize,
    stride: usize,
    pad: usize,
) -> Result<Array2<f64>> {
    let geom = ConvGeom {
        in_h: height,
        in_w: width,
        channels: x.ncols(),
        kernel: size,
        stride,
        pad,
    };
    if x.nrows() != height * width
        || kernel.nrows() != geom.patch_len()
        || bias.dim() != (1, kernel.ncols())
        || size == 0
        || stride == 0
        || height + 2 * pad < size
        || width + 2 * pad < size
    {
        return Err(Error::shape("conv2d", "input, kernel or geometry inconsistent"));
    }
    let mut t = Tape::new();
    let (xv, kv, bv) = (t.constant(x.clone()), t.constant(kernel.clone()), t.constant(bias.clone()));
    let out = conv_on(&mut t, xv, geom, kv, bv);
    Ok(t.value(out).clone())
}

fn pool(x: &Array2<f64>, height: usize, width: usize, window: usize, max: bool) -> Result<Array2<f64>> {
    if x.nrows() != height * width || window == 0 || height % window != 0 || width % window != 0 {
        return Err(Error::shape("pool", "map size must be a multiple of the window"));
    }
    let geom = PoolGeom {
        in_h: height,
        in_w: width,
        window,
    };
    let mut t = Tape::new();
    let xv = t.constant(x.clone());
    let out = if max { t.max_pool(xv, geom) } else { t.avg_pool(xv, geom) };
    Ok(t.value(out).clone())
}

pub fn max_pool(x: &Array2<f64>, height: usize, width: usize, window: usize) -> Result<Array2<f64>> {
    pool(x, height, width, window, true)
}

pub fn avg_pool(x: &Array2<f64>, height: usize, width: usize, window: usize) -> Result<Array2<f64>> {
    pool(x, height, width, window, false)
}
