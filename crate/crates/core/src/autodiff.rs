//! Reverse-mode automatic differentiation over 2-D `f64` matrices.
//!
//! A [`Tape`] records every operation of a forward pass; [`Tape::backward`]
//! walks it in reverse and returns gradients for every recorded node. Feature
//! maps are stored as `(height*width) x channels` matrices in raster order, so
//! convolution is an im2col gather followed by a matrix product.

use ndarray::{s, Array2, Axis, Zip};

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Spatial geometry of a square-kernel convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvGeom {
    pub in_h: usize,
    pub in_w: usize,
    pub channels: usize,
    pub kernel: usize,
    pub stride: usize,
    pub pad: usize,
}

impl ConvGeom {
    pub fn out_h(&self) -> usize {
        (self.in_h + 2 * self.pad - self.kernel) / self.stride + 1
    }

    pub fn out_w(&self) -> usize {
        (self.in_w + 2 * self.pad - self.kernel) / self.stride + 1
    }

    pub fn patch_len(&self) -> usize {
        self.kernel * self.kernel * self.channels
    }

    /// For each output row and patch column, the source input row (if not padding).
    fn for_each_tap(&self, mut f: impl FnMut(usize, usize, usize)) {
        let (oh, ow, k, c) = (self.out_h(), self.out_w(), self.kernel, self.channels);
        for oy in 0..oh {
            for ox in 0..ow {
                let row = oy * ow + ox;
                for ky in 0..k {
                    let iy = (oy * self.stride + ky) as isize - self.pad as isize;
                    if iy < 0 || iy >= self.in_h as isize {
                        continue;
                    }
                    for kx in 0..k {
                        let ix = (ox * self.stride + kx) as isize - self.pad as isize;
                        if ix < 0 || ix >= self.in_w as isize {
                            continue;
                        }
                        let src = iy as usize * self.in_w + ix as usize;
                        f(row, (ky * k + kx) * c, src);
                    }
                }
            }
        }
    }
}

/// Non-overlapping square pooling window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoolGeom {
    pub in_h: usize,
    pub in_w: usize,
    pub window: usize,
}

impl PoolGeom {
    pub fn out_h(&self) -> usize {
        self.in_h / self.window
    }

    pub fn out_w(&self) -> usize {
        self.in_w / self.window
    }

    fn cells(&self, oy: usize, ox: usize) -> impl Iterator<Item = usize> + '_ {
        let w = self.window;
        (0..w).flat_map(move |dy| (0..w).map(move |dx| (oy * w + dy) * self.in_w + ox * w + dx))
    }
}

enum Op {
    Leaf,
    Param(usize),
    MatMul(Var, Var),
    MatMulT(Var, Var),
    Add(Var, Var),
    AddRow(Var, Var),
    Scale(Var, f64),
    Relu(Var),
    Softmax(Var),
    LayerNorm {
        x: Var,
        gain: Var,
        bias: Var,
        xhat: Array2<f64>,
        inv_std: Vec<f64>,
    },
    ConcatCols(Vec<Var>),
    SliceCols(Var, usize),
    Gather(Var, Vec<usize>),
    Im2Col(Var, ConvGeom),
    MaxPool(Var, Vec<usize>),
    AvgPool(Var, PoolGeom),
    KlDiv {
        logits: Var,
        target: Array2<f64>,
        weights: Vec<f64>,
        probs: Array2<f64>,
    },
}

struct Node {
    value: Array2<f64>,
    op: Op,
}

pub const LAYER_NORM_EPS: f64 = 1e-5;

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Array2<f64>, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Array2<f64> {
        &self.nodes[v.0].value
    }

    pub fn constant(&mut self, value: Array2<f64>) -> Var {
        self.push(value, Op::Leaf)
    }

    /// Leaf whose gradient is reported under parameter index `id`.
    pub fn param(&mut self, id: usize, value: Array2<f64>) -> Var {
        self.push(value, Op::Param(id))
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a).dot(self.value(b));
        self.push(v, Op::MatMul(a, b))
    }

    /// `a * b^T`.
    pub fn matmul_t(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a).dot(&self.value(b).t());
        self.push(v, Op::MatMulT(a, b))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a) + self.value(b);
        self.push(v, Op::Add(a, b))
    }

    /// Adds the `1 x c` row `b` to every row of `a`.
    pub fn add_row(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a) + self.value(b);
        self.push(v, Op::AddRow(a, b))
    }

    pub fn scale(&mut self, a: Var, k: f64) -> Var {
        let v = self.value(a) * k;
        self.push(v, Op::Scale(a, k))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let v = self.value(a).mapv(|x| x.max(0.0));
        self.push(v, Op::Relu(a))
    }

    /// Row softmax. Entries where `allowed` is false get exactly zero weight.
    /// Every row must have at least one allowed entry.
    pub fn softmax(&mut self, a: Var, allowed: Option<&Array2<bool>>) -> Var {
        let v = softmax_rows(self.value(a), allowed);
        self.push(v, Op::Softmax(a))
    }

    /// Row layer normalization followed by `gain` and `bias` (both `1 x c`).
    pub fn layer_norm(&mut self, x: Var, gain: Var, bias: Var) -> Var {
        let (xhat, inv_std) = normalize_rows(self.value(x));
        let v = &xhat * self.value(gain) + self.value(bias);
        self.push(
            v,
            Op::LayerNorm {
                x,
                gain,
                bias,
                xhat,
                inv_std,
            },
        )
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Var {
        let views: Vec<_> = parts.iter().map(|p| self.value(*p).view()).collect();
        let v = ndarray::concatenate(Axis(1), &views).expect("row counts agree");
        self.push(v, Op::ConcatCols(parts.to_vec()))
    }

    /// Columns `start..end`.
    pub fn slice_cols(&mut self, a: Var, start: usize, end: usize) -> Var {
        let v = self.value(a).slice(s![.., start..end]).to_owned();
        self.push(v, Op::SliceCols(a, start))
    }

    /// Rows of `table` selected by `ids`.
    pub fn gather(&mut self, table: Var, ids: &[usize]) -> Var {
        let t = self.value(table);
        let v = Array2::from_shape_fn((ids.len(), t.ncols()), |(r, c)| t[[ids[r], c]]);
        self.push(v, Op::Gather(table, ids.to_vec()))
    }

    pub fn im2col(&mut self, x: Var, geom: ConvGeom) -> Var {
        let input = self.value(x);
        assert_eq!(input.dim(), (geom.in_h * geom.in_w, geom.channels), "im2col input shape");
        let mut out = Array2::zeros((geom.out_h() * geom.out_w(), geom.patch_len()));
        let c = geom.channels;
        geom.for_each_tap(|row, col, src| {
            out.slice_mut(s![row, col..col + c])
                .assign(&input.slice(s![src, ..]));
        });
        self.push(out, Op::Im2Col(x, geom))
    }

    pub fn max_pool(&mut self, x: Var, geom: PoolGeom) -> Var {
        let input = self.value(x);
        let c = input.ncols();
        let (oh, ow) = (geom.out_h(), geom.out_w());
        let mut out = Array2::zeros((oh * ow, c));
        let mut argmax = vec![0usize; oh * ow * c];
        for oy in 0..oh {
            for ox in 0..ow {
                let row = oy * ow + ox;
                for ch in 0..c {
                    let mut best = f64::NEG_INFINITY;
                    let mut at = 0;
                    for src in geom.cells(oy, ox) {
                        let v = input[[src, ch]];
                        if v > best {
                            best = v;
                            at = src;
                        }
                    }
                    out[[row, ch]] = best;
                    argmax[row * c + ch] = at;
                }
            }
        }
        self.push(out, Op::MaxPool(x, argmax))
    }

    pub fn avg_pool(&mut self, x: Var, geom: PoolGeom) -> Var {
        let input = self.value(x);
        let c = input.ncols();
        let (oh, ow) = (geom.out_h(), geom.out_w());
        let norm = 1.0 / (geom.window * geom.window) as f64;
        let mut out = Array2::zeros((oh * ow, c));
        for oy in 0..oh {
            for ox in 0..ow {
                let row = oy * ow + ox;
                for src in geom.cells(oy, ox) {
                    let mut o = out.row_mut(row);
                    o.scaled_add(norm, &input.row(src));
                }
            }
        }
        self.push(out, Op::AvgPool(x, geom))
    }

    /// `sum_r weights[r] * KL(target_r || softmax(logits_r))` as a `1 x 1` node.
    pub fn kl_div(&mut self, logits: Var, target: Array2<f64>, weights: Vec<f64>) -> Var {
        let z = self.value(logits);
        assert_eq!(z.dim(), target.dim(), "kl_div target shape");
        assert_eq!(z.nrows(), weights.len(), "kl_div weights length");
        let probs = softmax_rows(z, None);
        let mut total = 0.0;
        for (r, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let row = z.row(r);
            let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
            let mut acc = 0.0;
            for (&p, &zj) in target.row(r).iter().zip(row.iter()) {
                if p > 0.0 {
                    acc += p * (p.ln() - (zj - lse));
                }
            }
            total += w * acc;
        }
        let v = Array2::from_elem((1, 1), total);
        self.push(
            v,
            Op::KlDiv {
                logits,
                target,
                weights,
                probs,
            },
        )
    }

    /// Gradients of the scalar node `root` with respect to every node.
    pub fn backward(&self, root: Var) -> Gradients {
        assert_eq!(self.value(root).dim(), (1, 1), "backward needs a scalar root");
        let mut grads: Vec<Option<Array2<f64>>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[root.0] = Some(Array2::from_elem((1, 1), 1.0));

        for i in (0..=root.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            let node = &self.nodes[i];
            match &node.op {
                Op::Leaf | Op::Param(_) => {
                    grads[i] = Some(g);
                    continue;
                }
                Op::MatMul(a, b) => {
                    let da = g.dot(&self.value(*b).t());
                    let db = self.value(*a).t().dot(&g);
                    accumulate(&mut grads, *a, da);
                    accumulate(&mut grads, *b, db);
                }
                Op::MatMulT(a, b) => {
                    let da = g.dot(self.value(*b));
                    let db = g.t().dot(self.value(*a));
                    accumulate(&mut grads, *a, da);
                    accumulate(&mut grads, *b, db);
                }
                Op::Add(a, b) => {
                    accumulate(&mut grads, *b, g.clone());
                    accumulate(&mut grads, *a, g);
                }
                Op::AddRow(a, b) => {
                    let db = g.sum_axis(Axis(0)).insert_axis(Axis(0));
                    accumulate(&mut grads, *b, db);
                    accumulate(&mut grads, *a, g);
                }
                Op::Scale(a, k) => accumulate(&mut grads, *a, g * *k),
                Op::Relu(a) => {
                    let mut d = g;
                    Zip::from(&mut d)
                        .and(self.value(*a))
                        .for_each(|d, &x| if x <= 0.0 { *d = 0.0 });
                    accumulate(&mut grads, *a, d);
                }
                Op::Softmax(a) => {
                    let y = &node.value;
                    let mut d = &g * y;
                    let sums = d.sum_axis(Axis(1));
                    Zip::from(d.rows_mut())
                        .and(y.rows())
                        .and(&sums)
                        .for_each(|mut dr, yr, &s| dr.scaled_add(-s, &yr));
                    accumulate(&mut grads, *a, d);
                }
                Op::LayerNorm {
                    x,
                    gain,
                    bias,
                    xhat,
                    inv_std,
                } => {
                    let dgain = (&g * xhat).sum_axis(Axis(0)).insert_axis(Axis(0));
                    let dbias = g.sum_axis(Axis(0)).insert_axis(Axis(0));
                    let dxhat = &g * self.value(*gain);
                    let n = xhat.ncols() as f64;
                    let mut dx = Array2::zeros(xhat.dim());
                    for r in 0..xhat.nrows() {
                        let dh = dxhat.row(r);
                        let h = xhat.row(r);
                        let mean_dh = dh.sum() / n;
                        let mean_dh_h = dh.dot(&h) / n;
                        let mut out = dx.row_mut(r);
                        Zip::from(&mut out)
                            .and(&dh)
                            .and(&h)
                            .for_each(|o, &a, &b| *o = inv_std[r] * (a - mean_dh - b * mean_dh_h));
                    }
                    accumulate(&mut grads, *gain, dgain);
                    accumulate(&mut grads, *bias, dbias);
                    accumulate(&mut grads, *x, dx);
                }
                Op::ConcatCols(parts) => {
                    let mut start = 0;
                    for p in parts {
                        let w = self.value(*p).ncols();
                        accumulate(&mut grads, *p, g.slice(s![.., start..start + w]).to_owned());
                        start += w;
                    }
                }
                Op::SliceCols(a, start) => {
                    let mut d = Array2::zeros(self.value(*a).dim());
                    let end = start + g.ncols();
                    d.slice_mut(s![.., *start..end]).assign(&g);
                    accumulate(&mut grads, *a, d);
                }
                Op::Gather(table, ids) => {
                    let mut d = Array2::zeros(self.value(*table).dim());
                    for (r, &id) in ids.iter().enumerate() {
                        let mut row = d.row_mut(id);
                        row += &g.row(r);
                    }
                    accumulate(&mut grads, *table, d);
                }
                Op::Im2Col(x, geom) => {
                    let mut d = Array2::zeros(self.value(*x).dim());
                    let c = geom.channels;
                    geom.for_each_tap(|row, col, src| {
                        let mut target = d.row_mut(src);
                        target += &g.slice(s![row, col..col + c]);
                    });
                    accumulate(&mut grads, *x, d);
                }
                Op::MaxPool(x, argmax) => {
                    let mut d = Array2::zeros(self.value(*x).dim());
                    let c = g.ncols();
                    for ((row, ch), &gv) in g.indexed_iter() {
                        d[[argmax[row * c + ch], ch]] += gv;
                    }
                    accumulate(&mut grads, *x, d);
                }
                Op::AvgPool(x, geom) => {
                    let mut d = Array2::zeros(self.value(*x).dim());
                    let norm = 1.0 / (geom.window * geom.window) as f64;
                    let ow = geom.out_w();
                    for oy in 0..geom.out_h() {
                        for ox in 0..ow {
                            let gr = g.row(oy * ow + ox);
                            for src in geom.cells(oy, ox) {
                                d.row_mut(src).scaled_add(norm, &gr);
                            }
                        }
                    }
                    accumulate(&mut grads, *x, d);
                }
                Op::KlDiv {
                    logits,
                    target,
                    weights,
                    probs,
                } => {
                    let scale = g[[0, 0]];
                    let mut d = Array2::zeros(probs.dim());
                    for (r, &w) in weights.iter().enumerate() {
                        if w == 0.0 {
                            continue;
                        }
                        let mass = target.row(r).sum();
                        let mut out = d.row_mut(r);
                        Zip::from(&mut out)
                            .and(&probs.row(r))
                            .and(&target.row(r))
                            .for_each(|o, &q, &p| *o = scale * w * (q * mass - p));
                    }
                    accumulate(&mut grads, *logits, d);
                }
            }
        }
        Gradients {
            grads,
            param_ids: self
                .nodes
                .iter()
                .enumerate()
                .filter_map(|(i, n)| match n.op {
                    Op::Param(id) => Some((i, id)),
                    _ => None,
                })
                .collect(),
        }
    }
}

fn accumulate(grads: &mut [Option<Array2<f64>>], v: Var, d: Array2<f64>) {
    match &mut grads[v.0] {
        Some(existing) => *existing += &d,
        slot => *slot = Some(d),
    }
}

/// Per-node gradients produced by [`Tape::backward`].
pub struct Gradients {
    grads: Vec<Option<Array2<f64>>>,
    param_ids: Vec<(usize, usize)>,
}

impl Gradients {
    /// Sums gradients of every parameter leaf into `out[id]`.
    pub fn accumulate_params(&self, out: &mut [Array2<f64>]) {
        for &(node, id) in &self.param_ids {
            if let Some(g) = &self.grads[node] {
                out[id] += g;
            }
        }
    }
}

/// Row softmax with optional allow-mask; disallowed entries are exactly zero.
pub fn softmax_rows(x: &Array2<f64>, allowed: Option<&Array2<bool>>) -> Array2<f64> {
    let mut out = Array2::zeros(x.dim());
    for r in 0..x.nrows() {
        let row = x.row(r);
        let ok = |c: usize| allowed.map_or(true, |m| m[[r, c]]);
        let max = (0..row.len())
            .filter(|&c| ok(c))
            .fold(f64::NEG_INFINITY, |m, c| m.max(row[c]));
        let mut sum = 0.0;
        for c in 0..row.len() {
            if ok(c) {
                let e = (row[c] - max).exp();
                out[[r, c]] = e;
                sum += e;
            }
        }
        out.row_mut(r).mapv_inplace(|v| v / sum);
    }
    out
}

fn normalize_rows(x: &Array2<f64>) -> (Array2<f64>, Vec<f64>) {
    let n = x.ncols() as f64;
    let mut xhat = x.clone();
    let mut inv_std = Vec::with_capacity(x.nrows());
    for mut row in xhat.rows_mut() {
        let mean = row.sum() / n;
        let var = row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let inv = 1.0 / (var + LAYER_NORM_EPS).sqrt();
        row.mapv_inplace(|v| (v - mean) * inv);
        inv_std.push(inv);
    }
    (xhat, inv_std)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    /// Central differences of `f` with respect to every entry of `x`.
    fn numeric_grad(x: &Array2<f64>, f: impl Fn(&Array2<f64>) -> f64) -> Array2<f64> {
        let h = 1e-6;
        let mut out = Array2::zeros(x.dim());
        for idx in 0..x.len() {
            let (r, c) = (idx / x.ncols(), idx % x.ncols());
            let mut p = x.clone();
            p[[r, c]] += h;
            let mut m = x.clone();
            m[[r, c]] -= h;
            out[[r, c]] = (f(&p) - f(&m)) / (2.0 * h);
        }
        out
    }

    fn analytic(x: &Array2<f64>, build: impl Fn(&mut Tape, Var) -> Var) -> Array2<f64> {
        let mut t = Tape::new();
        let xv = t.param(0, x.clone());
        let out = build(&mut t, xv);
        let g = t.backward(out);
        let mut acc = vec![Array2::zeros(x.dim())];
        g.accumulate_params(&mut acc);
        acc.pop().unwrap()
    }

    fn forward(x: &Array2<f64>, build: &impl Fn(&mut Tape, Var) -> Var) -> f64 {
        let mut t = Tape::new();
        let xv = t.constant(x.clone());
        let out = build(&mut t, xv);
        t.value(out)[[0, 0]]
    }

    fn check(x: Array2<f64>, build: impl Fn(&mut Tape, Var) -> Var) {
        let a = analytic(&x, &build);
        let n = numeric_grad(&x, |p| forward(p, &build));
        for (av, nv) in a.iter().zip(n.iter()) {
            assert!((av - nv).abs() < 1e-6 * (1.0 + nv.abs()), "analytic {av} numeric {nv}");
        }
    }

    fn mixed(rows: usize, cols: usize) -> Array2<f64> {
        Array2::from_shape_fn((rows, cols), |(r, c)| ((r * 7 + c * 3) as f64 * 0.37).sin() + 0.1 * c as f64 + 0.013)
    }

    /// Reduces any matrix to a scalar with fixed non-uniform weights.
    fn reduce(t: &mut Tape, v: Var) -> Var {
        let (r, c) = t.value(v).dim();
        let w = t.constant(mixed(c, 1));
        let proj = t.matmul(v, w);
        let ones = t.constant(Array2::from_shape_fn((1, r), |(_, i)| 1.0 + i as f64 * 0.1));
        t.matmul(ones, proj)
    }

    #[test]
    fn matmul_and_transpose_grads() {
        let b = mixed(4, 3);
        check(mixed(2, 4), |t, x| {
            let bv = t.constant(b.clone());
            let y = t.matmul(x, bv);
            reduce(t, y)
        });
        check(mixed(2, 4), |t, x| {
            let bv = t.constant(mixed(5, 4));
            let y = t.matmul_t(x, bv);
            let z = t.matmul_t(bv, x);
            let zt = t.matmul(y, z);
            reduce(t, zt)
        });
    }

    #[test]
    fn softmax_and_layer_norm_grads() {
        let mask = array![[true, false, true], [true, true, true]];
        check(mixed(2, 3), |t, x| {
            let y = t.softmax(x, Some(&mask));
            reduce(t, y)
        });
        check(mixed(3, 5), |t, x| {
            let gain = t.constant(mixed(1, 5));
            let bias = t.constant(mixed(1, 5));
            let y = t.layer_norm(x, gain, bias);
            reduce(t, y)
        });
        // gain/bias directions
        check(mixed(1, 4), |t, g| {
            let x = t.constant(mixed(3, 4));
            let y = t.layer_norm(x, g, g);
            reduce(t, y)
        });
    }

    #[test]
    fn structural_op_grads() {
        check(mixed(3, 4), |t, x| {
            let a = t.slice_cols(x, 1, 3);
            reduce(t, a)
        });
        check(mixed(3, 4), |t, x| {
            let b = t.relu(x);
            let c = t.concat_cols(&[x, b]);
            reduce(t, c)
        });
        check(mixed(3, 4), |t, x| {
            let a = t.slice_cols(x, 1, 3);
            let b = t.relu(x);
            let c = t.concat_cols(&[a, b]);
            let d = t.scale(c, 0.7);
            reduce(t, d)
        });
        check(mixed(5, 3), |t, table| {
            let g = t.gather(table, &[4, 0, 4, 2]);
            reduce(t, g)
        });
        check(mixed(1, 3), |t, row| {
            let x = t.constant(mixed(4, 3));
            let y = t.add_row(x, row);
            let z = t.add(y, y);
            reduce(t, z)
        });
    }

    #[test]
    fn conv_and_pool_grads() {
        let geom = ConvGeom {
            in_h: 5,
            in_w: 4,
            channels: 2,
            kernel: 3,
            stride: 2,
            pad: 1,
        };
        check(mixed(20, 2), |t, x| {
            let cols = t.im2col(x, geom);
            reduce(t, cols)
        });
        let pool = PoolGeom {
            in_h: 4,
            in_w: 4,
            window: 2,
        };
        check(mixed(16, 3), |t, x| {
            let p = t.max_pool(x, pool);
            reduce(t, p)
        });
        check(mixed(16, 3), |t, x| {
            let p = t.avg_pool(x, pool);
            reduce(t, p)
        });
    }

    #[test]
    fn kl_div_grad() {
        let target = array![[0.9, 0.05, 0.05], [0.0, 1.0, 0.0], [0.2, 0.3, 0.5]];
        check(mixed(3, 3), |t, z| t.kl_div(z, target.clone(), vec![0.5, 0.0, 0.25]));
    }

    #[test]
    fn im2col_layout() {
        // 1-channel 3x3 input, 2x2 kernel stride 1: first patch is the top-left block
        let x = Array2::from_shape_fn((9, 1), |(i, _)| i as f64);
        let mut t = Tape::new();
        let xv = t.constant(x);
        let cols = t.im2col(
            xv,
            ConvGeom {
                in_h: 3,
                in_w: 3,
                channels: 1,
                kernel: 2,
                stride: 1,
                pad: 0,
            },
        );
        let v = t.value(cols);
        assert_eq!(v.dim(), (4, 4));
        assert_eq!(v.row(0).to_vec(), vec![0.0, 1.0, 3.0, 4.0]);
        assert_eq!(v.row(3).to_vec(), vec![4.0, 5.0, 7.0, 8.0]);
    }
}
