//! Independent reference implementations and fixtures shared by the
//! integration tests. Everything here favours obviousness over speed.

#![allow(dead_code)]

use labelforge_core::model::{CnnConfig, ModelConfig};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(String::from).collect()
}

/// Every contiguous n-gram, repeats included, in order.
fn all_ngrams(ws: &[String], n: usize) -> Vec<Vec<String>> {
    if n == 0 || ws.len() < n {
        return Vec::new();
    }
    (0..=ws.len() - n).map(|i| ws[i..i + n].to_vec()).collect()
}

fn occurrences(list: &[Vec<String>], g: &[String]) -> usize {
    list.iter().filter(|x| x.as_slice() == g).count()
}

fn distinct(list: &[Vec<String>]) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = Vec::new();
    for g in list {
        if !out.contains(g) {
            out.push(g.clone());
        }
    }
    out
}

pub fn bleu_oracle(pred: &[String], refs: &[Vec<String>], n: usize) -> f64 {
    if pred.is_empty() || refs.is_empty() {
        return 0.0;
    }
    let orders = n.min(pred.len());
    let mut product = 1.0;
    for k in 1..=orders {
        let cand = all_ngrams(pred, k);
        let ref_lists: Vec<Vec<Vec<String>>> = refs.iter().map(|r| all_ngrams(r, k)).collect();
        let mut clipped = 0;
        for g in distinct(&cand) {
            let max_ref = ref_lists.iter().map(|l| occurrences(l, &g)).max().unwrap();
            clipped += occurrences(&cand, &g).min(max_ref);
        }
        product *= clipped as f64 / cand.len() as f64;
    }
    if product == 0.0 {
        return 0.0;
    }
    let c = pred.len();
    let mut r = refs[0].len();
    for x in refs {
        let (d_new, d_old) = (x.len().abs_diff(c), r.abs_diff(c));
        if d_new < d_old || (d_new == d_old && x.len() < r) {
            r = x.len();
        }
    }
    let bp = if c > r { 1.0 } else { (1.0 - r as f64 / c as f64).exp() };
    bp * product.powf(1.0 / orders as f64)
}

fn is_subsequence(needle: &[&String], hay: &[String]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|w| it.any(|h| h == *w))
}

/// LCS by trying every subset of the shorter sequence.
pub fn lcs_oracle(a: &[String], b: &[String]) -> usize {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut best = 0;
    for mask in 0u32..(1 << short.len()) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        let pick: Vec<&String> = (0..short.len()).filter(|i| mask >> i & 1 == 1).map(|i| &short[i]).collect();
        if is_subsequence(&pick, long) {
            best = size;
        }
    }
    best
}

pub fn rouge_oracle(pred: &[String], refs: &[Vec<String>], beta: f64) -> f64 {
    let mut best = 0.0f64;
    for r in refs {
        let l = lcs_oracle(pred, r) as f64;
        if l == 0.0 {
            continue;
        }
        let (rec, prec) = (l / r.len() as f64, l / pred.len() as f64);
        best = best.max((1.0 + beta * beta) * rec * prec / (rec + beta * beta * prec));
    }
    best
}

pub fn meteor_oracle(pred: &[String], refs: &[Vec<String>]) -> f64 {
    let mut best = 0.0f64;
    for r in refs {
        let mut used = vec![false; r.len()];
        let mut pairs = Vec::new();
        for (i, w) in pred.iter().enumerate() {
            for j in 0..r.len() {
                if !used[j] && &r[j] == w {
                    used[j] = true;
                    pairs.push((i, j));
                    break;
                }
            }
        }
        let m = pairs.len();
        if m == 0 {
            continue;
        }
        let mut chunks = 0;
        for k in 0..m {
            if k == 0 || pairs[k].0 != pairs[k - 1].0 + 1 || pairs[k].1 != pairs[k - 1].1 + 1 {
                chunks += 1;
            }
        }
        let p = m as f64 / pred.len() as f64;
        let rc = m as f64 / r.len() as f64;
        let f = 10.0 * p * rc / (rc + 9.0 * p);
        let frag = chunks as f64 / m as f64;
        best = best.max(f * (1.0 - 0.5 * frag * frag * frag));
    }
    best
}

type Table = Vec<(Vec<String>, f64)>;

fn lookup(t: &Table, g: &[String]) -> f64 {
    t.iter().find(|(k, _)| k.as_slice() == g).map_or(0.0, |(_, v)| *v)
}

/// CIDEr-D per item (÷10) with explicit n-gram tables.
pub fn cider_oracle(preds: &[Vec<String>], refs: &[Vec<Vec<String>>], sigma: f64) -> Vec<f64> {
    let n_docs = preds.len() as f64;
    let doc_freq = |g: &[String]| -> f64 {
        refs.iter()
            .filter(|rs| rs.iter().any(|r| all_ngrams(r, g.len()).iter().any(|x| x.as_slice() == g)))
            .count() as f64
    };
    let vector = |ws: &[String], k: usize| -> Table {
        let grams = all_ngrams(ws, k);
        distinct(&grams)
            .into_iter()
            .map(|g| {
                let tf = occurrences(&grams, &g) as f64;
                let df = doc_freq(&g).max(1.0);
                let w = tf * (n_docs.ln() - df.ln());
                (g, w)
            })
            .collect()
    };
    let norm = |t: &Table| t.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
    preds
        .iter()
        .zip(refs)
        .map(|(p, rs)| {
            let orders = p.len().min(4);
            if orders == 0 {
                return 0.0;
            }
            let mut total = 0.0;
            for r in rs {
                let delta = p.len() as f64 - r.len() as f64;
                let penalty = (-delta * delta / (2.0 * sigma * sigma)).exp();
                let mut s = 0.0;
                for k in 1..=orders {
                    let (h, rv) = (vector(p, k), vector(r, k));
                    let (nh, nr) = (norm(&h), norm(&rv));
                    if nh == 0.0 || nr == 0.0 {
                        continue;
                    }
                    let dot: f64 = h.iter().map(|(g, hv)| hv.min(lookup(&rv, g)) * lookup(&rv, g)).sum();
                    s += dot / (nh * nr) * penalty;
                }
                total += 10.0 * s / orders as f64;
            }
            total / rs.len() as f64 / 10.0
        })
        .collect()
}

/// Tie-averaged ranks by direct counting.
pub fn ranks_oracle(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&v| {
            let less = x.iter().filter(|&&o| o < v).count() as f64;
            let equal = x.iter().filter(|&&o| o == v).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (sx, sy) = (x.iter().sum::<f64>(), y.iter().sum::<f64>());
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

pub fn spearman_oracle(x: &[f64], y: &[f64]) -> f64 {
    pearson(&ranks_oracle(x), &ranks_oracle(y))
}

/// A sentence of 0..=15 words over `w0..w19`, often a noisy copy of `base`.
pub fn random_sentence(rng: &mut ChaCha8Rng, base: Option<&[String]>) -> Vec<String> {
    if let Some(b) = base {
        if rng.gen_bool(0.6) {
            let mut out: Vec<String> = b.iter().filter(|_| rng.gen_bool(0.8)).cloned().collect();
            while out.len() < 15 && rng.gen_bool(0.3) {
                let pos = rng.gen_range(0..=out.len());
                out.insert(pos, format!("w{}", rng.gen_range(0..20)));
            }
            return out;
        }
    }
    let len = rng.gen_range(0..=15);
    (0..len).map(|_| format!("w{}", rng.gen_range(0..20))).collect()
}

/// Small model with an `res x res` input, `grid x grid` memory.
pub fn micro_config(vocab: usize, d_model: usize, heads: usize, layers: usize) -> ModelConfig {
    ModelConfig {
        encoder_layers: layers,
        decoder_layers: layers,
        d_model,
        d_k: d_model / heads,
        d_v: d_model / heads,
        d_ff: 2 * d_model,
        heads,
        vocab_size: vocab,
        input_resolution: 8,
        cnn: CnnConfig {
            stem_channels: 4,
            stem_pool: 2,
            stage_channels: vec![8],
            kernel: 3,
            residual: true,
        },
        ..ModelConfig::tiny(vocab)
    }
}

pub fn random_image(rng: &mut ChaCha8Rng, res: usize) -> ndarray::Array2<f64> {
    ndarray::Array2::from_shape_fn((res * res, 3), |_| rng.gen::<f64>())
}
