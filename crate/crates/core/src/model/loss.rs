//! KL-divergence training objective.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Floor applied to predicted probabilities before taking logs.
pub const LOG_EPS: f64 = 1e-9;

/// Mean over unmasked rows of `sum_j p_j * ln(p_j / q_j)`.
///
/// `mask[r]` true means row `r` counts. Terms with `p_j = 0` contribute 0 and
/// `q_j` is floored at [`LOG_EPS`].
pub fn kl_loss(predicted: &Array2<f64>, reference: &Array2<f64>, mask: &[bool]) -> Result<f64> {
    if predicted.dim() != reference.dim() || mask.len() != predicted.nrows() {
        return Err(Error::shape(
            "kl_loss",
            format!(
                "predicted {:?}, reference {:?}, mask {}",
                predicted.dim(),
                reference.dim(),
                mask.len()
            ),
        ));
    }
    let rows: Vec<usize> = (0..mask.len()).filter(|&r| mask[r]).collect();
    if rows.is_empty() {
        return Err(Error::Empty("kl_loss: every position is masked".into()));
    }
    let total: f64 = rows
        .iter()
        .map(|&r| {
            predicted
                .row(r)
                .iter()
                .zip(reference.row(r).iter())
                .filter(|(_, &p)| p > 0.0)
                .map(|(&q, &p)| p * (p.ln() - q.max(LOG_EPS).ln()))
                .sum::<f64>()
        })
        .sum();
    Ok(total / rows.len() as f64)
}

/// Reference rows for `targets`: `1 - smoothing` on the target token and the
/// remainder spread evenly over the other tokens.
pub fn reference_distribution(targets: &[u32], vocab_size: usize, smoothing: f64) -> Array2<f64> {
    let off = if vocab_size > 1 {
        smoothing / (vocab_size - 1) as f64
    } else {
        0.0
    };
    let mut out = Array2::from_elem((targets.len(), vocab_size), off);
    for (r, &t) in targets.iter().enumerate() {
        out[[r, t as usize]] = 1.0 - smoothing;
    }
    out
}
