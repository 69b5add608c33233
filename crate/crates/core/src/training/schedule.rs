use crate::error::{Error, Result};

/// The two arguments of the schedule's `min`, both scaled by `d_model^-0.5`:
/// `(step^-0.5, step * warmup^-1.5)`.
///
/// The ramp is evaluated as `(step / warmup) * warmup^-0.5` so both branches
/// are bit-identical at `step == warmup`.
pub fn lr_branches(step: u64, d_model: usize, warmup: u64) -> Result<(f64, f64)> {
    if step == 0 {
        return Err(Error::InvalidArgument("learning-rate steps are 1-based".into()));
    }
    if warmup == 0 || d_model == 0 {
        return Err(Error::InvalidArgument("warmup and d_model must be positive".into()));
    }
    let scale = (d_model as f64).powf(-0.5);
    let (s, w) = (step as f64, warmup as f64);
    Ok((scale * s.powf(-0.5), scale * ((s / w) * w.powf(-0.5))))
}

/// Warmup-then-inverse-square-root learning rate:
/// `d_model^-0.5 * min(step^-0.5, step * warmup^-1.5)`. Steps start at 1.
pub fn lr_at(step: u64, d_model: usize, warmup: u64) -> Result<f64> {
    let (decay, ramp) = lr_branches(step, d_model, warmup)?;
    Ok(decay.min(ramp))
}
