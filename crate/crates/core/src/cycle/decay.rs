use std::ops::Range;

use serde::Serialize;

use crate::dynamics::{theta, AdamState, HyperParams, QuadraticObjective};
use crate::error::{Error, Result};

/// Shortest step range accepted by [`theta_decay_bound`].
pub const MIN_DECAY_RANGE: u64 = 20;

/// Norms below this are treated as exact zeros.
const UNDERFLOW: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecayFit {
    /// `‖Θ(t, x)‖₂ ≈ c_fit · beta_fit^t`.
    Fitted { c_fit: f64, beta_fit: f64 },
    /// Θ vanished (or underflowed) over the whole range.
    Complete,
}

/// Least-squares fit of `log‖Θ(t, x)‖₂ = log C + t·log β` over `t_range`
/// with `x` held fixed.
pub fn theta_decay_bound(
    x: &AdamState,
    p: &HyperParams,
    obj: &QuadraticObjective,
    t_range: Range<u64>,
) -> Result<DecayFit> {
    if t_range.end.saturating_sub(t_range.start) < MIN_DECAY_RANGE {
        return Err(Error::InvalidArgument(format!(
            "step range {}..{} is shorter than {MIN_DECAY_RANGE}",
            t_range.start, t_range.end
        )));
    }
    let mut points = Vec::new();
    for t in t_range {
        let th = theta(t, x, p, obj)?;
        let norm = th.w.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > UNDERFLOW {
            points.push((t as f64, norm.ln()));
        }
    }
    if points.len() < 2 {
        return Ok(DecayFit::Complete);
    }
    let n = points.len() as f64;
    let mean_t = points.iter().map(|(t, _)| t).sum::<f64>() / n;
    let mean_y = points.iter().map(|(_, y)| y).sum::<f64>() / n;
    let (mut sty, mut stt) = (0.0, 0.0);
    for (t, y) in &points {
        sty += (t - mean_t) * (y - mean_y);
        stt += (t - mean_t) * (t - mean_t);
    }
    let slope = sty / stt;
    let intercept = mean_y - slope * mean_t;
    Ok(DecayFit::Fitted { c_fit: intercept.exp(), beta_fit: slope.exp() })
}
