//! Recovering the moments of a 2-cycle from its weights alone.
//!
//! On a 2-cycle `m_t = m_{t+2}`, so the first-moment recursion gives
//! `m_{t+1} = β₁m_t + (1 − β₁)g_t` and `m_t = β₁m_{t+1} + (1 − β₁)g_{t+1}`,
//! a 2×2 system with determinant `1 − β₁² ≠ 0`. The same holds for `v` with
//! `β₂` and squared gradients.

use crate::dynamics::QuadraticObjective;
use crate::error::{Error, Result};

/// Moments at the two cycle points, index-aligned with the weights passed in.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredMoments {
    pub m: [Vec<f64>; 2],
    pub v: [Vec<f64>; 2],
}

/// Solves for `(m, v)` at both points of a 2-cycle with weights `w[0]`,
/// `w[1]` where `T̄` maps the first point to the second.
pub fn recover_moments(
    w: [&[f64]; 2],
    beta1: f64,
    beta2: f64,
    obj: &QuadraticObjective,
) -> Result<RecoveredMoments> {
    for b in [beta1, beta2] {
        if !(b > 0.0 && b < 1.0) {
            return Err(Error::InvalidHyperParams(format!("decay rate {b} outside (0, 1)")));
        }
    }
    let g0 = obj.gradient(w[0])?;
    let g1 = obj.gradient(w[1])?;
    let solve = |beta: f64, a: &[f64], b: &[f64]| -> [Vec<f64>; 2] {
        let first: Vec<f64> = a.iter().zip(b).map(|(a, b)| (beta * a + b) / (1.0 + beta)).collect();
        let second = first.iter().zip(a).map(|(x, a)| beta * x + (1.0 - beta) * a).collect();
        [first, second]
    };
    let sq = |g: &[f64]| g.iter().map(|x| x * x).collect::<Vec<_>>();
    Ok(RecoveredMoments {
        m: solve(beta1, &g0, &g1),
        v: solve(beta2, &sq(&g0), &sq(&g1)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycle::closed_form_two_cycle;

    #[test]
    fn closed_form_moments_are_recovered() {
        let cyc = closed_form_two_cycle(0.5, 0.2, 1.0).unwrap();
        let obj = QuadraticObjective::scalar(1.0).unwrap();
        let rec = recover_moments([&cyc.x1.w, &cyc.x2.w], 0.2, 0.5, &obj).unwrap();
        assert!((rec.m[0][0] - cyc.x1.m[0]).abs() < 1e-15);
        assert!((rec.m[1][0] - cyc.x2.m[0]).abs() < 1e-15);
        assert!((rec.v[0][0] - cyc.x1.v[0]).abs() < 1e-15);
        assert!((rec.v[1][0] - cyc.x2.v[0]).abs() < 1e-15);
    }
}
