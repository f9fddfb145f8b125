//! Closed-form 2-cycle of the autonomous map for `f(w) = ½cw²` at ε = 0,
//! the Jacobian of `T̄²` on it, and the determinant used to continue the
//! cycle to ε > 0.

use nalgebra::DMatrix;

use super::TwoCycle;
use crate::dynamics::{AdamState, HyperParams, QuadraticObjective};
use crate::error::Result;

/// Below this magnitude the denominator of `c_exception` counts as zero.
pub const C_EXCEPTION_DENOM_TOL: f64 = 1e-14;

/// β₂ used to evaluate the residual of [`closed_form_two_cycle`]; the cycle
/// itself does not depend on β₂.
pub const RESIDUAL_BETA2: f64 = 0.5;

/// `(m̃, ṽ, w̃)` for the scalar objective at ε = 0.
pub fn closed_form_point(alpha: f64, beta1: f64, c: f64) -> (f64, f64, f64) {
    let s = beta1 + 1.0;
    let d = beta1 - 1.0;
    let m = 0.5 * c * d * d * alpha / (s * s);
    let v = 0.25 * alpha * alpha * (beta1 * beta1 - 2.0 * beta1 + 1.0) * c * c / (s * s);
    let w = 0.5 * alpha * d / s;
    (m, v, w)
}

/// The ε = 0 2-cycle `x̃₁ = (m̃, ṽ, w̃)`, `x̃₂ = (−m̃, ṽ, −w̃)`.
///
/// The residual is `‖T̄²(x̃₁) − x̃₁‖∞` evaluated with β₂ = [`RESIDUAL_BETA2`];
/// use [`TwoCycle::verify`] for other β₂.
pub fn closed_form_two_cycle(alpha: f64, beta1: f64, c: f64) -> Result<TwoCycle> {
    let p = HyperParams::new(alpha, beta1, RESIDUAL_BETA2, 0.0)?;
    let obj = QuadraticObjective::scalar(c)?;
    let (m, v, w) = closed_form_point(alpha, beta1, c);
    let x1 = AdamState::scalar(m, v, w);
    let x2 = AdamState::scalar(-m, v, -w);
    let mut cycle = TwoCycle { x1, x2, residual: 0.0, epsilon: 0.0 };
    cycle.residual = cycle.verify(&p, &obj)?.0;
    Ok(cycle)
}

/// Jacobian of `T̄²` on the closed-form cycle, entry by entry from the
/// computer-algebra result.
///
/// These entries are the derivative at the cycle point with positive weight,
/// `(−m̃, ṽ, −w̃)`. At `(m̃, ṽ, w̃)` the Jacobian is `S·J·S` with
/// `S = diag(−1, 1, −1)`; see [`analytic_jacobian_t2_at_x1`]. Both have the
/// same spectrum.
pub fn analytic_jacobian_t2_scalar(alpha: f64, beta1: f64, beta2: f64, c: f64) -> DMatrix<f64> {
    let (a, b1, b2) = (alpha, beta1, beta2);
    let j11 = -(b1 + 2.0) * b1;
    let j12 = 2.0 * (b1 + 1.0) * b2 / (a * c);
    let j13 = c * (b1 - 1.0) * (b1 + 2.0 * b2 - 1.0);
    let j21 = -2.0 * (b2 - 1.0) * a * b1 * c;
    let j22 = 3.0 * b2 * b2 - 2.0 * b2;
    let j23 = 2.0 * c * c * (b1 - 1.0) * (b1 + 1.5 * b2 - 0.5) * (b2 - 1.0) * a / (b1 + 1.0);
    let j31 = 2.0 * b1 * (b1 + 1.0) * (1.0 - b1 - 2.0 * b2) / (c * (b1 - 1.0));
    let j32 = 2.0 * (2.0 * b1 + 3.0 * b2 - 1.0) * (b1 + 1.0) * b2 / (c * c * a * (b1 - 1.0));
    let j33 = 2.0 * b1 * b1 + (8.0 * b2 - 6.0) * b1 + 6.0 * b2 * b2 - 6.0 * b2 + 1.0;
    DMatrix::from_row_slice(3, 3, &[j11, j12, j13, j21, j22, j23, j31, j32, j33])
}

/// Jacobian of `T̄²` at `x̃₁ = (m̃, ṽ, w̃)`.
pub fn analytic_jacobian_t2_at_x1(alpha: f64, beta1: f64, beta2: f64, c: f64) -> DMatrix<f64> {
    let mut j = analytic_jacobian_t2_scalar(alpha, beta1, beta2, c);
    let sign = [-1.0, 1.0, -1.0];
    for r in 0..3 {
        for col in 0..3 {
            j[(r, col)] *= sign[r] * sign[col];
        }
    }
    j
}

/// Computer-algebra determinant of `∂F/∂x` at the cycle, with
/// `F(x, ε) = T̄²(x) − x`, as printed alongside the exceptional coefficient.
///
/// Note: this expression depends on `αc`, whereas `det(J − I)` of the
/// Jacobian above does not. The finite-difference determinant is available
/// from [`super::numeric_det_df`].
pub fn det_df(alpha: f64, beta1: f64, beta2: f64, c: f64) -> f64 {
    let (b1, b2) = (beta1, beta2);
    let ac = alpha * c;
    let lead = 4.0 * (b1 + b2) * (b2 - 1.0) * (b1 + 1.0);
    lead * final_factor(ac, b1, b2)
}

fn final_factor(ac: f64, b1: f64, b2: f64) -> f64 {
    2.0 + b1 * b1 * b1 * ac + (3.0 * b2 * ac - 2.0 * ac - 2.0 * b2) * b1 * b1 + 3.0 * (b2 - 1.0) * (ac - 2.0 * b2) * b1
}

/// Exceptional coefficient `ĉ(α, β₁, β₂)` at which the final factor of
/// [`det_df`] vanishes; `None` when the denominator is numerically zero.
pub fn c_exception(alpha: f64, beta1: f64, beta2: f64) -> Option<f64> {
    let (b1, b2) = (beta1, beta2);
    let denom = alpha * b1 * (b1 * b1 + 3.0 * b1 * b2 - 2.0 * b1 + 3.0 * b2 - 3.0);
    if denom.abs() < C_EXCEPTION_DENOM_TOL {
        return None;
    }
    Some(2.0 * (b1 * b1 * b2 + 3.0 * b1 * b2 * b2 - 3.0 * b1 * b2 - 1.0) / denom)
}

/// Whether `c` sits on the exceptional coefficient (relative 1e-12).
pub fn is_exceptional(alpha: f64, beta1: f64, beta2: f64, c: f64) -> Option<f64> {
    let c_hat = c_exception(alpha, beta1, beta2)?;
    ((c - c_hat).abs() <= 1e-12 * c_hat.abs().max(1.0)).then_some(c_hat)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn experiment_two_point() {
        let (m, v, w) = closed_form_point(0.5, 0.2, 1.0);
        // Exact rationals: m = 1/9, v = 1/36, w = -1/6.
        assert!((m - 1.0 / 9.0).abs() < 1e-16);
        assert!((v - 1.0 / 36.0).abs() < 1e-16);
        assert!((w + 1.0 / 6.0).abs() < 1e-16);
    }

    #[test]
    fn closed_form_is_a_genuine_cycle() {
        let cyc = closed_form_two_cycle(0.5, 0.2, 1.0).unwrap();
        assert!(cyc.residual < 1e-12);
        assert_eq!(cyc.x1.v, cyc.x2.v);
        assert!(cyc.x1.max_abs_diff(&cyc.x2) > 1e-10);
    }

    #[test]
    fn diagonal_entries_at_experiment_two() {
        let j = analytic_jacobian_t2_scalar(0.5, 0.2, 0.5, 1.0);
        assert!((j[(0, 0)] + 0.44).abs() < 1e-15);
        assert!((j[(1, 1)] + 0.25).abs() < 1e-15);
        // 2·0.04 + (4 - 6)·0.2 + 1.5 - 3 + 1
        assert!((j[(2, 2)] + 0.82).abs() < 1e-15);
    }

    #[test]
    fn leading_determinant_factor_is_negative() {
        for &b1 in &[0.01, 0.3, 0.7, 0.99] {
            for &b2 in &[0.01, 0.4, 0.999] {
                assert!(4.0 * (b1 + b2) * (b2 - 1.0) * (b1 + 1.0) < 0.0);
            }
        }
    }

    #[test]
    fn c_exception_experiment_two() {
        // 2(0.02 + 0.15 - 0.3 - 1) / (0.5·0.2·(0.04 + 0.3 - 0.4 + 1.5 - 3)) = 113/7.8
        let c_hat = c_exception(0.5, 0.2, 0.5).unwrap();
        assert!((c_hat - 14.487_179_487_179_487).abs() < 1e-12);
        assert!(det_df(0.5, 0.2, 0.5, c_hat).abs() < 1e-12);
    }

    #[test]
    fn c_exception_scales_inversely_with_alpha() {
        let a = c_exception(0.3, 0.4, 0.7).unwrap();
        let b = c_exception(0.6, 0.4, 0.7).unwrap();
        assert!((b - a / 2.0).abs() < 1e-14 * a.abs());
    }

    #[test]
    fn c_exception_undefined_on_zero_denominator() {
        // b1² + 3b1b2 - 2b1 + 3b2 - 3 = 0 at b1 = 0.5 → b2 = 3.75/4.5
        let b2 = 3.75 / 4.5;
        assert_eq!(c_exception(1.0, 0.5, b2), None);
    }
}
