//! Reduction of a centred quadratic to its eigen-directions.
//!
//! With `C = Qᵀ diag(μ) Q` and `y = Q w`, the gradient decouples into
//! `μᵢ yᵢ`, so in eigencoordinates each mode runs its own scalar map. Adam's
//! componentwise normalisation is tied to the coordinate axes, however, so
//! rotating a direct-sum cycle back with `Qᵀ` is only a cycle of the original
//! map when `Q` is a signed permutation. Both residuals are reported.

use nalgebra::DMatrix;

use crate::cycle::{
    analytic_jacobian_t2_at_x1, closed_form_two_cycle, is_exceptional, StabilityReport, TwoCycle,
};
use crate::dynamics::{iterate_autonomous, AdamState, HyperParams, QuadraticObjective};
use crate::error::{Error, Result};
use crate::linalg;

/// Orthogonal `Q` (eigenvectors as rows) and ascending `μ` with
/// `C = Qᵀ diag(μ) Q`.
pub fn diagonalize(obj: &QuadraticObjective) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let (q, mu) = linalg::jacobi_eigen(obj.matrix())?;
    if let Some(&bad) = mu.iter().find(|&&m| m <= 0.0) {
        return Err(Error::NotPositiveDefinite { eigenvalue: bad });
    }
    Ok((q, mu))
}

/// Maps an eigencoordinate state to original coordinates: `m`, `w` by `Qᵀ`
/// and `v` by `(Q∘Q)ᵀ`, reading `v` as the diagonal of a second-moment matrix.
pub fn to_original_coordinates(q: &DMatrix<f64>, y: &AdamState) -> AdamState {
    let n = y.dim();
    let rotate = |u: &[f64], square: bool| -> Vec<f64> {
        (0..n)
            .map(|i| (0..n).map(|k| if square { q[(k, i)] * q[(k, i)] } else { q[(k, i)] } * u[k]).sum())
            .collect()
    };
    AdamState { m: rotate(&y.m, false), v: rotate(&y.v, true), w: rotate(&y.w, false) }
}

/// Maps an original-coordinate state to eigencoordinates: `m`, `w` by `Q`
/// and `v` by `Q∘Q`. This inverts [`to_original_coordinates`] on `v` only
/// when `Q` is a signed permutation.
pub fn to_eigen_coordinates(q: &DMatrix<f64>, x: &AdamState) -> AdamState {
    let n = x.dim();
    let rotate = |u: &[f64], square: bool| -> Vec<f64> {
        (0..n)
            .map(|k| (0..n).map(|i| if square { q[(k, i)] * q[(k, i)] } else { q[(k, i)] } * u[i]).sum())
            .collect()
    };
    AdamState { m: rotate(&x.m, false), v: rotate(&x.v, true), w: rotate(&x.w, false) }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeCycle {
    pub mu: f64,
    pub cycle: TwoCycle,
    pub report: StabilityReport,
    /// `μ` coincides with the exceptional coefficient for these hyperparameters.
    pub exceptional: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeAnalysis {
    pub q: DMatrix<f64>,
    pub modes: Vec<ModeCycle>,
    /// Direct sum of the per-mode cycle points in eigencoordinates.
    pub eigen_state: AdamState,
    /// `‖T̄²(y) − y‖∞` under the objective `½ yᵀ diag(μ) y`.
    pub eigen_residual: f64,
    /// `eigen_state` mapped back with [`to_original_coordinates`].
    pub reconstructed: AdamState,
    /// `‖T̄²(x) − x‖∞` for `reconstructed` under the original objective.
    pub original_residual: f64,
}

/// Scalar closed-form 2-cycle and stability for every eigenvalue of a
/// centred quadratic, with the assembled multidimensional state.
///
/// The closed forms hold at ε = 0, so the hyperparameters are used with ε
/// set to zero whatever `p.epsilon` says.
pub fn per_mode_analysis(obj: &QuadraticObjective, p: &HyperParams) -> Result<ModeAnalysis> {
    if !obj.is_centered() {
        return Err(Error::InvalidObjective("mode analysis needs a centred quadratic (b = 0)".into()));
    }
    p.validate()?;
    let p0 = p.with_epsilon(0.0);
    let (q, mu) = diagonalize(obj)?;
    let n = mu.len();

    let mut modes = Vec::with_capacity(n);
    let mut eigen_state = AdamState::zeros(n);
    for (i, &c) in mu.iter().enumerate() {
        let cycle = closed_form_two_cycle(p.alpha, p.beta1, c)?;
        let report = StabilityReport::from_jacobian(analytic_jacobian_t2_at_x1(p.alpha, p.beta1, p.beta2, c))?;
        eigen_state.m[i] = cycle.x1.m[0];
        eigen_state.v[i] = cycle.x1.v[0];
        eigen_state.w[i] = cycle.x1.w[0];
        let exceptional = is_exceptional(p.alpha, p.beta1, p.beta2, c).is_some();
        modes.push(ModeCycle { mu: c, cycle, report, exceptional });
    }

    let diag = QuadraticObjective::centered(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(mu)))?;
    let eigen_residual = iterate_autonomous(&eigen_state, 2, &p0, &diag)?.max_abs_diff(&eigen_state);
    let reconstructed = to_original_coordinates(&q, &eigen_state);
    let original_residual = iterate_autonomous(&reconstructed, 2, &p0, obj)?.max_abs_diff(&reconstructed);

    Ok(ModeAnalysis { q, modes, eigen_state, eigen_residual, reconstructed, original_residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_c() -> QuadraticObjective {
        QuadraticObjective::centered(DMatrix::from_row_slice(2, 2, &[1.1184, 0.5841, 0.5841, 3.8816])).unwrap()
    }

    #[test]
    fn reference_matrix_eigenvalues() {
        let (q, mu) = diagonalize(&reference_c()).unwrap();
        assert!((mu[0] - 1.0).abs() < 1e-3 && (mu[1] - 4.0).abs() < 1e-3);
        let orth = (q.transpose() * &q - DMatrix::<f64>::identity(2, 2)).abs().max();
        assert!(orth < 1e-12);
    }

    #[test]
    fn diagonal_input_gives_signed_identity() {
        let obj = QuadraticObjective::centered(DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 0.5])).unwrap();
        let (q, mu) = diagonalize(&obj).unwrap();
        assert_eq!(mu, vec![0.5, 3.0]);
        assert!((q[(0, 1)].abs() - 1.0).abs() < 1e-15 && (q[(1, 0)].abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn scalar_reduces_to_closed_form() {
        let p = HyperParams::new(0.5, 0.2, 0.5, 0.0).unwrap();
        let a = per_mode_analysis(&QuadraticObjective::scalar(2.0).unwrap(), &p).unwrap();
        let exact = closed_form_two_cycle(0.5, 0.2, 2.0).unwrap();
        assert_eq!(a.modes.len(), 1);
        assert_eq!(a.modes[0].cycle, exact);
        assert!(a.original_residual < 1e-12);
    }

    #[test]
    fn eigencoordinate_direct_sum_is_a_cycle() {
        let p = HyperParams::new(0.5, 0.2, 0.5, 1e-6).unwrap();
        let a = per_mode_analysis(&reference_c(), &p).unwrap();
        assert!(a.eigen_residual < 1e-12);
        // Weight amplitude of the closed form does not depend on c.
        assert!((a.modes[0].cycle.x1.w[0] - a.modes[1].cycle.x1.w[0]).abs() < 1e-15);
        assert!((a.modes[1].cycle.x1.m[0] / a.modes[0].cycle.x1.m[0] - a.modes[1].mu / a.modes[0].mu).abs() < 1e-12);
    }
}
