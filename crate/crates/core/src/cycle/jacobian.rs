use nalgebra::DMatrix;

use crate::dynamics::{iterate_autonomous, AdamState, HyperParams, QuadraticObjective};
use crate::error::{Error, Result};

/// Relative finite-difference step; coordinate `j` uses `FD_STEP·(1 + |xⱼ|)`.
pub const FD_STEP: f64 = 1e-6;

/// Central-difference Jacobian of `map` at `x`.
///
/// Column `j` is `(map(x + hⱼeⱼ) − map(x − hⱼeⱼ)) / (2hⱼ)` with
/// `hⱼ = h·(1 + |xⱼ|)`. Any failed or non-finite evaluation is reported
/// against the perturbed coordinate.
pub fn numeric_jacobian<F>(map: F, x: &[f64], h: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {h}")));
    }
    let n = x.len();
    let mut jac: Option<DMatrix<f64>> = None;
    let mut probe = x.to_vec();
    for j in 0..n {
        let hj = h * (1.0 + x[j].abs());
        let eval = |probe: &[f64]| -> Result<Vec<f64>> {
            match map(probe) {
                Ok(y) if y.iter().all(|v| v.is_finite()) => Ok(y),
                _ => Err(Error::NonFiniteEvaluation { coordinate: j }),
            }
        };
        let (up, down) = (x[j] + hj, x[j] - hj);
        probe[j] = up;
        let plus = eval(&probe)?;
        probe[j] = down;
        let minus = eval(&probe)?;
        probe[j] = x[j];
        // Divide by the step actually taken after rounding.
        let width = up - down;
        let jac = jac.get_or_insert_with(|| DMatrix::zeros(plus.len(), n));
        if plus.len() != jac.nrows() || minus.len() != jac.nrows() {
            return Err(Error::DimensionMismatch { expected: jac.nrows(), found: plus.len() });
        }
        for i in 0..plus.len() {
            jac[(i, j)] = (plus[i] - minus[i]) / width;
        }
    }
    jac.ok_or_else(|| Error::InvalidArgument("cannot differentiate at an empty point".into()))
}

/// Finite-difference Jacobian of `T̄^q` at `x` in the flat `[m, v, w]` layout.
pub fn iterate_jacobian(
    x: &AdamState,
    q: usize,
    p: &HyperParams,
    obj: &QuadraticObjective,
) -> Result<DMatrix<f64>> {
    let map = |flat: &[f64]| -> Result<Vec<f64>> {
        let y = AdamState::from_flat(flat)?;
        Ok(iterate_autonomous(&y, q, p, obj)?.to_flat())
    };
    numeric_jacobian(map, &x.to_flat(), FD_STEP)
}

/// `det(J − I)` for the finite-difference Jacobian `J` of `T̄²` at `x`,
/// i.e. the determinant of `∂F/∂x` for `F(x) = T̄²(x) − x`.
pub fn numeric_det_df(x: &AdamState, p: &HyperParams, obj: &QuadraticObjective) -> Result<f64> {
    let j = iterate_jacobian(x, 2, p, obj)?;
    let n = j.nrows();
    Ok((j - DMatrix::<f64>::identity(n, n)).determinant())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_map() {
        let j = numeric_jacobian(|x| Ok(x.to_vec()), &[0.3, -2.0, 7.0], FD_STEP).unwrap();
        let err = (j - DMatrix::<f64>::identity(3, 3)).abs().max();
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn linear_map_is_recovered() {
        let a = DMatrix::from_row_slice(3, 3, &[0.5, -0.25, 0.75, -1.0, 0.125, 0.0, 0.3, 0.9, -0.6]);
        let map = |x: &[f64]| Ok((&a * nalgebra::DVector::from_column_slice(x)).as_slice().to_vec());
        let j = numeric_jacobian(map, &[1.0, -1.0, 0.5], FD_STEP).unwrap();
        assert!((j - &a).abs().max() < 1e-10);
    }

    #[test]
    fn nonfinite_names_coordinate() {
        let map = |x: &[f64]| Ok(vec![x[0], (x[1] - 1.0).sqrt()]);
        let err = numeric_jacobian(map, &[0.0, 1.0], FD_STEP).unwrap_err();
        assert_eq!(err, Error::NonFiniteEvaluation { coordinate: 1 });
        assert!(numeric_jacobian(|x| Ok(x.to_vec()), &[1.0], 0.0).is_err());
    }
}
