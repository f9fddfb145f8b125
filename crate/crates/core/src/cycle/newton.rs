use nalgebra::DVector;
use serde::Serialize;

use super::jacobian::{numeric_jacobian, FD_STEP};
use crate::dynamics::{iterate_autonomous, step_autonomous, AdamState, HyperParams, QuadraticObjective};
use crate::error::{Error, Result};
use crate::linalg;

pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 50;
pub const MAX_DAMPING_HALVINGS: usize = 20;
/// Condition estimate above which the Newton system counts as singular.
pub const SINGULAR_CONDITION: f64 = 1e12;

/// A periodic orbit of `T̄` found by Newton's method.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicOrbit {
    /// `x, T̄(x), …, T̄^{d−1}(x)` for the minimal period `d`.
    pub points: Vec<AdamState>,
    pub requested_period: usize,
    pub minimal_period: usize,
    /// `‖T̄^q(x) − x‖∞` at the returned point.
    pub residual: f64,
    pub iterations: usize,
    pub epsilon: f64,
}

impl PeriodicOrbit {
    pub fn is_fixed_point(&self) -> bool {
        self.minimal_period == 1
    }
}

/// Smallest divisor `d` of `q` with `‖T̄^d(x) − x‖∞ < 10·tol`; `q` itself
/// when no proper divisor qualifies.
pub fn minimal_period(
    x: &AdamState,
    q: usize,
    p: &HyperParams,
    obj: &QuadraticObjective,
    tol: f64,
) -> Result<usize> {
    let mut y = x.clone();
    for d in 1..q {
        y = step_autonomous(&y, p, obj)?;
        if q % d == 0 && y.max_abs_diff(x) < 10.0 * tol {
            return Ok(d);
        }
    }
    Ok(q)
}

fn residual_vector(x: &[f64], q: usize, p: &HyperParams, obj: &QuadraticObjective) -> Result<Vec<f64>> {
    let state = AdamState::from_flat(x)?;
    let image = iterate_autonomous(&state, q, p, obj)?.to_flat();
    Ok(image.iter().zip(x).map(|(a, b)| a - b).collect())
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| if x.is_nan() { f64::NAN } else { acc.max(x.abs()) })
}

/// Damped Newton iteration on `G(x) = T̄^q(x) − x` from `seed`.
///
/// The Jacobian of `G` comes from central differences. A step is halved up to
/// [`MAX_DAMPING_HALVINGS`] times until the residual decreases. On success
/// the orbit carries its minimal period; a fixed point found with `q = 2` is
/// returned with `minimal_period == 1` and is not a 2-cycle.
pub fn newton_find_cycle(
    seed: &AdamState,
    q: usize,
    p: &HyperParams,
    obj: &QuadraticObjective,
    tol: f64,
    max_iter: usize,
) -> Result<PeriodicOrbit> {
    if q == 0 {
        return Err(Error::InvalidArgument("period must be at least 1".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    p.validate()?;
    if seed.dim() != obj.dim() {
        return Err(Error::DimensionMismatch { expected: obj.dim(), found: seed.dim() });
    }

    let n = 3 * seed.dim();
    let mut x = seed.to_flat();
    let mut g = residual_vector(&x, q, p, obj)?;
    let mut r = sup_norm(&g);
    if !r.is_finite() {
        return Err(Error::NewtonNotConverged { iterations: 0, residual: r });
    }
    let mut iterations = 0;
    while r >= tol {
        if iterations == max_iter {
            return Err(Error::NewtonNotConverged { iterations, residual: r });
        }
        iterations += 1;

        let jac = numeric_jacobian(|y| residual_vector(y, q, p, obj), &x, FD_STEP)?;
        let condition = linalg::condition_number(&jac);
        if !(condition <= SINGULAR_CONDITION) {
            return Err(Error::SingularNewtonSystem { condition, residual: r });
        }
        let delta = jac
            .lu()
            .solve(&DVector::from_column_slice(&g))
            .ok_or(Error::SingularNewtonSystem { condition, residual: r })?;

        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_DAMPING_HALVINGS {
            let trial: Vec<f64> = (0..n).map(|i| x[i] - scale * delta[i]).collect();
            if let Ok(gt) = residual_vector(&trial, q, p, obj) {
                let rt = sup_norm(&gt);
                if rt < r {
                    accepted = Some((trial, gt, rt));
                    break;
                }
            }
            scale *= 0.5;
        }
        match accepted {
            Some((trial, gt, rt)) => {
                x = trial;
                g = gt;
                r = rt;
            }
            None => return Err(Error::NewtonNotConverged { iterations, residual: r }),
        }
    }

    let start = AdamState::from_flat(&x)?;
    let d = minimal_period(&start, q, p, obj, tol)?;
    let mut points = Vec::with_capacity(d);
    let mut y = start;
    for _ in 0..d {
        let next = step_autonomous(&y, p, obj)?;
        points.push(y);
        y = next;
    }
    Ok(PeriodicOrbit {
        points,
        requested_period: q,
        minimal_period: d,
        residual: r,
        iterations,
        epsilon: p.epsilon,
    })
}
