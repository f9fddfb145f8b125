//! Periodic orbits of the autonomous map: the closed-form 2-cycle, Jacobians
//! of `T̄^q`, stability classification, Newton search, ε-continuation and the
//! decay of the bias-correction disturbance.

mod closed_form;
mod continuation;
mod decay;
mod jacobian;
mod newton;
mod recover;
mod stability;

pub use closed_form::{
    analytic_jacobian_t2_at_x1, analytic_jacobian_t2_scalar, c_exception, closed_form_point,
    closed_form_two_cycle, det_df, is_exceptional, C_EXCEPTION_DENOM_TOL, RESIDUAL_BETA2,
};
pub use continuation::{continue_in_epsilon, ContinuationResult, ContinuationSample};
pub use decay::{theta_decay_bound, DecayFit, MIN_DECAY_RANGE};
pub use jacobian::{iterate_jacobian, numeric_det_df, numeric_jacobian, FD_STEP};
pub use newton::{
    minimal_period, newton_find_cycle, PeriodicOrbit, MAX_DAMPING_HALVINGS, NEWTON_MAX_ITER,
    NEWTON_TOL, SINGULAR_CONDITION,
};
pub use recover::{recover_moments, RecoveredMoments};
pub use stability::{classify_stability, Stability, StabilityReport, NONHYPERBOLIC_TOL};

use serde::Serialize;

use crate::dynamics::{step_autonomous, AdamState, HyperParams, QuadraticObjective};
use crate::error::{Error, Result};

/// Below this distance the two points of a candidate 2-cycle coincide.
pub const DISTINCT_POINTS_TOL: f64 = 1e-10;

/// A 2-cycle `{x1, x2}` of `T̄` with `T̄(x1) = x2`, `T̄(x2) = x1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoCycle {
    pub x1: AdamState,
    pub x2: AdamState,
    /// `‖T̄²(x1) − x1‖∞`.
    pub residual: f64,
    /// The ε the cycle belongs to.
    pub epsilon: f64,
}

impl TwoCycle {
    pub const PERIOD: usize = 2;

    /// Builds the cycle through `x1` under `p`, rejecting fixed points.
    pub fn through(x1: AdamState, p: &HyperParams, obj: &QuadraticObjective) -> Result<Self> {
        let x2 = step_autonomous(&x1, p, obj)?;
        if x1.max_abs_diff(&x2) <= DISTINCT_POINTS_TOL {
            return Err(Error::InvalidArgument(
                "orbit is a fixed point, not a 2-cycle".into(),
            ));
        }
        let back = step_autonomous(&x2, p, obj)?;
        Ok(Self { residual: back.max_abs_diff(&x1), x1, x2, epsilon: p.epsilon })
    }

    /// `(‖T̄²(x1) − x1‖∞, ‖T̄(x1) − x2‖∞)` under the given map.
    pub fn verify(&self, p: &HyperParams, obj: &QuadraticObjective) -> Result<(f64, f64)> {
        let y1 = step_autonomous(&self.x1, p, obj)?;
        let y2 = step_autonomous(&y1, p, obj)?;
        Ok((y2.max_abs_diff(&self.x1), y1.max_abs_diff(&self.x2)))
    }

    pub fn is_nonconstant(&self) -> bool {
        self.x1.max_abs_diff(&self.x2) > DISTINCT_POINTS_TOL
    }
}

impl TryFrom<PeriodicOrbit> for TwoCycle {
    type Error = Error;

    fn try_from(orbit: PeriodicOrbit) -> Result<Self> {
        if orbit.minimal_period != 2 || orbit.points.len() != 2 {
            return Err(Error::InvalidArgument(format!(
                "orbit has minimal period {}, not 2",
                orbit.minimal_period
            )));
        }
        let mut points = orbit.points.into_iter();
        let x1 = points.next().expect("two points");
        let x2 = points.next().expect("two points");
        Ok(Self { x1, x2, residual: orbit.residual, epsilon: orbit.epsilon })
    }
}
