use serde::Serialize;

use super::closed_form::{analytic_jacobian_t2_at_x1, closed_form_two_cycle, is_exceptional};
use super::jacobian::iterate_jacobian;
use super::newton::{newton_find_cycle, NEWTON_MAX_ITER, NEWTON_TOL};
use super::stability::StabilityReport;
use super::TwoCycle;
use crate::dynamics::{HyperParams, QuadraticObjective};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuationSample {
    pub epsilon: f64,
    pub cycle: TwoCycle,
    pub report: StabilityReport,
}

/// The 2-cycle followed from ε = 0 through increasing ε.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationResult {
    pub seed_epsilon: f64,
    pub targets: Vec<f64>,
    /// One entry per converged target, in order.
    pub samples: Vec<ContinuationSample>,
    /// Aligned with `targets`.
    pub converged: Vec<bool>,
    /// Why continuation stopped early, if it did.
    pub failure: Option<Error>,
}

impl ContinuationResult {
    pub fn all_converged(&self) -> bool {
        self.failure.is_none() && self.converged.iter().all(|&c| c)
    }

    pub fn last(&self) -> Option<&ContinuationSample> {
        self.samples.last()
    }
}

/// Continues the closed-form 2-cycle of `f(w) = ½cw²` from ε = 0 to each of
/// `targets` in turn, seeding Newton with the previous solution.
///
/// Refuses to start when `c` is the exceptional coefficient. Stops at the
/// first Newton failure; later targets stay unconverged.
pub fn continue_in_epsilon(
    alpha: f64,
    beta1: f64,
    beta2: f64,
    c: f64,
    targets: &[f64],
) -> Result<ContinuationResult> {
    let base = HyperParams::new(alpha, beta1, beta2, 0.0)?;
    let obj = QuadraticObjective::scalar(c)?;
    if targets.is_empty() {
        return Err(Error::InvalidArgument("no epsilon targets given".into()));
    }
    if targets.iter().any(|e| !(*e >= 0.0 && e.is_finite())) {
        return Err(Error::InvalidArgument("epsilon targets must be finite and nonnegative".into()));
    }
    if targets.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("epsilon targets must be strictly increasing".into()));
    }
    if let Some(c_hat) = is_exceptional(alpha, beta1, beta2, c) {
        return Err(Error::ExceptionalCoefficient { c, c_hat });
    }

    let mut current = closed_form_two_cycle(alpha, beta1, c)?;
    current.residual = current.verify(&base, &obj)?.0;
    let mut samples = Vec::with_capacity(targets.len());
    let mut converged = vec![false; targets.len()];
    let mut failure = None;

    for (k, &eps) in targets.iter().enumerate() {
        let step = (|| -> Result<ContinuationSample> {
            if eps == 0.0 {
                let report =
                    StabilityReport::from_jacobian(analytic_jacobian_t2_at_x1(alpha, beta1, beta2, c))?;
                return Ok(ContinuationSample { epsilon: eps, cycle: current.clone(), report });
            }
            let p = base.with_epsilon(eps);
            let orbit = newton_find_cycle(&current.x1, 2, &p, &obj, NEWTON_TOL, NEWTON_MAX_ITER)?;
            let cycle = TwoCycle::try_from(orbit)?;
            let report = StabilityReport::from_jacobian(iterate_jacobian(&cycle.x1, 2, &p, &obj)?)?;
            Ok(ContinuationSample { epsilon: eps, cycle, report })
        })();
        match step {
            Ok(sample) => {
                current = sample.cycle.clone();
                converged[k] = true;
                samples.push(sample);
            }
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }

    Ok(ContinuationResult { seed_epsilon: 0.0, targets: targets.to_vec(), samples, converged, failure })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycle::{c_exception, Stability};

    #[test]
    fn zero_target_returns_closed_form() {
        let r = continue_in_epsilon(0.5, 0.2, 0.5, 1.0, &[0.0]).unwrap();
        let exact = closed_form_two_cycle(0.5, 0.2, 1.0).unwrap();
        assert!(r.all_converged());
        assert_eq!(r.samples[0].cycle.x1, exact.x1);
        assert_eq!(r.samples[0].cycle.x2, exact.x2);
    }

    #[test]
    fn reaches_experiment_two_epsilon() {
        let r = continue_in_epsilon(0.5, 0.2, 0.5, 1.0, &[1e-8, 1e-7, 1e-6]).unwrap();
        assert!(r.all_converged(), "{:?}", r.failure);
        let last = r.last().unwrap();
        assert!(last.cycle.residual < NEWTON_TOL);
        assert!((last.cycle.x1.w[0].abs() - 0.16666).abs() < 1e-3);
        assert_eq!(last.report.classification, Stability::Attractive);
    }

    #[test]
    fn argument_checks() {
        assert!(continue_in_epsilon(0.5, 0.2, 0.5, 1.0, &[]).is_err());
        assert!(continue_in_epsilon(0.5, 0.2, 0.5, 1.0, &[1e-6, 1e-7]).is_err());
        assert!(continue_in_epsilon(0.5, 0.2, 0.5, 1.0, &[-1e-6]).is_err());
        let c_hat = c_exception(0.5, 0.2, 0.5).unwrap();
        assert!(matches!(
            continue_in_epsilon(0.5, 0.2, 0.5, c_hat, &[1e-6]),
            Err(Error::ExceptionalCoefficient { .. })
        ));
    }
}
