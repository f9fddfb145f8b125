//! Learning-rate sweeps, attractor period detection, the local-convergence
//! predictor and the reference experiment presets.

mod modes;
mod presets;

pub use modes::{
    diagonalize, per_mode_analysis, to_eigen_coordinates, to_original_coordinates, ModeAnalysis, ModeCycle,
};
pub use presets::{experiment_preset, Preset, PresetId};

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{AdamState, HyperParams, QuadraticObjective, Stepper};
use crate::error::{Error, Result};

pub const DEFAULT_TRANSIENT_STEPS: u64 = 50_000;
pub const DEFAULT_SAMPLE_STEPS: u64 = 512;
pub const DEFAULT_PERIOD_TOL: f64 = 1e-6;
pub const DEFAULT_Q_MAX: usize = 64;
pub const DEFAULT_SWEEP_POINTS: usize = 400;

pub const MIN_TRANSIENT_STEPS: u64 = 1000;
pub const MIN_SAMPLE_STEPS: u64 = 64;

/// Learning rate at which the local-convergence condition of the origin
/// becomes an equality: `(2β₁ + 2)√ε / ((1 − β₁)μ_max)`.
pub fn alpha_bifurcation(beta1: f64, epsilon: f64, mu_max: f64) -> f64 {
    (2.0 * beta1 + 2.0) * epsilon.sqrt() / ((1.0 - beta1) * mu_max)
}

/// Strict local-convergence condition `α·μ_max·(1 − β₁)/√ε < 2β₁ + 2`.
pub fn inequality_holds(p: &HyperParams, mu_max: f64) -> bool {
    p.alpha * mu_max * (1.0 - p.beta1) / p.epsilon.sqrt() < 2.0 * p.beta1 + 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Period {
    Periodic(usize),
    Aperiodic,
}

impl Period {
    pub fn label(self) -> String {
        match self {
            Period::Periodic(q) => q.to_string(),
            Period::Aperiodic => "aperiodic".into(),
        }
    }
}

/// Smallest `q ≤ q_max` with `‖w[i+q] − w[i]‖∞ < tol` over the whole window.
///
/// The window is the full slice, so callers pass only post-transient
/// samples.
pub fn detect_period(w_samples: &[Vec<f64>], tol: f64, q_max: usize) -> Result<Period> {
    if q_max == 0 {
        return Err(Error::InvalidArgument("q_max must be at least 1".into()));
    }
    if w_samples.len() < 2 * q_max {
        return Err(Error::InvalidArgument(format!(
            "need at least {} samples for q_max = {q_max}, got {}",
            2 * q_max,
            w_samples.len()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol);
    for q in 1..=q_max {
        if (0..w_samples.len() - q).all(|i| close(&w_samples[i + q], &w_samples[i])) {
            return Ok(Period::Periodic(q));
        }
    }
    Ok(Period::Aperiodic)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweptParameter {
    Alpha,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub param: SweptParameter,
    pub values: Vec<f64>,
    pub base: HyperParams,
    pub objective: QuadraticObjective,
    pub x0: AdamState,
    pub transient_steps: u64,
    pub sample_steps: u64,
    pub bias_corrected: bool,
    pub period_tol: f64,
    pub q_max: usize,
}

impl SweepConfig {
    /// α sweep with the default window lengths and period tolerance.
    pub fn alpha(values: Vec<f64>, base: HyperParams, objective: QuadraticObjective, x0: AdamState) -> Self {
        Self {
            param: SweptParameter::Alpha,
            values,
            base,
            objective,
            x0,
            transient_steps: DEFAULT_TRANSIENT_STEPS,
            sample_steps: DEFAULT_SAMPLE_STEPS,
            bias_corrected: true,
            period_tol: DEFAULT_PERIOD_TOL,
            q_max: DEFAULT_Q_MAX,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.values.is_empty() {
            return bad("sweep has no values".into());
        }
        if self.values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return bad("swept values must be positive and finite".into());
        }
        if self.values.windows(2).any(|w| w[1] <= w[0]) {
            return bad("swept values must be strictly increasing".into());
        }
        if self.transient_steps < MIN_TRANSIENT_STEPS {
            return bad(format!("transient_steps must be at least {MIN_TRANSIENT_STEPS}"));
        }
        if self.sample_steps < MIN_SAMPLE_STEPS {
            return bad(format!("sample_steps must be at least {MIN_SAMPLE_STEPS}"));
        }
        if self.q_max == 0 || self.sample_steps < 2 * self.q_max as u64 {
            return bad(format!("sample_steps must be at least 2·q_max = {}", 2 * self.q_max));
        }
        if !(self.period_tol > 0.0) {
            return bad("period tolerance must be positive".into());
        }
        if self.x0.dim() != self.objective.dim() {
            return Err(Error::DimensionMismatch { expected: self.objective.dim(), found: self.x0.dim() });
        }
        self.base.validate()
    }

    /// Largest eigenvalue of the objective's Hessian.
    pub fn mu_max(&self) -> f64 {
        self.objective.eigenvalues().last().copied().unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttractorSample {
    pub param_value: f64,
    /// Post-transient weights; empty when the run diverged.
    pub w_samples: Vec<Vec<f64>>,
    /// `None` when the run diverged.
    pub period: Option<Period>,
    pub diverged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitDiagram {
    pub config: SweepConfig,
    pub samples: Vec<AttractorSample>,
    pub predicted_bifurcation: Option<f64>,
}

impl OrbitDiagram {
    /// First sample, in sweep order, whose label is not period 1.
    pub fn first_non_period_one(&self) -> Option<&AttractorSample> {
        self.samples.iter().find(|s| s.period != Some(Period::Periodic(1)))
    }
}

fn sample_attractor(config: &SweepConfig, value: f64) -> AttractorSample {
    let p = match config.param {
        SweptParameter::Alpha => config.base.with_alpha(value),
    };
    let diverged = || AttractorSample { param_value: value, w_samples: Vec::new(), period: None, diverged: true };
    let mut stepper = Stepper::new(p, &config.objective, config.bias_corrected);
    let mut x = config.x0.clone();
    let total = config.transient_steps + config.sample_steps;
    let mut w_samples = Vec::with_capacity(config.sample_steps as usize);
    for t in 0..total {
        if stepper.step(t, &mut x).is_err() || !x.is_bounded() {
            return diverged();
        }
        if t + 1 > config.transient_steps {
            w_samples.push(x.w.clone());
        }
    }
    // Validated config guarantees enough samples and a positive tolerance.
    let period = detect_period(&w_samples, config.period_tol, config.q_max).ok();
    AttractorSample { param_value: value, w_samples, period, diverged: false }
}

/// Runs every swept value from the same initial state, in parallel, and
/// gathers the samples in input order.
pub fn run_sweep(config: &SweepConfig) -> Result<OrbitDiagram> {
    config.validate()?;
    let samples: Vec<AttractorSample> =
        config.values.par_iter().map(|&value| sample_attractor(config, value)).collect();
    let predicted_bifurcation = (config.base.epsilon > 0.0)
        .then(|| alpha_bifurcation(config.base.beta1, config.base.epsilon, config.mu_max()));
    Ok(OrbitDiagram { config: config.clone(), samples, predicted_bifurcation })
}

/// `n` logarithmically spaced values from `min` to `max` inclusive.
pub fn log_grid(min: f64, max: f64, n: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max > min && max.is_finite()) || n < 2 {
        return Err(Error::InvalidArgument(format!("bad log grid [{min}, {max}] with {n} points")));
    }
    let (a, b) = (min.ln(), max.ln());
    let mut out: Vec<f64> = (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect();
    out[0] = min;
    out[n - 1] = max;
    Ok(out)
}

/// `n` evenly spaced values from `min` to `max` inclusive.
pub fn linear_grid(min: f64, max: f64, n: usize) -> Result<Vec<f64>> {
    if !(max > min && min.is_finite() && max.is_finite()) || n < 2 {
        return Err(Error::InvalidArgument(format!("bad linear grid [{min}, {max}] with {n} points")));
    }
    let mut out: Vec<f64> = (0..n).map(|i| min + (max - min) * i as f64 / (n - 1) as f64).collect();
    out[n - 1] = max;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predictor_matches_reference_value() {
        let a = alpha_bifurcation(0.9, 1e-6, 10.0);
        assert!((a - 0.0038).abs() < 1e-16);
        let r = alpha_bifurcation(0.5, 2e-6, 3.0) / alpha_bifurcation(0.5, 1e-6, 3.0);
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
        assert!(alpha_bifurcation(0.99, 1e-6, 1.0) > alpha_bifurcation(0.9, 1e-6, 1.0));
    }

    #[test]
    fn inequality_is_strict() {
        let p = HyperParams::new(0.001, 0.9, 0.999, 1e-6).unwrap();
        assert!(inequality_holds(&p, 10.0));
        assert!(!inequality_holds(&p.with_alpha(0.01), 10.0));
        // On the boundary exactly: 0.75·4·0.5/0.5 = 3 = 2β₁ + 2.
        let q = HyperParams::new(0.75, 0.5, 0.5, 0.25).unwrap();
        assert_eq!(alpha_bifurcation(0.5, 0.25, 4.0), 0.75);
        assert!(!inequality_holds(&q, 4.0));
    }

    #[test]
    fn period_detection() {
        let constant = vec![vec![0.5]; 16];
        assert_eq!(detect_period(&constant, 1e-6, 4).unwrap(), Period::Periodic(1));
        let two: Vec<Vec<f64>> = (0..16).map(|i| vec![if i % 2 == 0 { 0.1 } else { -0.1 }]).collect();
        assert_eq!(detect_period(&two, 1e-6, 4).unwrap(), Period::Periodic(2));
        let three: Vec<Vec<f64>> = (0..16).map(|i| vec![(i % 3) as f64]).collect();
        assert_eq!(detect_period(&three, 1e-6, 4).unwrap(), Period::Periodic(3));
        let drift: Vec<Vec<f64>> = (0..16).map(|i| vec![i as f64]).collect();
        assert_eq!(detect_period(&drift, 1e-6, 4).unwrap(), Period::Aperiodic);
        assert!(detect_period(&drift, 1e-6, 9).is_err());
    }

    #[test]
    fn grids() {
        let g = log_grid(1e-4, 1e-2, 3).unwrap();
        assert_eq!(g[0], 1e-4);
        assert!((g[1] - 1e-3).abs() < 1e-18);
        assert_eq!(g[2], 1e-2);
        assert_eq!(linear_grid(0.0, 1.0, 5).unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(log_grid(0.0, 1.0, 5).is_err());
        assert!(linear_grid(1.0, 1.0, 5).is_err());
    }

    #[test]
    fn config_validation() {
        let p = HyperParams::new(0.001, 0.9, 0.999, 1e-6).unwrap();
        let obj = QuadraticObjective::scalar(10.0).unwrap();
        let mut cfg = SweepConfig::alpha(vec![1e-4, 2e-4], p, obj, AdamState::zeros(1));
        assert!(cfg.validate().is_ok());
        cfg.values = vec![2e-4, 1e-4];
        assert!(cfg.validate().is_err());
        cfg.values = vec![1e-4];
        cfg.transient_steps = 999;
        assert!(cfg.validate().is_err());
        cfg.transient_steps = 1000;
        cfg.sample_steps = 63;
        assert!(cfg.validate().is_err());
    }
}
