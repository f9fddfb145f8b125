//! Property suites run by `adam-dynamics verify`.
//!
//! Each check reports its worst measured error against a fixed threshold.
//! Informational checks are printed but never fail a suite.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cycle::{
    analytic_jacobian_t2_scalar, c_exception, closed_form_two_cycle, det_df, iterate_jacobian,
    recover_moments, theta_decay_bound, DecayFit,
};
use crate::dynamics::{
    step_autonomous, step_bias_corrected, theta, AdamState, HyperParams, QuadraticObjective,
};
use crate::error::{Error, Result};
use crate::linalg;

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    ClosedForm,
    Jacobian,
    Invariance,
    Decay,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::ClosedForm => "closed-form",
            Suite::Jacobian => "jacobian",
            Suite::Invariance => "invariance",
            Suite::Decay => "decay",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Suite::ClosedForm, Suite::Jacobian, Suite::Invariance, Suite::Decay, Suite::All]
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyCheck {
    pub suite: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub worst: f64,
    pub threshold: f64,
    pub informational: bool,
}

impl PropertyCheck {
    fn new(suite: Suite, name: &'static str, worst: f64, threshold: f64) -> Self {
        Self { suite: suite.name(), name, passed: worst <= threshold, worst, threshold, informational: false }
    }

    fn info(suite: Suite, name: &'static str, worst: f64, threshold: f64) -> Self {
        Self { informational: true, ..Self::new(suite, name, worst, threshold) }
    }

    fn failed(suite: Suite, name: &'static str, threshold: f64) -> Self {
        Self { suite: suite.name(), name, passed: false, worst: f64::NAN, threshold, informational: false }
    }
}

impl fmt::Display for PropertyCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = match (self.informational, self.passed) {
            (true, _) => "INFO",
            (false, true) => "PASS",
            (false, false) => "FAIL",
        };
        write!(f, "{status} {}/{}: worst {:e} (threshold {:e})", self.suite, self.name, self.worst, self.threshold)
    }
}

/// Runs `suite` with a seeded generator for the randomized cases.
pub fn run_suite(suite: Suite, seed: u64) -> Vec<PropertyCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match suite {
        Suite::ClosedForm => closed_form_suite(),
        Suite::Jacobian => jacobian_suite(&mut rng),
        Suite::Invariance => invariance_suite(&mut rng),
        Suite::Decay => decay_suite(&mut rng),
        Suite::All => {
            let mut all = closed_form_suite();
            all.extend(jacobian_suite(&mut rng));
            all.extend(invariance_suite(&mut rng));
            all.extend(decay_suite(&mut rng));
            all
        }
    }
}

pub fn all_passed(checks: &[PropertyCheck]) -> bool {
    checks.iter().all(|c| c.informational || c.passed)
}

fn log_space(min: f64, max: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| (min.ln() + (max.ln() - min.ln()) * i as f64 / (n - 1) as f64).exp()).collect()
}

fn lin_space(min: f64, max: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| min + (max - min) * i as f64 / (n - 1) as f64).collect()
}

fn log_uniform(rng: &mut ChaCha8Rng, min: f64, max: f64) -> f64 {
    rng.gen_range(min.ln()..max.ln()).exp()
}

/// Grid of `(α, β₁, c)` with every `β₂` in the closed-form check.
pub fn closed_form_grid() -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    (
        log_space(1e-3, 1.0, 10),
        lin_space(0.05, 0.95, 10),
        log_space(0.1, 10.0, 10),
        vec![0.1, 0.5, 0.9, 0.999],
    )
}

fn closed_form_suite() -> Vec<PropertyCheck> {
    let s = Suite::ClosedForm;
    let (alphas, beta1s, cs, beta2s) = closed_form_grid();
    let (mut cycle_err, mut image_err, mut v_err, mut m_err) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    let mut ok = true;
    for &a in &alphas {
        for &b1 in &beta1s {
            for &c in &cs {
                let Ok(cyc) = closed_form_two_cycle(a, b1, c) else {
                    ok = false;
                    continue;
                };
                v_err = v_err.max((cyc.x1.v[0] - cyc.x2.v[0]).abs());
                let obj = QuadraticObjective::scalar(c).expect("positive c");
                for &b2 in &beta2s {
                    let p = HyperParams { alpha: a, beta1: b1, beta2: b2, epsilon: 0.0 };
                    match cyc.verify(&p, &obj) {
                        Ok((r2, r1)) => {
                            cycle_err = cycle_err.max(r2);
                            image_err = image_err.max(r1);
                        }
                        Err(_) => ok = false,
                    }
                    if let Ok(rec) = recover_moments([&cyc.x1.w, &cyc.x2.w], b1, b2, &obj) {
                        m_err = m_err.max((rec.m[0][0] - cyc.x1.m[0]).abs()).max((rec.m[1][0] - cyc.x2.m[0]).abs());
                    } else {
                        ok = false;
                    }
                }
            }
        }
    }
    if !ok {
        return vec![PropertyCheck::failed(s, "grid_evaluation", 0.0)];
    }
    vec![
        PropertyCheck::new(s, "two_step_residual", cycle_err, 1e-10),
        PropertyCheck::new(s, "one_step_image", image_err, 1e-10),
        PropertyCheck::new(s, "identical_second_moments", v_err, 0.0),
        PropertyCheck::new(s, "moment_recovery", m_err, 1e-10),
    ]
}

/// A random tuple inside the range where central differences with the
/// default step resolve the cycle.
pub fn random_jacobian_tuple(rng: &mut ChaCha8Rng) -> (f64, f64, f64, f64) {
    (
        log_uniform(rng, 0.5, 2.0),
        rng.gen_range(0.05..0.85),
        rng.gen_range(0.05..0.95),
        log_uniform(rng, 1.0, 4.0),
    )
}

/// Entrywise `max |A − N| / (1 + |A|)`.
pub fn mixed_relative_error(analytic: &DMatrix<f64>, numeric: &DMatrix<f64>) -> f64 {
    analytic
        .iter()
        .zip(numeric.iter())
        .fold(0.0_f64, |acc, (a, n)| acc.max((a - n).abs() / (1.0 + a.abs())))
}

/// Sum of the magnitudes of the terms of the printed determinant, used to
/// make its zero relative.
pub fn det_df_scale(alpha: f64, beta1: f64, beta2: f64, c: f64) -> f64 {
    let (b1, b2, ac) = (beta1, beta2, alpha * c);
    let lead = (4.0 * (b1 + b2) * (b2 - 1.0) * (b1 + 1.0)).abs();
    lead * (2.0
        + (b1 * b1 * b1 * ac).abs()
        + ((3.0 * b2 * ac - 2.0 * ac - 2.0 * b2) * b1 * b1).abs()
        + (3.0 * (b2 - 1.0) * (ac - 2.0 * b2) * b1).abs())
}

fn jacobian_suite(rng: &mut ChaCha8Rng) -> Vec<PropertyCheck> {
    let s = Suite::Jacobian;
    let mut fd_err = 0.0_f64;
    let mut det_rel = 0.0_f64;
    let mut printed_gap = 0.0_f64;
    let mut ok = true;
    for _ in 0..50 {
        let (a, b1, b2, c) = random_jacobian_tuple(rng);
        let Ok(cyc) = closed_form_two_cycle(a, b1, c) else {
            ok = false;
            continue;
        };
        let p = HyperParams { alpha: a, beta1: b1, beta2: b2, epsilon: 0.0 };
        let obj = QuadraticObjective::scalar(c).expect("positive c");
        let Ok(numeric) = iterate_jacobian(&cyc.x2, 2, &p, &obj) else {
            ok = false;
            continue;
        };
        let analytic = analytic_jacobian_t2_scalar(a, b1, b2, c);
        fd_err = fd_err.max(mixed_relative_error(&analytic, &numeric));
        let eye = DMatrix::<f64>::identity(3, 3);
        let det_a = (&analytic - &eye).determinant();
        let det_n = (&numeric - &eye).determinant();
        det_rel = det_rel.max((det_a - det_n).abs() / det_a.abs().max(1e-300));
        let printed = det_df(a, b1, b2, c);
        printed_gap = printed_gap.max((printed - det_n).abs() / det_n.abs().max(1e-300));
    }

    let mut exception_err = 0.0_f64;
    let mut tested = 0;
    while tested < 100 {
        let a = log_uniform(rng, 1e-3, 10.0);
        let b1 = rng.gen_range(0.01..0.99);
        let b2 = rng.gen_range(0.01..0.99);
        let Some(c_hat) = c_exception(a, b1, b2) else { continue };
        tested += 1;
        let scale = det_df_scale(a, b1, b2, c_hat);
        exception_err = exception_err.max(det_df(a, b1, b2, c_hat).abs() / scale);
    }

    let mut checks = vec![
        PropertyCheck::new(s, "analytic_vs_finite_difference", fd_err, 1e-5),
        PropertyCheck::new(s, "det_j_minus_i_analytic_vs_fd", det_rel, 1e-5),
        PropertyCheck::new(s, "c_exception_zeroes_det_df", exception_err, 1e-10),
        PropertyCheck::info(s, "printed_det_df_vs_fd_det", printed_gap, 1e-5),
    ];
    if !ok {
        checks.push(PropertyCheck::failed(s, "evaluation", 0.0));
    }
    checks
}

/// Greedy nearest matching distance between two eigenvalue multisets.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0_f64;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .fold((usize::MAX, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
        if j == usize::MAX {
            return f64::INFINITY;
        }
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

pub const INVARIANCE_ALPHAS: [f64; 4] = [1e-3, 1e-1, 1.0, 10.0];
pub const INVARIANCE_CS: [f64; 3] = [0.1, 1.0, 10.0];

fn invariance_suite(rng: &mut ChaCha8Rng) -> Vec<PropertyCheck> {
    let s = Suite::Invariance;
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let b1 = rng.gen_range(0.05..0.95);
        let b2 = rng.gen_range(0.05..0.95);
        let reference = linalg::eigenvalues_small(&analytic_jacobian_t2_scalar(1.0, b1, b2, 1.0));
        let Ok(reference) = reference else {
            return vec![PropertyCheck::failed(s, "alpha_c_invariance", 1e-8)];
        };
        for &a in &INVARIANCE_ALPHAS {
            for &c in &INVARIANCE_CS {
                match linalg::eigenvalues_small(&analytic_jacobian_t2_scalar(a, b1, b2, c)) {
                    Ok(eigs) => worst = worst.max(multiset_distance(&eigs, &reference)),
                    Err(_) => worst = f64::INFINITY,
                }
            }
        }
    }
    vec![PropertyCheck::new(s, "alpha_c_invariance", worst, 1e-8)]
}

/// Random valid hyperparameters, scalar objective and state.
pub fn random_case(rng: &mut ChaCha8Rng) -> (HyperParams, QuadraticObjective, AdamState) {
    let p = HyperParams {
        alpha: log_uniform(rng, 1e-4, 1.0),
        beta1: rng.gen_range(0.05..0.999),
        beta2: rng.gen_range(0.05..0.999),
        epsilon: log_uniform(rng, 1e-10, 1e-2),
    };
    let obj = QuadraticObjective::scalar(log_uniform(rng, 0.1, 10.0)).expect("positive c");
    let x = AdamState::scalar(rng.gen_range(-1.0..1.0), rng.gen_range(0.0..1.0), rng.gen_range(-1.0..1.0));
    (p, obj, x)
}

/// Largest componentwise `|T − T̄ − Θ|` relative to
/// `max(|x|, |T|, |T̄|)`, in units of machine epsilon.
pub fn decomposition_error(t: u64, x: &AdamState, p: &HyperParams, obj: &QuadraticObjective) -> Result<f64> {
    let full = step_bias_corrected(t, x, p, obj)?;
    let auto = step_autonomous(x, p, obj)?;
    let th = theta(t, x, p, obj)?;
    let mut worst = 0.0_f64;
    let blocks = [(&full.m, &auto.m, &th.m, &x.m), (&full.v, &auto.v, &th.v, &x.v), (&full.w, &auto.w, &th.w, &x.w)];
    for (f, a, d, x0) in blocks {
        for i in 0..f.len() {
            let scale = x0[i].abs().max(f[i].abs()).max(a[i].abs());
            let err = (f[i] - a[i] - d[i]).abs();
            if err > 0.0 {
                worst = worst.max(err / (scale * f64::EPSILON));
            }
        }
    }
    Ok(worst)
}

fn decay_suite(rng: &mut ChaCha8Rng) -> Vec<PropertyCheck> {
    let s = Suite::Decay;
    let mut excess = f64::NEG_INFINITY;
    let mut ok = true;
    for _ in 0..20 {
        let (p, obj, x) = random_case(rng);
        match theta_decay_bound(&x, &p, &obj, 10..201) {
            Ok(DecayFit::Fitted { beta_fit, .. }) => excess = excess.max(beta_fit - p.beta1.max(p.beta2)),
            Ok(DecayFit::Complete) => {}
            Err(_) => ok = false,
        }
    }
    let mut decomposition = 0.0_f64;
    for _ in 0..1000 {
        let (p, obj, x) = random_case(rng);
        let t = rng.gen_range(0..500);
        match decomposition_error(t, &x, &p, &obj) {
            Ok(e) => decomposition = decomposition.max(e),
            Err(_) => ok = false,
        }
    }
    let mut checks = vec![
        PropertyCheck::new(s, "beta_fit_minus_max_beta", excess.max(0.0), 0.01),
        PropertyCheck::new(s, "decomposition_in_eps_units", decomposition, 4.0),
    ];
    if !ok {
        checks.push(PropertyCheck::failed(s, "evaluation", 0.0));
    }
    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names() {
        for name in ["closed-form", "jacobian", "invariance", "decay", "all"] {
            assert_eq!(name.parse::<Suite>().unwrap().name(), name);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn multiset_matching() {
        let a = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)];
        let b = [Complex64::new(0.0, -1.0), Complex64::new(1.0, 1e-9), Complex64::new(0.0, 1.0)];
        assert!(multiset_distance(&a, &b) <= 1e-9);
        assert!(multiset_distance(&a, &b[..2]).is_infinite());
    }

    #[test]
    fn every_suite_passes() {
        for suite in [Suite::ClosedForm, Suite::Jacobian, Suite::Invariance, Suite::Decay] {
            let checks = run_suite(suite, DEFAULT_SEED);
            assert!(all_passed(&checks), "{checks:#?}");
        }
    }
}
