//! Batch-mode Adam written as a discrete-time dynamical system.
//!
//! The state is `x = (m, v, w)`. One step of the bias-corrected iteration is
//! `x⁺ = T(t, x)`; dropping the bias correction gives the autonomous map
//! `T̄(x)`, and `Θ(t, x) = T(t, x) − T̄(x)` is the decaying disturbance that
//! separates the two. The regularizer ε sits inside the square root,
//! `m⁺ ⊘ √(v⁺ ⊕ ε)`, so every map here is smooth for `v ≥ 0`.
//!
//! Step indexing follows the usual loop: the step that produces `x_{t+1}`
//! from `x_t` uses exponent `t + 1` in the correction factor, and the first
//! executed step has `t = 0`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// IEEE double machine epsilon, used as the initial weight `w₀ = eps` of the
/// reference experiments.
pub const MACHINE_EPS: f64 = f64::EPSILON;

/// Magnitude beyond which a trajectory is declared divergent.
pub const DIVERGENCE_BOUND: f64 = 1e12;

/// Relative symmetry tolerance for the objective matrix.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Adam hyperparameters `p = (α, β₁, β₂, ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl HyperParams {
    pub fn new(alpha: f64, beta1: f64, beta2: f64, epsilon: f64) -> Result<Self> {
        let p = Self { alpha, beta1, beta2, epsilon };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidHyperParams(msg));
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.beta1 > 0.0 && self.beta1 < 1.0) {
            return bad(format!("beta1 must lie in (0, 1), got {}", self.beta1));
        }
        if !(self.beta2 > 0.0 && self.beta2 < 1.0) {
            return bad(format!("beta2 must lie in (0, 1), got {}", self.beta2));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be nonnegative, got {}", self.epsilon));
        }
        Ok(())
    }

    pub fn with_alpha(self, alpha: f64) -> Self {
        Self { alpha, ..self }
    }

    pub fn with_epsilon(self, epsilon: f64) -> Self {
        Self { epsilon, ..self }
    }

    /// Bias-correction factor `√(1 − β₂^{t+1}) / (1 − β₁^{t+1})`.
    pub fn correction_factor(&self, t: u64) -> f64 {
        let k = t as f64 + 1.0;
        (1.0 - self.beta2.powf(k)).sqrt() / (1.0 - self.beta1.powf(k))
    }

    /// `correction_factor(t) − 1`, evaluated without cancellation so that it
    /// stays accurate once `β^t` drops below machine precision.
    pub fn correction_excess(&self, t: u64) -> f64 {
        let k = t as f64 + 1.0;
        let a = self.beta1.powf(k);
        let b = self.beta2.powf(k);
        (a - b / (1.0 + (1.0 - b).sqrt())) / (1.0 - a)
    }
}

/// Dynamical-system state `x = (m, v, w)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
}

impl AdamState {
    pub fn new(m: Vec<f64>, v: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        let n = w.len();
        if n == 0 {
            return Err(Error::InvalidArgument("state dimension must be at least 1".into()));
        }
        for len in [m.len(), v.len()] {
            if len != n {
                return Err(Error::DimensionMismatch { expected: n, found: len });
            }
        }
        if let Some(i) = v.iter().position(|&x| !(x >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "second moment v[{i}] = {} is negative",
                v[i]
            )));
        }
        Ok(Self { m, v, w })
    }

    pub fn zeros(n: usize) -> Self {
        Self { m: vec![0.0; n], v: vec![0.0; n], w: vec![0.0; n] }
    }

    pub fn scalar(m: f64, v: f64, w: f64) -> Self {
        Self { m: vec![m], v: vec![v], w: vec![w] }
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    /// Flatten as `[m…, v…, w…]`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(3 * self.dim());
        out.extend_from_slice(&self.m);
        out.extend_from_slice(&self.v);
        out.extend_from_slice(&self.w);
        out
    }

    /// Inverse of [`AdamState::to_flat`]. No sign check on `v`.
    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        if flat.is_empty() || flat.len() % 3 != 0 {
            return Err(Error::InvalidArgument(format!(
                "flat state length {} is not a positive multiple of 3",
                flat.len()
            )));
        }
        let n = flat.len() / 3;
        Ok(Self {
            m: flat[..n].to_vec(),
            v: flat[n..2 * n].to_vec(),
            w: flat[2 * n..].to_vec(),
        })
    }

    /// `(−m, v, −w)`, the mirror image under the odd symmetry of centred
    /// quadratics.
    pub fn mirrored(&self) -> Self {
        Self {
            m: self.m.iter().map(|x| -x).collect(),
            v: self.v.clone(),
            w: self.w.iter().map(|x| -x).collect(),
        }
    }

    pub fn components(&self) -> impl Iterator<Item = f64> + '_ {
        self.m.iter().chain(&self.v).chain(&self.w).copied()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.components()
            .zip(other.components())
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.components().fold(0.0_f64, |acc, a| acc.max(a.abs()))
    }

    /// All components finite and within [`DIVERGENCE_BOUND`].
    pub fn is_bounded(&self) -> bool {
        self.components().all(|a| a.is_finite() && a.abs() <= DIVERGENCE_BOUND)
    }
}

/// `f(w) = ½ wᵀCw + bᵀw + a` with symmetric positive-definite `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticObjective {
    c: DMatrix<f64>,
    b: DVector<f64>,
    a: f64,
}

impl QuadraticObjective {
    pub fn new(c: DMatrix<f64>, b: DVector<f64>, a: f64) -> Result<Self> {
        let n = c.nrows();
        if n == 0 || !c.is_square() {
            return Err(Error::InvalidObjective(format!(
                "C must be a nonempty square matrix, got {}×{}",
                c.nrows(),
                c.ncols()
            )));
        }
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: b.len() });
        }
        if c.iter().chain(b.iter()).any(|x| !x.is_finite()) || !a.is_finite() {
            return Err(Error::InvalidObjective("non-finite coefficient".into()));
        }
        let scale = linalg::max_abs(&c);
        let asym = linalg::max_abs(&(&c - c.transpose()));
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::InvalidObjective(format!(
                "C is not symmetric (max |C - Cᵀ| = {asym:e})"
            )));
        }
        let (_, mu) = linalg::jacobi_eigen(&c)?;
        if mu[0] <= 0.0 {
            return Err(Error::NotPositiveDefinite { eigenvalue: mu[0] });
        }
        Ok(Self { c, b, a })
    }

    /// Builds `C` from its rows.
    pub fn from_rows(rows: &[Vec<f64>], b: &[f64], a: f64) -> Result<Self> {
        let n = rows.len();
        if let Some(row) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::InvalidObjective(format!(
                "C must be square: {n} rows but a row of length {}",
                row.len()
            )));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(DMatrix::from_row_slice(n, n, &flat), DVector::from_column_slice(b), a)
    }

    /// `f(w) = ½ c w²`.
    pub fn scalar(c: f64) -> Result<Self> {
        Self::new(DMatrix::from_element(1, 1, c), DVector::zeros(1), 0.0)
    }

    /// Centred quadratic `½ wᵀCw`.
    pub fn centered(c: DMatrix<f64>) -> Result<Self> {
        let n = c.nrows();
        Self::new(c, DVector::zeros(n), 0.0)
    }

    pub fn dim(&self) -> usize {
        self.c.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn linear(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn constant(&self) -> f64 {
        self.a
    }

    pub fn is_centered(&self) -> bool {
        self.b.iter().all(|&x| x == 0.0)
    }

    /// Eigenvalues of `C`, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        // Validated SPD at construction, so Jacobi cannot fail here.
        linalg::jacobi_eigen(&self.c).map(|(_, mu)| mu).unwrap_or_default()
    }

    pub fn value(&self, w: &[f64]) -> Result<f64> {
        let g = self.gradient(w)?;
        // f = ½ wᵀ(Cw + b) + ½ bᵀw + a
        let quad: f64 = w.iter().zip(&g).map(|(x, gi)| x * gi).sum();
        let lin: f64 = w.iter().zip(self.b.iter()).map(|(x, bi)| x * bi).sum();
        Ok(0.5 * quad + 0.5 * lin + self.a)
    }

    /// `∇f(w) = C·w + b`.
    pub fn gradient(&self, w: &[f64]) -> Result<Vec<f64>> {
        if w.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: w.len() });
        }
        let mut g = vec![0.0; w.len()];
        self.gradient_into(w, &mut g);
        Ok(g)
    }

    pub(crate) fn gradient_into(&self, w: &[f64], out: &mut [f64]) {
        let n = w.len();
        for (i, gi) in out.iter_mut().enumerate() {
            let mut acc = self.b[i];
            for j in 0..n {
                acc += self.c[(i, j)] * w[j];
            }
            *gi = acc;
        }
    }
}

/// `∇f(w)` as a free function.
pub fn gradient(obj: &QuadraticObjective, w: &[f64]) -> Result<Vec<f64>> {
    obj.gradient(w)
}

fn check_dims(x: &AdamState, obj: &QuadraticObjective) -> Result<()> {
    let n = obj.dim();
    for len in [x.m.len(), x.v.len(), x.w.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, found: len });
        }
    }
    Ok(())
}

/// In-place Adam update with learning-rate multiplier `rate` (α for `T̄`,
/// α times the correction factor for `T`). `grad` is scratch space.
///
/// A component whose new first moment is exactly zero takes no step even
/// when its denominator vanishes, which keeps the origin a fixed point for
/// ε = 0.
fn advance(
    x: &mut AdamState,
    p: &HyperParams,
    obj: &QuadraticObjective,
    rate: f64,
    grad: &mut [f64],
) -> Result<()> {
    obj.gradient_into(&x.w, grad);
    let (b1, b2) = (p.beta1, p.beta2);
    for (i, &g) in grad.iter().enumerate() {
        let m = b1 * x.m[i] + (1.0 - b1) * g;
        let v = b2 * x.v[i] + (1.0 - b2) * g * g;
        x.m[i] = m;
        x.v[i] = v;
        if m == 0.0 {
            continue;
        }
        let denom = (v + p.epsilon).sqrt();
        if denom == 0.0 {
            return Err(Error::ZeroDenominator { component: i });
        }
        x.w[i] -= rate * (m / denom);
    }
    Ok(())
}

/// One step of the autonomous map `T̄` (Adam without bias correction).
pub fn step_autonomous(x: &AdamState, p: &HyperParams, obj: &QuadraticObjective) -> Result<AdamState> {
    check_dims(x, obj)?;
    let mut out = x.clone();
    let mut grad = vec![0.0; x.dim()];
    advance(&mut out, p, obj, p.alpha, &mut grad)?;
    Ok(out)
}

/// One bias-corrected step `T(t, x)` producing `x_{t+1}` from `x_t`.
pub fn step_bias_corrected(
    t: u64,
    x: &AdamState,
    p: &HyperParams,
    obj: &QuadraticObjective,
) -> Result<AdamState> {
    check_dims(x, obj)?;
    let mut out = x.clone();
    let mut grad = vec![0.0; x.dim()];
    advance(&mut out, p, obj, p.alpha * p.correction_factor(t), &mut grad)?;
    Ok(out)
}

/// Disturbance `Θ(t, x) = T(t, x) − T̄(x)`; only the weight block is nonzero.
pub fn theta(t: u64, x: &AdamState, p: &HyperParams, obj: &QuadraticObjective) -> Result<AdamState> {
    check_dims(x, obj)?;
    let n = x.dim();
    let g = obj.gradient(&x.w)?;
    let coef = -p.alpha * p.correction_excess(t);
    let mut w = vec![0.0; n];
    for i in 0..n {
        let m = p.beta1 * x.m[i] + (1.0 - p.beta1) * g[i];
        if m == 0.0 {
            continue;
        }
        let v = p.beta2 * x.v[i] + (1.0 - p.beta2) * g[i] * g[i];
        let denom = (v + p.epsilon).sqrt();
        if denom == 0.0 {
            return Err(Error::ZeroDenominator { component: i });
        }
        w[i] = coef * (m / denom);
    }
    Ok(AdamState { m: vec![0.0; n], v: vec![0.0; n], w })
}

/// `T̄^q(x)`.
pub fn iterate_autonomous(
    x: &AdamState,
    q: usize,
    p: &HyperParams,
    obj: &QuadraticObjective,
) -> Result<AdamState> {
    check_dims(x, obj)?;
    let mut out = x.clone();
    let mut grad = vec![0.0; x.dim()];
    for _ in 0..q {
        advance(&mut out, p, obj, p.alpha, &mut grad)?;
    }
    Ok(out)
}

/// Reusable in-place stepper for long runs.
#[derive(Debug, Clone)]
pub struct Stepper<'a> {
    params: HyperParams,
    objective: &'a QuadraticObjective,
    bias_corrected: bool,
    grad: Vec<f64>,
}

impl<'a> Stepper<'a> {
    pub fn new(params: HyperParams, objective: &'a QuadraticObjective, bias_corrected: bool) -> Self {
        Self { params, objective, bias_corrected, grad: vec![0.0; objective.dim()] }
    }

    /// Replace `x_t` by `x_{t+1}`.
    pub fn step(&mut self, t: u64, x: &mut AdamState) -> Result<()> {
        let rate = if self.bias_corrected {
            self.params.alpha * self.params.correction_factor(t)
        } else {
            self.params.alpha
        };
        advance(x, &self.params, self.objective, rate, &mut self.grad)
    }
}

/// A recorded run of either map.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    /// `(t, x_t)` pairs in increasing `t`.
    pub states: Vec<(u64, AdamState)>,
    pub params: HyperParams,
    pub objective: QuadraticObjective,
    pub bias_corrected: bool,
    pub record_every: u64,
    /// Index `t` of the first state that left the finite bounded region.
    pub divergence: Option<u64>,
}

impl TrajectoryRecord {
    pub fn diverged(&self) -> bool {
        self.divergence.is_some()
    }

    pub fn last(&self) -> &AdamState {
        &self.states.last().expect("trajectory holds at least x0").1
    }

    /// Weight vectors in recording order.
    pub fn w_series(&self) -> impl Iterator<Item = &[f64]> {
        self.states.iter().map(|(_, x)| x.w.as_slice())
    }

    /// Re-applies the recorded map between consecutive entries and checks
    /// for bitwise equality.
    pub fn verify_replay(&self) -> Result<bool> {
        let mut stepper = Stepper::new(self.params, &self.objective, self.bias_corrected);
        for pair in self.states.windows(2) {
            let (t0, ref x0) = pair[0];
            let (t1, ref x1) = pair[1];
            let mut x = x0.clone();
            for t in t0..t1 {
                stepper.step(t, &mut x)?;
            }
            if &x != x1 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Iterates the selected map from `x0` for `steps` steps, keeping every
/// `record_every`-th state plus the first and the last.
///
/// Zero ε is accepted; a zero denominator with a nonzero first moment is
/// reported as [`Error::ZeroDenominator`]. A state leaving the bounded region
/// ends the run early with `divergence` set; that state is not recorded.
pub fn simulate(
    x0: &AdamState,
    p: &HyperParams,
    obj: &QuadraticObjective,
    steps: u64,
    bias_corrected: bool,
    record_every: u64,
) -> Result<TrajectoryRecord> {
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    if record_every == 0 {
        return Err(Error::InvalidArgument("record_every must be at least 1".into()));
    }
    p.validate()?;
    check_dims(x0, obj)?;
    if let Some(i) = x0.v.iter().position(|&v| !(v >= 0.0)) {
        return Err(Error::InvalidArgument(format!("initial v[{i}] is negative")));
    }

    let mut stepper = Stepper::new(*p, obj, bias_corrected);
    let mut x = x0.clone();
    let mut states = vec![(0, x.clone())];
    let mut divergence = None;
    for t in 0..steps {
        stepper.step(t, &mut x)?;
        let index = t + 1;
        if !x.is_bounded() {
            divergence = Some(index);
            break;
        }
        if index % record_every == 0 || index == steps {
            states.push((index, x.clone()));
        }
    }
    Ok(TrajectoryRecord {
        states,
        params: *p,
        objective: obj.clone(),
        bias_corrected,
        record_every,
        divergence,
    })
}
