use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg;

/// Width of the band `|λ| ∈ [1 − tol, 1 + tol]` treated as the unit circle.
pub const NONHYPERBOLIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Attractive,
    Repelling,
    Nonhyperbolic,
}

impl Stability {
    pub fn as_str(self) -> &'static str {
        match self {
            Stability::Attractive => "attractive",
            Stability::Repelling => "repelling",
            Stability::Nonhyperbolic => "nonhyperbolic",
        }
    }
}

impl std::fmt::Display for Stability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Attractive iff every modulus is below `1 − tol`, repelling iff some
/// modulus exceeds `1 + tol`, nonhyperbolic otherwise.
pub fn classify_stability(eigs: &[Complex64]) -> Stability {
    let radius = spectral_radius(eigs);
    if radius < 1.0 - NONHYPERBOLIC_TOL {
        Stability::Attractive
    } else if radius > 1.0 + NONHYPERBOLIC_TOL {
        Stability::Repelling
    } else {
        Stability::Nonhyperbolic
    }
}

fn spectral_radius(eigs: &[Complex64]) -> f64 {
    eigs.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Jacobian of `T̄²` at a cycle point with its spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    #[serde(serialize_with = "rows")]
    pub jacobian: DMatrix<f64>,
    #[serde(serialize_with = "pairs")]
    pub eigenvalues: Vec<Complex64>,
    pub spectral_radius: f64,
    pub classification: Stability,
}

impl StabilityReport {
    pub fn from_jacobian(jacobian: DMatrix<f64>) -> Result<Self> {
        if jacobian.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("Jacobian has non-finite entries".into()));
        }
        let eigenvalues = linalg::eigenvalues(&jacobian)?;
        let spectral_radius = spectral_radius(&eigenvalues);
        let classification = classify_stability(&eigenvalues);
        Ok(Self { jacobian, eigenvalues, spectral_radius, classification })
    }
}

fn rows<S: Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
    rows.serialize(s)
}

fn pairs<S: Serializer>(eigs: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    let pairs: Vec<[f64; 2]> = eigs.iter().map(|z| [z.re, z.im]).collect();
    pairs.serialize(s)
}
