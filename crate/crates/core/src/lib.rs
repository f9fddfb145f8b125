//! Batch-mode Adam on convex quadratics, studied as a discrete-time
//! dynamical system: the iteration map and its autonomous part, periodic
//! orbits and their stability, continuation in ε, and learning-rate sweeps.

pub mod bifurcation;
pub mod cycle;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod output;
pub mod verify;

pub use dynamics::{
    gradient, iterate_autonomous, simulate, step_autonomous, step_bias_corrected, theta, AdamState,
    HyperParams, QuadraticObjective, Stepper, TrajectoryRecord, DIVERGENCE_BOUND, MACHINE_EPS,
};
pub use error::{Error, Result};
