use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::Serialize;

use super::{log_grid, SweepConfig, DEFAULT_SWEEP_POINTS};
use crate::dynamics::{AdamState, HyperParams, QuadraticObjective, MACHINE_EPS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PresetId {
    Experiment1,
    Experiment2,
    Experiment3,
    Multidim,
}

impl PresetId {
    pub const ALL: [PresetId; 4] =
        [PresetId::Experiment1, PresetId::Experiment2, PresetId::Experiment3, PresetId::Multidim];

    pub fn name(self) -> &'static str {
        match self {
            PresetId::Experiment1 => "1",
            PresetId::Experiment2 => "2",
            PresetId::Experiment3 => "3",
            PresetId::Multidim => "multidim",
        }
    }
}

impl fmt::Display for PresetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PresetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PresetId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

/// Single-run setup plus the matching α sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub id: PresetId,
    pub params: HyperParams,
    pub objective: QuadraticObjective,
    pub x0: AdamState,
    pub sweep: SweepConfig,
}

fn hp(alpha: f64, beta1: f64, beta2: f64, epsilon: f64) -> HyperParams {
    HyperParams { alpha, beta1, beta2, epsilon }
}

fn scalar(c: f64) -> QuadraticObjective {
    QuadraticObjective::scalar(c).expect("positive coefficient")
}

/// The reference setups. Experiment 1 runs single trajectories with
/// ε = 1e-8 and sweeps with ε = 1e-6.
pub fn experiment_preset(id: PresetId) -> Preset {
    let standard_range = || log_grid(1e-4, 1e-2, DEFAULT_SWEEP_POINTS).expect("valid grid");
    match id {
        PresetId::Experiment1 => {
            let params = hp(0.001, 0.9, 0.999, 1e-8);
            let objective = scalar(10.0);
            let x0 = AdamState::scalar(-1.281144718e-5, 5.925207756e-8, 2.434174964e-5);
            let sweep =
                SweepConfig::alpha(standard_range(), params.with_epsilon(1e-6), objective.clone(), x0.clone());
            Preset { id, params, objective, x0, sweep }
        }
        PresetId::Experiment2 => {
            let params = hp(0.5, 0.2, 0.5, 1e-6);
            let objective = scalar(1.0);
            let x0 = AdamState::scalar(0.0, 0.0, MACHINE_EPS);
            let sweep = SweepConfig::alpha(standard_range(), params, objective.clone(), x0.clone());
            Preset { id, params, objective, x0, sweep }
        }
        PresetId::Experiment3 => {
            let params = hp(0.8, 0.5, 0.6, 0.01);
            let objective = scalar(1.0);
            let x0 = AdamState::scalar(0.0, 0.0, MACHINE_EPS);
            // Exact multiples of 0.005 so that 0.6 and 0.8 are grid points.
            let values: Vec<f64> = (0..=80).map(|i| (500 + 5 * i) as f64 / 1000.0).collect();
            let sweep = SweepConfig::alpha(values, params, objective.clone(), x0.clone());
            Preset { id, params, objective, x0, sweep }
        }
        PresetId::Multidim => {
            let params = hp(0.5, 0.2, 0.5, 1e-6);
            let c = DMatrix::from_row_slice(2, 2, &[1.1184, 0.5841, 0.5841, 3.8816]);
            let objective = QuadraticObjective::centered(c).expect("SPD reference matrix");
            let x0 = AdamState::new(vec![0.0; 2], vec![0.0; 2], vec![MACHINE_EPS; 2]).expect("valid state");
            let sweep = SweepConfig::alpha(standard_range(), params, objective.clone(), x0.clone());
            Preset { id, params, objective, x0, sweep }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_values() {
        let p1 = experiment_preset(PresetId::Experiment1);
        assert_eq!(p1.params, hp(0.001, 0.9, 0.999, 1e-8));
        assert_eq!(p1.objective.matrix()[(0, 0)], 10.0);
        assert_eq!(p1.x0, AdamState::scalar(-1.281144718e-5, 5.925207756e-8, 2.434174964e-5));
        assert_eq!(p1.sweep.base.epsilon, 1e-6);
        assert_eq!(p1.sweep.values.len(), 400);

        let p2 = experiment_preset(PresetId::Experiment2);
        assert_eq!(p2.params, hp(0.5, 0.2, 0.5, 1e-6));
        assert_eq!(p2.x0.w, vec![2.220446049250313e-16]);

        let p3 = experiment_preset(PresetId::Experiment3);
        assert_eq!(p3.params, hp(0.8, 0.5, 0.6, 0.01));
        assert!(p3.sweep.values.contains(&0.6) && p3.sweep.values.contains(&0.8));
        assert_eq!((p3.sweep.values[0], *p3.sweep.values.last().unwrap()), (0.5, 0.9));

        for id in PresetId::ALL {
            assert!(experiment_preset(id).sweep.validate().is_ok());
        }
    }

    #[test]
    fn names_round_trip() {
        for id in PresetId::ALL {
            assert_eq!(id.name().parse::<PresetId>().unwrap(), id);
        }
        assert_eq!("4".parse::<PresetId>(), Err(Error::UnknownPreset("4".into())));
    }
}
