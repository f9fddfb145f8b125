//! Turning presets, parameter files and flags into fully resolved runs.

use std::fs;
use std::path::Path;

use adam_dynamics::bifurcation::{experiment_preset, Preset, PresetId};
use adam_dynamics::{AdamState, HyperParams, QuadraticObjective, MACHINE_EPS};
use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use crate::args::ProblemArgs;
use crate::failure::usage;

/// Serializable form of a quadratic objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    /// Rows of `C`.
    pub c: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub a: f64,
}

impl ObjectiveSpec {
    pub fn from_objective(obj: &QuadraticObjective) -> Self {
        let c = obj.matrix();
        Self {
            c: c.row_iter().map(|r| r.iter().copied().collect()).collect(),
            b: obj.linear().iter().copied().collect(),
            a: obj.constant(),
        }
    }

    pub fn build(&self) -> Result<QuadraticObjective> {
        QuadraticObjective::from_rows(&self.c, &self.b, self.a).map_err(|e| usage(e.to_string()).into())
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsFile {
    alpha: Option<f64>,
    beta1: Option<f64>,
    beta2: Option<f64>,
    epsilon: Option<f64>,
    c: Option<f64>,
    matrix: Option<Vec<Vec<f64>>>,
    b: Option<Vec<f64>>,
    a: Option<f64>,
    x0: Option<AdamState>,
    bias_correction: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum MatrixFile {
    Rows(Vec<Vec<f64>>),
    Full {
        #[serde(rename = "C")]
        c: Vec<Vec<f64>>,
        #[serde(default)]
        b: Option<Vec<f64>>,
        #[serde(default)]
        a: Option<f64>,
    },
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())).into())
}

/// Reads a JSON state `{"m": [...], "v": [...], "w": [...]}`.
pub fn read_state(path: &Path) -> Result<AdamState> {
    let x: AdamState = read_json(path)?;
    AdamState::new(x.m, x.v, x.w).map_err(|e| usage(e.to_string()).into())
}

pub fn read_objective(path: &Path) -> Result<ObjectiveSpec> {
    Ok(match read_json::<MatrixFile>(path)? {
        MatrixFile::Rows(c) => {
            let n = c.len();
            ObjectiveSpec { c, b: vec![0.0; n], a: 0.0 }
        }
        MatrixFile::Full { c, b, a } => {
            let n = c.len();
            ObjectiveSpec { c, b: b.unwrap_or_else(|| vec![0.0; n]), a: a.unwrap_or(0.0) }
        }
    })
}

fn scalar_spec(c: f64) -> ObjectiveSpec {
    ObjectiveSpec { c: vec![vec![c]], b: vec![0.0], a: 0.0 }
}

/// Parses `m,v,w` (or `m_1..m_n,v_1..v_n,w_1..w_n`); `eps` stands for
/// machine epsilon.
pub fn parse_state(text: &str, n: usize) -> Result<AdamState> {
    let values = text
        .split(',')
        .map(|tok| {
            let tok = tok.trim();
            match tok {
                "eps" => Ok(MACHINE_EPS),
                "-eps" => Ok(-MACHINE_EPS),
                _ => tok.parse::<f64>().map_err(|_| usage(format!("cannot parse `{tok}` in --x0"))),
            }
        })
        .collect::<std::result::Result<Vec<f64>, _>>()?;
    if values.len() != 3 * n {
        bail!(usage(format!("--x0 needs {} values for dimension {n}, got {}", 3 * n, values.len())));
    }
    AdamState::new(values[..n].to_vec(), values[n..2 * n].to_vec(), values[2 * n..].to_vec())
        .map_err(|e| usage(e.to_string()).into())
}

/// Everything a run needs, with any field possibly still missing.
#[derive(Debug, Default)]
pub struct Problem {
    pub preset: Option<Preset>,
    pub alpha: Option<f64>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub epsilon: Option<f64>,
    pub objective: Option<ObjectiveSpec>,
    pub x0: Option<AdamState>,
    pub bias_corrected: Option<bool>,
}

impl Problem {
    /// Layers preset, parameter file and flags. `sweep` picks the preset's
    /// sweep hyperparameters instead of its single-run ones.
    pub fn resolve(args: &ProblemArgs, sweep: bool) -> Result<Self> {
        let mut out = Problem::default();
        if let Some(name) = &args.preset {
            let id: PresetId = name.parse().map_err(|e: adam_dynamics::Error| usage(e.to_string()))?;
            let preset = experiment_preset(id);
            let p = if sweep { preset.sweep.base } else { preset.params };
            out.alpha = Some(p.alpha);
            out.beta1 = Some(p.beta1);
            out.beta2 = Some(p.beta2);
            out.epsilon = Some(p.epsilon);
            out.objective = Some(ObjectiveSpec::from_objective(&preset.objective));
            out.x0 = Some(preset.x0.clone());
            out.bias_corrected = Some(preset.sweep.bias_corrected);
            out.preset = Some(preset);
        }
        if let Some(path) = &args.params {
            let f: ParamsFile = read_json(path)?;
            out.alpha = f.alpha.or(out.alpha);
            out.beta1 = f.beta1.or(out.beta1);
            out.beta2 = f.beta2.or(out.beta2);
            out.epsilon = f.epsilon.or(out.epsilon);
            if f.c.is_some() && f.matrix.is_some() {
                bail!(usage("parameter file sets both c and matrix"));
            }
            if let Some(c) = f.c {
                out.objective = Some(scalar_spec(c));
            }
            if let Some(c) = f.matrix {
                let n = c.len();
                out.objective = Some(ObjectiveSpec { c, b: f.b.clone().unwrap_or_else(|| vec![0.0; n]), a: f.a.unwrap_or(0.0) });
            }
            out.x0 = f.x0.or(out.x0);
            out.bias_corrected = f.bias_correction.or(out.bias_corrected);
        }
        out.alpha = args.alpha.or(out.alpha);
        out.beta1 = args.beta1.or(out.beta1);
        out.beta2 = args.beta2.or(out.beta2);
        out.epsilon = args.epsilon.or(out.epsilon);
        if let Some(c) = args.c {
            out.objective = Some(scalar_spec(c));
        }
        if let Some(path) = &args.matrix {
            out.objective = Some(read_objective(path)?);
        }
        if let Some(bc) = args.bias_correction {
            out.bias_corrected = Some(bc.is_on());
        }
        if let Some(text) = &args.x0 {
            let n = out.objective.as_ref().map_or(1, |o| o.c.len());
            out.x0 = Some(parse_state(text, n)?);
        }
        Ok(out)
    }

    pub fn objective(&self) -> Result<(ObjectiveSpec, QuadraticObjective)> {
        let spec = self.objective.clone().ok_or_else(|| usage("an objective is required: --c, --matrix or --preset"))?;
        let obj = spec.build()?;
        Ok((spec, obj))
    }

    /// Hyperparameters; `alpha_fallback` fills α when the caller sweeps it.
    pub fn params(&self, alpha_fallback: Option<f64>) -> Result<HyperParams> {
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| usage(format!("--{name} is required")));
        let alpha = match self.alpha.or(alpha_fallback) {
            Some(a) => a,
            None => need(None, "alpha")?,
        };
        let p = HyperParams {
            alpha,
            beta1: need(self.beta1, "beta1")?,
            beta2: need(self.beta2, "beta2")?,
            epsilon: need(self.epsilon, "epsilon")?,
        };
        p.validate().map_err(|e| usage(e.to_string()))?;
        Ok(p)
    }

    /// Start state, defaulting to `(0, 0, eps)` in every component.
    pub fn x0(&self, n: usize) -> Result<AdamState> {
        match &self.x0 {
            Some(x) if x.dim() != n => {
                bail!(usage(format!("initial state has dimension {}, objective has {n}", x.dim())))
            }
            Some(x) => Ok(x.clone()),
            None => Ok(AdamState { m: vec![0.0; n], v: vec![0.0; n], w: vec![MACHINE_EPS; n] }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_parsing() {
        let x = parse_state("0,0,eps", 1).unwrap();
        assert_eq!(x.w, vec![MACHINE_EPS]);
        let y = parse_state("1,2,3,4,5,6", 2).unwrap();
        assert_eq!((y.m, y.v, y.w), (vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]));
        assert!(parse_state("1,2", 1).is_err());
        assert!(parse_state("0,-1,0", 1).is_err());
        assert!(parse_state("a,b,c", 1).is_err());
    }

    #[test]
    fn objective_spec_round_trip() {
        let obj = QuadraticObjective::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]], &[0.0, 0.0], 0.0).unwrap();
        let spec = ObjectiveSpec::from_objective(&obj);
        assert_eq!(spec.build().unwrap(), obj);
        let bad = ObjectiveSpec { c: vec![vec![1.0, 0.0]], b: vec![0.0], a: 0.0 };
        assert!(bad.build().is_err());
    }
}
