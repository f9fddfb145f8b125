use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use adam_dynamics::bifurcation::{
    linear_grid, log_grid, run_sweep, SweepConfig, DEFAULT_PERIOD_TOL, DEFAULT_Q_MAX, DEFAULT_SAMPLE_STEPS,
    DEFAULT_SWEEP_POINTS, DEFAULT_TRANSIENT_STEPS,
};
use adam_dynamics::cycle::{
    analytic_jacobian_t2_at_x1, c_exception, closed_form_two_cycle, continue_in_epsilon, det_df,
    is_exceptional, iterate_jacobian, newton_find_cycle, numeric_det_df, StabilityReport,
    NEWTON_MAX_ITER, NEWTON_TOL,
};
use adam_dynamics::output::{sweep_csv, trajectory_csv};
use adam_dynamics::verify::{all_passed, run_suite, Suite, DEFAULT_SEED};
use adam_dynamics::{simulate, AdamState, Error, HyperParams, QuadraticObjective};
use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::args::{CycleArgs, GridKind, ReplayArgs, SimulateArgs, SweepArgs, VerifyArgs};
use crate::failure::{divergence, solver, usage, verification};
use crate::manifest::RunManifest;
use crate::problem::{read_objective, read_state, ObjectiveSpec, Problem};

const STDOUT: &str = "-";

/// Fully resolved `simulate` run, as stored in its manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateSpec {
    pub params: HyperParams,
    pub objective: ObjectiveSpec,
    pub x0: AdamState,
    pub steps: u64,
    pub bias_corrected: bool,
    pub record_every: u64,
}

/// Fully resolved `sweep` run, as stored in its manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: HyperParams,
    pub objective: ObjectiveSpec,
    pub x0: AdamState,
    pub values: Vec<f64>,
    pub transient_steps: u64,
    pub sample_steps: u64,
    pub bias_corrected: bool,
    pub period_tol: f64,
    pub q_max: usize,
}

fn core_usage(e: Error) -> anyhow::Error {
    usage(e.to_string()).into()
}

fn output_name(path: &Option<PathBuf>) -> String {
    path.as_ref().map_or_else(|| STDOUT.to_string(), |p| p.display().to_string())
}

fn emit(target: &str, data: &str) -> Result<()> {
    if target == STDOUT {
        let mut out = std::io::stdout().lock();
        match out.write_all(data.as_bytes()).and_then(|()| out.flush()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
            _ => {}
        }
    } else {
        fs::write(target, data).with_context(|| format!("writing {target}"))?;
    }
    Ok(())
}

fn manifest_path(explicit: &Option<PathBuf>, out: &Option<PathBuf>, fallback: Option<&str>) -> Option<PathBuf> {
    explicit
        .clone()
        .or_else(|| out.as_ref().map(|p| PathBuf::from(format!("{}.manifest.json", p.display()))))
        .or_else(|| fallback.map(PathBuf::from))
}

/// Returns the CSV and the divergence step, if any.
pub fn execute_simulate(spec: &SimulateSpec) -> Result<(String, Option<u64>)> {
    let obj = spec.objective.build()?;
    let record = simulate(&spec.x0, &spec.params, &obj, spec.steps, spec.bias_corrected, spec.record_every)
        .map_err(core_usage)?;
    Ok((trajectory_csv(&record), record.divergence))
}

pub fn simulate_cmd(args: &SimulateArgs) -> Result<()> {
    let problem = Problem::resolve(&args.problem, false)?;
    let (objective, obj) = problem.objective()?;
    let spec = SimulateSpec {
        params: problem.params(None)?,
        x0: problem.x0(obj.dim())?,
        objective,
        steps: args.steps,
        bias_corrected: problem.bias_corrected.unwrap_or(true),
        record_every: args.record_every,
    };
    let (csv, diverged_at) = execute_simulate(&spec)?;
    let target = output_name(&args.out);
    emit(&target, &csv)?;
    if let Some(path) = manifest_path(&args.manifest, &args.out, None) {
        RunManifest::new("simulate", &spec, vec![target])?.write(&path)?;
    }
    if let Some(t) = diverged_at {
        bail!(divergence(format!("trajectory diverged at step {t}; partial trajectory written")));
    }
    Ok(())
}

pub fn execute_sweep(spec: &SweepSpec) -> Result<String> {
    let objective = spec.objective.build()?;
    let config = SweepConfig {
        transient_steps: spec.transient_steps,
        sample_steps: spec.sample_steps,
        bias_corrected: spec.bias_corrected,
        period_tol: spec.period_tol,
        q_max: spec.q_max,
        ..SweepConfig::alpha(spec.values.clone(), spec.base, objective, spec.x0.clone())
    };
    let diagram = run_sweep(&config).map_err(core_usage)?;
    Ok(sweep_csv(&diagram))
}

pub fn sweep_cmd(args: &SweepArgs) -> Result<()> {
    let problem = Problem::resolve(&args.problem, true)?;
    let (objective, obj) = problem.objective()?;
    let preset_sweep = problem.preset.as_ref().map(|p| &p.sweep);

    let ranged = args.alpha_min.is_some() || args.alpha_max.is_some() || args.points.is_some();
    let values = match (ranged, preset_sweep) {
        (false, Some(cfg)) => cfg.values.clone(),
        (false, None) => bail!(usage("give --alpha-min and --alpha-max, or a --preset")),
        (true, _) => {
            let first = preset_sweep.map(|c| c.values[0]);
            let last = preset_sweep.and_then(|c| c.values.last().copied());
            let min = args.alpha_min.or(first).ok_or_else(|| usage("--alpha-min is required"))?;
            let max = args.alpha_max.or(last).ok_or_else(|| usage("--alpha-max is required"))?;
            let n = args.points.unwrap_or(DEFAULT_SWEEP_POINTS);
            match args.grid {
                GridKind::Log => log_grid(min, max, n),
                GridKind::Linear => linear_grid(min, max, n),
            }
            .map_err(core_usage)?
        }
    };
    let base = problem.params(Some(values[0]))?;
    let spec = SweepSpec {
        base,
        x0: problem.x0(obj.dim())?,
        objective,
        values,
        transient_steps: args.transient.or(preset_sweep.map(|c| c.transient_steps)).unwrap_or(DEFAULT_TRANSIENT_STEPS),
        sample_steps: args.samples.or(preset_sweep.map(|c| c.sample_steps)).unwrap_or(DEFAULT_SAMPLE_STEPS),
        bias_corrected: problem.bias_corrected.unwrap_or(true),
        period_tol: args.period_tol.or(preset_sweep.map(|c| c.period_tol)).unwrap_or(DEFAULT_PERIOD_TOL),
        q_max: args.q_max.or(preset_sweep.map(|c| c.q_max)).unwrap_or(DEFAULT_Q_MAX),
    };
    let csv = execute_sweep(&spec)?;
    let target = output_name(&args.out);
    emit(&target, &csv)?;
    let path = manifest_path(&args.manifest, &args.out, Some("sweep.manifest.json")).expect("fallback given");
    RunManifest::new("sweep", &spec, vec![target])?.write(&path)?;
    Ok(())
}

fn report_json(report: &StabilityReport) -> Value {
    json!({
        "jacobian": report.jacobian.row_iter().map(|r| r.iter().copied().collect::<Vec<f64>>()).collect::<Vec<_>>(),
        "eigenvalues": report.eigenvalues.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        "spectral_radius": report.spectral_radius,
        "classification": report.classification.as_str(),
    })
}

fn merge(mut base: Value, extra: Value) -> Value {
    if let (Value::Object(b), Value::Object(e)) = (&mut base, extra) {
        b.extend(e);
    }
    base
}

fn print_json(value: &Value) -> Result<()> {
    emit(STDOUT, &(serde_json::to_string_pretty(value)? + "\n"))
}

fn newton_failure(e: Error) -> Result<()> {
    let residual = match e {
        Error::NewtonNotConverged { residual, .. } | Error::SingularNewtonSystem { residual, .. } => Some(residual),
        _ => None,
    };
    print_json(&json!({ "error": e.to_string(), "residual": residual }))?;
    bail!(solver(e.to_string()))
}

pub fn cycle_cmd(args: &CycleArgs) -> Result<()> {
    let p = HyperParams::new(args.alpha, args.beta1, args.beta2, args.epsilon).map_err(core_usage)?;
    if let Some(path) = &args.newton_seed {
        let obj = match (&args.matrix, args.c) {
            (Some(m), _) => read_objective(m)?.build()?,
            (None, Some(c)) => QuadraticObjective::scalar(c).map_err(core_usage)?,
            (None, None) => bail!(usage("--c or --matrix is required")),
        };
        return newton_cycle(&read_state(path)?, args.period, &p, &obj);
    }
    if args.matrix.is_some() {
        bail!(usage("--matrix is only supported together with --newton-seed"));
    }
    if args.period != 2 {
        bail!(usage("closed forms exist for period 2 only; use --newton-seed for other periods"));
    }
    let c = args.c.ok_or_else(|| usage("--c is required"))?;
    let obj = QuadraticObjective::scalar(c).map_err(core_usage)?;
    let c_hat = c_exception(args.alpha, args.beta1, args.beta2);
    let exceptional = is_exceptional(args.alpha, args.beta1, args.beta2, c).is_some();
    let warnings: Vec<&str> = if exceptional { vec!["continuation_not_guaranteed"] } else { vec![] };
    let common = json!({
        "alpha": args.alpha,
        "beta1": args.beta1,
        "beta2": args.beta2,
        "c": c,
        "epsilon": args.epsilon,
        "period": 2,
        "det_dF": det_df(args.alpha, args.beta1, args.beta2, c),
        "c_exception": c_hat,
        "warnings": warnings,
    });

    if args.epsilon == 0.0 {
        let cycle = closed_form_two_cycle(args.alpha, args.beta1, c).map_err(core_usage)?;
        let report = StabilityReport::from_jacobian(analytic_jacobian_t2_at_x1(args.alpha, args.beta1, args.beta2, c))
            .map_err(core_usage)?;
        let det_numeric = numeric_det_df(&cycle.x1, &p, &obj).ok();
        let residual = cycle.verify(&p, &obj).map_err(core_usage)?.0;
        let out = merge(
            common,
            json!({
                "mode": "closed_form",
                "x1": cycle.x1,
                "x2": cycle.x2,
                "residual": residual,
                "det_dF_numeric": det_numeric,
            }),
        );
        return print_json(&merge(out, report_json(&report)));
    }

    if exceptional {
        print_json(&common)?;
        bail!(solver("c equals the exceptional coefficient; continuation not attempted"));
    }
    let n = args.continuation_steps.max(1);
    let targets = if n == 1 {
        vec![args.epsilon]
    } else {
        log_grid(args.epsilon * 1e-4, args.epsilon, n).map_err(core_usage)?
    };
    let result = continue_in_epsilon(args.alpha, args.beta1, args.beta2, c, &targets).map_err(core_usage)?;
    let path: Vec<Value> = result
        .samples
        .iter()
        .map(|s| {
            json!({
                "epsilon": s.epsilon,
                "residual": s.cycle.residual,
                "w": s.cycle.x1.w,
                "spectral_radius": s.report.spectral_radius,
                "classification": s.report.classification.as_str(),
            })
        })
        .collect();
    if let Some(e) = result.failure.clone() {
        print_json(&merge(common, json!({ "mode": "continuation", "continuation": path })))?;
        return newton_failure(e);
    }
    let last = result.last().expect("all targets converged");
    let det_numeric = numeric_det_df(&last.cycle.x1, &p, &obj).ok();
    let out = merge(
        common,
        json!({
            "mode": "continuation",
            "x1": last.cycle.x1,
            "x2": last.cycle.x2,
            "residual": last.cycle.residual,
            "det_dF_numeric": det_numeric,
            "continuation": path,
        }),
    );
    print_json(&merge(out, report_json(&last.report)))
}

fn newton_cycle(seed: &AdamState, q: usize, p: &HyperParams, obj: &QuadraticObjective) -> Result<()> {
    let orbit = match newton_find_cycle(seed, q, p, obj, NEWTON_TOL, NEWTON_MAX_ITER) {
        Ok(orbit) => orbit,
        Err(e @ (Error::NewtonNotConverged { .. } | Error::SingularNewtonSystem { .. } | Error::NonFiniteEvaluation { .. })) => {
            return newton_failure(e)
        }
        Err(e) => return Err(core_usage(e)),
    };
    let d = orbit.minimal_period;
    let jac = iterate_jacobian(&orbit.points[0], d, p, obj).map_err(core_usage)?;
    let report = StabilityReport::from_jacobian(jac).map_err(core_usage)?;
    let mut warnings = Vec::new();
    if d < q {
        warnings.push(if d == 1 { "fixed_point_not_cycle" } else { "minimal_period_below_requested" });
    }
    let x1 = &orbit.points[0];
    let x2 = orbit.points.get(1).unwrap_or(x1);
    let out = json!({
        "mode": "newton",
        "alpha": p.alpha,
        "beta1": p.beta1,
        "beta2": p.beta2,
        "epsilon": p.epsilon,
        "requested_period": q,
        "period": d,
        "x1": x1,
        "x2": x2,
        "points": orbit.points,
        "residual": orbit.residual,
        "iterations": orbit.iterations,
        "det_dF_numeric": if d == 2 { numeric_det_df(x1, p, obj).ok() } else { None },
        "warnings": warnings,
    });
    print_json(&merge(out, report_json(&report)))?;
    if d == 1 && q == 2 {
        bail!(solver("Newton converged to a fixed point, not a 2-cycle"));
    }
    Ok(())
}

pub fn verify_cmd(args: &VerifyArgs) -> Result<()> {
    let suite: Suite = args.suite.parse().map_err(core_usage)?;
    let seed = args.seed.unwrap_or(DEFAULT_SEED);
    let checks = run_suite(suite, seed);
    let mut report = format!("# suite={suite} seed={seed}\n");
    for check in &checks {
        report.push_str(&format!("{check}\n"));
    }
    emit(STDOUT, &report)?;
    if !all_passed(&checks) {
        bail!(verification(format!("suite {suite} failed")));
    }
    Ok(())
}

fn replay_output(manifest: &RunManifest) -> Result<String> {
    match manifest.command.as_str() {
        "simulate" => {
            let spec: SimulateSpec = serde_json::from_value(manifest.parameters.clone())
                .map_err(|e| usage(format!("bad simulate parameters: {e}")))?;
            Ok(execute_simulate(&spec)?.0)
        }
        "sweep" => {
            let spec: SweepSpec = serde_json::from_value(manifest.parameters.clone())
                .map_err(|e| usage(format!("bad sweep parameters: {e}")))?;
            execute_sweep(&spec)
        }
        other => bail!(usage(format!("cannot replay command `{other}`"))),
    }
}

pub fn replay_cmd(args: &ReplayArgs) -> Result<()> {
    let manifest = RunManifest::read(&args.manifest)?;
    if manifest.output_files.len() != 1 {
        bail!(usage("manifest must list exactly one output file"));
    }
    let recorded = &manifest.output_files[0];
    let data = replay_output(&manifest)?;
    if args.check {
        if recorded == STDOUT {
            bail!(usage("output went to stdout; nothing to compare against"));
        }
        let original = fs::read_to_string(recorded).with_context(|| format!("reading {recorded}"))?;
        if original != data {
            bail!(verification(format!("replay of {} differs from {recorded}", args.manifest.display())));
        }
        eprintln!("replay matches {recorded}");
        return Ok(());
    }
    let target = match &args.out_dir {
        Some(dir) => {
            let name = Path::new(recorded).file_name().map_or_else(|| "replay.csv".into(), |n| n.to_owned());
            dir.join(name).display().to_string()
        }
        None => recorded.clone(),
    };
    emit(&target, &data)
}
