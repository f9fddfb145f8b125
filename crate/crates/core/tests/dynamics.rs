use adam_dynamics::bifurcation::{
    alpha_bifurcation, detect_period, diagonalize, experiment_preset, log_grid, per_mode_analysis, run_sweep,
    to_eigen_coordinates, Period, PresetId, SweepConfig,
};
use adam_dynamics::cycle::{continue_in_epsilon, newton_find_cycle, Stability, NEWTON_MAX_ITER, NEWTON_TOL};
use adam_dynamics::output::{sweep_csv, trajectory_csv};
use adam_dynamics::{simulate, AdamState, HyperParams, QuadraticObjective, MACHINE_EPS};
use nalgebra::{DMatrix, DVector};

fn scalar_run(x0: &AdamState, p: &HyperParams, c: f64, steps: u64) -> AdamState {
    let obj = QuadraticObjective::scalar(c).unwrap();
    simulate(x0, p, &obj, steps, true, steps).unwrap().last().clone()
}

fn component(x: &AdamState, i: usize) -> AdamState {
    AdamState::scalar(x.m[i], x.v[i], x.w[i])
}

#[test]
fn signed_permutation_decouples_into_scalar_runs() {
    let p = HyperParams::new(0.05, 0.9, 0.999, 1e-8).unwrap();
    let mu = [0.7, 3.0, 12.0];
    // Row k of q is the k-th eigenvector; y = Q w.
    let q = DMatrix::from_row_slice(3, 3, &[0.0, -1.0, 0.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0]);
    let c = q.transpose() * DMatrix::from_diagonal(&DVector::from_row_slice(&mu)) * &q;
    let obj = QuadraticObjective::centered(c).unwrap();
    let x0 = AdamState::new(vec![0.1, -0.2, 0.0], vec![0.01, 0.0, 0.3], vec![0.5, -1.0, 2.0]).unwrap();

    let full = simulate(&x0, &p, &obj, 1000, true, 1000).unwrap();
    let y_end = to_eigen_coordinates(&q, full.last());
    let y0 = to_eigen_coordinates(&q, &x0);
    for (k, &c) in mu.iter().enumerate() {
        let single = scalar_run(&component(&y0, k), &p, c, 1000);
        assert!(component(&y_end, k).max_abs_diff(&single) < 1e-10, "mode {k}");
    }
}

#[test]
fn eigencoordinate_system_is_a_direct_sum() {
    let preset = experiment_preset(PresetId::Multidim);
    let (_, mu) = diagonalize(&preset.objective).unwrap();
    let diag = QuadraticObjective::centered(DMatrix::from_diagonal(&DVector::from_row_slice(&mu))).unwrap();
    let y0 = AdamState::new(vec![0.0, 0.0], vec![0.0, 0.0], vec![0.3, -0.7]).unwrap();
    let joint = simulate(&y0, &preset.params, &diag, 1000, true, 1000).unwrap();
    for (k, &c) in mu.iter().enumerate() {
        let single = scalar_run(&component(&y0, k), &preset.params, c, 1000);
        assert!(component(joint.last(), k).max_abs_diff(&single) < 1e-10);
    }
    let analysis = per_mode_analysis(&preset.objective, &preset.params).unwrap();
    assert!(analysis.eigen_residual < 1e-12);
}

#[test]
fn experiment_two_trajectory_settles_on_the_cycle() {
    let preset = experiment_preset(PresetId::Experiment2);
    let record = simulate(&preset.x0, &preset.params, &preset.objective, 10_000, true, 1).unwrap();
    let tail: Vec<f64> = record.states[record.states.len() - 100..].iter().map(|(_, x)| x.w[0]).collect();
    assert!(tail.iter().all(|w| (w.abs() - 1.0 / 6.0).abs() < 1e-3));
    assert!(record.verify_replay().unwrap());
}

#[test]
fn experiment_one_keeps_leaving_the_minimum() {
    let preset = experiment_preset(PresetId::Experiment1);
    let record = simulate(&preset.x0, &preset.params, &preset.objective, 100_000, true, 1).unwrap();
    let window_max =
        record.states.iter().filter(|(t, _)| *t >= 10_000).map(|(_, x)| x.w[0].abs()).fold(0.0, f64::max);
    assert!(window_max > 1e-6);
}

#[test]
fn continued_cycle_is_what_the_trajectory_reaches() {
    let targets = log_grid(1e-10, 1e-6, 10).unwrap();
    let result = continue_in_epsilon(0.5, 0.2, 0.5, 1.0, &targets).unwrap();
    assert!(result.all_converged());
    let last = result.last().unwrap();
    assert_eq!(last.report.classification, Stability::Attractive);
    assert!((last.cycle.x1.w[0].abs() - 0.16666).abs() < 1e-4);

    // Newton from a perturbed seed lands on the same orbit.
    let p = HyperParams::new(0.5, 0.2, 0.5, 1e-6).unwrap();
    let obj = QuadraticObjective::scalar(1.0).unwrap();
    let mut seed = last.cycle.x1.clone();
    seed.w[0] *= 1.01;
    seed.m[0] *= 0.99;
    let orbit = newton_find_cycle(&seed, 2, &p, &obj, NEWTON_TOL, NEWTON_MAX_ITER).unwrap();
    assert_eq!(orbit.minimal_period, 2);
    assert!(orbit.points[0].max_abs_diff(&last.cycle.x1) < 1e-9);
}

fn small_sweep() -> SweepConfig {
    let p = HyperParams::new(1e-3, 0.2, 0.5, 1e-6).unwrap();
    let mut config = SweepConfig::alpha(
        log_grid(1e-4, 1e-2, 24).unwrap(),
        p,
        QuadraticObjective::scalar(1.0).unwrap(),
        AdamState::scalar(0.0, 0.0, MACHINE_EPS),
    );
    config.transient_steps = 5000;
    config.sample_steps = 128;
    config
}

#[test]
fn sweeps_are_reproducible() {
    let config = small_sweep();
    let a = sweep_csv(&run_sweep(&config).unwrap());
    let b = sweep_csv(&run_sweep(&config).unwrap());
    assert_eq!(a, b);
    assert!(a.ends_with("# predicted_bifurcation=0.003\n"), "{}", a.lines().last().unwrap());
}

#[test]
fn far_below_the_threshold_everything_converges() {
    let mut config = small_sweep();
    let threshold = alpha_bifurcation(0.2, 1e-6, 1.0);
    config.values = log_grid(threshold / 100.0, threshold / 10.0, 8).unwrap();
    let diagram = run_sweep(&config).unwrap();
    for s in &diagram.samples {
        assert_eq!(s.period, Some(Period::Periodic(1)));
        assert!(s.w_samples.last().unwrap()[0].abs() < 1e-6);
    }
}

#[test]
fn transition_sits_next_to_the_predicted_rate() {
    let diagram = run_sweep(&small_sweep()).unwrap();
    let predicted = diagram.predicted_bifurcation.unwrap();
    let values = &diagram.config.values;
    let k = diagram.samples.iter().position(|s| s.period != Some(Period::Periodic(1))).unwrap();
    assert!(k > 0 && values[k - 1] <= predicted && predicted <= values[k] * 1.0001);
    let tail = &diagram.samples[k].w_samples;
    assert_eq!(detect_period(tail, 1e-6, 64).unwrap(), Period::Periodic(2));
}

#[test]
fn trajectory_csv_layout() {
    let obj = QuadraticObjective::centered(DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0])).unwrap();
    let p = HyperParams::new(0.1, 0.9, 0.999, 1e-8).unwrap();
    let x0 = AdamState::new(vec![0.0; 2], vec![0.0; 2], vec![1.0, -1.0]).unwrap();
    let csv = trajectory_csv(&simulate(&x0, &p, &obj, 10, true, 5).unwrap());
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,m_1,m_2,v_1,v_2,w_1,w_2");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("0,") && lines[3].starts_with("10,"));
}
