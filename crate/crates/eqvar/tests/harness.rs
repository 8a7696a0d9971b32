use eqvar::harness::{replicate_model, run_experiment, ExperimentSpec, GammaMode, RESULTS_HEADER};
use eqvar_core::learner::learn_dag;
use eqvar_core::LearnerConfig;

fn small(reps: usize) -> ExperimentSpec {
    ExperimentSpec {
        d_grid: vec![6, 8],
        q_grid: vec![1, 2],
        n_grid: vec![30, 200],
        reps,
        gamma_mode: GammaMode::Auto,
        seed: 42,
        record_timing: false,
        ..Default::default()
    }
}

#[test]
fn output_is_identical_for_any_thread_count() {
    let one = run_experiment(&ExperimentSpec { threads: Some(1), ..small(12) }).unwrap();
    let four = run_experiment(&ExperimentSpec { threads: Some(4), ..small(12) }).unwrap();
    assert_eq!(one.to_csv_string(), four.to_csv_string());
    assert_eq!(one, four);
    assert!(one.to_csv_string().starts_with(RESULTS_HEADER));
}

#[test]
fn adding_grid_cells_leaves_existing_cells_unchanged() {
    let base = run_experiment(&small(10)).unwrap();
    let wider =
        run_experiment(&ExperimentSpec { d_grid: vec![6, 8, 10], n_grid: vec![30, 90, 200], ..small(10) }).unwrap();
    for c in &base.cells {
        assert_eq!(Some(c), wider.cell(c.d, c.q, c.n));
    }
}

#[test]
fn counts_are_consistent() {
    let r = run_experiment(&small(7)).unwrap();
    assert_eq!(r.cells.len(), 8);
    for c in &r.cells {
        assert!(c.successes + c.errors <= c.reps);
        assert_eq!(c.recovery_rate, c.successes as f64 / c.reps as f64);
        assert!(c.mean_ms.is_none());
    }
    let errors: usize = r.cells.iter().map(|c| c.errors).sum();
    assert_eq!(errors, r.failures.len());
}

/// With 10^5 draws the sample learner matches the learner run on the exact
/// covariance of each replicate's model.
#[test]
fn large_samples_match_population_learner() {
    let spec = ExperimentSpec {
        d_grid: vec![5],
        q_grid: vec![2],
        n_grid: vec![100_000],
        reps: 20,
        gamma_mode: GammaMode::PopulationHalfGap,
        ..Default::default()
    };
    let r = run_experiment(&spec).unwrap();
    let population = (0..spec.reps)
        .filter(|&rep| {
            let m = replicate_model(&spec, 5, 2, rep).unwrap();
            let cfg = LearnerConfig::with_gamma(2, m.variance_gap().unwrap() / 2.0);
            learn_dag(&m.covariance().unwrap(), &cfg).unwrap().dag == *m.dag()
        })
        .count();
    assert_eq!(r.cells[0].successes, population, "{:?}", r.failures);
    assert!(population >= 15);
}

#[test]
fn one_sample_recovers_nothing() {
    let spec = ExperimentSpec {
        d_grid: vec![20],
        q_grid: vec![2],
        n_grid: vec![1],
        reps: 20,
        gamma_mode: GammaMode::Auto,
        ..Default::default()
    };
    let r = run_experiment(&spec).unwrap();
    assert_eq!(r.cells[0].successes, 0);
    assert_eq!(r.cells[0].reps, 20);
}

#[test]
fn recovery_does_not_improve_with_larger_in_degree() {
    let spec = ExperimentSpec {
        d_grid: vec![12],
        q_grid: vec![1, 2, 3],
        n_grid: vec![150],
        reps: 200,
        gamma_mode: GammaMode::PopulationHalfGap,
        seed: 3,
        ..Default::default()
    };
    let r = run_experiment(&spec).unwrap();
    for w in r.cells.windows(2) {
        let band = 2.0 * (w[0].std_error().powi(2) + w[1].std_error().powi(2)).sqrt();
        assert!(
            w[1].recovery_rate <= w[0].recovery_rate + band,
            "q={} rate {} vs q={} rate {}",
            w[0].q,
            w[0].recovery_rate,
            w[1].q,
            w[1].recovery_rate
        );
    }
}

#[test]
fn fixed_gamma_runs() {
    let r = run_experiment(&ExperimentSpec { gamma_mode: GammaMode::Fixed(0.01), ..small(4) }).unwrap();
    assert_eq!(r.cells.len(), 8);
}
