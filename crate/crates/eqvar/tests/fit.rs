use std::io::Write;

use eqvar::io::{read_json, write_data_file, LearnResultJson};
use eqvar::{fit_from_file, FitError, FitOptions, GammaMode};
use eqvar_core::{SemModel, WeightedDag};

fn opts(q: usize) -> FitOptions {
    FitOptions { q, gamma: GammaMode::Auto, tuning_constant: 1.0, center: false }
}

#[test]
fn single_edge_from_many_draws() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.csv");
    let m = SemModel::new(WeightedDag::from_edges(2, &[(0, 1, 0.7)]).unwrap(), 1.0).unwrap();
    write_data_file(&path, &m.sample(100_000, 1)).unwrap();
    let fit = fit_from_file(&path, &opts(1)).unwrap();
    assert_eq!(fit.result.dag.edges(), vec![(0, 1)]);
    assert!(fit.warnings.is_empty());
}

#[test]
fn non_numeric_cell_is_reported_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.csv");
    std::fs::write(&path, "x0,x1,x2,x3\n1,2,3,4\n5,6,oops,8\n").unwrap();
    let err = fit_from_file(&path, &opts(1)).unwrap_err();
    assert!(matches!(err, FitError::Format(_)));
    assert!(err.to_string().contains("row 3, column 3"), "{err}");
}

#[test]
fn in_degree_must_fit_the_column_count() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.csv");
    std::fs::write(&path, "1,2,3\n4,5,7\n1,1,0\n").unwrap();
    for q in [0, 2, 3, 5] {
        assert!(matches!(fit_from_file(&path, &opts(q)), Err(FitError::Argument(_))), "q={q}");
    }
    let pop = FitOptions { gamma: GammaMode::PopulationHalfGap, ..opts(1) };
    assert!(matches!(fit_from_file(&path, &pop), Err(FitError::Argument(_))));
}

#[test]
fn single_row_warns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.csv");
    std::fs::write(&path, "1,2,3,4\n").unwrap();
    match fit_from_file(&path, &FitOptions { gamma: GammaMode::Fixed(0.1), ..opts(1) }) {
        Ok(out) => assert_eq!(out.warnings.len(), 1),
        // A rank-one covariance may also be rejected outright.
        Err(FitError::Learn(_)) => {}
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn cli_fit_writes_result_json() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("x.csv");
    let out = dir.path().join("fit.json");
    let m =
        SemModel::new(WeightedDag::from_edges(4, &[(0, 1, 0.8), (1, 2, -0.6), (3, 2, 0.9)]).unwrap(), 0.25).unwrap();
    write_data_file(&data, &m.sample(20_000, 9)).unwrap();
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_eqvar"))
        .args(["fit", "--q", "2", "--gamma", "0.02", "--data"])
        .arg(&data)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let r: LearnResultJson = read_json(&out).unwrap();
    assert_eq!(r.d, 4);
    assert_eq!(r.edges, vec![[0, 1], [1, 2], [3, 2]]);
    assert_eq!(r.gamma, 0.02);
    assert_eq!(r.order.len(), 4);
    assert_eq!(r.sigma_k.len(), 4);
    let _ = std::io::stdout().flush();
}
