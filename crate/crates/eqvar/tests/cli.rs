use std::process::Command;

fn eqvar(args: &[&str]) -> (bool, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_eqvar")).args(args).output().unwrap();
    (out.status.success(), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

#[test]
fn count_dags() {
    let (ok, out, _) = eqvar(&["count-dags", "--d", "4", "--q", "3"]);
    assert!(ok);
    assert!(out.lines().nth(1).unwrap().starts_with("4,3,543,"), "{out}");
    let (ok, _, err) = eqvar(&["count-dags", "--d", "9", "--q", "2"]);
    assert!(!ok);
    assert!(err.contains("error"));
}

#[test]
fn bounds_flags_the_reversal_case() {
    let (ok, out, err) =
        eqvar(&["bounds", "--d", "100", "--q", "3", "--beta-min", "0.5", "--M", "2", "--delta", "0.1"]);
    assert!(ok, "{err}");
    assert!(out.contains("case,paper_value,oracle_value,abs_diff"));
    assert!(out.lines().any(|l| l.starts_with("reversal,") && l.ends_with(",false")), "{out}");
    assert_eq!(out.lines().filter(|l| l.ends_with(",true")).count(), 5);
    assert!(err.contains("reversal"));
}

#[test]
fn run_is_reproducible_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("fig.svg");
    let args = ["run", "--d", "6", "--q", "1,2", "--n", "50,100", "--reps", "5", "--seed", "7", "--no-timing"];
    let (ok, first, err) = eqvar(&[&args[..], &["--threads", "1", "--plot", svg.to_str().unwrap()]].concat());
    assert!(ok, "{err}");
    let (_, second, _) = eqvar(&[&args[..], &["--threads", "3"]].concat());
    assert_eq!(first, second);
    assert_eq!(first.lines().next().unwrap(), "d,q,n,reps,successes,errors,recovery_rate,mean_ms,seed");
    assert_eq!(first.lines().count(), 5);
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<polyline"));
    assert_eq!(std::fs::read_to_string(svg.with_extension("csv")).unwrap(), first);
}

#[test]
fn threads_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_eqvar"))
        .args(["run", "--d", "4", "--q", "1", "--n", "20", "--reps", "2", "--no-timing"])
        .env("THREADS", "0")
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("threads"));
}

#[test]
fn bad_gamma_is_rejected() {
    let (ok, _, err) = eqvar(&["run", "--gamma", "sometimes"]);
    assert!(!ok);
    assert!(err.contains("gamma"));
}

#[test]
fn validate_passes() {
    let (ok, out, err) = eqvar(&["validate"]);
    assert!(ok, "{out}\n{err}");
    assert!(out.starts_with("instance,primary,oracle,abs_diff,tolerance,pass"));
    assert!(out.lines().skip(1).all(|l| l.ends_with(",true")));
}
