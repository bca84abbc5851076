use std::fs;
use std::path::Path;

use aloha_sim::{parse_config, run_experiment, ExperimentError, RunOptions};
use serde_json::Value;

fn run(text: &str, dir: &Path) -> aloha_sim::RunReport {
    let spec = parse_config(text).unwrap();
    run_experiment(&spec, &RunOptions { out_dir: Some(dir.to_path_buf()), jobs: Some(1), ..RunOptions::default() })
        .unwrap()
}

fn lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().map(str::to_string).collect()
}

const DELAY: &str = r#"
kind = "delay_vs_distance"
lambda = 1.0
p = 0.3
beta = 1.2
eta = 1.5
window_half = 12.0
replications = 1
distances = [2, 5, 9]
"#;

#[test]
fn single_replication_gives_one_row_per_distance() {
    let dir = tempfile::tempdir().unwrap();
    run(DELAY, dir.path());
    let raw = lines(&dir.path().join("raw.csv"));
    assert_eq!(raw[0], "sweep_value,replication,distance,delay,hops,censored");
    assert_eq!(raw.len(), 1 + 3);
    for (row, x) in raw[1..].iter().zip(["2", "5", "9"]) {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(f.len(), 6);
        assert_eq!((f[0], f[1], f[2]), ("base", "0", x));
        assert_eq!(f[5], "0");
        assert!(f[3].parse::<u64>().unwrap() >= 1);
    }
    let summary = lines(&dir.path().join("summary.csv"));
    assert_eq!(summary[0], "sweep_value,distance,mean_delay,se_delay,mean_hops,se_hops,n,censored_fraction");
    assert_eq!(summary.len(), 4);
    let hop = lines(&dir.path().join("hop_length.csv"));
    assert_eq!(hop[0], "sweep_value,distance,mean_hop_length,se_hop_length,n");
}

#[test]
fn manifest_records_config_and_planned_runs() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
kind = "formulas"
lambda = 1.0
p = 0.2
beta = 2.0
eta = inf
replications = 200
seed = 17

[sweep]
p = [0.1, 0.2, 0.3, 0.4, 0.5]
"#;
    let report = run(text, dir.path());
    let m: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["kind"], "formulas");
    assert_eq!(m["seed"], 17);
    assert_eq!(m["config"]["eta"], "inf");
    assert_eq!(m["config"]["window_half"], 50.0);
    assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));
    assert!(m["wall_time_seconds"].as_f64().unwrap() >= 0.0);
    assert_eq!(m["sweep_points"].as_array().unwrap().len(), 5);
    assert_eq!(report.planned_runs, 5);

    let spec = parse_config(&text.replace("formulas", "degrees").replace("eta = inf", "eta = 1.0")).unwrap();
    assert_eq!(spec.planned_runs(), 1000);

    let forms: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("formulas.json")).unwrap()).unwrap();
    assert_eq!(forms[0]["sweep_value"], "0.1");
    assert_eq!(forms[4]["values"]["expected_nn_time"], "inf");
}

#[test]
fn degree_artifacts_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
kind = "degrees"
lambda = 1.0
p = 0.2
beta = 1.2
eta = 1.0
window_half = 15.0
replications = 20
"#;
    let spec = parse_config(text).unwrap();
    let opts = RunOptions { out_dir: Some(dir.path().to_path_buf()), verify: true, ..RunOptions::default() };
    let report = run_experiment(&spec, &opts).unwrap();
    assert!(report.verified(), "{:?}", report.checks);
    assert_eq!(report.checks.len(), 5);
    assert_eq!(lines(&dir.path().join("raw.csv")).len(), 21);
    let hist = lines(&dir.path().join("histograms.csv"));
    assert_eq!(hist[0], "sweep_value,direction,degree,count,fraction");
    let in_rows: Vec<_> = hist.iter().filter(|l| l.contains(",in,")).collect();
    assert!(in_rows.len() <= 2, "receivers see at most one transmitter for beta >= 1");
}

#[test]
fn connect_time_and_percolation_json() {
    let dir = tempfile::tempdir().unwrap();
    run(
        r#"
kind = "nn_time"
lambda = 1.0
p = 0.125
beta = 2.0
eta = inf
window_half = 8.0
replications = 50
"#,
        dir.path(),
    );
    let t: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("times.json")).unwrap()).unwrap();
    for key in ["estimate", "std_error", "n", "censored_fraction", "diverges"] {
        assert!(!t[0][key].is_null(), "{key}");
    }
    assert_eq!(t[0]["n"], 50);

    let dir = tempfile::tempdir().unwrap();
    run(
        r#"
kind = "percolation_scan"
lambda = 1.0
p = 0.2
beta = 1.2
eta = 1.0
window_half = 10.0
replications = 3

[sweep]
eta = [1.0, 1.5]
"#,
        dir.path(),
    );
    let c: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("components.json")).unwrap()).unwrap();
    assert_eq!(c[0]["threshold_ok"], false);
    assert_eq!(c[1]["threshold_ok"], true);
    for key in ["eta", "lambda", "giant_fraction", "n_components"] {
        assert!(!c[1][key].is_null(), "{key}");
    }
}

#[test]
fn time_constant_writes_fit() {
    let dir = tempfile::tempdir().unwrap();
    run(
        r#"
kind = "time_constant_vs_p"
lambda = 1.0
p = 0.2
beta = 1.2
eta = 1.5
window_half = 12.0
replications = 20
distances = [2, 4, 6, 8]
min_distance = 2.0

[sweep]
p = [0.2, 0.4]
"#,
        dir.path(),
    );
    let fit = lines(&dir.path().join("fit.csv"));
    assert_eq!(fit[0], "sweep_value,mu_hat,mu_se,c_hat,r_squared,distances");
    assert_eq!(fit.len(), 3);
    assert!(fit[1].starts_with("0.2,"));
}

#[test]
fn failed_replication_names_sweep_replication_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    // almost surely empty windows: the probe has no neighbour
    let spec = parse_config(
        r#"
kind = "nn_time"
lambda = 0.001
p = 0.2
beta = 2.0
eta = inf
window_half = 1.0
replications = 3
seed = 5
"#,
    )
    .unwrap();
    let err = run_experiment(&spec, &RunOptions { out_dir: Some(dir.path().to_path_buf()), ..RunOptions::default() })
        .unwrap_err();
    match &err {
        ExperimentError::Replication { sweep_value, replication, seed, .. } => {
            assert_eq!((sweep_value.as_str(), *replication, *seed), ("base", 0, 5));
        }
        other => panic!("{other:?}"),
    }
    let msg = err.to_string();
    assert!(msg.contains("replication 0") && msg.contains("seed 5"), "{msg}");
}

#[test]
fn seed_override_changes_raw_output() {
    let spec = parse_config(DELAY).unwrap();
    let raw = |seed: Option<u64>| {
        let dir = tempfile::tempdir().unwrap();
        run_experiment(&spec, &RunOptions { seed, out_dir: Some(dir.path().to_path_buf()), ..RunOptions::default() })
            .unwrap();
        fs::read(dir.path().join("raw.csv")).unwrap()
    };
    assert_eq!(raw(None), raw(Some(0)));
    assert_ne!(raw(None), raw(Some(1)));
}
