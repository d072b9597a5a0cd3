use std::path::Path;
use std::process::{Command, Output};

fn wpcn(args: &[&str], seed_env: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_wpcn"));
    cmd.args(args).env_remove("WPCN_SEED");
    if let Some(s) = seed_env {
        cmd.env("WPCN_SEED", s);
    }
    cmd.output().expect("binary runs")
}

fn smoke() -> String {
    format!("{}/configs/smoke.json", env!("CARGO_MANIFEST_DIR"))
}

fn objective(out: &Output) -> f64 {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    v["objective"].as_f64().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn verify_on_bundled_config_succeeds() {
    let out = wpcn(&["verify"], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("all checks passed"));
}

#[test]
fn failing_verification_exits_one_and_names_the_invariant() {
    let out = wpcn(&["verify", "--suite", "kkt", "--kkt-tol", "0"], None);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("failed invariants:") && stderr.contains("kkt_max_sum_time_budget"), "{stderr}");
    let out = wpcn(&["verify", "--suite", "kkt", "--set", "solver.tau0_grid_points=1"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_prints_a_report() {
    let out = wpcn(&["solve", "--config", &smoke()], None);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in ["objective", "tau0", "tau", "theta", "rates", "residuals"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn no_uncertainty_makes_robust_and_non_robust_agree() {
    let cfg = smoke();
    let a = objective(&wpcn(&["solve", "--config", &cfg, "--set", "csi.sigma_est2=0"], None));
    let b = objective(&wpcn(
        &["solve", "--config", &cfg, "--set", "csi.sigma_est2=0", "--set", "solver.scheme=non_robust"],
        None,
    ));
    assert_eq!(a, b);
}

#[test]
fn seed_precedence_is_file_then_env_then_set() {
    let cfg = smoke();
    let file = objective(&wpcn(&["solve", "--config", &cfg], None));
    let explicit_file_seed = objective(&wpcn(&["solve", "--config", &cfg, "--set", "seed=1"], None));
    let env = objective(&wpcn(&["solve", "--config", &cfg], Some("5")));
    let env_and_set = objective(&wpcn(&["solve", "--config", &cfg, "--set", "seed=1"], Some("5")));
    let set_five = objective(&wpcn(&["solve", "--config", &cfg, "--set", "seed=5"], None));
    assert_eq!(file, explicit_file_seed);
    assert_eq!(env, set_five);
    assert_eq!(env_and_set, file);
    assert_ne!(file, env);
}

#[test]
fn configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad_json = write(dir.path(), "bad.json", "{ not json");
    let bad_field = write(dir.path(), "field.json", r#"{"antennas":{"n_t":0}}"#);
    let cases: Vec<Vec<&str>> = vec![
        vec!["solve", "--config", "/definitely/missing.json"],
        vec!["solve", "--config", &bad_json],
        vec!["solve", "--config", &bad_field],
        vec!["solve", "--config", "/dev/null", "--set", "novalue"],
        vec!["verify", "--suite", "nope"],
        vec!["plot", "--summary", "/definitely/missing.csv", "--metric", "tau0", "--out", "x.svg"],
        vec!["frobnicate"],
    ];
    for args in cases {
        let out = wpcn(&args, None);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = wpcn(&["solve", "--config", &smoke()], Some("not-a-number"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn plot_draws_one_polyline_per_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("sweep_var,sweep_value,scheme,objective,metric,mean,stderr,trials\n");
    for scheme in ["proposed", "non_robust"] {
        for (i, p) in [20, 25, 30, 35, 40].iter().enumerate() {
            csv += &format!("p_max_dbm,{p},{scheme},max_sum,sum_achieved,{},0,10\n", i as f64 + 0.5);
            csv += &format!("p_max_dbm,{p},{scheme},max_sum,tau0,0.5,0,10\n");
        }
    }
    let summary = write(dir.path(), "summary.csv", &csv);
    let svg_path = dir.path().join("plot.svg");
    let out =
        wpcn(&["plot", "--summary", &summary, "--metric", "sum_achieved", "--out", svg_path.to_str().unwrap()], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<svg"));
    let polylines: Vec<&str> = svg.lines().filter(|l| l.starts_with("<polyline")).collect();
    assert_eq!(polylines.len(), 2);
    for line in polylines {
        let points = line.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert_eq!(points.split_whitespace().count(), 5);
    }
    let out = wpcn(&["plot", "--summary", &summary, "--metric", "missing", "--out", svg_path.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_output_is_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "spec.json",
        r#"{
            "variable": "p_max_dbm",
            "values": [25, 35],
            "trials": 3,
            "schemes": ["proposed", "non_robust"],
            "objectives": ["max_sum"],
            "seed": 42,
            "base_config": { "antennas": { "n_t": 2, "n_r": 2, "n_u": 1 }, "users": { "count": 2 } },
            "solver": { "tau0_grid_points": 10 }
        }"#,
    );
    let mut outputs = Vec::new();
    for (name, threads) in [("a", "1"), ("b", "3")] {
        let out_dir = dir.path().join(name);
        let out = wpcn(&["sweep", "--spec", &spec, "--out", out_dir.to_str().unwrap(), "--threads", threads], None);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        outputs.push((
            std::fs::read(out_dir.join("summary.csv")).unwrap(),
            std::fs::read(out_dir.join("trials.csv")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
    let summary = String::from_utf8(outputs[0].0.clone()).unwrap();
    // 2 values x 2 schemes x 1 objective x 5 metrics, plus the header.
    assert_eq!(summary.lines().count(), 21);
    let trials = String::from_utf8(outputs[0].1.clone()).unwrap();
    assert_eq!(trials.lines().count(), 1 + 2 * 3 * 2);

    let other = dir.path().join("c");
    let out = wpcn(&["sweep", "--spec", &spec, "--out", other.to_str().unwrap()], Some("7"));
    assert!(out.status.success());
    assert_ne!(std::fs::read(other.join("summary.csv")).unwrap(), outputs[0].0);
}
