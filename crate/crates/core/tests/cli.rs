//! End-to-end checks of the `oncopoisson` binary: outputs, exit codes and
//! round trips through the library's readers.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use oncopoisson::io::{read_cohort, read_incidence, read_trajectories};
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oncopoisson"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn fixation_examples() {
    for (args, expected) in [
        (&["--model", "moran", "--r", "2", "--n", "10"][..], "0.500488759"),
        (&["--model", "branching", "--p", "0.75"][..], "0.666666667"),
        (&["--model", "branching", "--p", "0.5"][..], "0.000000000"),
    ] {
        let mut full = vec!["fixation"];
        full.extend_from_slice(args);
        let out = run(&full);
        assert_eq!(code(&out), 0);
        assert_eq!(stdout(&out).trim(), expected);
    }
}

#[test]
fn fixation_exit_codes() {
    assert_eq!(code(&run(&["fixation", "--model", "moran", "--r", "-1", "--n", "10"])), 1);
    assert_eq!(code(&run(&["fixation", "--model", "branching", "--p", "1.5"])), 1);
    assert_eq!(code(&run(&["fixation", "--model", "moran", "--r", "2"])), 2);
    assert_eq!(code(&run(&["fixation", "--model", "branching", "--r", "2", "--n", "3"])), 2);
    assert_eq!(code(&run(&["fixation", "--model", "branching", "--p", "abc"])), 2);
    assert_eq!(code(&run(&["nonsense"])), 2);
}

fn incidence(dir: &TempDir, extra: &[&str]) -> (i32, Vec<String>) {
    let out_path = dir.path().join("inc.csv");
    let mut args = vec![
        "incidence", "--c", "2e-8", "--gamma", "3", "--sigma", "0.01", "--max-age", "80", "--out",
    ];
    args.push(path_str(&out_path));
    args.extend_from_slice(extra);
    let out = run(&args);
    let lines = fs::read_to_string(&out_path)
        .map(|s| s.lines().map(String::from).collect())
        .unwrap_or_default();
    (code(&out), lines)
}

#[test]
fn incidence_rows() {
    let dir = TempDir::new().unwrap();
    let (status, lines) = incidence(&dir, &["--approx"]);
    assert_eq!(status, 0);
    assert_eq!(lines[0], "age,incidence");
    assert_eq!(lines[1], "0,0.000000000e0");
    assert_eq!(lines.last().unwrap(), "80,1.024000000e-2");
    assert_eq!(lines.len(), 82);

    let (status, lines) = incidence(&dir, &["--exact"]);
    assert_eq!(status, 0);
    assert_eq!(lines[1], "0,0.000000000e0");
    let at80: f64 = lines.last().unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((at80 - (1.0 - (-0.01024f64).exp())).abs() < 1e-12);
    assert!((at80 - 0.0101877).abs() < 1e-7);

    let (status, lines) = incidence(&dir, &["--delay", "10"]);
    assert_eq!(status, 0);
    assert_eq!(lines[11], "10,0.000000000e0");
}

#[test]
fn incidence_round_trips_and_approx_is_exact_power() {
    let dir = TempDir::new().unwrap();
    let (_, _) = incidence(&dir, &["--approx"]);
    let rows = read_incidence(fs::File::open(dir.path().join("inc.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 81);
    for (t, v) in rows {
        let expected = 2e-8 * t.powi(3);
        assert!((v - expected).abs() <= 1e-9 * expected, "t={t}");
    }
}

#[test]
fn incidence_exit_codes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("x.csv");
    let base = |c: &str, g: &str, s: &str| {
        run(&[
            "incidence", "--c", c, "--gamma", g, "--sigma", s, "--max-age", "10", "--out", path_str(&out),
        ])
    };
    assert_eq!(code(&base("1e-8", "3", "0")), 1);
    assert_eq!(code(&base("1e-8", "3", "1.5")), 1);
    assert_eq!(code(&base("1e-8", "0", "0.1")), 1);
    assert_eq!(code(&base("-1e-8", "3", "0.1")), 1);
    assert_eq!(code(&base("1e-8", "3", "0.1")), 0);
    let (status, _) = incidence(&dir, &["--approx", "--delay", "1"]);
    assert_eq!(status, 2);
    assert_eq!(code(&run(&["incidence", "--c", "1e-8"])), 2);
}

fn simulate(dir: &Path, name: &str, extra: &[&str]) -> Output {
    let out = dir.join(name);
    let mut args = vec!["simulate", "--out", path_str(&out)];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn simulate_zero_rate_and_round_trip() {
    let dir = TempDir::new().unwrap();
    let traj = dir.path().join("events.csv");
    let out = simulate(
        dir.path(),
        "zero.csv",
        &[
            "--cohort", "1000", "--horizon", "80", "--seed", "42",
            "--rate-model", "constant:mu=0", "--sigma-model", "constant:sigma=1",
            "--trajectories", path_str(&traj),
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("zero.csv")).unwrap();
    assert!(text.starts_with('#'));
    let rows = read_cohort(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 81);
    assert!(rows.iter().all(|r| r.empirical_incidence == 0.0));
    assert!(read_trajectories(fs::File::open(&traj).unwrap()).unwrap().is_empty());
}

#[test]
fn simulate_is_byte_deterministic() {
    let dir = TempDir::new().unwrap();
    let args = [
        "--cohort", "5000", "--horizon", "60", "--seed", "7",
        "--rate-model", "powerlaw:mu0=6e-5,gamma=3", "--sigma-model", "moran:r=1.5,n=20",
    ];
    let mut a_args = args.to_vec();
    let ta = dir.path().join("ta.csv");
    a_args.extend(["--trajectories", path_str(&ta)]);
    let mut b_args = args.to_vec();
    let tb = dir.path().join("tb.csv");
    b_args.extend(["--trajectories", path_str(&tb)]);
    assert_eq!(code(&simulate(dir.path(), "a.csv", &a_args)), 0);
    assert_eq!(code(&simulate(dir.path(), "b.csv", &b_args)), 0);
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.csv")).unwrap());
    assert_eq!(fs::read(&ta).unwrap(), fs::read(&tb).unwrap());

    let rows = read_cohort(a.as_slice()).unwrap();
    assert!(rows.windows(2).all(|w| w[0].empirical_incidence <= w[1].empirical_incidence));
    let events = read_trajectories(fs::File::open(&ta).unwrap()).unwrap();
    assert!(!events.is_empty());
    assert!(events.iter().all(|e| e.event_time > 0.0 && e.event_time <= 60.0));
    assert!(events.iter().all(|e| e.successful.is_some()));
}

#[test]
fn simulate_bad_model_spec_names_token() {
    let dir = TempDir::new().unwrap();
    let out = simulate(
        dir.path(),
        "x.csv",
        &[
            "--cohort", "10", "--horizon", "10", "--seed", "1",
            "--rate-model", "weibull:k=2", "--sigma-model", "constant:sigma=1",
        ],
    );
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("weibull"));

    let out = simulate(
        dir.path(),
        "x.csv",
        &[
            "--cohort", "10", "--horizon", "10", "--seed", "1",
            "--rate-model", "constant:mu=1", "--sigma-model", "moran:r=2,size=5",
        ],
    );
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("size"));
}

fn fit(dir: &Path, input: &str, extra: &[&str]) -> (i32, String, serde_json::Value) {
    let input_path = dir.join("input.csv");
    fs::write(&input_path, input).unwrap();
    let out_path = dir.join("fit.json");
    let _ = fs::remove_file(&out_path);
    let mut args = vec!["fit", "--input", path_str(&input_path), "--out", path_str(&out_path)];
    args.extend_from_slice(extra);
    let out = run(&args);
    let doc = fs::read_to_string(&out_path)
        .map(|s| serde_json::from_str(&s).unwrap())
        .unwrap_or(serde_json::Value::Null);
    (code(&out), String::from_utf8_lossy(&out.stderr).into_owned(), doc)
}

fn close(v: &serde_json::Value, expected: f64) -> bool {
    let x = v.as_f64().unwrap();
    (x - expected).abs() <= 1e-9 * expected.abs()
}

#[test]
fn fit_examples() {
    let dir = TempDir::new().unwrap();
    let clean = "age,incidence\n1,2e-8\n2,1.6e-7\n4,1.28e-6\n";
    let (status, _, doc) = fit(dir.path(), clean, &["--sigma", "0.01"]);
    assert_eq!(status, 0);
    assert!(close(&doc["gamma"], 3.0));
    assert!(close(&doc["c"], 2e-8));
    assert!(close(&doc["mu0"], 6e-6));
    assert_eq!(doc["n_excluded"], 0);

    let with_zero = "# incidence table\nage,incidence\n0,0\n1,2e-8\n2,1.6e-7\n4,1.28e-6\n";
    let (status, _, doc) = fit(dir.path(), with_zero, &[]);
    assert_eq!(status, 0);
    assert!(close(&doc["gamma"], 3.0));
    assert_eq!(doc["n_excluded"], 1);
    assert!(doc.get("mu0").is_none());
}

#[test]
fn fit_failures() {
    let dir = TempDir::new().unwrap();
    let (status, _, _) = fit(dir.path(), "age,incidence\n0,0\n3,1e-6\n", &[]);
    assert_eq!(status, 1);

    let (status, stderr, _) = fit(dir.path(), "age,incidence\n1,2e-8\n2,1.6e-7\n3,oops\n4,1e-6\n", &[]);
    assert_eq!(status, 1);
    assert!(stderr.contains("line 4"), "{stderr}");

    let (status, stderr, _) = fit(dir.path(), "# header missing\n1,2e-8\n2,1.6e-7\n", &[]);
    assert_eq!(status, 1);
    assert!(stderr.contains("line 2"), "{stderr}");

    let out = run(&["fit", "--input", "/nonexistent/in.csv", "--out", "/tmp/never.json"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn validate_outcomes() {
    let out = run(&["validate"]);
    assert_eq!(code(&out), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["seed"], 20_240_101);

    let out = run(&["validate", "--cohort", "10"]);
    assert_eq!(code(&out), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["n_ages_gated"], 0);

    assert_eq!(code(&run(&["validate", "--cohort", "10", "--inject-failure"])), 1);
    assert_eq!(code(&run(&["validate", "--cohort", "ten"])), 2);
}

#[test]
fn config_file_supplies_flags_and_flags_override() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("run.conf");
    fs::write(&config, "# fixation defaults\nmodel = moran\nr = 2\nn = 10\n").unwrap();
    let out = run(&["fixation", "--config", path_str(&config)]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "0.500488759");

    let out = run(&["fixation", "--config", path_str(&config), "--n", "1"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "1.00000000");
}
