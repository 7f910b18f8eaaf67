use std::process::Command as Process;

use serde_json::Value;

/// Runs the CLI in-process: (exit code, stdout, stderr).
fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = ratcap_cli::run_args(
        std::iter::once("ratcap").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

struct Csv {
    meta: Value,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn parse(text: &str) -> Self {
        let mut lines = text.lines();
        let meta = lines.next().unwrap().strip_prefix("# ").expect("metadata line");
        let header = lines.next().unwrap().split(',').map(String::from).collect();
        let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
        Csv {
            meta: serde_json::from_str(meta).unwrap(),
            header,
            rows,
        }
    }

    fn col(&self, name: &str) -> Vec<f64> {
        let i = self
            .header
            .iter()
            .position(|h| h == name)
            .unwrap_or_else(|| panic!("no column {name}"));
        self.rows.iter().map(|r| r[i].parse().unwrap()).collect()
    }
}

fn json_rows(text: &str) -> Vec<Value> {
    let doc: Value = serde_json::from_str(text).unwrap();
    doc["rows"].as_array().unwrap().clone()
}

#[test]
fn analytic_defaults() {
    let (code, out, _) = run(&["analytic", "--format", "json"]);
    assert_eq!(code, 0);
    let row = &json_rows(&out)[0];
    let m = row["m_star"].as_f64().unwrap();
    // root of M^3 - 2 k2 M - 3 k1 at k1 = 0.3, k2 = 0.1 beta^(2/3) K_3 (high-precision reference)
    assert!((m - 1.906023757563831).abs() < 1e-9, "{m}");
    assert_eq!(row["m_star_integer"], 2);
    assert_eq!(row["method"], "closed_form_alpha3_trig");
    assert!(row["discriminant"].as_f64().unwrap() < 0.0);
    assert!(row["high_snr_limit"].is_null());
}

#[test]
fn csv_has_metadata_and_fixed_header() {
    let (code, out, _) = run(&["analytic", "--lambda", "0.5", "--alpha", "4"]);
    assert_eq!(code, 0);
    let csv = Csv::parse(&out);
    assert_eq!(csv.meta["command"], "analytic");
    assert_eq!(csv.meta["params"]["lambda"], 0.5);
    assert_eq!(csv.meta["params"]["alpha"], 4.0);
    let expected: Vec<&str> = ["lambda", "alpha", "beta", "R", "rho", "eta", "snr"]
        .into_iter()
        .chain(ratcap_cli::commands::ANALYTIC_COLUMNS)
        .collect();
    assert_eq!(csv.header, expected);
    assert_eq!(csv.rows.len(), 1);
    assert!(csv.col("high_snr_limit")[0] > 0.0);
}

#[test]
fn twelve_significant_digits() {
    let (_, out, _) = run(&["analytic"]);
    let csv = Csv::parse(&out);
    let i = csv.header.iter().position(|h| h == "m_star").unwrap();
    assert_eq!(csv.rows[0][i], "1.90602375756");
}

#[test]
fn alpha_two_is_rejected() {
    let (code, _, err) = run(&["analytic", "--alpha", "2"]);
    assert_eq!(code, 2);
    assert!(err.contains("alpha > 2"), "{err}");
}

#[test]
fn lambda_sweep_row_count() {
    let (code, out, _) = run(&["analytic", "--sweep", "lambda=logrange(1e-2,1e3,50)"]);
    assert_eq!(code, 0);
    let csv = Csv::parse(&out);
    assert_eq!(csv.rows.len(), 50);
    let lambdas = csv.col("lambda");
    assert_eq!(lambdas[0], 0.01);
    assert_eq!(lambdas[49], 1000.0);
    assert_eq!(csv.meta["sweep"]["variable"], "lambda");
}

#[test]
fn bad_sweeps_are_usage_errors() {
    assert_eq!(run(&["analytic", "--sweep", "gamma=1,2"]).0, 2);
    assert_eq!(run(&["analytic", "--sweep", "lambda=logrange(1,2)"]).0, 2);
    assert_eq!(run(&["analytic", "--sweep", "alpha=1.5,3"]).0, 2);
}

#[test]
fn exact_single_attempt_has_one_row() {
    let (code, out, _) = run(&["exact", "--A", "1"]);
    assert_eq!(code, 0);
    let csv = Csv::parse(&out);
    assert_eq!(csv.rows.len(), 1);
    // one attempt, one hop: the objective is the single-hop success probability
    assert_eq!(csv.col("objective")[0], csv.col("p_s")[0]);
}

#[test]
fn exact_never_exceeds_bound() {
    for sweep in ["A=linrange(1,40,40)", "lambda=logrange(1e-2,10,25)"] {
        let (code, out, _) = run(&["exact", "--A", "8", "--sweep", sweep]);
        assert_eq!(code, 0);
        let csv = Csv::parse(&out);
        for (c, ub) in csv.col("capacity").iter().zip(csv.col("c_ub")) {
            assert!(*c <= ub * (1.0 + 1e-11), "{c} > {ub} in {sweep}");
        }
    }
}

#[test]
fn exact_twelve_attempts_hop_counts_within_one() {
    let (_, out, _) = run(&["exact", "--A", "12"]);
    let csv = Csv::parse(&out);
    assert_eq!(csv.rows.len(), 12);
    let (m, m_ub) = (csv.col("m_star")[0], csv.col("m_star_ub")[0]);
    assert!((m - m_ub).abs() <= 1.0);
}

#[test]
fn exact_needs_budget() {
    let (code, _, err) = run(&["exact"]);
    assert_eq!(code, 2);
    assert!(err.contains("--A"));
    assert_eq!(run(&["exact", "--A", "0"]).0, 2);
    assert_eq!(run(&["exact", "--A", "3", "--M", "4"]).0, 2);
}

#[test]
fn simulate_small_run_passes() {
    let (code, out, err) = run(&["simulate", "--A", "4", "--trials", "10"]);
    assert_eq!(code, 0, "{err}");
    let csv = Csv::parse(&out);
    assert_eq!(csv.rows.len(), 4);
    assert_eq!(csv.meta["sim"]["trials"], 10);
    let i = csv.header.iter().position(|h| h == "pass").unwrap();
    assert!(csv.rows.iter().all(|r| r[i] == "true"));
}

#[test]
fn simulate_seed_is_recorded_and_reproducible() {
    let args = ["simulate", "--A", "3", "--trials", "5000", "--seed", "9"];
    let (a, b) = (run(&args).1, run(&args).1);
    assert_eq!(a, b);
    assert_eq!(Csv::parse(&a).meta["sim"]["seed"], 9);
}

#[test]
fn simulate_requires_budget() {
    assert_eq!(run(&["simulate"]).0, 2);
    assert_eq!(run(&["simulate", "--A", "3", "--trials", "0"]).0, 2);
}

#[test]
fn figure_one_and_four_properties() {
    let (code, out, _) = run(&["figure", "--figure", "1"]);
    assert_eq!(code, 0);
    let csv = Csv::parse(&out);
    assert_eq!(csv.rows.len(), 50);
    for (c, ub) in csv.col("capacity").iter().zip(csv.col("c_ub")) {
        assert!(*c <= ub * (1.0 + 1e-11));
    }
    assert!(csv.meta["profile"].is_object());

    let csv = Csv::parse(&run(&["figure", "--figure", "4"]).1);
    assert!(csv.col("difference").iter().all(|d| d.abs() <= 1.0));
}

#[test]
fn figures_two_three_six() {
    assert_eq!(Csv::parse(&run(&["figure", "--figure", "2"]).1).rows.len(), 6);
    assert_eq!(Csv::parse(&run(&["figure", "--figure", "3"]).1).rows.len(), 12);
    let csv = Csv::parse(&run(&["figure", "--figure", "6"]).1);
    assert_eq!(csv.rows.len(), 40);
    assert_eq!(csv.meta["profile"]["settings"][1]["snr_db"], 30.0);
}

#[test]
fn figure_seven_right_edge_near_scaling_constant() {
    let csv = Csv::parse(&run(&["figure", "--figure", "7"]).1);
    assert_eq!(csv.rows.len(), 2 * 3 * 60);
    let lambdas = csv.col("lambda");
    let dev = csv.col("rel_dev");
    let mut edges = 0;
    for (l, d) in lambdas.iter().zip(dev) {
        if *l == 1000.0 {
            edges += 1;
            assert!(d.abs() <= 0.02, "{d}");
        }
    }
    assert_eq!(edges, 6);
}

#[test]
fn figure_five_approaches_dense_slope() {
    let csv = Csv::parse(&run(&["figure", "--figure", "5"]).1);
    let ratio = csv.col("m_star_over_sqrt_lambda");
    let slope = csv.col("dense_slope");
    let lambdas = csv.col("lambda");
    for i in 0..ratio.len() {
        if lambdas[i] == 1000.0 {
            assert!(((ratio[i] - slope[i]) / slope[i]).abs() < 0.02);
        }
    }
}

#[test]
fn unknown_figure() {
    assert_eq!(run(&["figure", "--figure", "8"]).0, 2);
    assert_eq!(run(&["figure"]).0, 2);
}

#[test]
fn verify_default_and_perturbed() {
    let (code, out, _) = run(&["verify"]);
    assert_eq!(code, 0);
    let csv = Csv::parse(&out);
    let i = csv.header.iter().position(|h| h == "check").unwrap();
    let row = csv.rows.iter().position(|r| r[i] == "gap_increment").unwrap();
    let w = csv.header.iter().position(|h| h == "worst").unwrap();
    assert!(csv.rows[row][w].parse::<f64>().unwrap() <= 1e-12);

    let (code, _, err) = run(&["verify", "--perturb-p", "1e-3"]);
    assert_eq!(code, 3);
    assert!(err.contains("A=") && err.contains("p="), "{err}");
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scenario.json");
    std::fs::write(
        &path,
        r#"{"lambda": 1.0, "beta": 5.0, "eta": 0.01, "rate_log_base": "base2"}"#,
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let (code, out, _) = run(&["analytic", "--config", p, "--lambda", "0.5", "--format", "json"]);
    assert_eq!(code, 0);
    let doc: Value = serde_json::from_str(&out).unwrap();
    let params = &doc["spec"]["params"];
    assert_eq!(params["lambda"], 0.5);
    assert_eq!(params["beta"], 5.0);
    assert_eq!(params["eta"], 0.01);
    assert_eq!(params["rate_log_base"], "base2");

    std::fs::write(&path, r#"{"lambda": 1.0, "snr": 3}"#).unwrap();
    assert_eq!(run(&["analytic", "--config", p]).0, 2);
    assert_eq!(run(&["analytic", "--config", "/nonexistent/x.json"]).0, 2);
}

#[test]
fn eta_and_snr_are_exclusive() {
    assert_eq!(run(&["analytic", "--eta", "0.1", "--snr", "10"]).0, 2);
}

#[test]
fn infinite_snr() {
    let (code, out, _) = run(&["analytic", "--snr", "inf", "--format", "json"]);
    assert_eq!(code, 0);
    let row = &json_rows(&out)[0];
    assert_eq!(row["k1"], 0.0);
    assert_eq!(row["snr"], "inf");
}

#[test]
fn binary_exit_codes_and_out_file() {
    let exe = env!("CARGO_BIN_EXE_ratcap");
    let status = Process::new(exe).args(["analytic", "--alpha", "2"]).output().unwrap();
    assert_eq!(status.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig2.csv");
    let status = Process::new(exe)
        .args(["figure", "--figure", "2", "--out", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0));
    assert!(status.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(Csv::parse(&text).rows.len(), 6);

    let status = Process::new(exe)
        .args(["verify", "--perturb-p", "0.01"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(3));
}
