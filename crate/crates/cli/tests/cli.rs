use std::process::{Command, Output};

fn hdfd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hdfd"))
        .args(args)
        .output()
        .expect("hdfd binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// Data lines of a CSV document (metadata comments and header dropped).
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn point_value(text: &str, quantity: &str) -> f64 {
    csv_rows(text)
        .into_iter()
        .find(|r| r[0] == quantity)
        .unwrap_or_else(|| panic!("no row {quantity}"))[1]
        .parse()
        .unwrap()
}

const BASELINE: [&str; 13] = [
    "point", "--ps-db", "0", "--pr-db", "0", "--sigma2", "1", "--kr", "0", "--r0", "1", "--omega",
    "1,1,1,1",
];

#[test]
fn point_baseline_fd_outage() {
    let out = hdfd(&BASELINE);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!((point_value(&text, "p_fd") - (1.0 - (-2.0f64).exp())).abs() < 1e-15);
    assert!((point_value(&text, "p_hd") - (1.0 - 16.0 * (-6.0f64).exp())).abs() < 1e-15);
    for q in [
        "t1",
        "m2p",
        "pr_A",
        "cond_C_joint",
        "p_sys",
        "p_traditional",
    ] {
        point_value(&text, q);
    }
}

#[test]
fn tiny_rate_gives_zero_outage() {
    let out = hdfd(&["point", "--r0", "0.0000001"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for q in ["p_fd", "p_hd", "p_sys", "p_traditional"] {
        assert!(point_value(&text, q) < 1e-6, "{q}");
    }
}

#[test]
fn invalid_values_name_the_flag() {
    for (args, flag) in [
        (vec!["point", "--ps", "-1"], "--ps"),
        (vec!["point", "--pr", "0"], "--pr"),
        (vec!["point", "--sigma2", "0"], "--sigma2"),
        (vec!["point", "--kr", "-0.5"], "--kr"),
        (vec!["point", "--rsi-var", "-2"], "--rsi-var"),
        (vec!["point", "--r0", "-3"], "--r0"),
        (vec!["point", "--omega", "1,2,3"], "--omega"),
        (vec!["point", "--omega", "1,0,1,1"], "--omega"),
        (vec!["sweep", "--var", "r0", "--step", "0"], "--step"),
        (
            vec!["sweep", "--var", "r0", "--from", "3", "--to", "1"],
            "--to",
        ),
        (
            vec!["sweep", "--var", "r0", "--from", "-1", "--to", "1"],
            "--from",
        ),
        (
            vec!["sweep", "--var", "r0", "--schemes", "best"],
            "--schemes",
        ),
        (vec!["mc", "--mc", "0"], "--mc"),
        (vec!["point", "--format", "xml"], "--format"),
    ] {
        let out = hdfd(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(stderr(&out).contains(flag), "{args:?}: {}", stderr(&out));
        assert!(out.stdout.is_empty(), "{args:?} printed rows");
    }
}

#[test]
fn mutually_exclusive_forms_are_usage_errors() {
    for args in [
        ["point", "--ps", "1", "--ps-db", "0"],
        ["point", "--pr", "1", "--pr-db", "0"],
        ["point", "--kr", "1", "--rsi-var", "1"],
    ] {
        let out = hdfd(&args);
        assert_eq!(out.status.code(), Some(2));
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn missing_required_flag_is_usage_error() {
    let out = hdfd(&["sweep", "--from", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--var"));
    assert!(out.stdout.is_empty());
}

#[test]
fn linear_and_db_power_flags_agree() {
    let a = stdout(&hdfd(&["point", "--ps-db", "20", "--pr-db", "10"]));
    let b = stdout(&hdfd(&["point", "--ps", "100", "--pr", "10"]));
    assert_eq!(csv_rows(&a), csv_rows(&b));
}

#[test]
fn relay_power_sweep_has_41_ordered_rows() {
    let out = hdfd(&[
        "sweep",
        "--var",
        "pr-db",
        "--from",
        "0",
        "--to",
        "40",
        "--step",
        "1",
        "--ps-db",
        "30",
        "--rsi-var",
        "1",
        "--r0",
        "3",
        "--schemes",
        "proposed,traditional",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows.len(), 82);
    for pair in rows.chunks(2) {
        assert_eq!(pair[0][2], "proposed");
        assert_eq!(pair[1][2], "traditional");
        assert_eq!(pair[0][1], pair[1][1]);
        let p: f64 = pair[0][3].parse().unwrap();
        let t: f64 = pair[1][3].parse().unwrap();
        assert!(p <= t + 1e-12);
    }
}

#[test]
fn rate_sweep_columns_are_monotone() {
    let out = hdfd(&["sweep", "--var", "r0", "--schemes", "proposed,traditional"]);
    let rows = csv_rows(&stdout(&out));
    for scheme in ["proposed", "traditional"] {
        let col: Vec<f64> = rows
            .iter()
            .filter(|r| r[2] == scheme)
            .map(|r| r[3].parse().unwrap())
            .collect();
        assert_eq!(col.len(), 23);
        assert!(col.windows(2).all(|w| w[1] >= w[0]), "{scheme}");
    }
}

#[test]
fn rsi_sweep_hd_column_is_constant() {
    let out = hdfd(&["sweep", "--var", "rsi-var", "--schemes", "hd_only"]);
    let col: Vec<f64> = csv_rows(&stdout(&out))
        .iter()
        .map(|r| r[3].parse().unwrap())
        .collect();
    assert_eq!(col.len(), 41);
    assert!(col.iter().all(|x| (x - col[0]).abs() <= 1e-12));
}

#[test]
fn sweep_metadata_echoes_seed_and_samples() {
    let out = stdout(&hdfd(&[
        "sweep", "--var", "ps-db", "--to", "4", "--mc", "5000", "--seed", "31",
    ]));
    assert!(out.contains("# seed: 31\n"));
    assert!(out.contains("# n_samples: 5000\n"));
    for row in csv_rows(&out) {
        assert_eq!(row[6], "5000");
        assert_eq!(row[7], "31");
        assert_eq!(row[8], "ok");
        assert!(!row[4].is_empty() && !row[5].is_empty());
    }
    let analytic = stdout(&hdfd(&["sweep", "--var", "ps-db", "--to", "4"]));
    for row in csv_rows(&analytic) {
        assert!(row[4].is_empty() && row[5].is_empty());
    }
}

#[test]
fn json_rows_match_csv_rows() {
    let args = [
        "sweep", "--var", "ps-db", "--from", "5", "--to", "9", "--mc", "3000", "--seed", "4",
    ];
    let csv = csv_rows(&stdout(&hdfd(&args)));
    let mut json_args = args.to_vec();
    json_args.extend(["--format", "json"]);
    let json: serde_json::Value = serde_json::from_str(&stdout(&hdfd(&json_args))).unwrap();
    let arr = json.as_array().unwrap();
    assert_eq!(arr.len(), csv.len());
    for (obj, row) in arr.iter().zip(&csv) {
        assert_eq!(obj["scheme"], row[2].as_str());
        assert_eq!(
            obj["p_analytic"].as_f64().unwrap(),
            row[3].parse::<f64>().unwrap()
        );
        assert_eq!(
            obj["p_mc"].as_f64().unwrap(),
            row[4].parse::<f64>().unwrap()
        );
        assert_eq!(obj["seed"], 4);
        assert_eq!(obj["n_samples"], 3000);
    }
}

#[test]
fn output_file_matches_stdout() {
    let dir = std::env::temp_dir().join(format!("hdfd-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("mc.csv");
    let args = ["mc", "--mc", "20000", "--seed", "3"];
    let mut file_args = args.to_vec();
    let p = path.to_str().unwrap();
    file_args.extend(["--output", p]);
    let out = hdfd(&file_args);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), hdfd(&args).stdout);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn mc_reports_every_quantity() {
    let out = stdout(&hdfd(&[
        "mc", "--mc", "200000", "--seed", "8", "--ps-db", "5", "--pr-db", "5", "--r0", "1",
    ]));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 4 + 3 * 5);
    let p_fd = rows.iter().find(|r| r[0] == "p_fd").unwrap();
    let z: f64 = p_fd[4].parse().unwrap();
    assert!(z.abs() < 5.0);
    assert!(out.contains("# generator: ChaCha8Rng"));
}

#[test]
fn validate_quadrature_only_passes() {
    let out = hdfd(&["validate", "--grid-size", "150", "--mc-samples", "0"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("quadrature_agreement,true"));
    assert!(!text.contains("monte_carlo"));
    assert!(text.contains("# result: pass"));
}

#[test]
fn corrupted_model_fails_validation_by_name() {
    let out = hdfd(&[
        "validate",
        "--grid-size",
        "100",
        "--mc-samples",
        "0",
        "--perturb-analytic",
        "1e-6",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("partition_identity"),
        "{}",
        stderr(&out)
    );
    assert!(stdout(&out).contains("partition_identity,false"));
}

#[test]
fn validate_json_is_machine_readable() {
    let out = hdfd(&[
        "validate",
        "--grid-size",
        "60",
        "--mc-samples",
        "0",
        "--format",
        "json",
    ]);
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let gates = json.as_array().unwrap();
    assert!(gates.len() >= 8);
    assert!(gates.iter().all(|g| g["passed"] == true));
}

#[test]
fn help_exits_zero() {
    let out = hdfd(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("Exit codes"));
}
