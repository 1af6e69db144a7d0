use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cia-sim"));
    c.env_remove("CIA_SIM_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn cia-sim")
}

fn json_of(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn bounds_prints_reference_rationals() {
    let v = json_of(&run(&["bounds", "--M", "2", "--K", "2"]));
    assert_eq!(v["dof"], "4/3");
    assert_eq!(v["real_lift"], "8/7");
    assert!((v["dof_decimal"].as_f64().unwrap() - 4.0 / 3.0).abs() < 1e-15);
    assert_eq!(v["meta"]["tool"], "cia-sim");
    assert!(v["meta"]["rng"].as_str().unwrap().contains("chacha20"));
}

#[test]
fn bounds_violation_exits_4() {
    let out = run(&["bounds", "--M", "2", "--profile", "1,1"]);
    assert_eq!(out.status.code(), Some(4));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["bound_report"]["violations"], 3);
    let out = run(&[
        "bounds",
        "--M",
        "2",
        "--profile",
        "0.6666666666666666,0.6666666666666666",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn align_check_on_generated_channel() {
    let dir = tempfile::tempdir().unwrap();
    let ch = dir.path().join("ch.json");
    let out = run(&[
        "gen-channel",
        "--M",
        "2",
        "--J",
        "2,2",
        "--seed",
        "11",
        "--out",
        path_str(&ch),
    ]);
    assert!(out.status.success());
    let file: Value = serde_json::from_str(&std::fs::read_to_string(&ch).unwrap()).unwrap();
    assert_eq!(file["config"]["seed"], 11);
    assert_eq!(file["meta"]["tool"], "cia-sim");

    let v = json_of(&run(&[
        "align-check",
        "--channel",
        path_str(&ch),
        "--n",
        "2,3",
        "--receiver",
        "0",
    ]));
    assert_eq!(v["holds"], true);
    let reports = v["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 2);
    for rep in reports {
        assert_eq!(rep["basis_size"], 16);
        assert_eq!(rep["favorite_union"], 32);
        assert_eq!(rep["disjoint"], true);
        let iu = &rep["interference_unions"][0];
        // n₂^{2}(n₂ + 1)^{2} = 144 is the envelope; 9·(9 + 6 − 1) = 126 of
        // its monomials are actually hit
        assert_eq!(iu["kappa"], 144);
        assert_eq!(iu["envelope_size"], 144);
        assert_eq!(iu["union_size"], 126);
        assert_eq!(iu["contained"], true);
        assert_eq!(rep["expected"]["kappa"][0], 144);
    }
}

#[test]
fn channel_file_and_flags_agree() {
    let dir = tempfile::tempdir().unwrap();
    let ch = dir.path().join("ch.json");
    assert!(run(&[
        "gen-channel",
        "--M",
        "2",
        "--J",
        "1,1",
        "--seed",
        "5",
        "--out",
        path_str(&ch)
    ])
    .status
    .success());
    let a = json_of(&run(&[
        "params",
        "--channel",
        path_str(&ch),
        "--n",
        "1",
        "--P",
        "1e6",
    ]));
    let b = json_of(&run(&[
        "params", "--M", "2", "--J", "1,1", "--seed", "5", "--n", "1", "--P", "1e6",
    ]));
    for key in [
        "Q",
        "Q_raw",
        "lambda",
        "Gamma",
        "xi",
        "L_list",
        "kappa_list",
    ] {
        assert_eq!(a[key], b[key], "{key}");
    }
    assert_eq!(a["nominal_dof"]["exact"], "76/121");
}

#[test]
fn malformed_config_leaves_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let out_path = dir.path().join("out.json");
    std::fs::write(
        &cfg,
        "{\"M\": 2, \"J\": [1, 1], \"n\": [1], \"P\": 1e6, \"colour\": 3}",
    )
    .unwrap();
    let out = run(&[
        "params",
        "--config",
        path_str(&cfg),
        "--out",
        path_str(&out_path),
        "--json-errors",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_path.exists());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["kind"], "config");
    assert_eq!(err["exit_code"], 2);

    std::fs::write(&cfg, "{\"M\": 2, ").unwrap();
    let out = run(&[
        "params",
        "--config",
        path_str(&cfg),
        "--out",
        path_str(&out_path),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_path.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn config_file_is_used_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        "{\"M\": 2, \"J\": [1, 1], \"n\": [1], \"P\": 1e6, \"Q\": 2}",
    )
    .unwrap();
    let v = json_of(&run(&["params", "--config", path_str(&cfg)]));
    assert_eq!(v["Q"], 2);
    assert_eq!(v["Q_pinned"], true);
    let v = json_of(&run(&["params", "--config", path_str(&cfg), "--Q", "3"]));
    assert_eq!(v["Q"], 3);
}

#[test]
fn infeasible_instances_exit_3() {
    let out = run(&["params", "--M", "2", "--J", "1,1", "--n", "1", "--P", "1"]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(&[
        "constellation",
        "--M",
        "2",
        "--J",
        "1,1",
        "--n",
        "1",
        "--P",
        "1e6",
        "--Q",
        "2",
        "--cap",
        "1000",
        "--json-errors",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["kind"], "size_cap");
}

#[test]
fn bad_flags_exit_2() {
    assert_eq!(
        run(&["bounds", "--M", "two", "--K", "2"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(
        run(&["params", "--M", "2", "--J", "1,1", "--P", "1e6"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn constellation_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.csv");
    let out = run(&[
        "constellation",
        "--M",
        "2",
        "--J",
        "1,1",
        "--n",
        "1",
        "--P",
        "1e6",
        "--Q",
        "2",
        "--out",
        path_str(&path),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(!text.contains('\r'));
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data[0], "value,label,u0,u1,u2,u3,u4,u5");
    assert_eq!(data.len(), 1 + 21609);
    let values: Vec<f64> = data[1..]
        .iter()
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(values.windows(2).all(|w| w[0] <= w[1]));
    assert!(text.starts_with("# tool=cia-sim version="));
    assert!(text.contains("# seed=0\n"));

    let v = json_of(&run(&[
        "constellation",
        "--M",
        "2",
        "--J",
        "1,1",
        "--n",
        "1",
        "--P",
        "1e6",
        "--Q",
        "1",
        "--field",
        "complex",
        "--format",
        "json",
    ]));
    assert_eq!(v["points"].as_array().unwrap().len(), 81);
}

#[test]
fn complex_constellation_csv_has_imaginary_column() {
    let out = run(&[
        "constellation",
        "--M",
        "2",
        "--J",
        "1,1",
        "--n",
        "1",
        "--P",
        "1e6",
        "--Q",
        "1",
        "--field",
        "complex",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(header.starts_with("value,value_im,label,"));
}

fn sweep_args(out: &str) -> Vec<&str> {
    vec![
        "dof-sweep",
        "--M",
        "2",
        "--J",
        "1,1",
        "--n",
        "1",
        "--P",
        "1e3,1e5,1e7",
        "--trials",
        "3",
        "--T",
        "200",
        "--seed",
        "9",
        "--out",
        out,
    ]
}

#[test]
fn sweep_output_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let out = bin()
        .args(sweep_args(path_str(&a)))
        .arg("--threads")
        .arg("1")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let out = bin()
        .args(sweep_args(path_str(&b)))
        .env("CIA_SIM_THREADS", "3")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (a, b) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.contains("# nominal_dof=76/121\n"));
    assert!(text.contains("# reference_dof=4/3\n"));
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(
        header,
        "P,half_log2P,Q,dmin,ser,ser_std_err,bits_ok,pe_bound,within_pe_bound,trials,symbols"
    );
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 4);
}

#[test]
fn sweep_summary_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.json");
    std::fs::write(
        &cfg,
        r#"{"instance": {"scheme": "x", "M": 2, "J": [1, 1], "n": [1, 1], "field": "real", "Q": 2},
            "P_grid": [1e4, 1e6, 1e8], "trials_per_P": 2, "T": 100, "seed": 3}"#,
    )
    .unwrap();
    let summary = dir.path().join("summary.json");
    let out = run(&[
        "dof-sweep",
        "--config",
        path_str(&cfg),
        "--format",
        "json",
        "--summary",
        path_str(&summary),
    ]);
    let v = json_of(&out);
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    assert_eq!(v["nominal_dof"]["exact"], "76/121");
    assert_eq!(v["meta"]["seed"], 3);
    assert!(v["bound_report"]["violations"] == 0);
    let s: Value = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(s, v);
    // pinned Q: λ-scaled distance grows by 10 per two decades of power
    let d: Vec<f64> = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["dmin"].as_f64().unwrap())
        .collect();
    assert!(d[0] < d[1] && d[1] < d[2]);

    let out = run(&["dof-sweep", "--config", path_str(&cfg), "--M", "3"]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::write(
        &cfg,
        r#"{"instance": {"scheme": "x", "M": 2}, "P_grid": [1], "trials_per_P": 1, "seed": 0}"#,
    )
    .unwrap();
    assert_eq!(
        run(&["dof-sweep", "--config", path_str(&cfg)])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn simulate_single_power() {
    let out = run(&[
        "simulate", "--M", "2", "--J", "1,1", "--n", "1", "--P", "1e8", "--Q", "1", "--trials",
        "2", "--T", "300", "--format", "json",
    ]);
    let v = json_of(&out);
    let row = &v["rows"][0];
    assert_eq!(row["Q"], 1);
    assert_eq!(row["ser"], 0.0);
    assert!(v["fit"].is_null());
    assert!(v["fit_error"].as_str().unwrap().contains("insufficient"));
    let out = run(&[
        "simulate", "--M", "2", "--J", "1,1", "--n", "1", "--P", "1e3,1e4",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn hybrid_report() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("h.csv");
    let out = run(&[
        "hybrid",
        "--M",
        "2",
        "--JM",
        "2",
        "--n",
        "1",
        "--P",
        "1e6",
        "--Q",
        "1",
        "--seed",
        "4",
        "--trials",
        "2",
        "--T",
        "200",
        "--P-grid",
        "1e4,1e6,1e8",
        "--csv",
        path_str(&csv),
    ]);
    let v = json_of(&out);
    assert!(v["orthogonality_max_residual"].as_f64().unwrap() < 1e-9);
    assert!(v["clean_check"][0]["relative_residual"].as_f64().unwrap() < 1e-9);
    assert!(v["dmin"].as_f64().unwrap() > 0.0);
    let counts = v["coefficient_counts"].as_array().unwrap();
    assert_eq!(counts.len(), 3);
    // zero-forced receiver: M·L favorites only
    assert_eq!(counts[0]["coefficients"], 2);
    assert_eq!(counts[0]["favorites"], 2);
    // last receiver: L favorites plus κ = (n + 1)^M = 4 merged coefficients
    assert_eq!(counts[1]["favorites"], 1);
    assert_eq!(counts[1]["coefficients"], 5);
    assert_eq!(v["simulation"]["ser"], 0.0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 4);
    assert!(text.contains("P,half_log2P,Q,"));
}

#[test]
fn hybrid_rejects_single_antenna() {
    let out = run(&["hybrid", "--M", "1", "--JM", "1", "--n", "1", "--P", "1e6"]);
    assert_eq!(out.status.code(), Some(2));
}
