use std::process::{Command, Output};

fn tlchan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tlchan"))
        .args(args)
        .env_remove("TLCHAN_CAP")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn dims_examples() {
    let o = tlchan(&["dims", "--N", "3"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "n,dim\n0,1\n1,3\n2,8\n3,21\n4,55\n");

    let o = tlchan(&["dims", "--N", "2"]);
    let dims: Vec<String> = csv_rows(&stdout(&o))[1..]
        .iter()
        .map(|r| r[1].clone())
        .collect();
    assert_eq!(dims, ["1", "2", "3", "4", "5"]);

    let o = tlchan(&["dims", "--N", "5", "--n-max", "0"]);
    assert_eq!(stdout(&o), "n,dim\n0,1\n");

    let o = tlchan(&["dims", "--N", "3", "--n-max", "2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[2]["dim"], 8);
}

#[test]
fn gap_sweep_columns_and_fit() {
    let o = tlchan(&[
        "gap-sweep",
        "--N-range",
        "3..8",
        "--triple",
        "2,1,1",
        "--triple",
        "1,1,0",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let rows = csv_rows(&text);
    assert_eq!(
        rows[0].join(","),
        "N,l,m,k,gap,defect,coeff_dev,triangle_bound"
    );
    assert_eq!(rows.len(), 1 + 12);
    for r in &rows[1..] {
        let n: f64 = r[0].parse().unwrap();
        let vals: Vec<f64> = r[4..].iter().map(|x| x.parse().unwrap()).collect();
        match (r[1].as_str(), r[2].as_str(), r[3].as_str()) {
            ("1", "1", "0") => assert!(vals.iter().all(|&v| v == 0.0)),
            ("2", "1", "1") => {
                assert!((vals[1] - 1.0 / n).abs() < 1e-12);
                assert!(vals[0] <= vals[3] + 1e-10);
            }
            other => panic!("unexpected triple {other:?}"),
        }
    }
    let fit = text
        .lines()
        .find(|l| l.starts_with("# fit l=2 m=1 k=1"))
        .expect("fit line");
    let slope: f64 = fit
        .split_whitespace()
        .find_map(|w| w.strip_prefix("slope="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((-1.15..=-0.85).contains(&slope), "{slope}");
    assert!(text
        .lines()
        .any(|l| l.starts_with("# fit l=1 m=1 k=0") && l.contains("unavailable")));
}

#[test]
fn gap_sweep_is_deterministic_across_modes() {
    let a = tlchan(&[
        "gap-sweep",
        "--N-range",
        "3..6",
        "--triple",
        "2,2,2",
        "--triple",
        "2,1,1",
    ]);
    let b = tlchan(&[
        "gap-sweep",
        "--N-range",
        "3..6",
        "--triple",
        "2,1,1",
        "--triple",
        "2,2,2",
        "--sequential",
    ]);
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn cap_env_marks_rows_skipped() {
    let o = Command::new(env!("CARGO_BIN_EXE_tlchan"))
        .args([
            "gap-sweep",
            "--N-range",
            "3..4",
            "--triple",
            "2,1,1",
            "--triple",
            "1,1,0",
        ])
        .env("TLCHAN_CAP", "10")
        .output()
        .unwrap();
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows[1], ["3", "1", "1", "0", "0", "0", "0", "0"]);
    assert!(rows[2][4..].iter().all(|c| c == "skipped"));

    let flag = tlchan(&[
        "gap-sweep",
        "--N-range",
        "3..4",
        "--triple",
        "2,1,1",
        "--cap",
        "10",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&flag)).unwrap();
    assert!(v["rows"][0]["skipped"].is_string());
    assert!(v["rows"][0]["gap"].is_null());
}

#[test]
fn capacity_table_examples() {
    let o = tlchan(&[
        "capacity-table",
        "--N",
        "3",
        "--triple",
        "2,1,1",
        "--triple",
        "1,1,0",
    ]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    assert_eq!(
        rows[0].join(","),
        "N,l,m,k,psi_lower,psi_upper,psi_certified,psi_c_lower,psi_c_upper,psi_c_certified"
    );
    assert_eq!(
        rows[1][..10],
        ["3", "1", "1", "0", "0", "0", "true", "0", "0", "true"]
    );
    assert_eq!(rows[2][4], "1");
    assert!((rows[2][5].parse::<f64>().unwrap() - 3f64.log2()).abs() < 1e-12);

    let o = tlchan(&[
        "capacity-table",
        "--N-range",
        "3..8",
        "--format",
        "json",
        "--log-base",
        "e",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 6 * 4);
    assert!(rows
        .iter()
        .all(|r| r["psi_certified"] == true && r["psi_c_certified"] == true));
    let r = rows
        .iter()
        .find(|r| r["N"] == 4 && r["l"] == 2 && r["k"] == 1)
        .unwrap();
    assert!((r["psi_lower"].as_f64().unwrap() - 3f64.ln()).abs() < 1e-12);
}

#[test]
fn verify_passes_and_reports_residuals() {
    let o = tlchan(&["verify", "--suite", "arith"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], true);
    assert!(v["suites"][0]["max_residual"].as_f64().unwrap() < 1e-12);

    let o = tlchan(&["verify", "--suite", "jw"]);
    assert!(o.status.success());
}

#[test]
fn verify_tiny_tolerance_fails_with_code_one() {
    let o = tlchan(&["verify", "--suite", "jw", "--tol", "1e-20"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], false);
    assert_eq!(v["tolerance_override"], 1e-20);
    let checks = v["suites"][0]["checks"].as_array().unwrap();
    assert!(checks.iter().any(|c| c["pass"] == false));
    assert!(checks.iter().all(|c| c["tolerance"] == 1e-20));
}

#[test]
fn config_errors_exit_two() {
    for args in [
        vec!["gap-sweep", "--N", "1"],
        vec!["gap-sweep", "--N", "65"],
        vec!["gap-sweep", "--triple", "2,1,2"],
        vec!["gap-sweep", "--N-range", "9..3"],
        vec!["gap-sweep", "--cap", "0"],
        vec!["capacity-table", "--tol", "-1"],
        vec!["dims", "--N", "3", "--format", "xml"],
        vec!["dims"],
        vec!["bogus"],
    ] {
        let o = tlchan(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
    let o = Command::new(env!("CARGO_BIN_EXE_tlchan"))
        .args(["dims", "--N", "3"])
        .env("TLCHAN_CAP", "lots")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn out_path_receives_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dims.csv");
    let o = tlchan(&[
        "dims",
        "--N",
        "4",
        "--n-max",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert_eq!(
        std::fs::read_to_string(&path).unwrap(),
        "n,dim\n0,1\n1,4\n2,15\n"
    );

    let bad = dir.path().join("missing").join("x.csv");
    let o = tlchan(&["dims", "--N", "4", "--out", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
