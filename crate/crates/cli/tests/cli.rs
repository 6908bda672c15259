use std::process::{Command, Output};

fn cvnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvnet")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// `(header, rows)` of CSV text without quoted fields.
fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_owned).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_owned).collect()).collect();
    (header, rows)
}

fn field(header: &[String], row: &[String], name: &str) -> f64 {
    let i = header.iter().position(|h| h == name).unwrap();
    row[i].parse().unwrap()
}

#[test]
fn two_mode_fidelity() {
    let out = cvnet(&["fidelity", "--N", "2", "--n1", "1", "--n2", "1", "--rbar", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let (h, rows) = parse_csv(&stdout(&out));
    assert!((field(&h, &rows[0], "fidelity") - 0.73106).abs() < 1e-5);
}

#[test]
fn unsqueezed_network_is_classical() {
    let out = cvnet(&["fidelity", "--N", "3", "--rbar", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let (h, rows) = parse_csv(&stdout(&out));
    assert_eq!(field(&h, &rows[0], "fidelity"), 0.5);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["fidelity", "--N", "1", "--rbar", "0.5"][..],
        &["fidelity", "--N", "2", "--rbar", "-1"],
        &["fidelity", "--N", "2", "--rbar", "0.5", "--n1", "0.5"],
        &["fidelity", "--N", "2", "--rbar", "0.5", "--d", "0.9"],
        &["fidelity", "--N", "2", "--rbar", "0.5", "--sender", "3"],
        &["fidelity", "--N", "2", "--rbar", "0.5", "--sender", "1", "--receiver", "1"],
        &["fidelity", "--N", "2", "--rbar", "nan"],
        &["fidelity", "--N", "x", "--rbar", "0.5"],
        &["fidelity", "--rbar", "0.5"],
        &["sweep", "--steps", "1"],
        &["sweep", "--rbar-min", "1", "--rbar-max", "0.5"],
        &["sweep", "--N-list", "2,1"],
        &["verify", "--samples", "1"],
        &["entanglement", "--N", "3", "--rbar", "0.5", "--log-base", "10"],
        &["sweep", "--output", "xml"],
        &["nonsense"],
    ] {
        let out = cvnet(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn help_and_version_exit_0() {
    assert_eq!(cvnet(&["--help"]).status.code(), Some(0));
    assert_eq!(cvnet(&["--version"]).status.code(), Some(0));
}

#[test]
fn sweep_rows_are_ordered_and_consistent() {
    let out = cvnet(&["sweep", "--rbar-min", "0", "--rbar-max", "2", "--steps", "9"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("N,rbar,F_opt,F_equal,F_unbiased,F_worst,eta_N,E_T,E_F_loc,E_tau\n"));
    let (h, rows) = parse_csv(&text);
    assert_eq!(rows.len(), 6 * 9);
    let sizes: Vec<f64> = rows.iter().map(|r| field(&h, r, "N")).collect();
    assert!(sizes.windows(2).all(|w| w[0] <= w[1]));
    for row in &rows {
        let (rbar, f_opt) = (field(&h, row, "rbar"), field(&h, row, "F_opt"));
        if rbar == 0.0 {
            assert_eq!(f_opt, 0.5);
        } else {
            assert!(f_opt > 0.5);
        }
        assert!(field(&h, row, "F_worst") <= field(&h, row, "F_equal") + 1e-11);
        assert!(field(&h, row, "F_equal") <= f_opt + 1e-11);
        assert!(field(&h, row, "F_unbiased") <= f_opt + 1e-11);
        let e_tau_empty = row[9].is_empty();
        assert_eq!(e_tau_empty, field(&h, row, "N") != 3.0);
    }
}

#[test]
fn mixed_three_mode_sweep_leaves_contangle_empty() {
    let out = cvnet(&["sweep", "--N-list", "3", "--n1", "1.5", "--steps", "3"]);
    let (_, rows) = parse_csv(&stdout(&out));
    assert!(rows.iter().all(|r| r[9].is_empty()));
}

#[test]
fn csv_is_byte_stable() {
    let args = ["sweep", "--N-list", "2,3,8", "--steps", "11", "--n2", "1.3"];
    assert_eq!(cvnet(&args).stdout, cvnet(&args).stdout);
}

#[test]
fn json_and_csv_encode_identical_values() {
    let base = ["sweep", "--N-list", "3,4", "--steps", "5", "--rbar-max", "1.5"];
    let (h, rows) = parse_csv(&stdout(&cvnet(&base)));
    let mut json_args = base.to_vec();
    json_args.extend(["--output", "json"]);
    let doc: serde_json::Value = serde_json::from_slice(&cvnet(&json_args).stdout).unwrap();
    assert_eq!(doc["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(doc["config"]["N_list"], serde_json::json!([3, 4]));
    assert_eq!(doc["config"]["steps"], 5);
    let json_rows = doc["rows"].as_array().unwrap();
    assert_eq!(json_rows.len(), rows.len());
    for (csv_row, obj) in rows.iter().zip(json_rows) {
        for (name, text) in h.iter().zip(csv_row) {
            let v = &obj[name.as_str()];
            if text.is_empty() {
                assert!(v.is_null(), "{name}");
            } else {
                assert_eq!(v.as_f64().unwrap(), text.parse::<f64>().unwrap(), "{name}");
            }
        }
    }
}

#[test]
fn log_base_switch_changes_units() {
    let run = |base| {
        let out = cvnet(&["entanglement", "--N", "3", "--rbar", "0.5", "--log-base", base]);
        let (h, rows) = parse_csv(&stdout(&out));
        field(&h, &rows[0], "E_F_loc")
    };
    let (bits, nats) = (run("2"), run("e"));
    assert!((bits * 2f64.ln() - nats).abs() < 1e-10);
}

#[test]
fn optimize_reports_matching_methods() {
    let out = cvnet(&["optimize", "--N", "3", "--rbar", "0.5"]);
    let (h, rows) = parse_csv(&stdout(&out));
    assert_eq!(rows.len(), 2);
    for name in ["d_opt", "g_opt", "F_opt"] {
        assert!((field(&h, &rows[0], name) - field(&h, &rows[1], name)).abs() < 1e-8, "{name}");
    }
    assert!((field(&h, &rows[0], "g_opt") - 0.80985).abs() < 1e-4);
}

#[test]
fn localize_meets_eta_n_at_default_bias() {
    let out = cvnet(&["localize", "--N", "3", "--rbar", "0.5"]);
    let (h, rows) = parse_csv(&stdout(&out));
    assert!((field(&h, &rows[0], "eta_loc") - field(&h, &rows[0], "eta_N")).abs() < 1e-9);
    assert!((field(&h, &rows[0], "eta_epr") - field(&h, &rows[0], "eta_N")).abs() < 1e-9);
}

#[test]
fn verify_passes_and_detects_faults() {
    let ok = cvnet(&["verify", "--samples", "20000"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    let (_, rows) = parse_csv(&stdout(&ok));
    assert_eq!(rows.len(), 6);
    let bad = cvnet(&["verify", "--samples", "20000", "--inject-fault"]);
    assert_eq!(bad.status.code(), Some(1));
    let err = String::from_utf8(bad.stderr).unwrap();
    assert!(err.contains("N=") && err.contains("failed"), "{err}");
}
