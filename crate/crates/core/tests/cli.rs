use std::process::Command;

use spinbell::sweep::{read_csv, CSV_HEADER, TABLE1_HEADER};

fn spinbell() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spinbell"))
}

fn run_ok(cmd: &mut Command) -> String {
    let out = cmd.output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn ground_reports_energy() {
    let text = run_ok(spinbell().args(["ground", "--n", "4", "--jz", "1", "--d", "0", "--json"]));
    let v: serde_json::Value = serde_json::from_str(text.trim()).unwrap();
    assert!((v["energy"].as_f64().unwrap() + 6.0).abs() < 1e-9);
    assert_eq!(v["dim"].as_u64(), Some(19));
}

#[test]
fn bell_reports_the_optimum() {
    let text = run_ok(spinbell().args(["bell", "--n", "8", "--jz", "12", "--d", "11.9155", "--json"]));
    let v: serde_json::Value = serde_json::from_str(text.trim()).unwrap();
    assert!((v["f_ratio"].as_f64().unwrap() - 0.5502).abs() < 1e-3);
    assert!(v["ratio"].as_f64().unwrap() > 2.5);
    assert!(v["fidelity"].as_f64().unwrap() > 0.9);
    assert!(!v["maxima"].as_array().unwrap().is_empty());

    let text = run_ok(spinbell().args(["bell", "--n", "4", "--jz", "1", "--d", "0", "--f-ratio", "0.5", "--json"]));
    let v: serde_json::Value = serde_json::from_str(text.trim()).unwrap();
    assert_eq!(v["f_ratio"].as_f64(), Some(0.5));
}

#[test]
fn lrbound_methods_agree() {
    let mut values = Vec::new();
    for method in ["dp", "brute", "literal"] {
        let text = run_ok(spinbell().args(["lrbound", "--n", "4", "--f2", "1.039", "--method", method]));
        values.push(text.trim().parse::<f64>().unwrap());
    }
    assert!((values[0] - values[1]).abs() < 1e-12);
    assert!((values[0] - values[2]).abs() < 1e-10);
    let text = run_ok(spinbell().args(["lrbound", "--n", "2", "--f2", "0", "--c", "1,-1", "--theta1", "0"]));
    assert!(text.trim().parse::<f64>().unwrap() > 0.0);
}

#[test]
fn sweep_from_config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.cfg");
    let csv = dir.path().join("out.csv");
    std::fs::write(
        &cfg,
        format!(
            "# small grid\nn = 4\njz_min = 1\njz_max = 2\njz_steps = 2\nd_min = 0\nd_max = 1\nd_steps = 3\ncsv = {}\n",
            csv.display()
        ),
    )
    .unwrap();
    run_ok(spinbell().arg("--config").arg(&cfg).args(["sweep", "--d-steps", "2"]));
    let records = read_csv(std::fs::File::open(&csv).unwrap()).unwrap();
    assert_eq!(records.len(), 4);
    assert!(records.iter().all(|r| r.is_ok()));
    let header = std::fs::read_to_string(&csv).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, CSV_HEADER.join(","));

    // stdout when no output file is configured, identical on rerun
    let args = ["sweep", "--n", "4", "--jz-min", "1", "--jz-max", "1", "--jz-steps", "1", "--d-steps", "2", "--d-max", "1"];
    let a = run_ok(spinbell().args(args));
    let b = run_ok(spinbell().args(args).args(["--workers", "1"]));
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 3);
}

#[test]
fn table1_with_given_ratios() {
    let text = run_ok(spinbell().args(["table1", "--n", "4,6", "--f-ratios", "1.039,0.7423"]));
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), TABLE1_HEADER.join(","));
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(row[0], 4.0);
    assert!((row[2] - 0.57983).abs() < 1e-5);
    assert!((row[3] - 1.94965).abs() < 1e-5);
}

#[test]
fn odd_chain_and_bad_keys_are_rejected() {
    let out = spinbell().args(["sweep", "--n", "5"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("odd N=5"));

    let out = spinbell().args(["sweep", "--set", "bogus=1"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "n = 4\nd_steps = lots\n").unwrap();
    let out = spinbell().arg("--config").arg(&cfg).arg("sweep").output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}
