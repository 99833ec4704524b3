use std::process::{Command, Output};

fn cowqkd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cowqkd")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn every_subcommand_runs() {
    for args in [
        &["rates", "--length-km", "50"][..],
        &["usd", "--mu", "0.5"],
        &["mix", "--length-km", "150"],
        &["scan", "--steps", "5", "--curves", "MIX,BS"],
        &["bs", "--length-km", "50"],
        &["three-state", "--qber", "0.02", "--visibility", "0.98"],
        &["mc", "--windows", "20000", "--strategy", "usd3", "--mu", "0.5"],
    ] {
        let out = cowqkd(args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stdout.is_empty());
    }
}

#[test]
fn exit_codes() {
    assert_eq!(cowqkd(&["mix", "--f", "0.3"]).status.code(), Some(3));
    assert_eq!(cowqkd(&["rates", "--mu", "-1"]).status.code(), Some(2));
    assert_eq!(cowqkd(&["scan", "--curves", "NOPE"]).status.code(), Some(2));
    assert_eq!(cowqkd(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(cowqkd(&["mc", "--windows", "0"]).status.code(), Some(2));
}

#[test]
fn csv_output() {
    let out = cowqkd(&["scan", "--steps", "3", "--format", "csv", "--curves", "BS"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# "));
    assert_eq!(lines[1], "length_km,t,BS_mu_opt,BS_rate,BS_mu_max,BS_feasible,min_envelope");
    assert_eq!(lines.len(), 5);
}

#[test]
fn flags_override_the_config_file() {
    let dir = std::env::temp_dir().join(format!("cowqkd-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "mu = 0.3\nlength_km = 70\nformat = json\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let from_file = json(&cowqkd(&["rates", "--config", cfg]));
    assert_eq!(from_file["params"]["mu"], 0.3);
    assert_eq!(from_file["params"]["length_km"], 70.0);
    let flagged = json(&cowqkd(&["rates", "--config", cfg, "--mu", "0.6"]));
    assert_eq!(flagged["params"]["mu"], 0.6);
    assert_eq!(flagged["params"]["length_km"], 70.0);
    let defaults = json(&cowqkd(&["rates"]));
    assert_eq!(defaults["params"]["length_km"], 0.0);

    let out = dir.join("out.json");
    let written = cowqkd(&["mc", "--windows", "10000", "--seed", "3", "--out", out.to_str().unwrap()]);
    assert!(written.status.success() && written.stdout.is_empty());
    let again = cowqkd(&["mc", "--windows", "10000", "--seed", "3"]);
    assert_eq!(std::fs::read(&out).unwrap(), again.stdout);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn usd_table_agrees() {
    let v = json(&cowqkd(&["usd", "--mu", "1.0"]));
    for k in v["kinds"].as_array().unwrap() {
        let (c, o) = (k["closed_form"].as_f64().unwrap(), k["gram_oracle"].as_f64().unwrap());
        assert!((c - o).abs() < 1e-10);
    }
}
