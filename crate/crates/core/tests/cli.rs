use std::process::{Command, Output};

fn ale_mol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ale-mol"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn temp_path(name: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("ale-mol-{}-{name}", std::process::id()))
}

#[test]
fn unknown_flag_is_rejected() {
    let o = ale_mol(&["converge", "--bogus"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn bad_value_exits_with_error() {
    let o = ale_mol(&["converge", "--N", "8", "--case", "sideways"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn audit_prints_one_row_per_sample() {
    let o = ale_mol(&["audit", "--N", "8", "--samples", "32"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,lambda_max_energy,lambda_max_ref,pass"));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 32);
    assert!(rows.iter().all(|r| r.ends_with(",PASS")));
}

#[test]
fn freestream_passes() {
    let o = ale_mol(&["freestream", "--N", "8", "--u-inf", "2.5"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).lines().any(|l| l == "PASS"));
}

#[test]
fn converge_writes_table() {
    let out = temp_path("conv.csv");
    let o = ale_mol(&["converge", "--N", "8,16", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    std::fs::remove_file(&out).ok();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "N,log10_err,rate");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("8,"));
    assert!(lines[2].starts_with("16,"));
    let rate: f64 = lines[2].rsplit(',').next().unwrap().parse().unwrap();
    assert!(rate > 1.5);
}

#[test]
fn flags_override_config_file() {
    let cfg = temp_path("run.cfg");
    std::fs::write(&cfg, "# trial\nepsilon = -1\nN = 8\n").unwrap();
    let bad = ale_mol(&["ops", "--config", cfg.to_str().unwrap()]);
    let good = ale_mol(&["ops", "--config", cfg.to_str().unwrap(), "--epsilon", "0.3"]);
    std::fs::remove_file(&cfg).ok();
    assert_eq!(bad.status.code(), Some(2));
    assert!(good.status.success());
    assert!(stdout(&good).starts_with("operator,nodes,residual"));
}

#[test]
fn config_unknown_key_is_an_error() {
    let cfg = temp_path("bad.cfg");
    std::fs::write(&cfg, "speed = 3\n").unwrap();
    let o = ale_mol(&["ops", "--config", cfg.to_str().unwrap()]);
    std::fs::remove_file(&cfg).ok();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("speed"));
}
