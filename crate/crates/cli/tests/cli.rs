//! End-to-end runs of the binary over temporary files.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mrsched"))
}

fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn tiny_instance() -> &'static str {
    r#"{
  "beta": 2.0,
  "energy_budget": 2.0,
  "num_processors": 2,
  "jobs": [
    {"id": 1, "weight": 1.0, "release": 0.0, "tasks": [
      {"processor": 1, "kind": "map", "volume": 1.0},
      {"processor": 2, "kind": "reduce", "volume": 1.0}
    ]}
  ]
}"#
}

#[test]
fn generate_validate_round_trip() {
    let dir = std::env::temp_dir().join(format!("mrsched-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let gen_cfg = write(
        &dir,
        "gen.json",
        r#"{
  "num_processors": 6,
  "num_jobs": 3,
  "maps_per_job": 2,
  "reduces_per_job": 1,
  "map_work": [1.0, 10.0],
  "reduce_extra_work": [1.0, 10.0],
  "reduce_inflation": 3.0,
  "weight": [1.0, 10.0],
  "release": {"CoinFlipUnitIntervals": {"accept_probability": 0.5}},
  "energy_budget": 90.0,
  "beta": 2.0,
  "seed": 11
}"#,
    );
    let inst = dir.join("inst.json");
    let status = bin()
        .args(["generate", "--config"])
        .arg(&gen_cfg)
        .arg("--out")
        .arg(&inst)
        .status()
        .unwrap();
    assert!(status.success());

    let status = bin().args(["validate", "--instance"]).arg(&inst).status().unwrap();
    assert!(status.success());

    // Identical seeds produce byte-identical instance files.
    let inst2 = dir.join("inst2.json");
    bin().args(["generate", "--config"])
        .arg(&gen_cfg)
        .arg("--out")
        .arg(&inst2)
        .status()
        .unwrap();
    assert_eq!(std::fs::read(&inst).unwrap(), std::fs::read(&inst2).unwrap());
}

#[test]
fn schedule_order_emits_valid_schedule() {
    let dir = std::env::temp_dir().join(format!("mrsched-cli-order-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let inst = write(&dir, "inst.json", tiny_instance());
    let sched = dir.join("sched.csv");
    let output = bin()
        .args(["schedule-order", "--order", "fcfs", "--times", "cp", "--instance"])
        .arg(&inst)
        .arg("--out")
        .arg(&sched)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let text = std::fs::read_to_string(&sched).unwrap();
    assert!(text.starts_with("job_id,kind,processor,start,duration,speed,energy,completion"));

    // The emitted schedule file validates against the instance.
    let status = bin()
        .args(["validate", "--instance"])
        .arg(&inst)
        .arg("--schedule")
        .arg(&sched)
        .status()
        .unwrap();
    assert!(status.success());
}

#[test]
fn schedule_alpha_emits_certificate() {
    let dir = std::env::temp_dir().join(format!("mrsched-cli-alpha-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let inst = write(&dir, "inst.json", tiny_instance());
    let cert = dir.join("cert.txt");
    let output = bin()
        .args(["schedule-alpha", "--instance"])
        .arg(&inst)
        .arg("--certificate")
        .arg(&cert)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let report = std::fs::read_to_string(&cert).unwrap();
    assert!(report.contains("total-energy"));
    assert!(report.contains("objective"));
}

#[test]
fn ratios_and_tradeoff_emit_csv() {
    let out = bin().args(["ratios", "--beta", "2"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().next().unwrap().starts_with("beta,variant,alpha_star,ratio"));
    assert_eq!(text.lines().count(), 4);

    let out = bin()
        .args(["tradeoff", "--beta", "2", "--levels", "0,50,100"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn oracle_handles_infeasible_budgets() {
    let dir = std::env::temp_dir().join(format!("mrsched-cli-oracle-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let inst = write(
        &dir,
        "tight.json",
        &tiny_instance().replace("\"energy_budget\": 2.0", "\"energy_budget\": 0.5"),
    );
    let output = bin()
        .args(["oracle", "--speeds", "0.5,1,2", "--instance"])
        .arg(&inst)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));

    let feasible = write(&dir, "ok.json", tiny_instance());
    let output = bin()
        .args(["oracle", "--speeds", "0.5,1,2", "--instance"])
        .arg(&feasible)
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.starts_with("# objective=2"), "{text}");
}
