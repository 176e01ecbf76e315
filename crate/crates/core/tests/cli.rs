use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_collisionless"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_reports_the_reference_root_and_writes_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["solve", "--model", "armed-biped", "--pick", "lowest-row"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let sol = read_json(&dir.path().join("solution.json"));
    let first = &sol["solutions"][0];
    assert!((first["times"]["tau"].as_f64().unwrap() - 3.0795).abs() < 5e-4);
    assert_eq!(first["accepted"], Value::Bool(true));
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["command"], "solve");
    assert_eq!(manifest["exitCode"], 0);
    assert_eq!(manifest["seeds"][0], 42);
    assert!(manifest["outputPaths"][0].as_str().unwrap().ends_with("solution.json"));
}

#[test]
fn pick_all_lists_every_root_with_its_validation() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["solve", "--pick", "all", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let sol: Value = serde_json::from_slice(&out.stdout).unwrap();
    let entries = sol["solutions"].as_array().unwrap();
    assert_eq!(entries.len(), sol["rootsFound"].as_u64().unwrap() as usize);
    assert!(entries.len() >= 4);
    assert!(entries.iter().all(|e| e.get("validation").is_some()));
    let rows: Vec<bool> = entries
        .iter()
        .filter(|e| e["row"] == 1)
        .map(|e| e["accepted"].as_bool().unwrap())
        .collect();
    assert!(!rows.is_empty() && rows.iter().all(|a| !a));
}

#[test]
fn negative_top_constrained_eigenvalue_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("spectra.json");
    std::fs::write(
        &cfg,
        r#"{"lambda":[-2,-1,1],"lambdaPrime":[-1.5,-0.2],"sigma":[-1,-1,-1],"sigmaPrime":[1,1]}"#,
    )
    .unwrap();
    let out = run(dir.path(), &["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["exitCode"], 2);
    assert_eq!(manifest["inputHashes"].as_object().unwrap().len(), 1);
}

#[test]
fn empty_grid_window_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["solve", "--o-max", "2.0", "--op-max", "0.5"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn contour_csv_only_emits_no_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["contour", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("contour.csv").exists());
    assert!(!dir.path().join("contour.svg").exists());
    let header = std::fs::read_to_string(dir.path().join("contour.csv")).unwrap();
    assert!(header.lines().count() > 1000);
}

#[test]
fn trajectory_round_trips_through_validate() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["trajectory", "--samples", "200"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["trajectory.csv", "trajectory.svg", "trajectory.json", "validation.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let check = dir.path().join("check");
    let traj = dir.path().join("trajectory.json");
    let out = run(&check, &["validate", "--trajectory", traj.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(read_json(&check.join("validation.json"))["passed"], Value::Bool(true));
}

#[test]
fn second_row_trajectory_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["trajectory", "--pick", "nearest=3.79,4.08", "--format", "json"],
    );
    assert_eq!(out.status.code(), Some(4));
    let report = read_json(&dir.path().join("validation.json"));
    assert!(report["contactForceViolation"].as_f64().unwrap() < 0.0);
}

#[test]
fn analytic2_table_has_five_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &[
            "analytic2",
            "--family",
            "rocker",
            "--nu1",
            "1",
            "--omega2",
            "2",
            "--omega1p",
            "1",
            "--n",
            "1..5",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let table = read_json(&dir.path().join("analytic2.json"));
    let rows = table["branches"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    assert!(rows[0].get("error").is_some());
    assert!(rows[1..].iter().all(|r| r["solution"]["tau"].as_f64().unwrap() > 0.0));
}

#[test]
fn c0_study_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["critical", "--study-c0", "--n", "3", "--samples", "100", "--seed", "42"];
    assert_eq!(run(a.path(), &args).status.code(), Some(0));
    assert_eq!(run(b.path(), &args).status.code(), Some(0));
    let ja = std::fs::read_to_string(a.path().join("critical-study.json")).unwrap();
    let jb = std::fs::read_to_string(b.path().join("critical-study.json")).unwrap();
    assert_eq!(ja, jb);
    assert!(
        read_json(&a.path().join("critical-study.json"))["minC0"]
            .as_f64()
            .unwrap()
            > 0.0
    );
}

#[test]
fn near_critical_sample_feeds_contour_asymptotes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["critical", "--sample-spectra", "--n", "4", "--epsilon", "0.01"],
    );
    assert_eq!(out.status.code(), Some(0));
    let spectra = dir.path().join("spectra.json");
    let plot = dir.path().join("plot");
    let out = run(
        &plot,
        &[
            "--json",
            "contour",
            "--config",
            spectra.to_str().unwrap(),
            "--asymptotes",
            "3..6",
            "--o-max",
            "20",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let summary: Value = serde_json::from_slice(&out.stdout).unwrap();
    let crosses = summary["crosses"].as_array().unwrap();
    assert_eq!(crosses.len(), 4);
    assert!(crosses.iter().all(|c| c["displacement"].as_f64().unwrap() < 0.2));
    assert!(std::fs::read_to_string(plot.join("contour.svg"))
        .unwrap()
        .contains("<svg"));
}

#[test]
fn reproduce_passes_and_perturbed_fixtures_exit_five() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["--json", "reproduce", "--target", "appendix-e"]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], Value::Bool(true));
    assert_eq!(report["rows"].as_array().unwrap().len(), 10);
    let out = run(dir.path(), &["reproduce", "--perturb", "0.01"]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn zero_mode_family_is_pointed_at_analytic2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["solve", "--model", "hopper"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("analytic2"));
}

#[test]
fn list_models_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["list-models"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("armed-biped"));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn model_file_config_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let model = collisionless::model::build_armed_biped(Default::default()).unwrap();
    let cfg = dir.path().join("model.json");
    std::fs::write(&cfg, model.to_json().unwrap()).unwrap();
    let out = run(dir.path(), &["--json", "solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let sol: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((sol["solutions"][0]["times"]["tauPrime"].as_f64().unwrap() - 0.77785).abs() < 5e-5);
}
