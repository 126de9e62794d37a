use std::fs;
use std::path::Path;
use std::process::Command;

use rr_adam_lab::harness::{
    emit, run_experiment, run_fig3, run_thm2, Experiment, ExperimentConfig, Format,
};
use rr_adam_lab::LabError;

fn small_fig3() -> ExperimentConfig {
    ExperimentConfig::from_json(r#"{"experiment": "fig3", "horizon": 200, "seeds": [1, 2]}"#).unwrap()
}

fn read_tree(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().unwrap() != "meta.json" {
                let rel = path.strip_prefix(root).unwrap().display().to_string();
                out.push((rel, fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn repeated_runs_emit_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    for format in [Format::Json, Format::Csv] {
        let (a, b) = (dir.path().join("a"), dir.path().join("b"));
        emit(&run_fig3(&small_fig3()).unwrap(), format, &a).unwrap();
        emit(&run_fig3(&small_fig3()).unwrap(), format, &b).unwrap();
        let (ta, tb) = (read_tree(&a), read_tree(&b));
        assert!(!ta.is_empty());
        assert_eq!(ta, tb);
        fs::remove_dir_all(&a).unwrap();
        fs::remove_dir_all(&b).unwrap();
    }
}

#[test]
fn csv_outputs_have_one_row_per_run_and_step() {
    let cfg = small_fig3();
    let report = run_fig3(&cfg).unwrap();
    assert_eq!(report.runs.len(), cfg.beta2.len() * cfg.seeds.len());
    let dir = tempfile::tempdir().unwrap();
    emit(&report, Format::Csv, dir.path()).unwrap();
    let root = dir.path().join("fig3");
    let runs = fs::read_to_string(root.join("runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 1 + report.runs.len());
    let conclusions = fs::read_to_string(root.join("conclusions.csv")).unwrap();
    assert_eq!(conclusions.lines().count(), 1 + report.conclusions.len());
    for run in &report.runs {
        let traj = fs::read_to_string(root.join(&run.run_id).join("trajectory.csv")).unwrap();
        // ten component steps per epoch plus the header
        assert_eq!(traj.lines().count(), 1 + 10 * cfg.horizon as usize);
        let plot = fs::read_to_string(root.join(&run.run_id).join("plot.csv")).unwrap();
        let mut lines = plot.lines();
        let width = lines.next().unwrap().split(',').count();
        for line in lines {
            let cells: Vec<&str> = line.split(',').collect();
            assert_eq!(cells.len(), width, "{line}");
            assert!(cells.iter().all(|c| !c.is_empty() && c.parse::<f64>().is_ok()), "{line}");
        }
    }
}

#[test]
fn json_report_keys_are_sorted() {
    let dir = tempfile::tempdir().unwrap();
    emit(&run_fig3(&small_fig3()).unwrap(), Format::Json, dir.path()).unwrap();
    let text = fs::read_to_string(dir.path().join("fig3/report.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    let keys: Vec<&String> = value.as_object().unwrap().keys().collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    let first = text.find("\"conclusions\"").unwrap();
    let later = text.find("\"runs\"").unwrap();
    assert!(first < later);
}

#[test]
fn empty_grids_are_rejected() {
    let mut cfg = small_fig3();
    cfg.beta2.clear();
    assert!(matches!(run_fig3(&cfg), Err(LabError::Config(_))));

    let mut cfg = ExperimentConfig::defaults(Experiment::Thm2Divergence);
    cfg.eta_factors.clear();
    assert!(matches!(run_thm2(&cfg), Err(LabError::Config(_))));

    assert!(ExperimentConfig::from_json(r#"{"experiment": "fig3", "seeds": []}"#).is_err());
    assert!(ExperimentConfig::from_json(r#"{"experiment": "fig3", "bogus": 1}"#).is_err());
}

#[test]
fn small_m_breaks_the_construction() {
    let cfg = ExperimentConfig::from_json(
        r#"{"experiment": "thm2_divergence", "construction": {"L0": 1, "L1": 1, "M": 0.5, "f_bar": 10.0}}"#,
    )
    .unwrap();
    assert!(matches!(run_thm2(&cfg), Err(LabError::ConstraintViolation { .. })));
}

#[test]
fn lemma_grid_points_outside_the_domain_are_skipped() {
    let cfg = ExperimentConfig::from_json(
        r#"{"experiment": "lemma_suite", "horizon": 20, "beta1": [0.0, 0.999], "beta2": [0.99], "seeds": [1]}"#,
    )
    .unwrap();
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.runs.len(), 2);
    let skipped: Vec<_> = report.runs.iter().filter(|r| r.skipped.is_some()).collect();
    assert_eq!(skipped.len(), 1);
    assert_eq!(skipped[0].beta1, Some(0.999));
    assert!(skipped[0].skipped.as_ref().unwrap().contains(">= beta2"));
    assert!(skipped[0].status.is_none());
    assert!(report.passed);
}

fn cli(args: &[&str], config: Option<&str>) -> (i32, String) {
    let dir = tempfile::tempdir().unwrap();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rr-adam-lab"));
    cmd.args(args).arg("--out").arg(dir.path().join("out"));
    if let Some(text) = config {
        let path = dir.path().join("config.json");
        fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    let out = cmd.output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr);
    (out.status.code().unwrap(), text)
}

#[test]
fn cli_exit_codes() {
    let (code, text) = cli(&["lemmas"], Some(r#"{"experiment": "lemma_suite", "horizon": 20, "seeds": [1]}"#));
    assert_eq!(code, 0, "{text}");
    assert!(text.contains("PASS zero_violations"));

    let (code, text) = cli(
        &["fig3"],
        Some(r#"{"experiment": "fig3", "horizon": 100, "seeds": [1], "stationarity_floor": 1.0}"#),
    );
    assert_eq!(code, 1, "{text}");
    assert!(text.contains("FAIL"));

    let (code, text) = cli(&["fig3"], Some(r#"{"experiment": "fig3", "beta2": "x"}"#));
    assert_eq!(code, 2, "{text}");
    let (code, _) = cli(&["fig3"], Some(r#"{"experiment": "lemma_suite"}"#));
    assert_eq!(code, 2);
}
