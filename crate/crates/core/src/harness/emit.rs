use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::experiments::{ExperimentReport, PlotData, RunSummary};
use crate::error::{LabError, Result};
use crate::optimizers::RunStatus;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Pretty JSON with keys sorted at every level.
pub fn to_sorted_json<T: Serialize>(value: &T) -> Result<String> {
    // serde_json::Value keeps object keys in a BTreeMap
    let v = serde_json::to_value(value)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

pub fn report_json(report: &ExperimentReport) -> Result<String> {
    to_sorted_json(report)
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

const RUN_COLUMNS: [&str; 13] = [
    "run_id",
    "method",
    "seed",
    "beta1",
    "beta2",
    "eta1",
    "eta_factor",
    "status",
    "epochs",
    "terminal_grad_norm",
    "progress_metric",
    "min_grad_norm",
    "skipped",
];

/// One row per run: fixed columns, then the union of metric names in sorted order.
pub fn runs_csv(runs: &[RunSummary]) -> String {
    let mut metrics: Vec<&String> = runs.iter().flat_map(|r| r.metrics.keys()).collect();
    metrics.sort();
    metrics.dedup();
    let mut out = RUN_COLUMNS.join(",");
    for m in &metrics {
        out.push(',');
        out.push_str(m);
    }
    out.push('\n');
    for r in runs {
        let status = match r.status {
            Some(RunStatus::Completed) => "completed".to_string(),
            Some(RunStatus::Diverged { step }) => format!("diverged@{step}"),
            Some(RunStatus::NonFinite { step }) => format!("non_finite@{step}"),
            None => String::new(),
        };
        let fields = [
            quote(&r.run_id),
            serde_json::to_value(r.method)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default(),
            r.seed.map(|s| s.to_string()).unwrap_or_default(),
            cell(r.beta1),
            cell(r.beta2),
            r.eta1.to_string(),
            cell(r.eta_factor),
            quote(&status),
            r.epochs.to_string(),
            cell(r.terminal_grad_norm),
            cell(r.progress_metric),
            cell(r.min_grad_norm),
            quote(r.skipped.as_deref().unwrap_or("")),
        ];
        out.push_str(&fields.join(","));
        for m in &metrics {
            out.push(',');
            out.push_str(&cell(r.metrics.get(*m).copied()));
        }
        out.push('\n');
    }
    out
}

pub fn conclusions_csv(report: &ExperimentReport) -> String {
    let mut out = String::from("name,passed,detail\n");
    for c in &report.conclusions {
        let _ = writeln!(out, "{},{},{}", quote(&c.name), c.passed, quote(&c.detail));
    }
    out
}

pub fn plot_csv(plot: &PlotData) -> String {
    let mut out = plot.columns.join(",");
    out.push('\n');
    for row in &plot.rows {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn write(path: PathBuf, contents: &[u8], written: &mut Vec<PathBuf>) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|source| LabError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    fs::write(&path, contents).map_err(|source| LabError::Io {
        path: path.clone(),
        source,
    })?;
    written.push(path);
    Ok(())
}

/// Writes `<root>/<experiment>/…`: the sweep report, and per run its
/// summary, trajectory CSV and plot-data CSV. Every file is a function of the
/// report alone except `meta.json`, which carries the wall-clock time.
pub fn emit(report: &ExperimentReport, format: Format, root: &Path) -> Result<Vec<PathBuf>> {
    let dir = root.join(report.experiment.slug());
    let mut written = Vec::new();
    match format {
        Format::Json => write(dir.join("report.json"), report_json(report)?.as_bytes(), &mut written)?,
        Format::Csv => {
            write(dir.join("runs.csv"), runs_csv(&report.runs).as_bytes(), &mut written)?;
            write(dir.join("conclusions.csv"), conclusions_csv(report).as_bytes(), &mut written)?;
        }
    }
    for run in &report.runs {
        let run_dir = dir.join(&run.run_id);
        match format {
            Format::Json => write(run_dir.join("summary.json"), to_sorted_json(run)?.as_bytes(), &mut written)?,
            Format::Csv => write(
                run_dir.join("summary.csv"),
                runs_csv(std::slice::from_ref(run)).as_bytes(),
                &mut written,
            )?,
        }
    }
    for art in &report.artifacts {
        let run_dir = dir.join(&art.run_id);
        if let Some(traj) = &art.trajectory {
            let csv = traj.to_csv_string(art.smoothness.as_deref())?;
            write(run_dir.join("trajectory.csv"), csv.as_bytes(), &mut written)?;
        }
        if !art.plot.rows.is_empty() {
            write(run_dir.join("plot.csv"), plot_csv(&art.plot).as_bytes(), &mut written)?;
        }
    }
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = serde_json::json!({ "generated_unix_seconds": stamp, "files": written.len() });
    write(dir.join("meta.json"), to_sorted_json(&meta)?.as_bytes(), &mut written)?;
    Ok(written)
}
