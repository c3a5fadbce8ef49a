//! Writes traces, summaries and tables for one experiment.
//!
//! Layout under the output directory:
//! `<experiment>/<run>/trace.csv`, `<experiment>/<run>/summary.json`,
//! `<experiment>/experiment.json`, plus `penalty_curves.csv` for the 1-D demo
//! and `regression.csv` for the regression study. Everything except the
//! timing fields of `experiment.json` and `regression.csv` is a pure function
//! of the build, the configuration and the seed.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use smdpen_core::benchmarks::{ExperimentKind, ExperimentOutput, RegressionReport};
use smdpen_core::report::{fmt_float, PenaltyEvent};
use smdpen_core::{RunReport, SolverConfig};

use crate::config::RunConfig;

#[derive(Serialize)]
struct ConfigEcho<'a> {
    requested: &'a RunConfig,
    resolved: &'a SolverConfig,
}

#[derive(Serialize)]
struct RunSummaryFile<'a> {
    experiment: ExperimentKind,
    run: &'a str,
    seed: u64,
    diverged: bool,
    error: Option<String>,
    summary: serde_json::Value,
    metrics: BTreeMap<&'a str, f64>,
    events: &'a [PenaltyEvent],
    config: ConfigEcho<'a>,
}

#[derive(Serialize)]
struct ExperimentFile<'a> {
    experiment: ExperimentKind,
    runs: Vec<&'a str>,
    error: Option<String>,
    metrics: &'a BTreeMap<String, f64>,
    wall_clock_secs: f64,
    run_wall_clock_secs: BTreeMap<&'a str, f64>,
    config: &'a RunConfig,
}

/// Renders `summary.json` for one run. The wall-clock time is left out so the
/// file is reproducible.
pub fn run_summary_json(
    kind: ExperimentKind,
    report: &RunReport,
    metrics: &BTreeMap<String, f64>,
    error: Option<&smdpen_core::Error>,
    config: &RunConfig,
) -> String {
    let mut summary = serde_json::to_value(&report.summary).expect("summary serializes");
    if let Some(map) = summary.as_object_mut() {
        map.remove("wall_clock_secs");
    }
    let prefix = format!("{}.", report.name);
    let file = RunSummaryFile {
        experiment: kind,
        run: &report.name,
        seed: report.config.seed,
        diverged: report.summary.diverged,
        error: error.map(|e| e.to_string()),
        summary,
        metrics: metrics
            .iter()
            .filter_map(|(k, v)| k.strip_prefix(&prefix).map(|k| (k, *v)))
            .collect(),
        events: &report.events,
        config: ConfigEcho {
            requested: config,
            resolved: &report.config,
        },
    };
    let mut text = serde_json::to_string_pretty(&file).expect("summary serializes");
    text.push('\n');
    text
}

/// `regression.csv`: one row per dataset configuration.
pub fn regression_csv(rows: &[RegressionReport]) -> String {
    let mut out = String::from(
        "tier,samples,features,seed,iterations,time_s,final_objective,test_mse,support_recovery,final_p\n",
    );
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{:.3},{},{},{},{}",
            r.tier,
            r.n_samples,
            r.p_features,
            r.seed,
            r.iterations,
            r.wall_clock_secs,
            fmt_float(r.final_objective),
            fmt_float(r.test_mse),
            fmt_float(r.support_recovery),
            fmt_float(r.final_p)
        )
        .unwrap();
    }
    out
}

/// Every file of one experiment, as `(path, contents)` pairs.
pub fn experiment_files(
    out_dir: &Path,
    kind: ExperimentKind,
    output: &ExperimentOutput,
    config: &RunConfig,
) -> Vec<(PathBuf, String)> {
    let dir = out_dir.join(kind.name());
    let mut files = Vec::new();
    let last = output.runs.len().saturating_sub(1);
    for (i, report) in output.runs.iter().enumerate() {
        let error = if i == last {
            output.failure.as_ref()
        } else {
            None
        };
        let run_dir = dir.join(&report.name);
        files.push((run_dir.join("trace.csv"), report.trace_csv()));
        files.push((
            run_dir.join("summary.json"),
            run_summary_json(kind, report, &output.metrics, error, config),
        ));
    }
    if let Some(curves) = &output.curves {
        files.push((dir.join("penalty_curves.csv"), curves.csv()));
    }
    if !output.regression.is_empty() {
        files.push((
            dir.join("regression.csv"),
            regression_csv(&output.regression),
        ));
    }
    let overview = ExperimentFile {
        experiment: kind,
        runs: output.runs.iter().map(|r| r.name.as_str()).collect(),
        error: output.failure.as_ref().map(|e| e.to_string()),
        metrics: &output.metrics,
        wall_clock_secs: output.wall_clock_secs,
        run_wall_clock_secs: output
            .runs
            .iter()
            .map(|r| (r.name.as_str(), r.summary.wall_clock_secs))
            .collect(),
        config,
    };
    let mut text = serde_json::to_string_pretty(&overview).expect("overview serializes");
    text.push('\n');
    files.push((dir.join("experiment.json"), text));
    files
}

/// Writes every file, or none: on the first failure the files already
/// written by this call are removed.
pub fn write_all(files: &[(PathBuf, String)]) -> io::Result<()> {
    let mut written: Vec<&Path> = Vec::new();
    for (path, contents) in files {
        let result = path
            .parent()
            .map_or(Ok(()), fs::create_dir_all)
            .and_then(|_| fs::write(path, contents));
        if let Err(e) = result {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            return Err(io::Error::new(e.kind(), format!("{}: {e}", path.display())));
        }
        written.push(path);
    }
    Ok(())
}

/// Writes the experiment's outputs; returns its directory.
pub fn emit_experiment(
    out_dir: &Path,
    kind: ExperimentKind,
    output: &ExperimentOutput,
    config: &RunConfig,
) -> io::Result<PathBuf> {
    write_all(&experiment_files(out_dir, kind, output, config))?;
    Ok(out_dir.join(kind.name()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use smdpen_core::benchmarks::{run_experiment, Overrides};

    fn demo(iterations: usize) -> ExperimentOutput {
        let ov = Overrides {
            iterations: Some(iterations),
            ..Default::default()
        };
        run_experiment(ExperimentKind::PenaltyDemo1d, &ov).unwrap()
    }

    #[test]
    fn zero_iterations_give_header_and_initial_row() {
        let out = demo(0);
        let csv = out.runs[0].trace_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "k,x1,f,M,P,p,gamma,grad_norm");
        assert!(lines[1].starts_with("0,2.0000000000000001e-1,"));
    }

    #[test]
    fn demo_writes_curves_and_summaries() {
        let tmp = tempfile::tempdir().unwrap();
        let out = demo(200);
        let dir = emit_experiment(
            tmp.path(),
            ExperimentKind::PenaltyDemo1d,
            &out,
            &RunConfig::default(),
        )
        .unwrap();
        assert!(dir.join("penalty_curves.csv").is_file());
        assert!(dir.join("experiment.json").is_file());
        let summary = fs::read_to_string(dir.join("penalty_demo_1d/summary.json")).unwrap();
        let v: serde_json::Value = serde_json::from_str(&summary).unwrap();
        assert_eq!(v["diverged"], false);
        assert_eq!(v["config"]["resolved"]["iterations"], 200);
        assert!(v["summary"].get("wall_clock_secs").is_none());
        assert!(v["metrics"]["final_x"].is_number());
        assert!(!v["events"].as_array().unwrap().is_empty());
    }

    #[test]
    fn summaries_are_reproducible() {
        let a = experiment_files(
            Path::new("o"),
            ExperimentKind::PenaltyDemo1d,
            &demo(300),
            &RunConfig::default(),
        );
        let b = experiment_files(
            Path::new("o"),
            ExperimentKind::PenaltyDemo1d,
            &demo(300),
            &RunConfig::default(),
        );
        for (fa, fb) in a.iter().zip(&b) {
            if !fa.0.ends_with("experiment.json") {
                assert_eq!(fa, fb);
            }
        }
    }

    #[test]
    fn failed_write_removes_partial_files() {
        let tmp = tempfile::tempdir().unwrap();
        let good = tmp.path().join("run/trace.csv");
        let blocked = tmp.path().join("run/summary.json");
        fs::create_dir_all(&blocked).unwrap();
        let files = vec![
            (good.clone(), "a".to_string()),
            (blocked.clone(), "b".to_string()),
        ];
        assert!(write_all(&files).is_err());
        assert!(!good.exists());
        assert!(blocked.is_dir());
    }

    #[test]
    fn regression_table_has_one_row_per_report() {
        let r = RegressionReport {
            tier: "small".into(),
            n_samples: 80,
            p_features: 20,
            seed: 1,
            iterations: 10,
            final_objective: 0.5,
            test_mse: 0.25,
            support_recovery: 1.0,
            final_p: 1e-3,
            wall_clock_secs: 0.0,
        };
        let csv = regression_csv(&[r.clone(), r]);
        assert_eq!(csv.lines().count(), 3);
        assert!(csv
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("small,80,20,1,10,0.000,5.0000000000000000e-1,"));
    }
}
