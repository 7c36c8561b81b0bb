//! Command-line experiments: configuration, dispatch, persistence and
//! reports.

pub mod config;
pub mod experiments;

use std::path::{Path, PathBuf};
use std::time::Instant;

use reglab::io::{persist_trajectory, write_atomic};
use reglab::report::DiagnosticsReport;
use reglab::{Error, Result};

pub use config::{Experiment, ExperimentConfig, Overrides};
pub use experiments::{execute, Outcome};

/// File names inside the output directory.
pub const REPORT_FILE: &str = "report.json";
pub const TIMING_FILE: &str = "timing.json";
pub const TRAJECTORY_FILE: &str = "trajectory.rglb";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_BLOWUP: i32 = 4;

#[derive(Debug)]
pub struct RunSummary {
    pub report: DiagnosticsReport,
    pub files: Vec<PathBuf>,
    pub wall_clock_seconds: f64,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        if self.report.pass {
            EXIT_PASS
        } else {
            EXIT_CHECK_FAILED
        }
    }
}

pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Io(_) | Error::Format { .. } | Error::Version { .. } => EXIT_CONFIG,
        Error::BlowUp { .. } => EXIT_BLOWUP,
        _ => EXIT_NUMERICAL,
    }
}

/// Runs the experiment and only then writes the report, its timing, the CSV
/// tables and any trajectory into the output directory.
pub fn run(cfg: &ExperimentConfig) -> Result<RunSummary> {
    let start = Instant::now();
    let outcome = execute(cfg)?;
    let wall = start.elapsed().as_secs_f64();
    let files = write_outputs(&cfg.out_dir, &outcome, wall)?;
    Ok(RunSummary {
        report: outcome.report,
        files,
        wall_clock_seconds: wall,
    })
}

fn write_outputs(dir: &Path, outcome: &Outcome, wall: f64) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let report = dir.join(REPORT_FILE);
    write_atomic(&report, outcome.report.to_json().as_bytes())?;
    files.push(report);
    let timing = dir.join(TIMING_FILE);
    let t = serde_json::json!({ "experiment": outcome.report.experiment, "wall_clock_seconds": wall });
    write_atomic(&timing, format!("{t:#}\n").as_bytes())?;
    files.push(timing);
    for table in &outcome.tables {
        table.write(dir)?;
        files.push(dir.join(format!("{}.csv", table.name)));
    }
    if let Some(traj) = &outcome.trajectory {
        let path = dir.join(TRAJECTORY_FILE);
        persist_trajectory(traj, &path)?;
        files.push(reglab::io::sidecar_path(&path));
        files.push(path);
    }
    Ok(files)
}
