use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ExperimentConfig;
use super::montecarlo::MonteCarloReport;
use super::pipeline::{ErrorMetrics, RankCheckReport, RunReport};
use crate::spectrum::Peak;
use crate::theory::TheoremReport;
use crate::{Error, Result};

pub const REPORT_FILE: &str = "report.json";
pub const SPARSE_SPECTRUM_FILE: &str = "spectrum_sparse.csv";
pub const COMPLETED_SPECTRUM_FILE: &str = "spectrum_completed.csv";
pub const RESIDUALS_FILE: &str = "residuals.csv";

/// Paths written by one emit call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub files: Vec<PathBuf>,
}

#[derive(Serialize)]
struct TheorySummary {
    bound: f64,
    m_prime: usize,
    satisfied: bool,
    epsilon: f64,
    alpha: f64,
    within_hypotheses: bool,
}

#[derive(Serialize)]
struct ReportFile<'a> {
    config: &'a ExperimentConfig,
    seed: u64,
    error_metrics: &'a ErrorMetrics,
    residuals_path: &'a str,
    peaks: &'a [Peak],
    theory: Option<TheorySummary>,
    details: &'a RunReport,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| Error::Serialization(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

fn prepare(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

/// Writes both spectra, the residual history and `report.json`.
pub fn emit_outputs(report: &RunReport, dir: &Path) -> Result<Manifest> {
    prepare(dir)?;
    let mut files = Vec::new();
    for (name, spec) in [
        (SPARSE_SPECTRUM_FILE, &report.sparse_spectrum),
        (COMPLETED_SPECTRUM_FILE, &report.completed_spectrum),
    ] {
        let spec = spec.as_ref().ok_or_else(|| {
            Error::Serialization(format!("report carries no spectrum for {name}"))
        })?;
        let path = dir.join(name);
        spec.write_csv(&path)?;
        files.push(path);
    }

    let path = dir.join(RESIDUALS_FILE);
    let mut w = csv::Writer::from_path(&path)
        .map_err(|e| Error::Serialization(format!("{}: {e}", path.display())))?;
    let csv_err = |e: csv::Error| Error::Serialization(e.to_string());
    w.write_record(["iteration", "residual", "rank"])
        .map_err(csv_err)?;
    for (k, (r, rank)) in report
        .solver
        .residuals
        .iter()
        .zip(&report.solver.ranks)
        .enumerate()
    {
        w.write_record([(k + 1).to_string(), format!("{r:.16e}"), rank.to_string()])
            .map_err(csv_err)?;
    }
    w.flush().map_err(io_err(&path))?;
    files.push(path);

    let path = dir.join(REPORT_FILE);
    let file = ReportFile {
        config: &report.config,
        seed: report.seed,
        error_metrics: &report.error_metrics,
        residuals_path: RESIDUALS_FILE,
        peaks: &report.detection.completed.report.peaks,
        theory: report.theory.map(|t| TheorySummary {
            bound: t.bound,
            m_prime: t.m_prime,
            satisfied: t.satisfied,
            epsilon: t.epsilon,
            alpha: t.alpha,
            within_hypotheses: t.within_hypotheses,
        }),
        details: report,
    };
    write_json(&path, &file)?;
    files.push(path);
    Ok(Manifest { files })
}

pub fn emit_monte_carlo(report: &MonteCarloReport, dir: &Path) -> Result<Manifest> {
    prepare(dir)?;
    let path = dir.join(REPORT_FILE);
    write_json(&path, report)?;
    Ok(Manifest { files: vec![path] })
}

pub fn emit_theorem(report: &TheoremReport, dir: &Path) -> Result<Manifest> {
    prepare(dir)?;
    let path = dir.join(REPORT_FILE);
    write_json(&path, report)?;
    Ok(Manifest { files: vec![path] })
}

pub fn emit_rank_check(report: &RankCheckReport, dir: &Path) -> Result<Manifest> {
    prepare(dir)?;
    let path = dir.join(REPORT_FILE);
    write_json(&path, report)?;
    Ok(Manifest { files: vec![path] })
}
