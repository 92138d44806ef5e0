use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::pipeline::{run_experiment, RunReport};
use crate::rng::trial_seed;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

impl Quartiles {
    /// Linear-interpolation quartiles; `None` for an empty sample.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let pos = p * (v.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
        };
        Some(Self {
            q1: q(0.25),
            median: q(0.5),
            q3: q(0.75),
        })
    }

    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

/// One trial's result. Failures are kept with their message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TrialOutcome {
    Ok { report: Box<RunReport> },
    Failed { seed: u64, error: String },
}

impl TrialOutcome {
    pub fn report(&self) -> Option<&RunReport> {
        match self {
            TrialOutcome::Ok { report } => Some(report),
            TrialOutcome::Failed { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub base_seed: u64,
    pub trials: usize,
    pub failed_trials: usize,
    /// Fraction of all trials whose completed spectrum resolves every target
    /// within tolerance. Failed trials count as misses.
    pub detection_rate: f64,
    pub sparse_detection_rate: f64,
    /// Fraction of all trials with sidelobe gain at or above `min_gain_db`.
    pub sidelobe_gain_rate: f64,
    pub min_gain_db: f64,
    pub response_rel_error: Option<Quartiles>,
    pub hankel_rel_error: Option<Quartiles>,
    pub sidelobe_gain_db: Option<Quartiles>,
    /// Gain of the unquantized full array over the sparse one.
    pub reference_gain_db: Option<Quartiles>,
    pub sparse_psl_db: Option<Quartiles>,
    pub completed_psl_db: Option<Quartiles>,
    pub iterations: Option<Quartiles>,
    pub outcomes: Vec<TrialOutcome>,
}

impl MonteCarloReport {
    pub fn successful(&self) -> impl Iterator<Item = &RunReport> {
        self.outcomes.iter().filter_map(TrialOutcome::report)
    }
}

/// Runs `trials` independent pipelines with seeds `cfg.seed + t`.
///
/// Trials run on the rayon pool; results are collected in trial order so
/// the aggregate does not depend on scheduling.
pub fn run_monte_carlo(
    cfg: &ExperimentConfig,
    trials: usize,
    min_gain_db: f64,
) -> Result<MonteCarloReport> {
    if trials == 0 {
        return Err(crate::Error::Config("trials must be at least 1".into()));
    }
    cfg.validate()?;
    let outcomes: Vec<TrialOutcome> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut c = cfg.clone();
            c.seed = trial_seed(cfg.seed, t);
            match run_experiment(&c) {
                Ok(r) => TrialOutcome::Ok {
                    report: Box::new(r),
                },
                Err(e) => TrialOutcome::Failed {
                    seed: c.seed,
                    error: e.to_string(),
                },
            }
        })
        .collect();
    Ok(aggregate(cfg.seed, outcomes, min_gain_db))
}

fn aggregate(base_seed: u64, outcomes: Vec<TrialOutcome>, min_gain_db: f64) -> MonteCarloReport {
    let ok: Vec<&RunReport> = outcomes.iter().filter_map(TrialOutcome::report).collect();
    let n = outcomes.len() as f64;
    let frac = |pred: &dyn Fn(&RunReport) -> bool| ok.iter().filter(|r| pred(r)).count() as f64 / n;
    let collect =
        |f: &dyn Fn(&RunReport) -> f64| Quartiles::of(&ok.iter().map(|r| f(r)).collect::<Vec<_>>());
    MonteCarloReport {
        base_seed,
        trials: outcomes.len(),
        failed_trials: outcomes.len() - ok.len(),
        detection_rate: frac(&|r| r.detection.completed.within_tolerance),
        sparse_detection_rate: frac(&|r| r.detection.sparse.within_tolerance),
        sidelobe_gain_rate: frac(&|r| r.detection.sidelobe_gain_db >= min_gain_db),
        min_gain_db,
        response_rel_error: collect(&|r| r.error_metrics.response_rel_error),
        hankel_rel_error: collect(&|r| r.error_metrics.hankel_rel_error),
        sidelobe_gain_db: collect(&|r| r.detection.sidelobe_gain_db),
        reference_gain_db: collect(&|r| r.detection.reference_gain_db),
        sparse_psl_db: collect(&|r| r.detection.sparse.report.peak_to_sidelobe_db),
        completed_psl_db: collect(&|r| r.detection.completed.report.peak_to_sidelobe_db),
        iterations: collect(&|r| r.solver.iterations as f64),
        outcomes,
    }
}
