//! End-to-end experiments: configuration, single runs, Monte Carlo studies
//! and file outputs.

mod config;
mod montecarlo;
mod output;
mod pipeline;

pub use config::{
    load_file, ExperimentConfig, GeometryConfig, HankelShape, QuantizationMode, SceneConfig,
    SpectrumConfig, CASCADE_RX, CASCADE_TX,
};
pub use montecarlo::{run_monte_carlo, MonteCarloReport, Quartiles, TrialOutcome};
pub use output::{
    emit_monte_carlo, emit_outputs, emit_rank_check, emit_theorem, Manifest,
    COMPLETED_SPECTRUM_FILE, REPORT_FILE, RESIDUALS_FILE, SPARSE_SPECTRUM_FILE,
};
pub use pipeline::{
    run_experiment, run_rank_check, DetectionSummary, ErrorMetrics, PeakOutcome, RankCheckReport,
    RunReport, TheoryEvaluation, Timings,
};
