use std::fs;

use onebit_hankel::array::Target;
use onebit_hankel::experiment::{
    emit_outputs, run_experiment, run_monte_carlo, ExperimentConfig, QuantizationMode,
    TrialOutcome, COMPLETED_SPECTRUM_FILE, REPORT_FILE, RESIDUALS_FILE, SPARSE_SPECTRUM_FILE,
};
use onebit_hankel::spectrum::AngleSpectrum;
use serde_json::Value;

#[test]
fn default_run_writes_manifest_and_schema() {
    let cfg = ExperimentConfig::default();
    let report = run_experiment(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let manifest = emit_outputs(&report, dir.path()).unwrap();
    let mut names: Vec<_> = manifest
        .files
        .iter()
        .map(|p| p.file_name().unwrap().to_str().unwrap().to_owned())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "report.json",
            "residuals.csv",
            "spectrum_completed.csv",
            "spectrum_sparse.csv"
        ]
    );

    let json: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join(REPORT_FILE)).unwrap()).unwrap();
    assert!(json["config"].is_object());
    assert_eq!(json["seed"], 1);
    for k in [
        "hankel_rel_error",
        "response_rel_error",
        "response_rel_error_noiseless",
        "hankel_abs_error",
    ] {
        assert!(json["error_metrics"][k].is_f64(), "{k}");
    }
    assert_eq!(json["residuals_path"], RESIDUALS_FILE);
    let peaks = json["peaks"].as_array().unwrap();
    assert_eq!(peaks.len(), 2);
    for p in peaks {
        assert!(p["angle_deg"].is_f64() && p["level_db"].is_f64());
    }
    assert!(json["theory"]["bound"].is_f64());
    assert_eq!(json["theory"]["m_prime"], 1943);
    assert!(json["theory"]["satisfied"].is_boolean());
    let cfg_back: ExperimentConfig = serde_json::from_value(json["config"].clone()).unwrap();
    assert_eq!(cfg_back, cfg);

    for (name, spec) in [
        (SPARSE_SPECTRUM_FILE, &report.sparse_spectrum),
        (COMPLETED_SPECTRUM_FILE, &report.completed_spectrum),
    ] {
        let spec = spec.as_ref().unwrap();
        let (angles, mags) = AngleSpectrum::read_csv(&dir.path().join(name)).unwrap();
        assert_eq!(angles, spec.angles_deg);
        assert_eq!(mags, spec.magnitudes_db);
    }

    let residuals = fs::read_to_string(dir.path().join(RESIDUALS_FILE)).unwrap();
    let mut lines = residuals.lines();
    assert_eq!(lines.next(), Some("iteration,residual,rank"));
    let parsed: Vec<f64> = lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(parsed, report.solver.residuals);
}

#[test]
fn identical_seed_gives_identical_bytes() {
    let mut cfg = ExperimentConfig::default();
    cfg.seed = 99;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    emit_outputs(&run_experiment(&cfg).unwrap(), a.path()).unwrap();
    emit_outputs(&run_experiment(&cfg).unwrap(), b.path()).unwrap();
    for f in [
        REPORT_FILE,
        RESIDUALS_FILE,
        SPARSE_SPECTRUM_FILE,
        COMPLETED_SPECTRUM_FILE,
    ] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn different_seeds_differ() {
    let mut cfg = ExperimentConfig::default();
    let a = run_experiment(&cfg).unwrap();
    cfg.seed = 2;
    let b = run_experiment(&cfg).unwrap();
    assert_ne!(a.solver.residuals, b.solver.residuals);
}

#[test]
fn single_trial_aggregate_is_the_run() {
    let mut cfg = ExperimentConfig::default();
    cfg.seed = 5;
    let mc = run_monte_carlo(&cfg, 1, 6.0).unwrap();
    let single = run_experiment(&cfg).unwrap();
    assert_eq!(mc.trials, 1);
    match &mc.outcomes[0] {
        TrialOutcome::Ok { report } => {
            assert_eq!(
                serde_json::to_string(report).unwrap(),
                serde_json::to_string(&single).unwrap()
            )
        }
        other => panic!("{other:?}"),
    }
    let med = mc.response_rel_error.unwrap();
    let e = single.error_metrics.response_rel_error;
    assert_eq!((med.q1, med.median, med.q3), (e, e, e));
    assert_eq!(
        mc.detection_rate,
        if single.detection.completed.within_tolerance {
            1.0
        } else {
            0.0
        }
    );
}

#[test]
fn zero_targets_is_a_config_error() {
    let mut cfg = ExperimentConfig::default();
    cfg.scene.targets.clear();
    assert!(run_experiment(&cfg).unwrap_err().is_config_error());
    assert!(run_monte_carlo(&cfg, 3, 6.0).unwrap_err().is_config_error());
}

#[test]
fn noiseless_unquantized_matches_ground_truth() {
    let mut cfg = ExperimentConfig::default();
    cfg.scene.snr_db = None;
    cfg.quantization = QuantizationMode::None;
    cfg.solver.tol = 1e-7;
    cfg.solver.max_iters = 3000;
    let r = run_experiment(&cfg).unwrap();
    assert!(
        r.error_metrics.response_rel_error_noiseless < 1e-3,
        "{:?}",
        r.error_metrics
    );
}

#[test]
fn explicit_delta_is_used() {
    let mut cfg = ExperimentConfig::default();
    cfg.quantization = QuantizationMode::Explicit { delta: 3.0 };
    cfg.scene.targets = vec![Target::at(-20.0)];
    let r = run_experiment(&cfg).unwrap();
    assert_eq!(r.delta, Some(3.0));
    assert_eq!(r.theory.unwrap().alpha, 1.5);
}
