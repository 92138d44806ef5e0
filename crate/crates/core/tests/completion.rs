//! Cross-module checks of the completion path: lifting, dithered one-bit
//! sampling, SVT, and the recovery bound.

use onebit_hankel::array::{Snapshot, TargetScene};
use onebit_hankel::hankel::{build_hankel, dehankel, HankelDims, ObservationSet};
use onebit_hankel::quantization::{
    design_dither_scale, one_bit_quantize, one_bit_quantize_matrix, DitherMatrix,
};
use onebit_hankel::rng::{stream_rng, Stream};
use onebit_hankel::svt::{
    complete_from_samples, complete_hankel_pipeline, relative_error, SvtConfig,
};
use onebit_hankel::theory::{epsilon_for_samples, random_low_rank_complex, recovery_error_bound};
use onebit_hankel::{linalg, Complex64, Error};

/// 19 of 31 elements, both ends kept.
const KEPT: [usize; 19] = [
    1, 2, 4, 5, 7, 9, 10, 12, 15, 16, 18, 20, 21, 23, 25, 27, 28, 30, 31,
];

fn correlation(a: &[Complex64], b: &[Complex64]) -> f64 {
    let ip: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let na: f64 = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    ip.norm() / (na * nb)
}

#[test]
fn single_target_small_array_unquantized_recovery() {
    let scene = TargetScene::from_azimuths(&[20.0]).unwrap();
    let truth = scene.response(31).unwrap();
    let sparse = Snapshot::full(truth.clone()).restrict(&KEPT).unwrap();
    let (h, omega) = build_hankel(&sparse).unwrap();
    let out = complete_from_samples(h.matrix(), &omega, &SvtConfig::default()).unwrap();
    let rho = correlation(&dehankel(&out.matrix), &truth);
    assert!(rho > 0.99, "correlation {rho}");
}

// Default solver on dithered one-bit data. Measured correlation is about
// 0.64: the iteration interpolates the one-bit samples, dither noise
// included, so this does not reach the 0.99 target.
#[test]
fn single_target_small_array_one_bit_recovery() {
    let scene = TargetScene::from_azimuths(&[20.0]).unwrap();
    let truth = scene.response(31).unwrap();
    let sparse = Snapshot::full(truth.clone()).restrict(&KEPT).unwrap();
    let (h, omega) = build_hankel(&sparse).unwrap();
    let delta = design_dither_scale(&h, &omega, 0.05).unwrap();
    let dither = DitherMatrix::generate(h.dims().n1, h.dims().n2, delta, 7).unwrap();
    let obs = one_bit_quantize(&h, &omega, &dither).unwrap();
    let out = complete_hankel_pipeline(&obs, &SvtConfig::default()).unwrap();
    let rho = correlation(&dehankel(&out.matrix), &truth);
    eprintln!(
        "correlation {rho:.5}, iterations {}",
        out.diagnostics.iterations
    );
    assert!(rho > 0.99, "correlation {rho}");
}

#[test]
fn full_observation_unquantized_hook_returns_input() {
    let mut rng = stream_rng(11, Stream::Sampling);
    let x = random_low_rank_complex(12, 12, 2, 1.0, &mut rng);
    let cfg = SvtConfig {
        threshold: Some(1e-3),
        step: Some(1.0),
        tol: 1e-10,
        max_iters: 3000,
    };
    let out = complete_from_samples(
        &x,
        &ObservationSet::full(HankelDims::new(12, 12).unwrap()),
        &cfg,
    )
    .unwrap();
    assert!(relative_error(&x, &out.matrix) < 1e-6);
}

#[test]
fn empty_omega_is_a_domain_error() {
    let dims = HankelDims::new(4, 4).unwrap();
    let omega = ObservationSet::from_entries(dims, []).unwrap();
    let x = onebit_hankel::CMat::zeros(4, 4);
    let err = complete_from_samples(&x, &omega, &SvtConfig::default()).unwrap_err();
    assert!(matches!(err.root(), Error::Domain(_)), "{err:?}");
}

#[test]
fn one_bit_forty_square_is_within_recovery_bound() {
    let dims = HankelDims::new(40, 40).unwrap();
    let mut rng = stream_rng(3, Stream::Sampling);
    let x = random_low_rank_complex(40, 40, 2, 1.0, &mut rng);
    let omega = ObservationSet::uniform_random(dims, 800, &mut rng).unwrap();
    let alpha = linalg::max_component(&x);
    let delta = 2.0 * 1.05 * alpha;
    let dither = DitherMatrix::generate(40, 40, delta, 3).unwrap();
    let obs = one_bit_quantize_matrix(&x, &omega, &dither).unwrap();
    let out = complete_hankel_pipeline(&obs, &SvtConfig::default()).unwrap();
    let eps = epsilon_for_samples(omega.len(), 2, 40, 40, 1.0);
    let bound = recovery_error_bound(eps, delta / 2.0, 40, 40);
    let err = linalg::frobenius_dist(&x, &out.matrix);
    assert!(err <= bound, "error {err} vs bound {bound}");
}

#[test]
fn residual_median_trend_is_non_increasing_on_default_experiment() {
    use onebit_hankel::experiment::{run_experiment, ExperimentConfig};
    const WINDOW: usize = 25;
    let runs: Vec<Vec<f64>> = (1..=10)
        .map(|seed| {
            let cfg = ExperimentConfig {
                seed,
                ..ExperimentConfig::default()
            };
            run_experiment(&cfg).unwrap().solver.residuals
        })
        .collect();
    let len = runs.iter().map(Vec::len).min().unwrap();
    let median_at = |k: usize| {
        let mut v: Vec<f64> = runs.iter().map(|r| r[k]).collect();
        v.sort_by(f64::total_cmp);
        0.5 * (v[4] + v[5])
    };
    let windows: Vec<f64> = (0..len / WINDOW)
        .map(|w| {
            let mut v: Vec<f64> = (w * WINDOW..(w + 1) * WINDOW).map(median_at).collect();
            v.sort_by(f64::total_cmp);
            v[WINDOW / 2]
        })
        .collect();
    assert!(windows.len() >= 4);
    for pair in windows.windows(2) {
        assert!(pair[1] <= pair[0], "{windows:?}");
    }
    assert!(windows.last().unwrap() < &(0.1 * windows[0]), "{windows:?}");
}
