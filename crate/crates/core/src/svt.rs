//! Singular value thresholding for (one-bit) matrix completion.
//!
//! The iteration is
//!
//! ```text
//! X⁽ᵏ⁾ = D_τ(A*(y⁽ᵏ⁻¹⁾))
//! y⁽ᵏ⁾ = y⁽ᵏ⁻¹⁾ + δ (b − A(X⁽ᵏ⁾))
//! ```
//!
//! where `A` reads the entries of Ω, `A*` scatters them back and `D_τ`
//! soft-thresholds singular values. For one-bit data `b = (Δ/2)·vec(R)`.

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::hankel::{HankelDims, ObservationSet};
use crate::linalg::{self, thin_svd};
use crate::quantization::OneBitObservation;
use crate::{CMat, Error, Result};

/// Iterations the residual may stay above `DIVERGENCE_FACTOR ×` its
/// initial value before the solver gives up.
pub const DIVERGENCE_WINDOW: usize = 20;
pub const DIVERGENCE_FACTOR: f64 = 10.0;

/// Upper limit on the default step. `A` has unit norm, so the dual ascent
/// only converges for δ < 2; the `1.2·n1·n2/m′` rule overshoots that once
/// fewer than 60% of the entries are sampled.
pub const MAX_DEFAULT_STEP: f64 = 1.9;

/// Entry-sampling operator `A` and its adjoint for a fixed Ω.
#[derive(Debug, Clone)]
pub struct SamplingOperator {
    omega: ObservationSet,
}

impl SamplingOperator {
    pub fn new(omega: ObservationSet) -> Self {
        Self { omega }
    }

    pub fn dims(&self) -> HankelDims {
        self.omega.dims()
    }

    pub fn omega(&self) -> &ObservationSet {
        &self.omega
    }

    /// Number of samples m′.
    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn forward(&self, m: &CMat) -> Vec<Complex64> {
        self.omega
            .entries()
            .iter()
            .map(|&(i, j)| m[(i, j)])
            .collect()
    }

    pub fn adjoint(&self, y: &[Complex64]) -> CMat {
        let d = self.dims();
        let mut out = Mat::zeros(d.n1, d.n2);
        self.adjoint_into(y, &mut out);
        out
    }

    fn adjoint_into(&self, y: &[Complex64], out: &mut CMat) {
        debug_assert_eq!(y.len(), self.len());
        out.fill(Complex64::new(0.0, 0.0));
        for (&(i, j), &v) in self.omega.entries().iter().zip(y) {
            out[(i, j)] = v;
        }
    }
}

/// Singular value soft-thresholding `D_τ(M) = U diag((σᵢ − τ)⁺) Vᴴ`.
pub fn shrink(m: &CMat, threshold: f64) -> Result<CMat> {
    shrink_with_rank(m, threshold).map(|(x, _)| x)
}

/// [`shrink`] that also returns the number of singular values kept.
pub fn shrink_with_rank(m: &CMat, threshold: f64) -> Result<(CMat, usize)> {
    if !(threshold.is_finite() && threshold >= 0.0) {
        return Err(Error::domain(format!(
            "shrinkage threshold must be >= 0, got {threshold}"
        )));
    }
    let svd = thin_svd(m)?;
    let kept = svd.s.iter().take_while(|&&s| s > threshold).count();
    if kept == 0 {
        return Ok((Mat::zeros(m.nrows(), m.ncols()), 0));
    }
    let us = Mat::from_fn(m.nrows(), kept, |i, k| {
        svd.u[(i, k)] * (svd.s[k] - threshold)
    });
    let x = &us * svd.v.subcols(0, kept).adjoint();
    Ok((x, kept))
}

/// Solver knobs. `None` picks the size-dependent default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvtConfig {
    /// Shrinkage threshold τ; default `5·√(n1·n2)`.
    pub threshold: Option<f64>,
    /// Constant step δ; default `min(1.2·n1·n2 / m′, MAX_DEFAULT_STEP)`.
    pub step: Option<f64>,
    /// Stop when `‖A(X) − b‖ / ‖b‖` falls to this value.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for SvtConfig {
    fn default() -> Self {
        Self {
            threshold: None,
            step: None,
            tol: 1e-4,
            max_iters: 500,
        }
    }
}

impl SvtConfig {
    pub fn resolved_threshold(&self, dims: HankelDims) -> f64 {
        self.threshold
            .unwrap_or_else(|| 5.0 * (dims.entries() as f64).sqrt())
    }

    pub fn resolved_step(&self, dims: HankelDims, samples: usize) -> f64 {
        self.step.unwrap_or_else(|| {
            (1.2 * dims.entries() as f64 / samples.max(1) as f64).min(MAX_DEFAULT_STEP)
        })
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.threshold {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::Config(format!("threshold must be >= 0, got {t}")));
            }
        }
        if let Some(s) = self.step {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::Config(format!("step must be > 0, got {s}")));
            }
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::Config(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIterations,
}

/// Per-run solver record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvtDiagnostics {
    pub threshold: f64,
    pub step: f64,
    pub iterations: usize,
    pub stop: StopReason,
    /// Relative residual `‖A(X⁽ᵏ⁾) − b‖ / ‖b‖` for k = 1, 2, ...
    pub residuals: Vec<f64>,
    /// Rank of X⁽ᵏ⁾ after shrinkage.
    pub ranks: Vec<usize>,
}

impl SvtDiagnostics {
    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(0.0)
    }

    pub fn final_rank(&self) -> usize {
        self.ranks.last().copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone)]
pub struct SvtOutcome {
    pub matrix: CMat,
    pub diagnostics: SvtDiagnostics,
}

/// Iterate state, exposed so callers can step the solver manually.
#[derive(Debug, Clone)]
pub struct SvtState {
    pub x: CMat,
    pub y: Vec<Complex64>,
    pub iteration: usize,
    pub threshold: f64,
    pub step: f64,
    pub residuals: Vec<f64>,
    pub ranks: Vec<usize>,
    scratch: CMat,
}

impl SvtState {
    /// Starts from `y⁽⁰⁾ = 0`.
    pub fn new(op: &SamplingOperator, threshold: f64, step: f64) -> Self {
        Self::with_dual(
            op,
            vec![Complex64::new(0.0, 0.0); op.len()],
            threshold,
            step,
        )
    }

    pub fn with_dual(op: &SamplingOperator, y: Vec<Complex64>, threshold: f64, step: f64) -> Self {
        let d = op.dims();
        Self {
            x: Mat::zeros(d.n1, d.n2),
            y,
            iteration: 0,
            threshold,
            step,
            residuals: Vec::new(),
            ranks: Vec::new(),
            scratch: Mat::zeros(d.n1, d.n2),
        }
    }

    /// One shrink + dual step. Returns the new relative residual.
    pub fn step(&mut self, op: &SamplingOperator, b: &[Complex64], b_norm: f64) -> Result<f64> {
        op.adjoint_into(&self.y, &mut self.scratch);
        let (x, rank) = shrink_with_rank(&self.scratch, self.threshold)?;
        self.x = x;
        let mut res_sq = 0.0;
        for ((yk, &(i, j)), &bk) in self.y.iter_mut().zip(op.omega().entries()).zip(b) {
            let r = bk - self.x[(i, j)];
            res_sq += r.norm_sqr();
            *yk += r * self.step;
        }
        let residual = res_sq.sqrt() / b_norm;
        if !residual.is_finite() {
            return Err(Error::Numerical(format!(
                "non-finite residual at iteration {}",
                self.iteration + 1
            )));
        }
        self.iteration += 1;
        self.residuals.push(residual);
        self.ranks.push(rank);
        Ok(residual)
    }
}

/// Runs SVT on samples `b` of the entries in `op`.
pub fn svt_complete(b: &[Complex64], op: &SamplingOperator, cfg: &SvtConfig) -> Result<SvtOutcome> {
    cfg.validate()?;
    if op.is_empty() {
        return Err(Error::domain("observation set is empty"));
    }
    if b.len() != op.len() {
        return Err(Error::DimensionMismatch {
            expected: op.len(),
            actual: b.len(),
        });
    }
    let dims = op.dims();
    let threshold = cfg.resolved_threshold(dims);
    let step = cfg.resolved_step(dims, op.len());
    let b_norm = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !b_norm.is_finite() {
        return Err(Error::Numerical("samples are not finite".into()));
    }
    if b_norm == 0.0 {
        return Ok(SvtOutcome {
            matrix: Mat::zeros(dims.n1, dims.n2),
            diagnostics: SvtDiagnostics {
                threshold,
                step,
                iterations: 0,
                stop: StopReason::Converged,
                residuals: Vec::new(),
                ranks: Vec::new(),
            },
        });
    }

    let mut state = SvtState::new(op, threshold, step);
    let mut initial = None;
    let mut above = 0usize;
    let mut stop = StopReason::MaxIterations;
    for _ in 0..cfg.max_iters {
        let r = state.step(op, b, b_norm)?;
        let r0 = *initial.get_or_insert(r);
        if r <= cfg.tol {
            stop = StopReason::Converged;
            break;
        }
        if r > DIVERGENCE_FACTOR * r0 {
            above += 1;
            if above >= DIVERGENCE_WINDOW {
                return Err(Error::Divergence {
                    iteration: state.iteration,
                    residual: r,
                    initial: r0,
                    residuals: state.residuals,
                });
            }
        } else {
            above = 0;
        }
    }
    Ok(SvtOutcome {
        diagnostics: SvtDiagnostics {
            threshold,
            step,
            iterations: state.iteration,
            stop,
            residuals: state.residuals,
            ranks: state.ranks,
        },
        matrix: state.x,
    })
}

/// Completes a matrix from its one-bit observation, using `b = (Δ/2)·R`.
pub fn complete_hankel_pipeline(r: &OneBitObservation, cfg: &SvtConfig) -> Result<SvtOutcome> {
    if r.omega().is_empty() {
        return Err(Error::domain("observation set is empty"));
    }
    let op = SamplingOperator::new(r.omega().clone());
    svt_complete(&r.measurements(), &op, cfg)
}

/// Completes a matrix from its unquantized entries on Ω.
pub fn complete_from_samples(
    x: &CMat,
    omega: &ObservationSet,
    cfg: &SvtConfig,
) -> Result<SvtOutcome> {
    let d = omega.dims();
    if (x.nrows(), x.ncols()) != (d.n1, d.n2) {
        return Err(Error::DimensionMismatch {
            expected: d.entries(),
            actual: x.nrows() * x.ncols(),
        });
    }
    let op = SamplingOperator::new(omega.clone());
    svt_complete(&op.forward(x), &op, cfg)
}

/// `‖X − X̂‖_F / ‖X‖_F`.
pub fn relative_error(truth: &CMat, estimate: &CMat) -> f64 {
    linalg::frobenius_dist(truth, estimate) / linalg::frobenius(truth)
}
