//! Recovery guarantees for dithered one-bit matrix completion, evaluated in
//! closed form and checked by simulation.
//!
//! Notation: `α` bounds every real/imaginary component of the matrix, the
//! dither is `τ ~ U[−Δ/2, Δ/2]` with `2α ≤ Δ` (the proofs take `α = Δ/2`),
//! `m′ = |Ω|` and `r` is the rank.
//!
//! Real-valued quantities (one channel of a complex matrix) use [`RMat`].

use faer::Mat;
use rand::Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::hankel::{HankelDims, ObservationSet};
use crate::linalg;
use crate::quantization::{comparator, one_bit_quantize_matrix, quantize_against, DitherMatrix};
use crate::rng::{stream_rng, trial_seed, Stream};
use crate::svt::{complete_hankel_pipeline, SvtConfig};
use crate::{CMat, Complex64, Error, Result};

pub type RMat = Mat<f64>;

/// One-sided normal quantile for 99% confidence.
const Z99: f64 = 2.326_347_874_040_841;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryParams {
    pub alpha: f64,
    pub rank: usize,
    pub n1: usize,
    pub n2: usize,
    pub epsilon: f64,
    pub m_prime: usize,
    /// Covering radius; the proof sets it to `√(8εα n1 n2)`.
    pub rho: f64,
}

impl TheoryParams {
    /// Parameters with `ρ` coupled to `ε` as in the proof.
    pub fn coupled(
        alpha: f64,
        rank: usize,
        dims: HankelDims,
        epsilon: f64,
        m_prime: usize,
    ) -> Result<Self> {
        let p = Self {
            alpha,
            rank,
            n1: dims.n1,
            n2: dims.n2,
            epsilon,
            m_prime,
            rho: coupled_radius(epsilon, alpha, dims.n1, dims.n2),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64, name: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::domain(format!("{name} must be positive, got {v}")))
            }
        };
        pos(self.alpha, "alpha")?;
        pos(self.epsilon, "epsilon")?;
        pos(self.rho, "rho")?;
        if self.n1 == 0 || self.n2 == 0 {
            return Err(Error::domain("dimensions must be positive"));
        }
        if self.rank == 0 || self.rank > self.n1.min(self.n2) {
            return Err(Error::domain(format!(
                "rank {} outside [1, min(n1, n2)]",
                self.rank
            )));
        }
        Ok(())
    }

    /// Whether a dither scale satisfies `2α ≤ Δ`.
    pub fn dither_covers(&self, delta: f64) -> bool {
        2.0 * self.alpha <= delta
    }
}

/// `ρ = √(8εα n1 n2)`.
pub fn coupled_radius(epsilon: f64, alpha: f64, n1: usize, n2: usize) -> f64 {
    (8.0 * epsilon * alpha * (n1 * n2) as f64).sqrt()
}

fn check_signs(signs: &RMat, omega: &ObservationSet) -> Result<()> {
    for &(i, j) in omega.entries() {
        let s = signs[(i, j)];
        if s != 1.0 && s != -1.0 {
            return Err(Error::domain(format!(
                "sign at ({i}, {j}) is {s}, expected ±1"
            )));
        }
    }
    Ok(())
}

/// Average distortion `(1/m′) Σ_Ω |X_ij − (Δ/2) R_ij|`.
pub fn t_ave(x: &RMat, signs: &RMat, omega: &ObservationSet, delta: f64) -> Result<f64> {
    if omega.is_empty() {
        return Err(Error::domain("observation set is empty"));
    }
    check_signs(signs, omega)?;
    let half = delta / 2.0;
    let sum: f64 = omega
        .entries()
        .iter()
        .map(|&(i, j)| (x[(i, j)] - half * signs[(i, j)]).abs())
        .sum();
    Ok(sum / omega.len() as f64)
}

/// Per-channel `(T_ave(Re), T_ave(Im))` of a complex matrix against complex
/// one-bit data.
pub fn t_ave_complex(
    x: &CMat,
    signs: &CMat,
    omega: &ObservationSet,
    delta: f64,
) -> Result<(f64, f64)> {
    let (re, im) = split(x);
    let (sr, si) = split(signs);
    Ok((
        t_ave(&re, &sr, omega, delta)?,
        t_ave(&im, &si, omega, delta)?,
    ))
}

/// `E_τ |x − α sign(x − τ)| = α − x²/α` for `|x| ≤ α`, `τ ~ U[−α, α]`.
pub fn expected_distortion(x: f64, alpha: f64) -> Result<f64> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::domain(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    if x.abs() > alpha {
        return Err(Error::domain(format!(
            "|x| = {} exceeds alpha = {alpha}",
            x.abs()
        )));
    }
    Ok(alpha - x * x / alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectedTAve {
    /// Given Ω: `α − ‖P_Ω(X)‖²_F / (α m′)`.
    pub conditional: f64,
    /// Averaged over uniformly random Ω as well: `α − ‖X‖²_F / (α n1 n2)`.
    pub full: f64,
}

pub fn expected_t_ave(x: &RMat, omega: &ObservationSet, alpha: f64) -> Result<ExpectedTAve> {
    if omega.is_empty() {
        return Err(Error::domain("observation set is empty"));
    }
    let max = max_abs(x);
    if max > alpha {
        return Err(Error::domain(format!(
            "‖X‖_max = {max} exceeds alpha = {alpha}"
        )));
    }
    let _ = expected_distortion(0.0, alpha)?;
    let on_omega: f64 = omega
        .entries()
        .iter()
        .map(|&(i, j)| x[(i, j)].powi(2))
        .sum();
    let total = frob_sq(x);
    Ok(ExpectedTAve {
        conditional: alpha - on_omega / (alpha * omega.len() as f64),
        full: alpha - total / (alpha * (x.nrows() * x.ncols()) as f64),
    })
}

/// Whether `X` and `Y` quantize identically on Ω under the shared dither,
/// in both channels.
pub fn check_consistency(
    x: &CMat,
    y: &CMat,
    omega: &ObservationSet,
    delta: f64,
    dither: &DitherMatrix,
) -> Result<bool> {
    for &(i, j) in omega.entries() {
        let (tr, ti) = dither.at(i, j);
        let (a, b) = (x[(i, j)], y[(i, j)]);
        if quantize_against(a.re, delta, tr)? != quantize_against(b.re, delta, tr)?
            || quantize_against(a.im, delta, ti)? != quantize_against(b.im, delta, ti)?
        {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Frobenius error bound `2√(8εα n1 n2)` for consistent reconstructions.
pub fn recovery_error_bound(epsilon: f64, alpha: f64, n1: usize, n2: usize) -> f64 {
    2.0 * coupled_radius(epsilon, alpha, n1, n2)
}

/// `ε` at which [`recovery_error_bound`] equals `error`.
pub fn epsilon_for_error(error: f64, alpha: f64, n1: usize, n2: usize) -> f64 {
    error * error / (32.0 * alpha * (n1 * n2) as f64)
}

/// `⌈c · ε^{-5/2} · r · max(n1, n2)⌉`; `c` is the constant hidden in `≳`.
pub fn sample_complexity(epsilon: f64, rank: usize, n1: usize, n2: usize, c: f64) -> u64 {
    (c * epsilon.powf(-2.5) * rank as f64 * n1.max(n2) as f64).ceil() as u64
}

/// `ε` at which [`sample_complexity`] (before rounding) equals `m_prime`.
pub fn epsilon_for_samples(m_prime: usize, rank: usize, n1: usize, n2: usize, c: f64) -> f64 {
    (m_prime as f64 / (c * rank as f64 * n1.max(n2) as f64)).powf(-0.4)
}

/// Samples needed by the covering argument:
/// `8α³(n1 + n2) r √(n1 n2) / (ε² ρ)`.
pub fn covering_sample_requirement(p: &TheoryParams) -> f64 {
    8.0 * p.alpha.powi(3) * (p.n1 + p.n2) as f64 * p.rank as f64 * ((p.n1 * p.n2) as f64).sqrt()
        / (p.epsilon * p.epsilon * p.rho)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBounds {
    /// Fixed-matrix Hoeffding bound `2 exp(−ε² m′ / (2α²))`.
    pub pointwise: f64,
    /// Bound over the whole rank-r set, `2 exp(−ε² m′ / (4α²))`.
    pub supremum: f64,
}

pub fn hoeffding_tail(epsilon: f64, m_prime: usize, alpha: f64) -> TailBounds {
    let e = epsilon * epsilon * m_prime as f64 / (alpha * alpha);
    TailBounds {
        pointwise: 2.0 * (-e / 2.0).exp(),
        supremum: 2.0 * (-e / 4.0).exp(),
    }
}

/// Failure probability of the recovery bound under both exponent forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FailureProbability {
    /// `4 exp(−ε² m′ / Δ²)`.
    pub dither_scaled: f64,
    /// `4 exp(−ε² m′ / (4α²))`, obtained by chaining the supremum tail with the
    /// covering bound. Equal to the first form when `Δ = 2α`.
    pub alpha_scaled: f64,
}

pub fn failure_probability(
    epsilon: f64,
    m_prime: usize,
    delta: f64,
    alpha: f64,
) -> FailureProbability {
    let em = epsilon * epsilon * m_prime as f64;
    FailureProbability {
        dither_scaled: 4.0 * (-em / (delta * delta)).exp(),
        alpha_scaled: 4.0 * (-em / (4.0 * alpha * alpha)).exp(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoveringBounds {
    /// `(n1 + n2) r log(1 + 2α√(n1 n2)/ρ)`.
    pub log_covering: f64,
    /// `2α(n1 + n2) r √(n1 n2) / ρ`.
    pub entropy: f64,
}

pub fn covering_bounds(
    alpha: f64,
    rank: usize,
    n1: usize,
    n2: usize,
    rho: f64,
) -> Result<CoveringBounds> {
    if !(alpha > 0.0 && rho > 0.0 && rank > 0 && n1 > 0 && n2 > 0) {
        return Err(Error::domain("covering bounds need positive inputs"));
    }
    let x = 2.0 * alpha * ((n1 * n2) as f64).sqrt() / rho;
    let scale = ((n1 + n2) * rank) as f64;
    let b = CoveringBounds {
        log_covering: scale * x.ln_1p(),
        entropy: scale * x,
    };
    if b.log_covering > b.entropy {
        return Err(Error::Numerical(format!(
            "log-covering {} exceeds entropy bound {}",
            b.log_covering, b.entropy
        )));
    }
    Ok(b)
}

/// `(lhs, rhs)` of `‖X − Y‖² = 2(‖X‖² + ‖Y‖²) − ‖X + Y‖²`.
pub fn parallelogram_sides(x: &CMat, y: &CMat) -> (f64, f64) {
    let lhs = linalg::frobenius_dist(x, y).powi(2);
    let sum = Mat::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)] + y[(i, j)]);
    let rhs =
        2.0 * (linalg::frobenius_sq(x) + linalg::frobenius_sq(y)) - linalg::frobenius_sq(&sum);
    (lhs, rhs)
}

// ---------------------------------------------------------------------------
// Monte Carlo validators. These simulate the dithered comparator directly and
// never call the closed forms above.

/// Sample mean and standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl Estimate {
    fn from_moments(sum: f64, sum_sq: f64, n: usize) -> Self {
        let nf = n as f64;
        let mean = sum / nf;
        let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
        Self {
            mean,
            std_error: (var / nf).sqrt(),
            samples: n,
        }
    }

    /// `|mean − target| ≤ k · SE`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_error
    }
}

/// Mean of `|x − α sign(x − τ)|` over `draws` dithers `τ ~ U[−α, α]`.
pub fn simulate_distortion<R: Rng + ?Sized>(
    x: f64,
    alpha: f64,
    draws: usize,
    rng: &mut R,
) -> Estimate {
    let law = Uniform::new_inclusive(-alpha, alpha).expect("alpha > 0");
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..draws {
        let d = (x - alpha * comparator(x, law.sample(rng))).abs();
        s += d;
        s2 += d * d;
    }
    Estimate::from_moments(s, s2, draws)
}

/// Fresh one-bit signs of `x` on Ω for dithers `U[−Δ/2, Δ/2]`.
fn draw_signs<R: Rng + ?Sized>(
    x: &RMat,
    omega: &ObservationSet,
    delta: f64,
    rng: &mut R,
    out: &mut RMat,
) {
    let law = Uniform::new_inclusive(-delta / 2.0, delta / 2.0).expect("delta > 0");
    for &(i, j) in omega.entries() {
        out[(i, j)] = comparator(x[(i, j)], law.sample(rng));
    }
}

/// Distribution of `T_ave(X)` over `draws` independent dither matrices with
/// Ω held fixed.
pub fn simulate_t_ave<R: Rng + ?Sized>(
    x: &RMat,
    omega: &ObservationSet,
    delta: f64,
    draws: usize,
    rng: &mut R,
) -> Result<Estimate> {
    let mut signs = Mat::zeros(x.nrows(), x.ncols());
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..draws {
        draw_signs(x, omega, delta, rng, &mut signs);
        let t = t_ave(x, &signs, omega, delta)?;
        s += t;
        s2 += t * t;
    }
    Ok(Estimate::from_moments(s, s2, draws))
}

/// Empirical tail of `|T_ave(X) − center| ≥ ε` with fresh uniformly random
/// Ω (size `m_prime`) and dither in every trial.
pub fn simulate_tail<R: Rng + ?Sized>(
    x: &RMat,
    m_prime: usize,
    delta: f64,
    center: f64,
    epsilons: &[f64],
    trials: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let dims = HankelDims::new(x.nrows(), x.ncols())?;
    let mut signs = Mat::zeros(x.nrows(), x.ncols());
    let mut hits = vec![0usize; epsilons.len()];
    for _ in 0..trials {
        let omega = ObservationSet::uniform_random(dims, m_prime, rng)?;
        draw_signs(x, &omega, delta, rng, &mut signs);
        let dev = (t_ave(x, &signs, &omega, delta)? - center).abs();
        for (h, &e) in hits.iter_mut().zip(epsilons) {
            if dev >= e {
                *h += 1;
            }
        }
    }
    Ok(hits)
}

/// Lower end of the one-sided 99% Wilson interval for a binomial rate.
pub fn wilson_lower_99(successes: usize, trials: usize) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z99 * Z99;
    let center = p + z2 / (2.0 * n);
    let spread = Z99 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - spread) / (1.0 + z2 / n)).max(0.0)
}

/// Largest violation count still consistent (one-sided, 99%) with a
/// per-trial failure probability `p`.
pub fn allowed_violations(p: f64, trials: usize) -> usize {
    let p = p.clamp(0.0, 1.0);
    let n = trials as f64;
    // P(X ≤ k) accumulated until it reaches 0.99.
    let mut cdf = 0.0;
    let mut pmf = (1.0 - p).powf(n);
    for k in 0..=trials {
        cdf += pmf;
        if cdf >= 0.99 || p >= 1.0 {
            return k;
        }
        pmf *= (n - k as f64) / (k as f64 + 1.0) * p / (1.0 - p);
    }
    trials
}

/// Random real rank-`rank` matrix scaled so that `‖X‖_max = peak`.
pub fn random_low_rank_real<R: Rng + ?Sized>(
    n1: usize,
    n2: usize,
    rank: usize,
    peak: f64,
    rng: &mut R,
) -> RMat {
    let a = Mat::from_fn(n1, rank, |_, _| rng.random_range(-1.0..1.0));
    let b = Mat::from_fn(rank, n2, |_, _| rng.random_range(-1.0..1.0));
    let x: RMat = &a * &b;
    let m = max_abs(&x);
    Mat::from_fn(n1, n2, |i, j| x[(i, j)] * peak / m)
}

/// Random complex rank-`rank` matrix with `max(‖Re‖_max, ‖Im‖_max) = peak`.
pub fn random_low_rank_complex<R: Rng + ?Sized>(
    n1: usize,
    n2: usize,
    rank: usize,
    peak: f64,
    rng: &mut R,
) -> CMat {
    let mut c = || Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let a = Mat::from_fn(n1, rank, |_, _| c());
    let b = Mat::from_fn(rank, n2, |_, _| c());
    let x: CMat = &a * &b;
    let m = linalg::max_component(&x);
    Mat::from_fn(n1, n2, |i, j| x[(i, j)] * (peak / m))
}

fn split(x: &CMat) -> (RMat, RMat) {
    (
        Mat::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)].re),
        Mat::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)].im),
    )
}

fn max_abs(x: &RMat) -> f64 {
    let mut m = 0.0f64;
    for j in 0..x.ncols() {
        for i in 0..x.nrows() {
            m = m.max(x[(i, j)].abs());
        }
    }
    m
}

fn frob_sq(x: &RMat) -> f64 {
    let mut s = 0.0;
    for j in 0..x.ncols() {
        for i in 0..x.nrows() {
            s += x[(i, j)] * x[(i, j)];
        }
    }
    s
}

fn frob_dist(a: &RMat, b: &RMat) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += (a[(i, j)] - b[(i, j)]).powi(2);
        }
    }
    s.sqrt()
}

// ---------------------------------------------------------------------------
// End-to-end validation of the recovery bound.

/// How Ω is drawn in [`validate_theorem`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SamplingMode {
    /// `m′` entries uniformly at random; `None` uses the sample-complexity
    /// level (capped at `n1·n2`). This matches the theorem's hypotheses.
    Uniform { m_prime: Option<usize> },
    /// Every entry observed.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TheoremConfig {
    pub n1: usize,
    pub n2: usize,
    pub rank: usize,
    /// Component bound α; the dither scale is `Δ = 2α`.
    pub alpha: f64,
    pub epsilon: f64,
    /// Constant in the sample-complexity rule.
    pub constant: f64,
    pub sampling: SamplingMode,
    pub trials: usize,
    pub base_seed: u64,
    pub solver: SvtConfig,
}

impl Default for TheoremConfig {
    fn default() -> Self {
        Self {
            n1: 20,
            n2: 20,
            rank: 2,
            alpha: 1.0,
            epsilon: 0.5,
            constant: 1.0,
            sampling: SamplingMode::Uniform { m_prime: None },
            trials: 200,
            base_seed: 2024,
            solver: SvtConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremTrial {
    pub seed: u64,
    pub error: f64,
    pub error_real: f64,
    pub error_imag: f64,
    pub within_bound: bool,
    pub consistent: bool,
    pub parallelogram_rel_err: f64,
    pub t_ave_real: f64,
    pub t_ave_real_recovered: f64,
    /// `ε` at which the observed error would meet the bound exactly.
    pub implied_epsilon: f64,
    /// Sample-complexity level for `implied_epsilon`.
    pub implied_m_prime: u64,
    pub solver_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub config: TheoremConfig,
    pub sampling_within_hypotheses: bool,
    pub m_prime: usize,
    pub delta: f64,
    pub bound: f64,
    pub channel_bound: f64,
    pub failure_probability: FailureProbability,
    pub allowed_violations: usize,
    pub trials: Vec<TheoremTrial>,
    pub consistent_trials: usize,
    pub violations_all: usize,
    pub violations_consistent: usize,
    pub fraction_within_bound: f64,
    pub max_parallelogram_rel_err: f64,
    pub median_error: f64,
}

impl TheoremReport {
    /// Violations among consistent reconstructions are no more frequent
    /// than the larger of the two failure-probability forms allows.
    pub fn violation_rate_consistent(&self) -> bool {
        self.violations_consistent <= self.allowed_violations
    }
}

impl TheoremConfig {
    pub fn dims(&self) -> Result<HankelDims> {
        HankelDims::new(self.n1, self.n2)
    }

    pub fn resolved_m_prime(&self) -> Result<usize> {
        let total = self.n1 * self.n2;
        Ok(match self.sampling {
            SamplingMode::Full => total,
            SamplingMode::Uniform { m_prime: Some(m) } => {
                if m == 0 || m > total {
                    return Err(Error::Config(format!("m_prime {m} outside [1, {total}]")));
                }
                m
            }
            SamplingMode::Uniform { m_prime: None } => {
                (sample_complexity(self.epsilon, self.rank, self.n1, self.n2, self.constant)
                    as usize)
                    .clamp(1, total)
            }
        })
    }
}

/// Monte Carlo check of the recovery bound: random rank-r matrices with
/// `‖·‖_max = α`, one-bit sampled with `Δ = 2α`, completed by SVT.
pub fn validate_theorem(cfg: &TheoremConfig) -> Result<TheoremReport> {
    let dims = cfg.dims()?;
    let params = TheoryParams::coupled(cfg.alpha, cfg.rank, dims, cfg.epsilon, 1)?;
    if cfg.trials == 0 {
        return Err(Error::Config("trials must be >= 1".into()));
    }
    if !(cfg.constant.is_finite() && cfg.constant > 0.0) {
        return Err(Error::Config("constant must be positive".into()));
    }
    cfg.solver.validate()?;
    let m_prime = cfg.resolved_m_prime()?;
    let delta = 2.0 * cfg.alpha;
    let bound = recovery_error_bound(cfg.epsilon, cfg.alpha, cfg.n1, cfg.n2);
    let fp = failure_probability(cfg.epsilon, m_prime, delta, cfg.alpha);
    let allowed = allowed_violations(fp.dither_scaled.max(fp.alpha_scaled), cfg.trials);

    let trials = (0..cfg.trials)
        .map(|t| {
            run_theorem_trial(
                cfg,
                dims,
                m_prime,
                delta,
                bound,
                trial_seed(cfg.base_seed, t),
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let consistent_trials = trials.iter().filter(|t| t.consistent).count();
    let violations_all = trials.iter().filter(|t| !t.within_bound).count();
    let violations_consistent = trials
        .iter()
        .filter(|t| t.consistent && !t.within_bound)
        .count();
    let mut errors: Vec<f64> = trials.iter().map(|t| t.error).collect();
    errors.sort_by(f64::total_cmp);
    Ok(TheoremReport {
        config: cfg.clone(),
        sampling_within_hypotheses: true,
        m_prime,
        delta,
        bound,
        channel_bound: params.rho,
        failure_probability: fp,
        allowed_violations: allowed,
        consistent_trials,
        violations_all,
        violations_consistent,
        fraction_within_bound: 1.0 - violations_all as f64 / trials.len() as f64,
        max_parallelogram_rel_err: trials
            .iter()
            .map(|t| t.parallelogram_rel_err)
            .fold(0.0, f64::max),
        median_error: median_sorted(&errors),
        trials,
    })
}

fn run_theorem_trial(
    cfg: &TheoremConfig,
    dims: HankelDims,
    m_prime: usize,
    delta: f64,
    bound: f64,
    seed: u64,
) -> Result<TheoremTrial> {
    let mut sample_rng = stream_rng(seed, Stream::Sampling);
    let x = random_low_rank_complex(dims.n1, dims.n2, cfg.rank, cfg.alpha, &mut sample_rng);
    let omega = match cfg.sampling {
        SamplingMode::Full => ObservationSet::full(dims),
        SamplingMode::Uniform { .. } => {
            ObservationSet::uniform_random(dims, m_prime, &mut sample_rng)?
        }
    };
    let dither = DitherMatrix::generate(dims.n1, dims.n2, delta, seed)?;
    let obs = one_bit_quantize_matrix(&x, &omega, &dither)?;
    let out = complete_hankel_pipeline(&obs, &cfg.solver)?;
    let xr = &out.matrix;

    let (re, im) = split(&x);
    let (rre, rim) = split(xr);
    let (sr, _) = split(obs.signs());
    let error = linalg::frobenius_dist(&x, xr);
    let (lhs, rhs) = parallelogram_sides(&x, xr);
    let implied_epsilon = epsilon_for_error(error, cfg.alpha, dims.n1, dims.n2);
    Ok(TheoremTrial {
        seed,
        error,
        error_real: frob_dist(&re, &rre),
        error_imag: frob_dist(&im, &rim),
        within_bound: error <= bound,
        consistent: check_consistency(&x, xr, &omega, delta, &dither)?,
        parallelogram_rel_err: (lhs - rhs).abs() / lhs.max(f64::MIN_POSITIVE),
        t_ave_real: t_ave(&re, &sr, &omega, delta)?,
        t_ave_real_recovered: t_ave(&rre, &sr, &omega, delta)?,
        implied_epsilon,
        implied_m_prime: if implied_epsilon > 0.0 {
            sample_complexity(implied_epsilon, cfg.rank, dims.n1, dims.n2, cfg.constant)
        } else {
            u64::MAX
        },
        solver_iterations: out.diagnostics.iterations,
    })
}

pub(crate) fn median_sorted(v: &[f64]) -> f64 {
    match v.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => v[n / 2],
        n => 0.5 * (v[n / 2 - 1] + v[n / 2]),
    }
}
