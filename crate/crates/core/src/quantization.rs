//! Dithered quantization.
//!
//! Sign convention: one-bit samples compare against the dither,
//! `r = sign(x − τ)`, and the uniform quantizer used alongside them is
//! `Q_Δ(x) = Δ(⌊(x − τ)/Δ⌋ + ½)`, i.e. the additive-dither quantizer fed
//! with `−τ`. The dither law is symmetric so both forms have the same
//! distribution; this pairing makes `Q_Δ(x) = (Δ/2)·sign(x − τ)` hold
//! sample by sample whenever `|x|, |τ| ≤ Δ/2`. Ties `x = τ` map to `+1`.

use faer::Mat;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Uniform};

use crate::hankel::{HankelMatrix, ObservationSet};
use crate::rng::{stream_rng, Stream};
use crate::{CMat, Error, Result};

/// Headroom used by [`design_dither_scale`] in the pipeline.
pub const DEFAULT_SCALE_MARGIN: f64 = 0.05;

fn check_scale(delta: f64) -> Result<()> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::domain(format!(
            "quantizer scale must be positive, got {delta}"
        )));
    }
    Ok(())
}

/// `sign(x − τ)` with ties resolved to `+1`.
#[inline]
pub fn comparator(x: f64, tau: f64) -> f64 {
    if x >= tau {
        1.0
    } else {
        -1.0
    }
}

/// Additive-dither uniform quantizer `Δ(⌊(x + τ)/Δ⌋ + ½)`.
pub fn uniform_quantize(x: f64, delta: f64, tau: f64) -> Result<f64> {
    check_scale(delta)?;
    Ok(delta * (((x + tau) / delta).floor() + 0.5))
}

/// Quantizer in the comparator convention, `Q_Δ(x)` with dither `−τ`.
pub fn quantize_against(x: f64, delta: f64, tau: f64) -> Result<f64> {
    uniform_quantize(x, delta, -tau)
}

/// Checks `Q_Δ(x) = (Δ/2)·sign(x − τ)` for an in-range pair.
///
/// Outside `|x|, |τ| ≤ Δ/2` the identity is not guaranteed and the call is
/// rejected. The single corner `x − τ = Δ` lands in the next cell and
/// reports `false`.
pub fn verify_onebit_equivalence(x: f64, delta: f64, tau: f64) -> Result<bool> {
    check_scale(delta)?;
    let half = delta / 2.0;
    if x.abs() > half || tau.abs() > half {
        return Err(Error::domain(format!(
            "equivalence needs |x|, |τ| ≤ Δ/2 = {half}, got x = {x}, τ = {tau}"
        )));
    }
    Ok(quantize_against(x, delta, tau)? == half * comparator(x, tau))
}

/// Independent uniform dithers for the real and imaginary parts of every
/// matrix entry.
#[derive(Debug, Clone, PartialEq)]
pub struct DitherMatrix {
    n1: usize,
    n2: usize,
    scale: f64,
    seed: u64,
    real: Vec<f64>,
    imag: Vec<f64>,
}

impl DitherMatrix {
    /// Draws `τ ~ U[−Δ/2, Δ/2]` from the dither stream of `seed`, visiting
    /// entries in row-major order and drawing the real then the imaginary
    /// part of each.
    pub fn generate(n1: usize, n2: usize, scale: f64, seed: u64) -> Result<Self> {
        let mut rng = stream_rng(seed, Stream::Dither);
        let mut d = Self::draw(n1, n2, scale, &mut rng)?;
        d.seed = seed;
        Ok(d)
    }

    /// Same law, drawn from a caller-supplied generator (seed recorded as 0).
    pub fn draw<R: Rng + ?Sized>(n1: usize, n2: usize, scale: f64, rng: &mut R) -> Result<Self> {
        check_scale(scale)?;
        let half = scale / 2.0;
        let law = Uniform::new_inclusive(-half, half).map_err(|e| Error::domain(e.to_string()))?;
        let mut real = Vec::with_capacity(n1 * n2);
        let mut imag = Vec::with_capacity(n1 * n2);
        for _ in 0..n1 * n2 {
            real.push(law.sample(rng));
            imag.push(law.sample(rng));
        }
        Ok(Self {
            n1,
            n2,
            scale,
            seed: 0,
            real,
            imag,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `(τ^(R), τ^(I))` at entry `(i, j)`.
    pub fn at(&self, i: usize, j: usize) -> (f64, f64) {
        let k = i * self.n2 + j;
        (self.real[k], self.imag[k])
    }
}

/// Complex one-bit data `R` on Ω together with the dither scale.
#[derive(Debug, Clone, PartialEq)]
pub struct OneBitObservation {
    signs: CMat,
    scale: f64,
    omega: ObservationSet,
}

impl OneBitObservation {
    /// Matrix with entries in `{±1} + j{±1}` on Ω and zero elsewhere.
    pub fn signs(&self) -> &CMat {
        &self.signs
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn omega(&self) -> &ObservationSet {
        &self.omega
    }

    /// `b = vec((Δ/2)·R)` over Ω in the set's row-major order.
    pub fn measurements(&self) -> Vec<Complex64> {
        let half = self.scale / 2.0;
        self.omega
            .entries()
            .iter()
            .map(|&(i, j)| self.signs[(i, j)] * half)
            .collect()
    }

    /// Real-part signs as a dense `n1 × n2` grid (0 off Ω).
    pub fn real_signs(&self) -> Vec<f64> {
        self.channel(|z| z.re)
    }

    pub fn imag_signs(&self) -> Vec<f64> {
        self.channel(|z| z.im)
    }

    fn channel(&self, f: impl Fn(Complex64) -> f64) -> Vec<f64> {
        let (n1, n2) = (self.signs.nrows(), self.signs.ncols());
        let mut out = vec![0.0; n1 * n2];
        for i in 0..n1 {
            for j in 0..n2 {
                out[i * n2 + j] = f(self.signs[(i, j)]);
            }
        }
        out
    }
}

/// Compares the observed entries of `h` against the dither, channel by
/// channel. Entries off Ω are zero.
pub fn one_bit_quantize(
    h: &HankelMatrix,
    omega: &ObservationSet,
    dither: &DitherMatrix,
) -> Result<OneBitObservation> {
    one_bit_quantize_matrix(h.matrix(), omega, dither)
}

pub fn one_bit_quantize_matrix(
    x: &CMat,
    omega: &ObservationSet,
    dither: &DitherMatrix,
) -> Result<OneBitObservation> {
    let shape = (x.nrows(), x.ncols());
    if dither.shape() != shape {
        return Err(Error::DimensionMismatch {
            expected: shape.0 * shape.1,
            actual: dither.n1 * dither.n2,
        });
    }
    let od = omega.dims();
    if (od.n1, od.n2) != shape {
        return Err(Error::DimensionMismatch {
            expected: shape.0 * shape.1,
            actual: od.entries(),
        });
    }
    let mut signs = Mat::zeros(shape.0, shape.1);
    for &(i, j) in omega.entries() {
        let z = x[(i, j)];
        let (tr, ti) = dither.at(i, j);
        signs[(i, j)] = Complex64::new(comparator(z.re, tr), comparator(z.im, ti));
    }
    Ok(OneBitObservation {
        signs,
        scale: dither.scale(),
        omega: omega.clone(),
    })
}

/// `Δ = 2(1 + margin)·max_Ω max(|Re X|, |Im X|)`, which keeps every
/// observed component inside `[−Δ/2, Δ/2]`.
pub fn design_dither_scale(h: &HankelMatrix, omega: &ObservationSet, margin: f64) -> Result<f64> {
    if !(margin.is_finite() && margin >= 0.0) {
        return Err(Error::domain(format!("margin must be >= 0, got {margin}")));
    }
    if omega.is_empty() {
        return Err(Error::domain("observation set is empty"));
    }
    let m = h.matrix();
    let peak = omega
        .entries()
        .iter()
        .map(|&(i, j)| m[(i, j)].re.abs().max(m[(i, j)].im.abs()))
        .fold(0.0f64, f64::max);
    if peak == 0.0 {
        return Err(Error::Degenerate("all observed entries are zero".into()));
    }
    if !peak.is_finite() {
        return Err(Error::Numerical("observed entries are not finite".into()));
    }
    Ok(2.0 * (1.0 + margin) * peak)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hankel::HankelDims;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quantizer_examples() {
        assert_eq!(uniform_quantize(0.0, 1.0, 0.0).unwrap(), 0.5);
        assert_eq!(uniform_quantize(0.3, 1.0, 0.0).unwrap(), 0.5);
        assert_eq!(uniform_quantize(-0.3, 1.0, -0.4).unwrap(), -0.5);
        assert!(uniform_quantize(1.0, 0.0, 0.0).is_err());
        assert!(uniform_quantize(1.0, -2.0, 0.0).is_err());
    }

    #[test]
    fn equivalence_examples() {
        assert_eq!(quantize_against(0.2, 1.0, 0.4).unwrap(), -0.5);
        assert!(verify_onebit_equivalence(0.2, 1.0, 0.4).unwrap());
        assert!(verify_onebit_equivalence(0.0, 1.0, 0.0).unwrap());
        assert_eq!(quantize_against(0.0, 1.0, 0.0).unwrap(), 0.5);
        assert!(matches!(
            verify_onebit_equivalence(0.6, 1.0, 0.0),
            Err(Error::Domain(_))
        ));
        // x − τ = Δ exactly is the one in-range point that leaves the cell.
        assert!(!verify_onebit_equivalence(0.5, 1.0, -0.5).unwrap());
    }

    #[test]
    fn equivalence_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100_000 {
            let delta = rng.random_range(1e-3..10.0);
            let x = rng.random_range(-delta / 2.0..=delta / 2.0);
            let tau = rng.random_range(-delta / 2.0..=delta / 2.0);
            assert!(
                verify_onebit_equivalence(x, delta, tau).unwrap(),
                "x={x} τ={tau} Δ={delta}"
            );
        }
    }

    #[test]
    fn dithered_quantizer_is_unbiased() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let delta = 2.0;
        for &x in &[-0.9, -0.2, 0.0, 0.37, 0.99] {
            let n = 200_000;
            let samples: Vec<f64> = (0..n)
                .map(|_| quantize_against(x, delta, rng.random_range(-1.0..=1.0)).unwrap())
                .collect();
            let mean = samples.iter().sum::<f64>() / n as f64;
            let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let se = (var / n as f64).sqrt();
            assert!((mean - x).abs() <= 3.0 * se, "x={x} mean={mean} se={se}");
        }
    }

    fn mat(rows: &[&[Complex64]]) -> CMat {
        Mat::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
    }

    #[test]
    fn comparator_entries_and_masking() {
        let x = mat(&[&[Complex64::new(0.3, -0.2), Complex64::new(5.0, 5.0)]]);
        let h = HankelMatrix::from_matrix(x).unwrap();
        let dims = HankelDims::new(1, 2).unwrap();
        let omega = ObservationSet::from_entries(dims, [(0, 0)]).unwrap();
        let mut dither = DitherMatrix::generate(1, 2, 1.0, 0).unwrap();
        dither.real[0] = 0.1;
        dither.imag[0] = 0.1;
        let r = one_bit_quantize(&h, &omega, &dither).unwrap();
        assert_eq!(r.signs()[(0, 0)], Complex64::new(1.0, -1.0));
        assert_eq!(r.signs()[(0, 1)], Complex64::new(0.0, 0.0));
        assert_eq!(r.measurements(), vec![Complex64::new(0.5, -0.5)]);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let h = HankelMatrix::from_matrix(CMat::zeros(2, 2)).unwrap();
        let omega = ObservationSet::full(HankelDims::new(2, 2).unwrap());
        let dither = DitherMatrix::generate(2, 3, 1.0, 0).unwrap();
        assert!(one_bit_quantize(&h, &omega, &dither).is_err());
    }

    #[test]
    fn dither_is_bounded_and_regenerable() {
        let a = DitherMatrix::generate(7, 9, 0.8, 42).unwrap();
        let b = DitherMatrix::generate(7, 9, 0.8, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.real.iter().chain(&a.imag).all(|t| t.abs() <= 0.4));
        assert_ne!(a, DitherMatrix::generate(7, 9, 0.8, 43).unwrap());
    }

    #[test]
    fn scale_design() {
        let h = HankelMatrix::from_matrix(mat(&[&[Complex64::new(0.5, 0.5)]])).unwrap();
        let omega = ObservationSet::full(HankelDims::new(1, 1).unwrap());
        assert_eq!(design_dither_scale(&h, &omega, 0.0).unwrap(), 1.0);
        assert!((design_dither_scale(&h, &omega, 0.05).unwrap() - 1.05).abs() < 1e-15);

        let zero = HankelMatrix::from_matrix(CMat::zeros(1, 1)).unwrap();
        assert!(matches!(
            design_dither_scale(&zero, &omega, 0.0),
            Err(Error::Degenerate(_))
        ));
        let empty = ObservationSet::from_entries(HankelDims::new(1, 1).unwrap(), []).unwrap();
        assert!(design_dither_scale(&h, &empty, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn quantization_error_is_at_most_delta(x in -1e3f64..1e3, delta in 1e-3f64..50.0, u in -0.5f64..=0.5) {
            let q = uniform_quantize(x, delta, u * delta).unwrap();
            prop_assert!((q - x).abs() <= delta * (1.0 + 1e-12));
            let k = q / delta - 0.5;
            prop_assert!((k - k.round()).abs() < 1e-6);
        }

        #[test]
        fn signs_depend_only_on_comparisons(seed in any::<u64>(), bump in 0.0f64..1.0) {
            // Moving every entry toward +∞ where it already exceeds its
            // dither cannot change the signs.
            let dims = HankelDims::new(4, 5).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = Mat::from_fn(4, 5, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let dither = DitherMatrix::generate(4, 5, 2.0, seed).unwrap();
            let omega = ObservationSet::full(dims);
            let r = one_bit_quantize_matrix(&x, &omega, &dither).unwrap();
            let y = Mat::from_fn(4, 5, |i, j| {
                let z = x[(i, j)];
                let s = r.signs()[(i, j)];
                Complex64::new(z.re + s.re * bump, z.im + s.im * bump)
            });
            let r2 = one_bit_quantize_matrix(&y, &omega, &dither).unwrap();
            prop_assert_eq!(r.signs(), r2.signs());
        }
    }
}
