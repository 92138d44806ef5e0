//! Forward model: far-field point targets seen by a uniform linear array,
//! and the sparse virtual array synthesized by a MIMO transmit/receive pair.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::rng::{stream_rng, Stream};
use crate::{Error, Result};

/// Default element spacing in wavelengths (half-wavelength grid).
pub const HALF_WAVELENGTH: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub azimuth_deg: f64,
    #[serde(default = "unit")]
    pub amplitude: f64,
    #[serde(default)]
    pub phase_rad: f64,
}

fn unit() -> f64 {
    1.0
}

impl Target {
    pub fn at(azimuth_deg: f64) -> Self {
        Self {
            azimuth_deg,
            amplitude: 1.0,
            phase_rad: 0.0,
        }
    }

    /// Complex gain `σ e^{jφ}`.
    pub fn gain(&self) -> Complex64 {
        Complex64::from_polar(self.amplitude, self.phase_rad)
    }
}

/// A set of far-field point targets in one range-Doppler cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetScene {
    targets: Vec<Target>,
    spacing: f64,
}

impl TargetScene {
    /// Scene on a half-wavelength array.
    pub fn new(targets: Vec<Target>) -> Result<Self> {
        Self::with_spacing(targets, HALF_WAVELENGTH)
    }

    pub fn with_spacing(targets: Vec<Target>, spacing: f64) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::domain("scene needs at least one target"));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::domain(format!(
                "element spacing must be positive, got {spacing}"
            )));
        }
        for (k, t) in targets.iter().enumerate() {
            check_azimuth(t.azimuth_deg)?;
            if !(t.amplitude.is_finite() && t.amplitude > 0.0) {
                return Err(Error::domain(format!(
                    "target {k}: amplitude must be positive, got {}",
                    t.amplitude
                )));
            }
            if !t.phase_rad.is_finite() {
                return Err(Error::domain(format!("target {k}: phase must be finite")));
            }
            if targets[..k].iter().any(|o| o.azimuth_deg == t.azimuth_deg) {
                return Err(Error::domain(format!(
                    "duplicate azimuth {}°",
                    t.azimuth_deg
                )));
            }
        }
        Ok(Self { targets, spacing })
    }

    /// Unit-amplitude, zero-phase targets at the given azimuths.
    pub fn from_azimuths(azimuths_deg: &[f64]) -> Result<Self> {
        Self::new(azimuths_deg.iter().copied().map(Target::at).collect())
    }

    pub fn targets(&self) -> &[Target] {
        &self.targets
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Noiseless response `A s` on an `m`-element array.
    pub fn response(&self, m: usize) -> Result<Vec<Complex64>> {
        let mut x = vec![Complex64::new(0.0, 0.0); m];
        for t in &self.targets {
            let a = steering_vector(t.azimuth_deg, m, self.spacing)?;
            let g = t.gain();
            for (xi, ai) in x.iter_mut().zip(&a) {
                *xi += g * ai;
            }
        }
        Ok(x)
    }
}

fn check_azimuth(theta_deg: f64) -> Result<()> {
    if !(theta_deg.is_finite() && theta_deg.abs() < 90.0) {
        return Err(Error::domain(format!(
            "azimuth must lie in (-90°, 90°), got {theta_deg}"
        )));
    }
    Ok(())
}

/// ULA steering vector with entries `exp(j 2π k d sin θ)`, `k = 0..m`.
pub fn steering_vector(theta_deg: f64, m: usize, spacing: f64) -> Result<Vec<Complex64>> {
    check_azimuth(theta_deg)?;
    if m == 0 {
        return Err(Error::domain("steering vector needs at least one element"));
    }
    let phase_step = 2.0 * PI * spacing * theta_deg.to_radians().sin();
    Ok((0..m)
        .map(|k| {
            if k == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::from_polar(1.0, phase_step * k as f64)
            }
        })
        .collect())
}

/// Single snapshot of an array, possibly with unobserved (masked) elements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    values: Vec<Complex64>,
    mask: Vec<bool>,
}

impl Snapshot {
    /// Fully observed snapshot.
    pub fn full(values: Vec<Complex64>) -> Self {
        let mask = vec![true; values.len()];
        Self { values, mask }
    }

    /// Snapshot with an explicit observation mask. Masked-out entries are
    /// forced to zero.
    pub fn with_mask(mut values: Vec<Complex64>, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: values.len(),
                actual: mask.len(),
            });
        }
        for (v, &keep) in values.iter_mut().zip(&mask) {
            if !keep {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        Ok(Self { values, mask })
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// 1-based indices of observed elements.
    pub fn observed_indices(&self) -> Vec<usize> {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(k, &m)| m.then_some(k + 1))
            .collect()
    }

    pub fn observed_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Value at the first observed element, if any.
    pub fn first_observed(&self) -> Option<Complex64> {
        self.mask.iter().position(|&m| m).map(|k| self.values[k])
    }

    /// Keeps only the 1-based indices in `observed` (intersected with the
    /// current mask).
    pub fn restrict(&self, observed: &[usize]) -> Result<Self> {
        let mut keep = vec![false; self.len()];
        for &k in observed {
            if k == 0 || k > self.len() {
                return Err(Error::domain(format!(
                    "observed index {k} outside [1, {}]",
                    self.len()
                )));
            }
            keep[k - 1] = self.mask[k - 1];
        }
        Self::with_mask(self.values.clone(), keep)
    }

    /// Divides every entry by `c`.
    pub fn scaled_by_inverse(&self, c: Complex64) -> Result<Self> {
        if c.norm() == 0.0 || !c.is_finite() {
            return Err(Error::Degenerate(format!("cannot normalize by {c}")));
        }
        let values = self.values.iter().map(|v| v / c).collect();
        Self::with_mask(values, self.mask.clone())
    }
}

/// Draws a single noisy snapshot `x = A s + n` of an `m`-element ULA.
///
/// Noise is circular complex Gaussian with total per-element variance
/// `noise_variance` (half in each of the real and imaginary parts).
pub fn synthesize_snapshot(
    scene: &TargetScene,
    m: usize,
    noise_variance: f64,
    seed: u64,
) -> Result<Snapshot> {
    if !(noise_variance.is_finite() && noise_variance >= 0.0) {
        return Err(Error::domain(format!(
            "noise variance must be >= 0, got {noise_variance}"
        )));
    }
    let mut x = scene.response(m)?;
    if noise_variance > 0.0 {
        let normal = Normal::new(0.0, (noise_variance / 2.0).sqrt())
            .map_err(|e| Error::domain(e.to_string()))?;
        let mut rng = stream_rng(seed, Stream::Noise);
        for xi in x.iter_mut() {
            let re = normal.sample(&mut rng);
            let im = normal.sample(&mut rng);
            *xi += Complex64::new(re, im);
        }
    }
    Ok(Snapshot::full(x))
}

/// Per-element noise variance for a given SNR with unit-amplitude sources.
pub fn noise_variance_for_snr_db(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// MIMO array on the half-wavelength grid and its virtual sparse array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    tx_positions: Vec<u32>,
    rx_positions: Vec<u32>,
    virtual_positions: Vec<usize>,
    grid_size: usize,
}

impl ArrayGeometry {
    pub fn tx_positions(&self) -> &[u32] {
        &self.tx_positions
    }

    pub fn rx_positions(&self) -> &[u32] {
        &self.rx_positions
    }

    /// Sorted, 1-based virtual element indices Ω′ on the ULA grid.
    pub fn virtual_positions(&self) -> &[usize] {
        &self.virtual_positions
    }

    /// Number of ULA grid points spanned by the virtual array (M).
    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn num_virtual(&self) -> usize {
        self.virtual_positions.len()
    }

    /// Number of transmit/receive pairs, `M_t · M_r`.
    pub fn pair_count(&self) -> usize {
        self.tx_positions.len() * self.rx_positions.len()
    }

    /// Boolean mask of length M, true on Ω′.
    pub fn mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.grid_size];
        for &k in &self.virtual_positions {
            m[k - 1] = true;
        }
        m
    }

    /// Aperture in wavelengths for a half-wavelength grid.
    pub fn aperture_wavelengths(&self) -> f64 {
        (self.grid_size - 1) as f64 * HALF_WAVELENGTH
    }
}

/// Virtual array of all pairwise position sums, shifted so the smallest
/// index is 1.
pub fn virtual_array(tx: &[u32], rx: &[u32]) -> Result<ArrayGeometry> {
    if tx.is_empty() || rx.is_empty() {
        return Err(Error::domain(
            "transmit and receive position lists must be nonempty",
        ));
    }
    let sums: BTreeSet<u64> = tx
        .iter()
        .flat_map(|&t| rx.iter().map(move |&r| t as u64 + r as u64))
        .collect();
    let lo = *sums.first().expect("nonempty");
    let hi = *sums.last().expect("nonempty");
    let virtual_positions = sums.iter().map(|&s| (s - lo) as usize + 1).collect();
    Ok(ArrayGeometry {
        tx_positions: tx.to_vec(),
        rx_positions: rx.to_vec(),
        virtual_positions,
        grid_size: (hi - lo) as usize + 1,
    })
}

/// Zeroes every element outside the geometry's virtual array.
pub fn apply_mask(x: &Snapshot, geom: &ArrayGeometry) -> Result<Snapshot> {
    if x.len() != geom.grid_size() {
        return Err(Error::DimensionMismatch {
            expected: geom.grid_size(),
            actual: x.len(),
        });
    }
    x.restrict(geom.virtual_positions())
}
