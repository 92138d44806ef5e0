//! FFT angle spectra and peak picking.

use std::path::Path;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::array::{Snapshot, HALF_WAVELENGTH};
use crate::{Error, Result};

pub const DEFAULT_FFT_LEN: usize = 4096;
pub const DEFAULT_MIN_SEPARATION_DEG: f64 = 5.0;
/// Lowest level reported, in dB below the peak.
pub const DB_FLOOR: f64 = -120.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumSource {
    SparseZeroFilled,
    Completed,
    FullArray,
}

/// Normalized (peak = 0 dB) spectrum on an increasing azimuth grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleSpectrum {
    pub source: SpectrumSource,
    pub fft_len: usize,
    pub angles_deg: Vec<f64>,
    pub magnitudes_db: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub angle_deg: f64,
    pub level_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakReport {
    /// Detected peaks, strongest first.
    pub peaks: Vec<Peak>,
    /// Strongest local maximum that is not a reported peak
    /// ([`DB_FLOOR`] when there is none).
    pub max_sidelobe_db: f64,
    /// Weakest reported peak minus `max_sidelobe_db`.
    pub peak_to_sidelobe_db: f64,
}

/// Zero-pads `values` to `n_fft` points and returns the centered
/// (fftshifted) DFT, bin `k` at spatial frequency `u = k/n_fft − 1/2`.
pub fn zero_padded_fft(values: &[Complex64], n_fft: usize) -> Result<Vec<Complex64>> {
    if n_fft < values.len() || !n_fft.is_power_of_two() {
        return Err(Error::domain(format!(
            "FFT length {n_fft} must be a power of two >= input length {}",
            values.len()
        )));
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
    buf[..values.len()].copy_from_slice(values);
    FftPlanner::new().plan_fft_forward(n_fft).process(&mut buf);
    buf.rotate_left(n_fft / 2);
    Ok(buf)
}

/// Spectrum of a half-wavelength array snapshot.
pub fn angle_spectrum(x: &Snapshot, n_fft: usize, source: SpectrumSource) -> Result<AngleSpectrum> {
    angle_spectrum_with_spacing(x.values(), n_fft, HALF_WAVELENGTH, source)
}

/// Bins with spatial frequency `u` map to `θ = asin(u / d)`; bins with
/// `|u / d| ≥ 1` are invisible and dropped.
pub fn angle_spectrum_with_spacing(
    values: &[Complex64],
    n_fft: usize,
    spacing: f64,
    source: SpectrumSource,
) -> Result<AngleSpectrum> {
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(Error::domain(format!(
            "spacing must be positive, got {spacing}"
        )));
    }
    let spec = zero_padded_fft(values, n_fft)?;
    let mut angles = Vec::new();
    let mut mags = Vec::new();
    for (k, z) in spec.iter().enumerate() {
        let s = (k as f64 / n_fft as f64 - 0.5) / spacing;
        if s.abs() < 1.0 {
            angles.push(s.asin().to_degrees());
            mags.push(z.norm());
        }
    }
    let peak = mags.iter().copied().fold(0.0f64, f64::max);
    if peak == 0.0 || !peak.is_finite() {
        return Err(Error::Degenerate(
            "spectrum has no energy to normalize".into(),
        ));
    }
    let magnitudes_db = mags
        .iter()
        .map(|m| {
            let db = 20.0 * (m / peak).log10();
            if db.is_finite() {
                db.max(DB_FLOOR)
            } else {
                DB_FLOOR
            }
        })
        .collect();
    Ok(AngleSpectrum {
        source,
        fft_len: n_fft,
        angles_deg: angles,
        magnitudes_db,
    })
}

/// Indices of interior local maxima (strict rise on the left, no rise on
/// the right, so plateaus count once).
fn local_maxima(m: &[f64]) -> Vec<usize> {
    (1..m.len().saturating_sub(1))
        .filter(|&i| m[i] > m[i - 1] && m[i] >= m[i + 1])
        .collect()
}

/// Picks the `count` strongest local maxima that are at least
/// `min_separation_deg` apart.
pub fn find_peaks(s: &AngleSpectrum, count: usize, min_separation_deg: f64) -> Result<PeakReport> {
    if count == 0 {
        return Err(Error::domain("peak count must be >= 1"));
    }
    if !(min_separation_deg.is_finite() && min_separation_deg >= 0.0) {
        return Err(Error::domain(format!(
            "min separation must be >= 0, got {min_separation_deg}"
        )));
    }
    let m = &s.magnitudes_db;
    let mut maxima = local_maxima(m);
    maxima.sort_by(|&a, &b| m[b].total_cmp(&m[a]).then(a.cmp(&b)));

    let mut picked: Vec<usize> = Vec::with_capacity(count);
    for &i in &maxima {
        if picked.len() == count {
            break;
        }
        if picked
            .iter()
            .all(|&p| (s.angles_deg[p] - s.angles_deg[i]).abs() >= min_separation_deg)
        {
            picked.push(i);
        }
    }
    let max_sidelobe_db = maxima
        .iter()
        .filter(|i| !picked.contains(i))
        .map(|&i| m[i])
        .fold(DB_FLOOR, f64::max);
    let peaks: Vec<Peak> = picked
        .iter()
        .map(|&i| Peak {
            angle_deg: s.angles_deg[i],
            level_db: m[i],
        })
        .collect();
    let weakest = peaks.last().map(|p| p.level_db).unwrap_or(DB_FLOOR);
    let report = PeakReport {
        peaks,
        max_sidelobe_db,
        peak_to_sidelobe_db: weakest - max_sidelobe_db,
    };
    if report.peaks.len() < count {
        return Err(Error::DetectionFailure {
            requested: count,
            found: report.peaks.len(),
            partial: report,
        });
    }
    Ok(report)
}

impl PeakReport {
    /// True when every truth angle has a distinct detected peak within
    /// `tolerance_deg`.
    pub fn matches(&self, truth_deg: &[f64], tolerance_deg: f64) -> bool {
        let mut used = vec![false; self.peaks.len()];
        truth_deg.iter().all(|&t| {
            let hit = self
                .peaks
                .iter()
                .enumerate()
                .filter(|(k, p)| !used[*k] && (p.angle_deg - t).abs() <= tolerance_deg)
                .min_by(|a, b| {
                    (a.1.angle_deg - t)
                        .abs()
                        .total_cmp(&(b.1.angle_deg - t).abs())
                })
                .map(|(k, _)| k);
            match hit {
                Some(k) => {
                    used[k] = true;
                    true
                }
                None => false,
            }
        })
    }
}

impl AngleSpectrum {
    /// Writes `angle_deg,magnitude_db` rows with 17 significant digits.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io = |e: csv::Error| Error::Io {
            path: path.to_path_buf(),
            source: e.into(),
        };
        let mut w = csv::Writer::from_path(path).map_err(io)?;
        w.write_record(["angle_deg", "magnitude_db"]).map_err(io)?;
        for (a, m) in self.angles_deg.iter().zip(&self.magnitudes_db) {
            w.write_record([format!("{a:.16e}"), format!("{m:.16e}")])
                .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }

    /// Reads the two columns written by [`write_csv`](Self::write_csv).
    pub fn read_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
        let io = |e: csv::Error| Error::Io {
            path: path.to_path_buf(),
            source: e.into(),
        };
        let mut r = csv::Reader::from_path(path).map_err(io)?;
        let mut angles = Vec::new();
        let mut mags = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(io)?;
            let parse = |k: usize| -> Result<f64> {
                rec.get(k).and_then(|s| s.parse().ok()).ok_or_else(|| {
                    Error::Serialization(format!("bad CSV row in {}", path.display()))
                })
            };
            angles.push(parse(0)?);
            mags.push(parse(1)?);
        }
        Ok((angles, mags))
    }

    /// Grid index of the global maximum.
    pub fn argmax(&self) -> usize {
        self.magnitudes_db
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, _)| k)
            .unwrap_or(0)
    }
}
