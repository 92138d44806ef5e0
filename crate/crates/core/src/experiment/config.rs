use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::array::{noise_variance_for_snr_db, Target, TargetScene, HALF_WAVELENGTH};
use crate::hankel::{hankel_dims, hankel_dims_square, HankelDims};
use crate::quantization::DEFAULT_SCALE_MARGIN;
use crate::spectrum::{DEFAULT_FFT_LEN, DEFAULT_MIN_SEPARATION_DEG};
use crate::svt::SvtConfig;
use crate::{Error, Result};

/// Cascaded 6-TX / 8-RX automotive array, positions in half wavelengths.
pub const CASCADE_TX: [u32; 6] = [1, 19, 37, 55, 79, 91];
pub const CASCADE_RX: [u32; 8] = [12, 22, 25, 39, 58, 62, 70, 73];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub tx: Vec<u32>,
    pub rx: Vec<u32>,
    /// Lift to `⌈M/2⌉ × ⌈M/2⌉` instead of the near-square rule.
    pub hankel_shape: HankelShape,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HankelShape {
    #[default]
    NearSquare,
    Square,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            tx: CASCADE_TX.to_vec(),
            rx: CASCADE_RX.to_vec(),
            hankel_shape: HankelShape::NearSquare,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneConfig {
    pub targets: Vec<Target>,
    /// Per-source SNR against per-element noise power; `None` is noiseless.
    pub snr_db: Option<f64>,
    pub spacing: f64,
    /// Range and radial velocity of the targets' range-Doppler cell. Only
    /// echoed in reports.
    pub range_m: f64,
    pub velocity_mps: f64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            targets: vec![Target::at(-57.0), Target::at(-34.0)],
            snr_db: Some(20.0),
            spacing: HALF_WAVELENGTH,
            range_m: 100.0,
            velocity_mps: -10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum QuantizationMode {
    /// Δ from the observed dynamic range with relative headroom `margin`.
    AutoMargin {
        margin: f64,
    },
    Explicit {
        delta: f64,
    },
    /// Feed unquantized observed entries to the solver.
    None,
}

impl Default for QuantizationMode {
    fn default() -> Self {
        QuantizationMode::AutoMargin {
            margin: DEFAULT_SCALE_MARGIN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    pub fft_len: usize,
    /// Number of peaks to detect; `None` uses the number of targets.
    pub peaks: Option<usize>,
    pub min_separation_deg: f64,
    /// A target counts as detected when a peak lies within this distance.
    pub tolerance_deg: f64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            fft_len: DEFAULT_FFT_LEN,
            peaks: None,
            min_separation_deg: DEFAULT_MIN_SEPARATION_DEG,
            tolerance_deg: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub geometry: GeometryConfig,
    pub scene: SceneConfig,
    pub quantization: QuantizationMode,
    pub solver: SvtConfig,
    pub spectrum: SpectrumConfig,
    pub seed: u64,
    pub trials: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            geometry: GeometryConfig::default(),
            scene: SceneConfig::default(),
            quantization: QuantizationMode::default(),
            solver: SvtConfig::default(),
            spectrum: SpectrumConfig::default(),
            seed: 1,
            trials: 50,
        }
    }
}

/// Reads a TOML file (by `.toml` extension) or JSON file (anything else).
pub fn load_file<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("toml") => {
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
        }
        _ => serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display()))),
    }
}

impl ExperimentConfig {
    /// Loads JSON or TOML (see [`load_file`]) and validates.
    pub fn load(path: &Path) -> Result<Self> {
        let cfg: Self = load_file(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn scene(&self) -> Result<TargetScene> {
        TargetScene::with_spacing(self.scene.targets.clone(), self.scene.spacing)
            .map_err(into_config)
    }

    pub fn noise_variance(&self) -> f64 {
        self.scene.snr_db.map_or(0.0, noise_variance_for_snr_db)
    }

    pub fn peak_count(&self) -> usize {
        self.spectrum.peaks.unwrap_or(self.scene.targets.len())
    }

    pub fn hankel_dims(&self, m: usize) -> HankelDims {
        match self.geometry.hankel_shape {
            HankelShape::NearSquare => hankel_dims(m),
            HankelShape::Square => hankel_dims_square(m),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.geometry.tx.is_empty() || self.geometry.rx.is_empty() {
            return Err(Error::Config(
                "geometry needs at least one TX and one RX".into(),
            ));
        }
        self.scene()?;
        if let Some(snr) = self.scene.snr_db {
            if !snr.is_finite() {
                return Err(Error::Config(format!("snr_db must be finite, got {snr}")));
            }
        }
        match self.quantization {
            QuantizationMode::AutoMargin { margin } if !(margin.is_finite() && margin >= 0.0) => {
                return Err(Error::Config(format!("margin must be >= 0, got {margin}")));
            }
            QuantizationMode::Explicit { delta } if !(delta.is_finite() && delta > 0.0) => {
                return Err(Error::Config(format!("delta must be > 0, got {delta}")));
            }
            _ => {}
        }
        self.solver.validate()?;
        let sp = &self.spectrum;
        if !sp.fft_len.is_power_of_two() {
            return Err(Error::Config(format!(
                "fft_len must be a power of two, got {}",
                sp.fft_len
            )));
        }
        if self.peak_count() == 0 {
            return Err(Error::Config("peak count must be >= 1".into()));
        }
        if !(sp.min_separation_deg.is_finite() && sp.min_separation_deg >= 0.0) {
            return Err(Error::Config("min_separation_deg must be >= 0".into()));
        }
        if !(sp.tolerance_deg.is_finite() && sp.tolerance_deg > 0.0) {
            return Err(Error::Config("tolerance_deg must be > 0".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        Ok(())
    }
}

fn into_config(e: Error) -> Error {
    match e {
        Error::Domain(m) => Error::Config(m),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defaults_describe_the_cascade_experiment() {
        let c = ExperimentConfig::default();
        c.validate().unwrap();
        assert_eq!(c.geometry.tx, vec![1, 19, 37, 55, 79, 91]);
        assert_eq!(c.geometry.rx, vec![12, 22, 25, 39, 58, 62, 70, 73]);
        let az: Vec<f64> = c.scene.targets.iter().map(|t| t.azimuth_deg).collect();
        assert_eq!(az, vec![-57.0, -34.0]);
        assert_eq!(c.scene.snr_db, Some(20.0));
        assert!((c.noise_variance() - 0.01).abs() < 1e-15);
        assert_eq!(c.peak_count(), 2);
        assert_eq!(c.spectrum.fft_len, 4096);
    }

    #[test]
    fn empty_document_is_default() {
        assert_eq!(
            ExperimentConfig::from_json("{}").unwrap(),
            ExperimentConfig::default()
        );
        assert_eq!(
            ExperimentConfig::from_toml("").unwrap(),
            ExperimentConfig::default()
        );
    }

    #[test]
    fn partial_toml_overrides() {
        let c = ExperimentConfig::from_toml(
            r#"
            seed = 9
            [quantization]
            mode = "explicit"
            delta = 4.5
            [scene]
            snr_db = 10.0
            targets = [{ azimuth_deg = 12.0, amplitude = 2.0 }]
            "#,
        )
        .unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.quantization, QuantizationMode::Explicit { delta: 4.5 });
        assert_eq!(c.scene.targets[0].amplitude, 2.0);
        assert_eq!(c.scene.targets[0].phase_rad, 0.0);
        assert_eq!(c.scene.range_m, 100.0);
    }

    #[test]
    fn invalid_configs() {
        assert!(ExperimentConfig::from_json(r#"{"bogus": 1}"#).is_err());
        let mut c = ExperimentConfig::default();
        c.scene.targets.clear();
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = ExperimentConfig::default();
        c.spectrum.fft_len = 1000;
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::default();
        c.geometry.tx.clear();
        assert!(c.validate().is_err());
        assert!(ExperimentConfig::from_json(r#"{"geometry": {"tx": [1.5]}}"#).is_err());
    }

    proptest! {
        #[test]
        fn json_round_trip_is_exact(
            snr in proptest::option::of(-10.0f64..60.0),
            az in -89.0f64..89.0,
            amp in 0.01f64..10.0,
            phase in -3.2f64..3.2,
            margin in 0.0f64..1.0,
            seed in any::<u64>(),
        ) {
            let mut c = ExperimentConfig::default();
            c.scene.snr_db = snr;
            c.scene.targets = vec![Target { azimuth_deg: az, amplitude: amp, phase_rad: phase }];
            c.quantization = QuantizationMode::AutoMargin { margin };
            c.seed = seed;
            let back = ExperimentConfig::from_json(&c.to_json()).unwrap();
            prop_assert_eq!(&back, &c);
            prop_assert_eq!(back.to_json(), c.to_json());
        }
    }
}
