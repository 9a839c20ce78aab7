//! JSON run configurations, one shape per subcommand. Frequencies are
//! ordinary MHz, rates 1/us, times us. Relative paths resolve against the
//! directory holding the config file.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;
use zenokit::formats::read_text;
use zenokit::{Error, Result};

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn resolve(config: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        config.parent().unwrap_or(Path::new(".")).join(p)
    }
}

/// Either an explicit list or `points` values evenly spaced from `start` to
/// `stop` inclusive.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Sweep {
    List(Vec<f64>),
    Range { start: f64, stop: f64, points: usize },
}

impl Sweep {
    pub fn values(&self) -> Result<Vec<f64>> {
        match *self {
            Sweep::List(ref v) if !v.is_empty() => Ok(v.clone()),
            Sweep::List(_) => Err(Error::Domain("sweep list is empty".into())),
            Sweep::Range { start, stop, points } => match points {
                0 => Err(Error::Domain("sweep needs at least one point".into())),
                1 => Ok(vec![start]),
                n => Ok((0..n)
                    .map(|i| {
                        if i + 1 == n {
                            stop
                        } else {
                            start + (stop - start) * i as f64 / (n - 1) as f64
                        }
                    })
                    .collect()),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtrapolationMode {
    #[default]
    Hold,
    Strict,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictConfig {
    pub spectrum: PathBuf,
    pub calibration: PathBuf,
    pub qubit_mhz: f64,
    pub amplitudes: Sweep,
    #[serde(default)]
    pub residual_dephasing_mhz: f64,
    pub window_mhz: Option<[f64; 2]>,
    pub resolution: Option<usize>,
    #[serde(default)]
    pub extrapolation: ExtrapolationMode,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrateConfig {
    /// Directory of `time_us,signal` traces, each with a `.json` sidecar.
    pub traces: PathBuf,
    pub chi_mhz: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefectConfig {
    #[serde(default)]
    pub frequency_mhz: f64,
    pub coupling_mhz: f64,
    pub decay_per_us: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub detunings_mhz: Sweep,
    pub dephasings_mhz: Sweep,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryConfig {
    #[serde(default)]
    pub detuning_mhz: f64,
    #[serde(default)]
    pub dephasing_mhz: f64,
    pub t_us: f64,
    /// Approximate number of rows written.
    #[serde(default = "default_rows")]
    pub rows: usize,
}

fn default_rows() -> usize {
    1000
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub defect: DefectConfig,
    #[serde(default)]
    pub qubit_decay_per_us: f64,
    /// Points compared against the master equation.
    pub comparison: GridConfig,
    /// Closed-form rate map.
    pub map: GridConfig,
    pub trajectory: Option<TrajectoryConfig>,
    pub truncation: Option<usize>,
    pub dt_us: Option<f64>,
    pub t_max_us: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvertT1Config {
    pub input: PathBuf,
    pub t_delay_us: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSwapConfig {
    pub trace: PathBuf,
    pub f_guess_mhz: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitFluxNoiseConfig {
    /// Directory of echo traces with `flux_amp` sidecars.
    pub traces: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeakConfig {
    pub center_mhz: f64,
    pub width_per_us: f64,
    pub coupling_mhz: f64,
}

/// Synthetic fixture generation.
#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SynthConfig {
    /// Ramsey traces at each amplitude from a readout calibration.
    Ramsey {
        #[serde(rename = "S_mhz")]
        s_mhz: f64,
        #[serde(rename = "K_mhz")]
        k_mhz: f64,
        #[serde(rename = "R_mhz")]
        r_mhz: f64,
        epsilons: Vec<f64>,
        offset_mhz: f64,
        t_us: f64,
        points: usize,
        #[serde(default)]
        noise: f64,
        seed: Option<u64>,
    },
    /// Echo decays with dephasing `coefficient * flux_amp^2`.
    Echo {
        coefficient_per_us: f64,
        flux_amps: Vec<f64>,
        t_us: f64,
        points: usize,
        randomizations: usize,
        seed: Option<u64>,
    },
    /// Loss spectrum with hot spots, as `freq_mhz,gamma_per_us`.
    Spectrum {
        background_per_us: f64,
        peaks: Vec<PeakConfig>,
        low_mhz: f64,
        high_mhz: f64,
        points: usize,
        #[serde(default)]
        noise: f64,
        seed: Option<u64>,
    },
    /// The same spectrum seen through a fixed-delay scan, as `freq_mhz,p1`.
    T1Scan {
        background_per_us: f64,
        peaks: Vec<PeakConfig>,
        low_mhz: f64,
        high_mhz: f64,
        points: usize,
        t_delay_us: f64,
    },
    /// Resonant swap line cut from the master equation.
    Swap {
        defect: DefectConfig,
        #[serde(default)]
        qubit_decay_per_us: f64,
        #[serde(default)]
        detuning_mhz: f64,
        t_us: f64,
        points: usize,
    },
}
