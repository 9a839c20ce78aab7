//! Decay-rate prediction for dispersively read-out qubits.
//!
//! During readout a qubit is Stark shifted and dephased. Its decay rate is
//! then the frequency-dependent loss spectrum averaged over a Lorentzian of
//! width equal to the dephasing rate ([`kk`]). For a single lossy defect the
//! same physics has a closed form ([`defect`]). [`calibration`] turns raw
//! experiment traces into the inputs these need, and [`oracle`] integrates
//! the full master equation to check both.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod defect;
pub mod error;
pub mod formats;
pub mod kk;
pub mod oracle;
pub mod spectral;
pub mod synthetic;
pub mod units;

pub use calibration::{FitReport, FitWarning, RamseyTrace, ReadoutCalibration};
pub use defect::{DefectParams, QubitParams};
pub use error::{Error, Result};
pub use kk::{FrequencyWindow, KkOptions, KkResult, MeasurementContext};
pub use spectral::{BathSpectrum, Extrapolation, LorentzianFilter, ParametricSpectrum, TabulatedSpectrum, TlsPeak};
pub use units::{AngularFrequency, Rate};

/// Format tag written into every output.
pub const FORMAT_VERSION: &str = "zenokit-v1";
