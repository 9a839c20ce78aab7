//! Brute-force master-equation oracle.
//!
//! Integrates a qubit, optionally exchange-coupled to a damped oscillator
//! standing in for a lossy defect, under dephasing and decay. Used to check
//! the KK convolution and the closed-form defect rate, and to show where they
//! fail (coherent vacuum-Rabi exchange).

mod density;
mod evolve;
mod extract;
mod model;
mod validate;

pub use density::{DensityMatrix, HERMITICITY_TOL, POSITIVITY_TOL, TRACE_TOL};
pub use evolve::{evolve, Integrity, Sample, Trajectory};
pub use extract::{extract_decay_rate, DecayExtraction, ExtractOptions, OSCILLATION_THRESHOLD};
pub use model::{LindbladModel, DEFAULT_STEP_FACTOR, DEFAULT_TRUNCATION, MAX_STEP_FACTOR};
pub use validate::{fit_window, validate_kk, ComparisonRow, OracleSettings, FLAG_THRESHOLD};
