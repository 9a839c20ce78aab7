//! Calibration fits: raw traces to the constants the predictor needs.
//!
//! - Ramsey fringes under readout drive give the Stark shift and dephasing
//!   at one amplitude ([`fit_damped_sine`]).
//! - Across amplitudes those become `nu_S(eps) = S eps^2 + K eps^4` and
//!   `gamma_phi(eps) = R eps^2` ([`fit_stark_poly`], [`fit_dephasing_quadratic`]).
//! - Swap spectroscopy gives the defect coupling and decay ([`fit_swap_chevron`]).
//! - Flux-noise echo decays give the noise-to-dephasing coefficient
//!   ([`fit_exponential_decay`], [`fit_flux_noise_quadratic`]).

mod damped;
pub(crate) mod lm;
mod poly;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{AngularFrequency, Rate};

pub use damped::{
    fit_damped_sine, fit_exponential_decay, fit_swap_chevron, DecayFit, RamseyFit, SwapFit,
};
pub use poly::{fit_dephasing_quadratic, fit_flux_noise_quadratic, fit_stark_poly, QuadraticFit, StarkFit};

/// Maps readout drive amplitude to Stark shift, dephasing and photon number.
///
/// `S`, `K` and `chi` are angular frequencies (rad/us per eps^2, per eps^4,
/// and absolute); `R` is a rate per eps^2. `chi` is signed and the Stark
/// shift follows its sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutCalibration {
    stark_quadratic: f64,
    stark_quartic: f64,
    dephasing_quadratic: f64,
    chi: f64,
}

impl ReadoutCalibration {
    pub fn new(
        stark_quadratic: AngularFrequency,
        stark_quartic: AngularFrequency,
        dephasing_quadratic: Rate,
        chi: AngularFrequency,
    ) -> Result<Self> {
        let (s, k, r, chi) = (
            stark_quadratic.get(),
            stark_quartic.get(),
            dephasing_quadratic.get(),
            chi.get(),
        );
        if ![s, k, r, chi].iter().all(|v| v.is_finite()) {
            return Err(Error::domain("calibration coefficients must be finite"));
        }
        if r < 0.0 {
            return Err(Error::domain(format!("dephasing coefficient R must be >= 0, got {r}")));
        }
        if chi == 0.0 {
            return Err(Error::domain("dispersive shift chi must be nonzero"));
        }
        if s != 0.0 && s.signum() != chi.signum() {
            return Err(Error::Sign(format!(
                "Stark coefficient S ({s}) and chi ({chi}) have opposite signs"
            )));
        }
        Ok(Self {
            stark_quadratic: s,
            stark_quartic: k,
            dephasing_quadratic: r,
            chi,
        })
    }

    /// From the usual `x/2pi` values in MHz.
    pub fn from_mhz(s_mhz: f64, k_mhz: f64, r_mhz: f64, chi_mhz: f64) -> Result<Self> {
        Self::new(
            AngularFrequency::from_mhz(s_mhz),
            AngularFrequency::from_mhz(k_mhz),
            Rate::from_mhz(r_mhz),
            AngularFrequency::from_mhz(chi_mhz),
        )
    }

    pub fn stark_quadratic(&self) -> AngularFrequency {
        AngularFrequency::new(self.stark_quadratic)
    }

    pub fn stark_quartic(&self) -> AngularFrequency {
        AngularFrequency::new(self.stark_quartic)
    }

    pub fn dephasing_quadratic(&self) -> Rate {
        Rate::per_us(self.dephasing_quadratic)
    }

    pub fn chi(&self) -> AngularFrequency {
        AngularFrequency::new(self.chi)
    }

    fn check_amplitude(&self, eps: f64) -> Result<()> {
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(Error::domain(format!("drive amplitude must be >= 0, got {eps}")));
        }
        let e2 = eps * eps;
        let (quad, quart) = ((self.stark_quadratic * e2).abs(), (self.stark_quartic * e2 * e2).abs());
        if eps > 0.0 && quart >= quad {
            return Err(Error::domain(format!(
                "amplitude {eps} outside calibrated range: Kerr term {quart} >= quadratic term {quad}"
            )));
        }
        Ok(())
    }

    /// `nu_S(eps) = S eps^2 + K eps^4`.
    pub fn stark_shift(&self, eps: f64) -> Result<AngularFrequency> {
        self.check_amplitude(eps)?;
        let e2 = eps * eps;
        Ok(AngularFrequency::new(self.stark_quadratic * e2 + self.stark_quartic * e2 * e2))
    }

    /// `gamma_phi(eps) = R eps^2` (without any residual dephasing).
    pub fn dephasing(&self, eps: f64) -> Result<Rate> {
        self.check_amplitude(eps)?;
        Ok(Rate::per_us(self.dephasing_quadratic * eps * eps))
    }

    /// Mean resonator photon number at `eps`.
    pub fn photons(&self, eps: f64) -> Result<f64> {
        photons_from_stark(self.stark_shift(eps)?, self.chi())
    }
}

/// `nbar = nu_S / (2 chi)`.
pub fn photons_from_stark(stark_shift: AngularFrequency, chi: AngularFrequency) -> Result<f64> {
    let (nu, chi) = (stark_shift.get(), chi.get());
    if chi == 0.0 || !chi.is_finite() {
        return Err(Error::domain("dispersive shift chi must be finite and nonzero"));
    }
    let n = nu / (2.0 * chi);
    if n < 0.0 {
        return Err(Error::Sign(format!(
            "Stark shift {nu} and chi {chi} give negative photon number {n}"
        )));
    }
    // -0.0 from a zero shift over negative chi
    Ok(n.abs())
}

/// `gamma_q = -ln(p1) / t_delay` from a fixed-delay T1 measurement.
pub fn rate_from_fixed_delay(p1: f64, t_delay_us: f64) -> Result<Rate> {
    if !(p1 > 0.0 && p1 <= 1.0) {
        return Err(Error::domain(format!("excited population {p1} outside (0, 1]")));
    }
    if !(t_delay_us > 0.0) || !t_delay_us.is_finite() {
        return Err(Error::domain(format!("delay {t_delay_us} us must be > 0")));
    }
    // -ln(1) is -0.0
    Ok(Rate::per_us((-p1.ln() / t_delay_us).abs()))
}

/// A Ramsey fringe record taken with the readout resonator driven at
/// amplitude `epsilon`. `offset_mhz` is the deliberate fringe detuning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RamseyTrace {
    times: Vec<f64>,
    signal: Vec<f64>,
    offset_mhz: f64,
    epsilon: f64,
}

impl RamseyTrace {
    pub fn new(times: Vec<f64>, signal: Vec<f64>, offset_mhz: f64, epsilon: f64) -> Result<Self> {
        check_trace(&times, &signal)?;
        if !offset_mhz.is_finite() || !epsilon.is_finite() {
            return Err(Error::domain("offset and amplitude must be finite"));
        }
        Ok(Self {
            times,
            signal,
            offset_mhz,
            epsilon,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn signal(&self) -> &[f64] {
        &self.signal
    }

    pub fn offset_mhz(&self) -> f64 {
        self.offset_mhz
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

pub(crate) fn check_trace(times: &[f64], signal: &[f64]) -> Result<()> {
    if times.len() != signal.len() {
        return Err(Error::domain(format!(
            "trace length mismatch: {} times, {} samples",
            times.len(),
            signal.len()
        )));
    }
    if times.iter().chain(signal).any(|v| !v.is_finite()) {
        return Err(Error::domain("trace contains non-finite values"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("trace times must be strictly increasing"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitParameter {
    pub name: String,
    pub value: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitWarning {
    /// The data oscillate about the fitted exponential by more than 10% of
    /// the envelope: a single-exponential rate is not meaningful.
    Oscillation { max_relative_deviation: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub parameters: Vec<FitParameter>,
    pub residual_norm: f64,
    /// Scaled gradient at the returned point.
    pub gradient_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    pub warnings: Vec<FitWarning>,
}

impl FitReport {
    pub(crate) fn new(names: &[&str], values: &[f64], sigmas: &[f64]) -> Self {
        Self {
            parameters: names
                .iter()
                .zip(values.iter().zip(sigmas))
                .map(|(n, (&value, &sigma))| FitParameter {
                    name: (*n).to_string(),
                    value,
                    sigma,
                })
                .collect(),
            residual_norm: 0.0,
            gradient_norm: 0.0,
            converged: true,
            iterations: 0,
            warnings: Vec::new(),
        }
    }

    pub fn parameter(&self, name: &str) -> Option<&FitParameter> {
        self.parameters.iter().find(|p| p.name == name)
    }

    pub fn has_oscillation_warning(&self) -> bool {
        self.warnings
            .iter()
            .any(|w| matches!(w, FitWarning::Oscillation { .. }))
    }
}
