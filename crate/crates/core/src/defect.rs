//! Closed-form decay rates for a qubit coupled to one lossy defect mode.
//!
//! [`generalized_purcell`] implements
//! `Gamma = gamma_q + 2 g^2 W / (W^2 + (w_q - w_D)^2)` with effective width
//! `W = gamma_phi + gamma_1D/2 - gamma_q/2`. Counter-rotating terms in
//! `w_q + w_D` (including a small heating term) are not part of this
//! expression.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{ParametricSpectrum, TlsPeak};
use crate::units::{AngularFrequency, Rate};

/// A coherent defect modeled as a damped harmonic mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefectParams {
    frequency: AngularFrequency,
    coupling: AngularFrequency,
    decay: Rate,
}

impl DefectParams {
    pub fn new(frequency: AngularFrequency, coupling: AngularFrequency, decay: Rate) -> Result<Self> {
        if !(decay.get() > 0.0) || !decay.get().is_finite() {
            return Err(Error::domain(format!("defect decay rate must be > 0, got {}", decay.get())));
        }
        if !(coupling.get() >= 0.0) || !coupling.get().is_finite() {
            return Err(Error::domain(format!("defect coupling must be >= 0, got {}", coupling.get())));
        }
        if !frequency.get().is_finite() {
            return Err(Error::domain("defect frequency must be finite"));
        }
        Ok(Self {
            frequency,
            coupling,
            decay,
        })
    }

    pub fn frequency(&self) -> AngularFrequency {
        self.frequency
    }

    pub fn coupling(&self) -> AngularFrequency {
        self.coupling
    }

    pub fn decay(&self) -> Rate {
        self.decay
    }

    /// The defect as a loss line in the qubit's bath spectrum, on top of a
    /// flat `background`.
    pub fn as_spectrum(&self, background: Rate) -> Result<ParametricSpectrum> {
        let g = self.coupling.get();
        let peak = TlsPeak::new(self.frequency, self.decay, g * g)?;
        ParametricSpectrum::new(background, vec![peak])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitParams {
    frequency: AngularFrequency,
    decay: Rate,
    dephasing: Rate,
}

impl QubitParams {
    pub fn new(frequency: AngularFrequency, decay: Rate, dephasing: Rate) -> Result<Self> {
        if !frequency.get().is_finite() {
            return Err(Error::domain("qubit frequency must be finite"));
        }
        Rate::nonnegative(decay.get(), "qubit decay rate")?;
        Rate::nonnegative(dephasing.get(), "qubit dephasing rate")?;
        Ok(Self {
            frequency,
            decay,
            dephasing,
        })
    }

    pub fn frequency(&self) -> AngularFrequency {
        self.frequency
    }

    pub fn decay(&self) -> Rate {
        self.decay
    }

    pub fn dephasing(&self) -> Rate {
        self.dephasing
    }
}

/// `W = gamma_phi + gamma_1D/2 - gamma_q/2`.
pub fn effective_width(q: &QubitParams, d: &DefectParams) -> f64 {
    q.dephasing.get() + 0.5 * d.decay.get() - 0.5 * q.decay.get()
}

/// Qubit decay rate through a lossy defect, including dephasing.
///
/// Fails when `W <= 0`: the adiabatic elimination behind the formula no
/// longer holds there.
pub fn generalized_purcell(q: &QubitParams, d: &DefectParams) -> Result<Rate> {
    let w = effective_width(q, d);
    if !(w > 0.0) {
        return Err(Error::domain(format!(
            "effective width gamma_phi + gamma_1D/2 - gamma_q/2 = {w} must be > 0"
        )));
    }
    let g = d.coupling.get();
    let delta = q.frequency.get() - d.frequency.get();
    Ok(Rate::per_us(q.decay.get() + 2.0 * g * g * w / (w * w + delta * delta)))
}

/// Resonant weak-coupling Purcell rate `4 g^2 / kappa`. Valid for `g << kappa`
/// (not checked).
pub fn resonant_purcell(g: AngularFrequency, kappa: Rate) -> Result<Rate> {
    if !(kappa.get() > 0.0) {
        return Err(Error::domain(format!("kappa must be > 0, got {}", kappa.get())));
    }
    let g = g.get();
    Ok(Rate::per_us(4.0 * g * g / kappa.get()))
}

/// Quantum-jump rate `Omega^2 / gamma_M` of a Rabi-driven, strongly measured
/// qubit. Valid for `Omega << gamma_M` (not checked).
pub fn zeno_jump_rate(rabi: AngularFrequency, measurement: Rate) -> Result<Rate> {
    if !(measurement.get() > 0.0) {
        return Err(Error::domain(format!(
            "measurement rate must be > 0, got {}",
            measurement.get()
        )));
    }
    let o = rabi.get();
    Ok(Rate::per_us(o * o / measurement.get()))
}

/// [`generalized_purcell`] over a detuning x dephasing grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZenoMap {
    pub detunings: Vec<AngularFrequency>,
    pub dephasings: Vec<Rate>,
    /// Row-major: `rates[i * dephasings.len() + j]` is detuning `i`, dephasing `j`.
    pub rates: Vec<Rate>,
}

impl ZenoMap {
    pub fn get(&self, detuning: usize, dephasing: usize) -> Rate {
        self.rates[detuning * self.dephasings.len() + dephasing]
    }

    pub fn row(&self, detuning: usize) -> &[Rate] {
        let n = self.dephasings.len();
        &self.rates[detuning * n..(detuning + 1) * n]
    }
}

/// Evaluate the defect-model rate on every (qubit-defect detuning, dephasing)
/// pair. The qubit's intrinsic decay `gamma_q` is shared by all points.
pub fn zeno_map(
    detunings: &[AngularFrequency],
    dephasings: &[Rate],
    defect: &DefectParams,
    gamma_q: Rate,
) -> Result<ZenoMap> {
    if detunings.is_empty() || dephasings.is_empty() {
        return Err(Error::domain("zeno map grid must be nonempty"));
    }
    let n = dephasings.len();
    let rates = (0..detunings.len() * n)
        .into_par_iter()
        .map(|k| {
            let q = QubitParams::new(
                defect.frequency + detunings[k / n],
                gamma_q,
                dephasings[k % n],
            )?;
            generalized_purcell(&q, defect)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ZenoMap {
        detunings: detunings.to_vec(),
        dephasings: dephasings.to_vec(),
        rates,
    })
}
