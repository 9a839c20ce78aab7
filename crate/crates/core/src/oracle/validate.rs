use rayon::prelude::*;
use serde::Serialize;

use super::evolve::{evolve, Integrity};
use super::extract::{extract_decay_rate, ExtractOptions};
use super::model::{LindbladModel, DEFAULT_TRUNCATION};
use crate::defect::{generalized_purcell, DefectParams, QubitParams};
use crate::error::Result;
use crate::kk::{kk_rate_with, KkOptions, MeasurementContext};
use crate::units::{AngularFrequency, Rate};

/// Relative KK-oracle disagreement above which a row is flagged.
pub const FLAG_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSettings {
    pub truncation: usize,
    /// RK4 step; `None` uses the model's default.
    pub dt: Option<f64>,
    /// Longest simulated time per row.
    pub t_max: f64,
    pub extract: ExtractOptions,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            truncation: DEFAULT_TRUNCATION,
            dt: None,
            t_max: 400.0,
            extract: ExtractOptions {
                allow_short_window: true,
                ..ExtractOptions::default()
            },
        }
    }
}

/// One point of the KK / defect-formula / master-equation comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub dephasing: Rate,
    pub detuning: AngularFrequency,
    pub kk: Rate,
    pub closed_form: Rate,
    pub oracle: Rate,
    /// `(kk - oracle) / oracle`
    pub dev_kk: f64,
    /// `(closed_form - oracle) / oracle`
    pub dev_closed_form: f64,
    /// `|dev_kk| > 10%`
    pub flag: bool,
    pub oscillating: bool,
    pub fit_window: (f64, f64),
    pub integrity: Integrity,
}

/// Time window for fitting one comparison point: start once the defect has
/// reached its adiabatic steady state (five inverse widths), end after about
/// 1.5 predicted lifetimes, capped at `t_max`.
pub fn fit_window(dephasing: Rate, defect: &DefectParams, predicted: f64, t_max: f64) -> (f64, f64) {
    let width = dephasing.get() + 0.5 * defect.decay().get();
    let settle = 5.0 / width;
    let end = (1.5 / predicted).max(4.0 * settle).min(t_max);
    let start = if settle < end { settle } else { 0.1 * end };
    (start, end)
}

/// Compare the KK rate, the closed-form defect rate and the master-equation
/// rate for each `(dephasing, detuning)` point. Detuning is qubit minus
/// defect frequency.
pub fn validate_kk(
    defect: &DefectParams,
    qubit_decay: Rate,
    points: &[(Rate, AngularFrequency)],
    settings: &OracleSettings,
) -> Result<Vec<ComparisonRow>> {
    let spectrum = defect.as_spectrum(qubit_decay)?.into();
    points
        .par_iter()
        .map(|&(dephasing, detuning)| {
            let omega_q = defect.frequency() + detuning;
            let ctx = MeasurementContext::new(omega_q, dephasing, 0.0)?;
            let kk = kk_rate_with(&spectrum, &ctx, &KkOptions::default())?.gamma;
            let closed_form = generalized_purcell(&QubitParams::new(omega_q, qubit_decay, dephasing)?, defect)?;

            let model = LindbladModel {
                detuning,
                coupling: defect.coupling(),
                qubit_decay,
                dephasing,
                defect_decay: defect.decay(),
                truncation: Some(settings.truncation),
            };
            let (t0, t1) = fit_window(dephasing, defect, kk.get().min(closed_form.get()), settings.t_max);
            let dt = settings.dt.unwrap_or_else(|| model.default_dt()).min(t1 / 100.0);
            let steps = (t1 / dt).ceil() as usize;
            let stride = (steps / 4000).max(1);
            let traj = evolve(&model, &model.excited_state(), t1, dt, stride)?;
            let fit = extract_decay_rate(&traj, t0, t1, settings.extract)?;
            let oracle = fit.rate;
            let dev_kk = (kk.get() - oracle.get()) / oracle.get();
            let dev_closed_form = (closed_form.get() - oracle.get()) / oracle.get();
            Ok(ComparisonRow {
                dephasing,
                detuning,
                kk,
                closed_form,
                oracle,
                dev_kk,
                dev_closed_form,
                flag: dev_kk.abs() > FLAG_THRESHOLD,
                oscillating: fit.report.has_oscillation_warning(),
                fit_window: (t0, t1),
                integrity: traj.integrity,
            })
        })
        .collect()
}
