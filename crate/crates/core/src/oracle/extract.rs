use serde::Serialize;

use super::evolve::Trajectory;
use crate::calibration::{FitReport, FitWarning};
use crate::calibration::lm::uncertainties;
use crate::error::{Error, Result};
use crate::units::Rate;

/// Relative deviation from the fitted exponential above which the decay is
/// reported as oscillating.
pub const OSCILLATION_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractOptions {
    /// Number of logarithmically spaced samples in the window.
    pub samples: usize,
    /// Skip the check that the population falls by 1/e across the window.
    pub allow_short_window: bool,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self {
            samples: 64,
            allow_short_window: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayExtraction {
    pub rate: Rate,
    pub amplitude: f64,
    pub report: FitReport,
}

/// Single-exponential fit `P1 = A exp(-Gamma t)` to the excited population on
/// log-spaced times in `[t0, t1]`, by least squares on `ln P1`.
///
/// If the samples deviate from the fitted curve by more than 10% of it, an
/// oscillation warning is attached to the report.
pub fn extract_decay_rate(
    trajectory: &Trajectory,
    t0: f64,
    t1: f64,
    opts: ExtractOptions,
) -> Result<DecayExtraction> {
    let times = trajectory.times();
    let pops = trajectory.excited_populations();
    let (first, last) = (times[0], times[times.len() - 1]);
    if !(t1 > t0) || t0 < first || t1 > last {
        return Err(Error::domain(format!(
            "fit window [{t0}, {t1}] not inside trajectory [{first}, {last}]"
        )));
    }
    if opts.samples < 3 {
        return Err(Error::domain("need at least 3 fit samples"));
    }
    let start = if t0 > 0.0 { t0 } else { (1e-3 * t1).max(times.get(1).copied().unwrap_or(t1)).min(t1 * 0.5) };
    let (la, lb) = (start.ln(), t1.ln());
    let m = opts.samples;
    let pts: Vec<(f64, f64)> = (0..m)
        .map(|i| {
            let t = if i + 1 == m { t1 } else { (la + (lb - la) * i as f64 / (m - 1) as f64).exp() };
            (t, interpolate(&times, &pops, t))
        })
        .collect();

    let (p_start, p_end) = (pts[0].1, pts[m - 1].1);
    if !opts.allow_short_window && !(p_end <= p_start * (-1.0f64).exp()) {
        return Err(Error::domain(format!(
            "population falls only from {p_start:.4e} to {p_end:.4e} across the window; need a 1/e drop"
        )));
    }

    let logs: Vec<(f64, f64)> = pts
        .iter()
        .filter(|(_, p)| *p > 0.0)
        .map(|&(t, p)| (t, p.ln()))
        .collect();
    if logs.len() < 3 {
        return Err(Error::fit("fewer than 3 positive population samples", 0, f64::NAN));
    }
    let n = logs.len() as f64;
    let mt = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = logs.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sty: f64 = logs.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let slope = sty / stt;
    let intercept = my - slope * mt;
    let rate = -slope;
    let amplitude = intercept.exp();

    let rn = logs
        .iter()
        .map(|&(t, y)| (intercept + slope * t - y).powi(2))
        .sum::<f64>()
        .sqrt();
    let jac = nalgebra::DMatrix::from_fn(logs.len(), 2, |i, j| if j == 0 { 1.0 } else { -logs[i].0 });
    let sig = uncertainties(&jac, rn, logs.len());
    let mut report = FitReport::new(&["log_amplitude", "decay_per_us"], &[intercept, rate], &sig);
    report.residual_norm = rn;
    report.iterations = 1;

    let worst = pts
        .iter()
        .map(|&(t, p)| (p / (amplitude * (-rate * t).exp()) - 1.0).abs())
        .fold(0.0, f64::max);
    if worst > OSCILLATION_THRESHOLD {
        report.warnings.push(FitWarning::Oscillation {
            max_relative_deviation: worst,
        });
    }
    Ok(DecayExtraction {
        rate: Rate::per_us(rate),
        amplitude,
        report,
    })
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let k = xs.partition_point(|&v| v <= x);
    if k == 0 {
        return ys[0];
    }
    if k == xs.len() {
        return ys[xs.len() - 1];
    }
    let (x0, x1) = (xs[k - 1], xs[k]);
    if x == x0 {
        return ys[k - 1];
    }
    ys[k - 1] + (x - x0) / (x1 - x0) * (ys[k] - ys[k - 1])
}
