//! Damped-oscillation and exponential-decay fits.
//!
//! All fits are seeded deterministically: frequency from the peak of a
//! periodogram, decay from a straight-line fit to the log of the per-period
//! envelope, amplitude and phase from a linear projection with frequency and
//! decay held fixed. Levenberg-Marquardt then polishes all parameters.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::lm::{self, LmConfig, LmOutcome, Model};
use super::{check_trace, FitReport, RamseyTrace};
use crate::error::{Error, Result};
use crate::units::{AngularFrequency, Rate};

const MIN_SAMPLES: usize = 8;

/// `A exp(-gamma t) cos(2 pi f t + phi) + B`, parameters `[A, gamma, f, phi, B]`.
struct DampedSine;

impl Model for DampedSine {
    fn n_params(&self) -> usize {
        5
    }

    fn eval(&self, p: &[f64], t: f64) -> f64 {
        p[0] * (-p[1] * t).exp() * (TAU * p[2] * t + p[3]).cos() + p[4]
    }

    fn grad(&self, p: &[f64], t: f64, g: &mut [f64]) {
        let e = (-p[1] * t).exp();
        let (s, c) = (TAU * p[2] * t + p[3]).sin_cos();
        g[0] = e * c;
        g[1] = -t * p[0] * e * c;
        g[2] = -TAU * t * p[0] * e * s;
        g[3] = -p[0] * e * s;
        g[4] = 1.0;
    }
}

/// `exp(-lambda t) (A cos(2 pi f t + phi) + B) + C`, parameters
/// `[A, lambda, f, phi, B, C]`. The decaying offset is what a damped
/// vacuum-Rabi exchange looks like in the qubit population.
struct DampedExchange;

impl Model for DampedExchange {
    fn n_params(&self) -> usize {
        6
    }

    fn eval(&self, p: &[f64], t: f64) -> f64 {
        (-p[1] * t).exp() * (p[0] * (TAU * p[2] * t + p[3]).cos() + p[4]) + p[5]
    }

    fn grad(&self, p: &[f64], t: f64, g: &mut [f64]) {
        let e = (-p[1] * t).exp();
        let (s, c) = (TAU * p[2] * t + p[3]).sin_cos();
        g[0] = e * c;
        g[1] = -t * e * (p[0] * c + p[4]);
        g[2] = -TAU * t * p[0] * e * s;
        g[3] = -p[0] * e * s;
        g[4] = e;
        g[5] = 1.0;
    }
}

/// `A exp(-gamma t) + B`, parameters `[A, gamma, B]`.
struct ExpDecay;

impl Model for ExpDecay {
    fn n_params(&self) -> usize {
        3
    }

    fn eval(&self, p: &[f64], t: f64) -> f64 {
        p[0] * (-p[1] * t).exp() + p[2]
    }

    fn grad(&self, p: &[f64], t: f64, g: &mut [f64]) {
        let e = (-p[1] * t).exp();
        g[0] = e;
        g[1] = -t * p[0] * e;
        g[2] = 1.0;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RamseyFit {
    /// Fitted fringe frequency minus the deliberate offset.
    pub stark_shift: AngularFrequency,
    /// Envelope decay rate of the fringes.
    pub dephasing: Rate,
    pub fringe_mhz: f64,
    pub report: FitReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwapFit {
    pub coupling: AngularFrequency,
    pub defect_decay: Rate,
    /// Population oscillation frequency (twice the damped exchange frequency).
    pub oscillation_mhz: f64,
    pub report: FitReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub rate: Rate,
    pub report: FitReport,
}

/// Fit Ramsey fringes to a damped cosine and split off the fringe offset.
pub fn fit_damped_sine(trace: &RamseyTrace) -> Result<RamseyFit> {
    let (t, y) = (trace.times(), trace.signal());
    check_samples(t, y)?;
    if trace.offset_mhz() > 0.0 {
        require_periods(t, trace.offset_mhz(), 1.5)?;
    }
    let f0 = dominant_frequency(t, y, None)?;
    require_periods(t, f0, 1.5)?;
    let gamma0 = envelope_decay(t, y, f0);

    let basis = |t: f64| {
        let e = (-gamma0 * t).exp();
        let (s, c) = (TAU * f0 * t).sin_cos();
        vec![e * c, e * s, 1.0]
    };
    let c = linear_lsq(t, y, 3, basis)?;
    let p0 = [c[0].hypot(c[1]), gamma0, f0, (-c[1]).atan2(c[0]), c[2]];

    let out = run_lm(&DampedSine, t, y, &p0)?;
    let mut p = out.params.clone();
    normalize_amplitude_phase(&mut p, 0, 3);
    require_periods(t, p[2].abs(), 1.5)?;
    let report = report_from(&["amplitude", "decay_per_us", "frequency_mhz", "phase", "offset"], &p, &out);
    Ok(RamseyFit {
        stark_shift: AngularFrequency::from_mhz(p[2] - trace.offset_mhz()),
        dephasing: Rate::per_us(p[1]),
        fringe_mhz: p[2],
        report,
    })
}

/// Fit a resonant swap-spectroscopy line cut (`p1` versus interaction time).
///
/// The population of a qubit exchanging an excitation with a damped mode
/// oscillates at `2 Omega` with envelope `exp(-gamma_1D t / 2)`, where
/// `Omega^2 = g^2 - gamma_1D^2 / 16`. The fitted decay `lambda` and frequency
/// `f` therefore give `gamma_1D = 2 lambda` and
/// `g = sqrt((pi f)^2 + lambda^2 / 4)`.
pub fn fit_swap_chevron(times: &[f64], p1: &[f64], f_guess_mhz: Option<f64>) -> Result<SwapFit> {
    check_trace(times, p1)?;
    check_samples(times, p1)?;
    if let Some(f) = f_guess_mhz {
        if !(f > 0.0) || !f.is_finite() {
            return Err(Error::domain(format!("frequency guess must be > 0, got {f}")));
        }
    }
    let f0 = dominant_frequency(times, p1, f_guess_mhz)?;
    require_periods(times, f0, 2.0)?;
    let lambda0 = envelope_decay(times, p1, f0);
    let basis = |t: f64| {
        let e = (-lambda0 * t).exp();
        let (s, c) = (TAU * f0 * t).sin_cos();
        vec![e * c, e * s, e, 1.0]
    };
    let c = linear_lsq(times, p1, 4, basis)?;
    let p0 = [c[0].hypot(c[1]), lambda0, f0, (-c[1]).atan2(c[0]), c[2], c[3]];

    let out = run_lm(&DampedExchange, times, p1, &p0)?;
    let mut p = out.params.clone();
    normalize_amplitude_phase(&mut p, 0, 3);
    let spread = spread(p1);
    if p[0] < (3.0 * out.sigmas[0]).max(1e-3 * spread) {
        return Err(Error::fit(
            format!("no oscillation detected (amplitude {:.3e})", p[0]),
            out.iterations,
            out.residual_norm,
        ));
    }
    let (lambda, f) = (p[1], p[2]);
    let omega = PI * f;
    let report = report_from(
        &["amplitude", "decay_per_us", "frequency_mhz", "phase", "decaying_offset", "offset"],
        &p,
        &out,
    );
    Ok(SwapFit {
        coupling: AngularFrequency::new((omega * omega + 0.25 * lambda * lambda).sqrt()),
        defect_decay: Rate::per_us(2.0 * lambda),
        oscillation_mhz: f,
        report,
    })
}

/// Fit `A exp(-gamma t) + B` (echo or T1 decays).
pub fn fit_exponential_decay(times: &[f64], signal: &[f64]) -> Result<DecayFit> {
    check_trace(times, signal)?;
    check_samples(times, signal)?;
    // Seed from a log-linear fit of the positive samples with B = 0.
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(signal)
        .filter(|(_, &y)| y > 0.0)
        .map(|(&t, &y)| (t, y.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::fit("decay trace has fewer than two positive samples", 0, f64::NAN));
    }
    let (intercept, slope) = line_fit(&pts);
    let p0 = [intercept.exp(), (-slope).max(0.0), 0.0];
    let out = run_lm(&ExpDecay, times, signal, &p0)?;
    let report = report_from(&["amplitude", "decay_per_us", "offset"], &out.params, &out);
    Ok(DecayFit {
        rate: Rate::per_us(out.params[1]),
        report,
    })
}

fn check_samples(t: &[f64], y: &[f64]) -> Result<()> {
    if t.len() < MIN_SAMPLES {
        return Err(Error::fit(
            format!("need at least {MIN_SAMPLES} samples, got {}", t.len()),
            0,
            f64::NAN,
        ));
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let s = spread(y);
    if s == 0.0 || s <= 1e-12 * mean.abs() {
        return Err(Error::fit("degenerate trace: signal is constant", 0, 0.0));
    }
    Ok(())
}

fn spread(y: &[f64]) -> f64 {
    let (lo, hi) = y
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    hi - lo
}

fn require_periods(t: &[f64], f: f64, periods: f64) -> Result<()> {
    let span = t[t.len() - 1] - t[0];
    if span * f < periods {
        return Err(Error::fit(
            format!(
                "trace spans {:.2} periods of the {f:.4} MHz oscillation, need {periods}",
                span * f
            ),
            0,
            f64::NAN,
        ));
    }
    Ok(())
}

fn run_lm<M: Model>(model: &M, t: &[f64], y: &[f64], p0: &[f64]) -> Result<LmOutcome> {
    let out = lm::fit(model, t, y, p0, LmConfig::default())?;
    if !out.converged || out.params.iter().any(|v| !v.is_finite()) {
        return Err(Error::fit(
            format!(
                "no convergence after {} iterations (scaled gradient {:.3e})",
                out.iterations, out.gradient_norm
            ),
            out.iterations,
            out.residual_norm,
        ));
    }
    Ok(out)
}

fn report_from(names: &[&str], p: &[f64], out: &LmOutcome) -> FitReport {
    let mut r = FitReport::new(names, p, &out.sigmas);
    r.residual_norm = out.residual_norm;
    r.gradient_norm = out.gradient_norm;
    r.converged = out.converged;
    r.iterations = out.iterations;
    r
}

/// Make the amplitude positive and wrap the phase into (-pi, pi].
fn normalize_amplitude_phase(p: &mut [f64], amp: usize, phase: usize) {
    if p[amp] < 0.0 {
        p[amp] = -p[amp];
        p[phase] += PI;
    }
    let mut ph = p[phase].rem_euclid(TAU);
    if ph > PI {
        ph -= TAU;
    }
    p[phase] = ph;
}

/// Least-squares coefficients for `y ~ sum_k c_k basis_k(t)`.
fn linear_lsq(t: &[f64], y: &[f64], k: usize, basis: impl Fn(f64) -> Vec<f64>) -> Result<Vec<f64>> {
    let mut a = DMatrix::zeros(t.len(), k);
    for (i, &ti) in t.iter().enumerate() {
        for (j, v) in basis(ti).into_iter().enumerate() {
            a[(i, j)] = v;
        }
    }
    let b = DVector::from_column_slice(y);
    let svd = a.svd(true, true);
    let sol = svd
        .solve(&b, 1e-12 * svd.singular_values.max())
        .map_err(|e| Error::fit(format!("seed projection failed: {e}"), 0, f64::NAN))?;
    Ok(sol.iter().copied().collect())
}

/// Ordinary least-squares line `y = a + b x`; returns `(a, b)`.
fn line_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - b * mx, b)
}

/// Frequency (MHz) of the strongest periodogram peak after removing a
/// quadratic trend. Searches `[f/2, 2f]` around a guess, otherwise from one
/// cycle per record length up to the Nyquist frequency of the median step.
fn dominant_frequency(t: &[f64], y: &[f64], guess: Option<f64>) -> Result<f64> {
    let span = t[t.len() - 1] - t[0];
    let mut steps: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
    steps.sort_by(f64::total_cmp);
    let nyquist = 0.5 / steps[steps.len() / 2];

    let trend = linear_lsq(t, y, 3, |ti| {
        let x = (ti - t[0]) / span;
        vec![1.0, x, x * x]
    })?;
    let resid: Vec<f64> = t
        .iter()
        .zip(y)
        .map(|(&ti, &yi)| {
            let x = (ti - t[0]) / span;
            yi - (trend[0] + trend[1] * x + trend[2] * x * x)
        })
        .collect();

    let (lo, hi) = match guess {
        Some(g) => (0.5 * g, (2.0 * g).min(nyquist)),
        None => (1.0 / span, nyquist),
    };
    if !(hi > lo) {
        return Err(Error::fit("no frequency range to search below Nyquist", 0, f64::NAN));
    }
    let power = |f: f64| {
        let (mut c, mut s) = (0.0, 0.0);
        for (&ti, &ri) in t.iter().zip(&resid) {
            let (sn, cs) = (TAU * f * (ti - t[0])).sin_cos();
            c += ri * cs;
            s += ri * sn;
        }
        c * c + s * s
    };
    let df = 0.1 / span;
    let n = ((hi - lo) / df).ceil() as usize + 1;
    let (mut best_f, mut best_p) = (lo, f64::NEG_INFINITY);
    for i in 0..n {
        let f = (lo + df * i as f64).min(hi);
        let p = power(f);
        if p > best_p {
            best_p = p;
            best_f = f;
        }
    }
    if !(best_p > 0.0) {
        return Err(Error::fit("no oscillation found in periodogram", 0, f64::NAN));
    }
    // Golden-section refinement within one grid step.
    let (mut a, mut b) = ((best_f - df).max(lo), (best_f + df).min(hi));
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut p1, mut p2) = (power(x1), power(x2));
    for _ in 0..60 {
        if p1 > p2 {
            b = x2;
            x2 = x1;
            p2 = p1;
            x1 = b - r * (b - a);
            p1 = power(x1);
        } else {
            a = x1;
            x1 = x2;
            p1 = p2;
            x2 = a + r * (b - a);
            p2 = power(x2);
        }
    }
    Ok(0.5 * (a + b))
}

/// Decay rate from a line fit to the log of the half peak-to-peak range in
/// consecutive one-period chunks. Returns 0 when it cannot be estimated.
fn envelope_decay(t: &[f64], y: &[f64], f: f64) -> f64 {
    let period = 1.0 / f;
    let mut pts = Vec::new();
    let mut start = 0;
    while start < t.len() {
        let chunk_end_t = t[start] + period;
        let end = start + t[start..].partition_point(|&ti| ti < chunk_end_t);
        if end - start >= 3 && t[end - 1] - t[start] > 0.5 * period {
            let seg = &y[start..end];
            let half = 0.5 * spread(seg);
            if half > 0.0 {
                let mid = 0.5 * (t[start] + t[end - 1]);
                pts.push((mid, half.ln()));
            }
        }
        start = end.max(start + 1);
    }
    if pts.len() < 2 {
        return 0.0;
    }
    (-line_fit(&pts).1).max(0.0)
}
