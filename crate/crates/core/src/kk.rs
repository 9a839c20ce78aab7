//! Kofman-Kurizki decay rate under continuous measurement.
//!
//! The rate during readout is the bath spectrum averaged over a Lorentzian of
//! half-width `gamma_phi` centered on the Stark-shifted qubit frequency. The
//! integral runs over a finite window and is divided by the analytic filter
//! mass `N` on that window.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::calibration::ReadoutCalibration;
use crate::error::{Error, Result};
use crate::spectral::{BathSpectrum, LorentzianFilter};
use crate::units::{AngularFrequency, Rate};

/// Grid points used when the caller does not choose a resolution.
pub const DEFAULT_RESOLUTION: usize = 4001;

/// Smallest grid the integrator accepts.
pub const MIN_RESOLUTION: usize = 101;

/// Dephasing rates below this (rad/us) are treated as the delta-function
/// (Fermi golden rule) limit.
pub const DELTA_LIMIT: f64 = 1e-9;

/// Half-width of the default parametric window, in units of
/// `gamma_phi + max peak width`.
pub const PARAMETRIC_WINDOW_WIDTHS: f64 = 50.0;

/// Lower bound on the default parametric half-width, in units of `gamma_phi`.
/// Keeps the filter mass outside the window, `(2/pi) gamma_phi / H`, below
/// 3.2e-4.
pub const PARAMETRIC_WINDOW_DEPHASINGS: f64 = 2000.0;

/// Effective qubit state during readout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasurementContext {
    stark_shifted: AngularFrequency,
    dephasing: Rate,
    nbar: f64,
}

impl MeasurementContext {
    pub fn new(stark_shifted: AngularFrequency, dephasing: Rate, nbar: f64) -> Result<Self> {
        if !stark_shifted.get().is_finite() {
            return Err(Error::domain("qubit frequency must be finite"));
        }
        Rate::nonnegative(dephasing.get(), "dephasing rate")?;
        if !(nbar >= 0.0) || !nbar.is_finite() {
            return Err(Error::domain(format!("photon number must be >= 0, got {nbar}")));
        }
        Ok(Self {
            stark_shifted,
            dephasing,
            nbar,
        })
    }

    /// No readout: the natural frequency, no dephasing, empty resonator.
    pub fn unmeasured(omega_q: AngularFrequency) -> Result<Self> {
        Self::new(omega_q, Rate::ZERO, 0.0)
    }

    /// Context at drive amplitude `epsilon` from a readout calibration.
    pub fn from_calibration(
        cal: &ReadoutCalibration,
        omega_q: AngularFrequency,
        epsilon: f64,
        residual_dephasing: Rate,
    ) -> Result<Self> {
        let shift = cal.stark_shift(epsilon)?;
        let nbar = cal.photons(epsilon)?;
        let dephasing = Rate::per_us(residual_dephasing.get() + cal.dephasing(epsilon)?.get());
        let ctx = Self::new(omega_q + shift, dephasing, nbar)?;
        ctx.verify_stark(omega_q, cal.chi())?;
        Ok(ctx)
    }

    pub fn stark_shifted(&self) -> AngularFrequency {
        self.stark_shifted
    }

    pub fn dephasing(&self) -> Rate {
        self.dephasing
    }

    pub fn nbar(&self) -> f64 {
        self.nbar
    }

    /// Checks `omega_tilde = omega_q + 2 chi nbar`.
    pub fn verify_stark(&self, omega_q: AngularFrequency, chi: AngularFrequency) -> Result<()> {
        let expected = omega_q.get() + 2.0 * chi.get() * self.nbar;
        let got = self.stark_shifted.get();
        let scale = expected.abs().max(got.abs()).max(1.0);
        if (expected - got).abs() > 1e-9 * scale {
            return Err(Error::domain(format!(
                "Stark-shifted frequency {got} inconsistent with omega_q + 2 chi nbar = {expected}"
            )));
        }
        Ok(())
    }

    fn filter(&self) -> Result<LorentzianFilter> {
        LorentzianFilter::new(self.stark_shifted, self.dephasing)
    }
}

/// Integration window `[low, high]` in rad/us.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrequencyWindow {
    low: AngularFrequency,
    high: AngularFrequency,
}

impl FrequencyWindow {
    pub fn new(low: AngularFrequency, high: AngularFrequency) -> Result<Self> {
        if !low.get().is_finite() || !high.get().is_finite() || !(low.get() < high.get()) {
            return Err(Error::domain(format!(
                "invalid window [{}, {}]: need finite low < high",
                low.get(),
                high.get()
            )));
        }
        Ok(Self { low, high })
    }

    pub fn centered(center: AngularFrequency, half_width: f64) -> Result<Self> {
        Self::new(
            AngularFrequency::new(center.get() - half_width),
            AngularFrequency::new(center.get() + half_width),
        )
    }

    pub fn low(&self) -> AngularFrequency {
        self.low
    }

    pub fn high(&self) -> AngularFrequency {
        self.high
    }

    pub fn len(&self) -> f64 {
        self.high.get() - self.low.get()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KkResult {
    pub gamma_raw: Rate,
    pub norm: f64,
    pub gamma: Rate,
    pub context: MeasurementContext,
}

/// Window and grid choices for [`kk_rate`]; `None` picks the defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KkOptions {
    pub window: Option<FrequencyWindow>,
    pub resolution: Option<usize>,
}

/// Tabulated spectra: the sampled range. Parametric spectra: the
/// Stark-shifted frequency plus or minus
/// `max(50 (gamma_phi + max width), 2000 gamma_phi)`.
pub fn default_window(spectrum: &BathSpectrum, ctx: &MeasurementContext) -> Result<FrequencyWindow> {
    match spectrum {
        BathSpectrum::Tabulated(t) => {
            let (lo, hi) = t.range();
            FrequencyWindow::new(lo, hi)
        }
        BathSpectrum::Parametric(p) => {
            let gphi = ctx.dephasing.get();
            let mut half = PARAMETRIC_WINDOW_WIDTHS * (gphi + p.max_width().get());
            half = half.max(PARAMETRIC_WINDOW_DEPHASINGS * gphi);
            if half == 0.0 {
                // Flat spectrum in the delta limit; any window will do.
                half = 1.0;
            }
            FrequencyWindow::centered(ctx.stark_shifted, half)
        }
    }
}

/// Tabulated spectra use [`DEFAULT_RESOLUTION`]. Parametric spectra raise it
/// until the grid step is at most 1/20 of the narrowest peak's half-width,
/// which keeps the piecewise-linear error on a Lorentzian peak near 2e-4.
pub fn default_resolution(spectrum: &BathSpectrum, window: &FrequencyWindow) -> usize {
    match spectrum {
        BathSpectrum::Tabulated(_) => DEFAULT_RESOLUTION,
        BathSpectrum::Parametric(p) => {
            let narrowest = p
                .peaks()
                .iter()
                .map(|pk| 0.5 * pk.width().get())
                .fold(f64::INFINITY, f64::min);
            if !narrowest.is_finite() {
                return DEFAULT_RESOLUTION;
            }
            let needed = (window.len() / (0.05 * narrowest)).ceil() as usize + 1;
            needed.max(DEFAULT_RESOLUTION)
        }
    }
}

/// Analytic filter mass on the window:
/// `(1/pi) [atan((high - w)/gamma_phi) + atan((w - low)/gamma_phi)]`.
pub fn normalization(ctx: &MeasurementContext, window: &FrequencyWindow) -> Result<f64> {
    if !(ctx.dephasing.get() > 0.0) {
        return Err(Error::domain("normalization needs gamma_phi > 0"));
    }
    let filter = ctx.filter()?;
    Ok(filter.mass_between(window.low.get(), window.high.get()))
}

/// Decay rate during readout on a uniform grid of `resolution` points
/// spanning `window`.
///
/// Like the trapezoid rule, the spectrum is taken as linear between grid
/// nodes; the Lorentzian weight is then integrated exactly on each cell
/// instead of being sampled. This stays accurate when the filter is narrower
/// than the grid step and reduces to the interpolated spectrum at the
/// Stark-shifted frequency as `gamma_phi -> 0`.
pub fn kk_rate(
    spectrum: &BathSpectrum,
    ctx: &MeasurementContext,
    window: FrequencyWindow,
    resolution: usize,
) -> Result<KkResult> {
    if resolution < MIN_RESOLUTION {
        return Err(Error::domain(format!(
            "resolution {resolution} below minimum {MIN_RESOLUTION}"
        )));
    }
    let center = ctx.stark_shifted.get();
    if ctx.dephasing.get() < DELTA_LIMIT {
        let g = spectrum.eval_raw(center)?;
        return Ok(KkResult {
            gamma_raw: Rate::per_us(g),
            norm: 1.0,
            gamma: Rate::per_us(g),
            context: *ctx,
        });
    }

    let filter = ctx.filter()?;
    let (lo, hi) = (window.low.get(), window.high.get());
    let norm = filter.mass_between(lo, hi);
    if !(norm > 0.0) {
        return Err(Error::domain("filter has no mass inside the window"));
    }

    let steps = resolution - 1;
    let h = (hi - lo) / steps as f64;
    let node = |i: usize| if i == steps { hi } else { lo + h * i as f64 };
    let s = ctx.dephasing.get();
    let mut gamma_raw = 0.0;
    let (mut a, mut ga) = (lo, spectrum.eval_raw(lo)?);
    for i in 1..=steps {
        let b = node(i);
        let gb = spectrum.eval_raw(b)?;
        let (m0, m1) = cell_moments(a - center, b - center, s);
        gamma_raw += ga * m0 + (gb - ga) / (b - a) * (m1 - (a - center) * m0);
        (a, ga) = (b, gb);
    }
    Ok(KkResult {
        gamma_raw: Rate::per_us(gamma_raw),
        norm,
        gamma: Rate::per_us(gamma_raw / norm),
        context: *ctx,
    })
}

/// Zeroth and first moments of the unit Lorentzian of half-width `s` over
/// `[u, v]` (offsets from its center): `int L` and `int x L`.
fn cell_moments(u: f64, v: f64, s: f64) -> (f64, f64) {
    let (x, y) = (u / s, v / s);
    let dtheta = if x * y > -1.0 {
        ((y - x) / (1.0 + x * y)).atan()
    } else {
        y.atan() - x.atan()
    };
    let m0 = dtheta / PI;
    let m1 = s / (2.0 * PI) * ((y - x) * (y + x) / (1.0 + x * x)).ln_1p();
    (m0, m1)
}

/// [`kk_rate`] with the window and resolution filled in from `opts`, falling
/// back to [`default_window`] and [`default_resolution`].
pub fn kk_rate_with(
    spectrum: &BathSpectrum,
    ctx: &MeasurementContext,
    opts: &KkOptions,
) -> Result<KkResult> {
    let window = match opts.window {
        Some(w) => w,
        None => default_window(spectrum, ctx)?,
    };
    let resolution = opts
        .resolution
        .unwrap_or_else(|| default_resolution(spectrum, &window));
    kk_rate(spectrum, ctx, window, resolution)
}

/// One point of a readout-strength sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub epsilon: f64,
    pub stark_shift: AngularFrequency,
    pub result: KkResult,
}

/// Evaluate the decay rate at each drive amplitude. Output order matches
/// `amplitudes`.
pub fn kk_sweep(
    spectrum: &BathSpectrum,
    cal: &ReadoutCalibration,
    omega_q: AngularFrequency,
    amplitudes: &[f64],
    residual_dephasing: Rate,
    opts: &KkOptions,
) -> Result<Vec<SweepPoint>> {
    for (i, &eps) in amplitudes.iter().enumerate() {
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(Error::domain(format!("amplitude {eps} at index {i} must be >= 0")));
        }
        if i > 0 && eps < amplitudes[i - 1] {
            return Err(Error::domain("amplitudes must be sorted ascending"));
        }
    }
    Rate::nonnegative(residual_dephasing.get(), "residual dephasing")?;
    amplitudes
        .par_iter()
        .map(|&epsilon| {
            let ctx = MeasurementContext::from_calibration(cal, omega_q, epsilon, residual_dephasing)?;
            let result = kk_rate_with(spectrum, &ctx, opts)?;
            Ok(SweepPoint {
                epsilon,
                stark_shift: ctx.stark_shifted - omega_q,
                result,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::spectral::{Extrapolation, ParametricSpectrum, TabulatedSpectrum, TlsPeak};

    fn ctx(center: f64, gphi: f64) -> MeasurementContext {
        MeasurementContext::new(AngularFrequency::new(center), Rate::per_us(gphi), 0.0).unwrap()
    }

    #[test]
    fn normalization_closed_forms() {
        let c = ctx(3.0, 0.7);
        let w10 = FrequencyWindow::centered(AngularFrequency::new(3.0), 7.0).unwrap();
        let n10 = normalization(&c, &w10).unwrap();
        assert!((n10 - 2.0 / PI * 10f64.atan()).abs() < 1e-15);
        assert!((n10 - 0.93655).abs() < 1e-5);

        let w1 = FrequencyWindow::centered(AngularFrequency::new(3.0), 0.7).unwrap();
        assert!((normalization(&c, &w1).unwrap() - 0.5).abs() < 1e-15);

        let half = FrequencyWindow::new(AngularFrequency::new(3.0), AngularFrequency::new(1e300)).unwrap();
        assert!((normalization(&c, &half).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn normalization_rejects_zero_width() {
        let w = FrequencyWindow::centered(AngularFrequency::ZERO, 1.0).unwrap();
        assert!(matches!(normalization(&ctx(0.0, 0.0), &w), Err(Error::Domain(_))));
    }

    #[test]
    fn window_and_resolution_validation() {
        assert!(FrequencyWindow::new(AngularFrequency::new(1.0), AngularFrequency::new(1.0)).is_err());
        let s: BathSpectrum = ParametricSpectrum::flat(Rate::per_us(0.01)).unwrap().into();
        let w = FrequencyWindow::centered(AngularFrequency::ZERO, 1.0).unwrap();
        assert!(kk_rate(&s, &ctx(0.0, 0.1), w, 100).is_err());
        assert!(kk_rate(&s, &ctx(0.0, 0.1), w, 101).is_ok());
    }

    #[test]
    fn flat_spectrum_gives_constant() {
        let s: BathSpectrum = ParametricSpectrum::flat(Rate::per_us(0.037)).unwrap().into();
        for gphi in [0.0, 0.01, 1.0, 30.0] {
            let c = ctx(12.0, gphi);
            let w = FrequencyWindow::new(AngularFrequency::new(-40.0), AngularFrequency::new(60.0)).unwrap();
            let r = kk_rate(&s, &c, w, DEFAULT_RESOLUTION).unwrap();
            assert!((r.gamma.get() - 0.037).abs() < 1e-14, "gphi={gphi}: {}", r.gamma.get());
        }
    }

    #[test]
    fn delta_limit_strict_out_of_range() {
        let t = TabulatedSpectrum::new([
            (AngularFrequency::new(0.0), Rate::per_us(0.01)),
            (AngularFrequency::new(1.0), Rate::per_us(0.02)),
        ])
        .unwrap()
        .with_extrapolation(Extrapolation::Strict);
        let s: BathSpectrum = t.into();
        let w = FrequencyWindow::new(AngularFrequency::new(0.0), AngularFrequency::new(1.0)).unwrap();
        let r = kk_rate(&s, &ctx(2.0, 0.0), w, 101);
        assert!(matches!(r, Err(Error::Range { .. })));
    }

    #[test]
    fn single_peak_default_window() {
        let peak = TlsPeak::new(AngularFrequency::ZERO, Rate::per_us(2.0), 1.5).unwrap();
        let s: BathSpectrum = ParametricSpectrum::new(Rate::ZERO, vec![peak]).unwrap().into();
        let c = ctx(3.0, 0.5);
        let r = kk_rate_with(&s, &c, &KkOptions::default()).unwrap();
        let w = 0.5 + 1.0;
        let expected = 2.0 * 1.5 * w / (w * w + 9.0);
        assert!((r.gamma.get() / expected - 1.0).abs() < 1e-3);
    }
}
