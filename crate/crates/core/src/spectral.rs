//! Bath spectra `gamma_q(omega)` and the Lorentzian measurement filter.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{AngularFrequency, Rate};

/// What a tabulated spectrum returns outside its sampled range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extrapolation {
    /// Hold the nearest boundary value.
    #[default]
    Hold,
    /// Reject with [`Error::Range`].
    Strict,
}

/// One Lorentzian loss line: a lossy two-level defect seen through its
/// spectral density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TlsPeak {
    center: AngularFrequency,
    width: Rate,
    weight: f64,
}

impl TlsPeak {
    /// `width` is the defect's full decay rate `gamma_1D`; `weight` is the
    /// squared coupling `g_D^2` in (rad/us)^2.
    pub fn new(center: AngularFrequency, width: Rate, weight: f64) -> Result<Self> {
        if !(width.get() > 0.0) || !width.get().is_finite() {
            return Err(Error::domain(format!("peak width must be > 0, got {}", width.get())));
        }
        if !(weight >= 0.0) || !weight.is_finite() {
            return Err(Error::domain(format!("peak weight must be >= 0, got {weight}")));
        }
        if !center.get().is_finite() {
            return Err(Error::domain("peak center must be finite"));
        }
        Ok(Self { center, width, weight })
    }

    pub fn center(&self) -> AngularFrequency {
        self.center
    }

    pub fn width(&self) -> Rate {
        self.width
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// `2 g^2 (gamma/2) / ((gamma/2)^2 + (omega - omega_D)^2)`.
    #[inline]
    pub fn rate_at(&self, omega: f64) -> f64 {
        let half = 0.5 * self.width.get();
        let d = omega - self.center.get();
        2.0 * self.weight * half / (half * half + d * d)
    }
}

/// Linear-interpolated samples of `gamma_q(omega)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedSpectrum {
    omega: Vec<f64>,
    gamma: Vec<f64>,
    extrapolation: Extrapolation,
}

impl TabulatedSpectrum {
    /// Grid must be strictly increasing, at least two points, all rates >= 0.
    pub fn new(points: impl IntoIterator<Item = (AngularFrequency, Rate)>) -> Result<Self> {
        let (omega, gamma): (Vec<f64>, Vec<f64>) =
            points.into_iter().map(|(w, g)| (w.get(), g.get())).unzip();
        if omega.len() < 2 {
            return Err(Error::domain("tabulated spectrum needs at least two points"));
        }
        for (i, (&w, &g)) in omega.iter().zip(&gamma).enumerate() {
            if !w.is_finite() || !g.is_finite() {
                return Err(Error::domain(format!("non-finite value at grid index {i}")));
            }
            if g < 0.0 {
                return Err(Error::domain(format!("negative rate {g} at grid index {i}")));
            }
            if i > 0 && w <= omega[i - 1] {
                return Err(Error::domain(format!(
                    "grid not strictly increasing at index {i} ({} after {})",
                    w,
                    omega[i - 1]
                )));
            }
        }
        Ok(Self {
            omega,
            gamma,
            extrapolation: Extrapolation::default(),
        })
    }

    pub fn with_extrapolation(mut self, policy: Extrapolation) -> Self {
        self.extrapolation = policy;
        self
    }

    pub fn extrapolation(&self) -> Extrapolation {
        self.extrapolation
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn range(&self) -> (AngularFrequency, AngularFrequency) {
        (
            AngularFrequency::new(self.omega[0]),
            AngularFrequency::new(self.omega[self.omega.len() - 1]),
        )
    }

    pub fn points(&self) -> impl Iterator<Item = (AngularFrequency, Rate)> + '_ {
        self.omega
            .iter()
            .zip(&self.gamma)
            .map(|(&w, &g)| (AngularFrequency::new(w), Rate::per_us(g)))
    }

    pub fn eval(&self, omega: f64) -> Result<f64> {
        let n = self.omega.len();
        let (lo, hi) = (self.omega[0], self.omega[n - 1]);
        if omega < lo || omega > hi || omega.is_nan() {
            return match self.extrapolation {
                Extrapolation::Strict => Err(Error::Range { omega, low: lo, high: hi }),
                Extrapolation::Hold if omega < lo => Ok(self.gamma[0]),
                Extrapolation::Hold if omega > hi => Ok(self.gamma[n - 1]),
                Extrapolation::Hold => Err(Error::domain("frequency is NaN")),
            };
        }
        // First index with grid > omega; omega sits in [k-1, k].
        let k = self.omega.partition_point(|&w| w <= omega);
        if k == 0 {
            return Ok(self.gamma[0]);
        }
        if k == n {
            return Ok(self.gamma[n - 1]);
        }
        let (w0, w1) = (self.omega[k - 1], self.omega[k]);
        let (g0, g1) = (self.gamma[k - 1], self.gamma[k]);
        if omega == w0 {
            return Ok(g0);
        }
        let t = (omega - w0) / (w1 - w0);
        Ok(g0 + t * (g1 - g0))
    }
}

/// Flat background plus a sum of Lorentzian defect lines.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ParametricSpectrum {
    background: Rate,
    peaks: Vec<TlsPeak>,
}

impl ParametricSpectrum {
    pub fn new(background: Rate, peaks: Vec<TlsPeak>) -> Result<Self> {
        Rate::nonnegative(background.get(), "background rate")?;
        Ok(Self { background, peaks })
    }

    pub fn flat(background: Rate) -> Result<Self> {
        Self::new(background, Vec::new())
    }

    pub fn background(&self) -> Rate {
        self.background
    }

    pub fn peaks(&self) -> &[TlsPeak] {
        &self.peaks
    }

    #[inline]
    pub fn eval(&self, omega: f64) -> f64 {
        self.background.get() + self.peaks.iter().map(|p| p.rate_at(omega)).sum::<f64>()
    }

    /// Largest peak width, or zero when there are no peaks.
    pub fn max_width(&self) -> Rate {
        Rate::per_us(self.peaks.iter().map(|p| p.width.get()).fold(0.0, f64::max))
    }

    /// Sample onto a uniform grid of `points` nodes spanning `[low, high]`.
    pub fn sample(
        &self,
        low: AngularFrequency,
        high: AngularFrequency,
        points: usize,
    ) -> Result<TabulatedSpectrum> {
        if points < 2 || !(high.get() > low.get()) {
            return Err(Error::domain("sampling grid needs >= 2 points and low < high"));
        }
        let step = (high.get() - low.get()) / (points - 1) as f64;
        TabulatedSpectrum::new((0..points).map(|i| {
            let w = if i + 1 == points { high.get() } else { low.get() + step * i as f64 };
            (AngularFrequency::new(w), Rate::per_us(self.eval(w)))
        }))
    }
}

/// The qubit's intrinsic decay rate as a function of its frequency.
#[derive(Debug, Clone, PartialEq)]
pub enum BathSpectrum {
    Tabulated(TabulatedSpectrum),
    Parametric(ParametricSpectrum),
}

impl BathSpectrum {
    pub fn eval(&self, omega: AngularFrequency) -> Result<Rate> {
        self.eval_raw(omega.get()).map(Rate::per_us)
    }

    #[inline]
    pub(crate) fn eval_raw(&self, omega: f64) -> Result<f64> {
        match self {
            BathSpectrum::Tabulated(t) => t.eval(omega),
            BathSpectrum::Parametric(p) => Ok(p.eval(omega)),
        }
    }

    /// Sampled range of a tabulated spectrum; `None` for parametric ones.
    pub fn range(&self) -> Option<(AngularFrequency, AngularFrequency)> {
        match self {
            BathSpectrum::Tabulated(t) => Some(t.range()),
            BathSpectrum::Parametric(_) => None,
        }
    }
}

impl From<TabulatedSpectrum> for BathSpectrum {
    fn from(t: TabulatedSpectrum) -> Self {
        BathSpectrum::Tabulated(t)
    }
}

impl From<ParametricSpectrum> for BathSpectrum {
    fn from(p: ParametricSpectrum) -> Self {
        BathSpectrum::Parametric(p)
    }
}

/// Evaluate `gamma_q(omega)`.
pub fn eval_spectrum(spectrum: &BathSpectrum, omega: AngularFrequency) -> Result<Rate> {
    spectrum.eval(omega)
}

/// Normalized Lorentzian line shape centered on the Stark-shifted qubit
/// frequency, with half-width equal to the dephasing rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianFilter {
    center: AngularFrequency,
    half_width: Rate,
}

impl LorentzianFilter {
    /// A zero half-width is accepted and represents the delta-function limit;
    /// [`LorentzianFilter::eval`] refuses it.
    pub fn new(center: AngularFrequency, half_width: Rate) -> Result<Self> {
        Rate::nonnegative(half_width.get(), "filter half-width")?;
        Ok(Self { center, half_width })
    }

    pub fn center(&self) -> AngularFrequency {
        self.center
    }

    pub fn half_width(&self) -> Rate {
        self.half_width
    }

    pub fn is_delta(&self) -> bool {
        self.half_width.get() == 0.0
    }

    pub fn eval(&self, omega: AngularFrequency) -> Result<f64> {
        if !(self.half_width.get() > 0.0) {
            return Err(Error::domain("filter half-width must be > 0 (delta limit handled by caller)"));
        }
        Ok(self.density(omega.get()))
    }

    #[inline]
    pub(crate) fn density(&self, omega: f64) -> f64 {
        let hw = self.half_width.get();
        let d = omega - self.center.get();
        hw / (PI * (hw * hw + d * d))
    }

    /// Exact filter mass on `[low, high]`.
    pub fn mass_between(&self, low: f64, high: f64) -> f64 {
        let hw = self.half_width.get();
        let c = self.center.get();
        (((high - c) / hw).atan() + ((c - low) / hw).atan()) / PI
    }
}

/// Evaluate the filter density (1/(rad/us)).
pub fn eval_filter(filter: &LorentzianFilter, omega: AngularFrequency) -> Result<f64> {
    filter.eval(omega)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mhz(f: f64) -> AngularFrequency {
        AngularFrequency::from_mhz(f)
    }

    #[test]
    fn flat_background() {
        let s: BathSpectrum = ParametricSpectrum::flat(Rate::per_us(0.01)).unwrap().into();
        for f in [-100.0, 0.0, 4884.0] {
            assert_eq!(s.eval(mhz(f)).unwrap().get(), 0.01);
        }
    }

    #[test]
    fn peak_value_at_center() {
        let peak = TlsPeak::new(mhz(4300.0), Rate::per_us(9.7), 3.5).unwrap();
        let s: BathSpectrum = ParametricSpectrum::new(Rate::ZERO, vec![peak]).unwrap().into();
        let v = s.eval(mhz(4300.0)).unwrap().get();
        assert!((v - 4.0 * 3.5 / 9.7).abs() < 1e-12 * v);
    }

    #[test]
    fn midpoint_interpolation() {
        let t = TabulatedSpectrum::new([
            (AngularFrequency::ZERO, Rate::per_us(0.01)),
            (mhz(1.0), Rate::per_us(0.03)),
        ])
        .unwrap();
        let v = t.eval(mhz(0.5).get()).unwrap();
        assert!((v - 0.02).abs() < 1e-15);
    }

    #[test]
    fn extrapolation_policies() {
        let t = TabulatedSpectrum::new([
            (mhz(1.0), Rate::per_us(0.01)),
            (mhz(2.0), Rate::per_us(0.03)),
        ])
        .unwrap();
        assert_eq!(t.eval(mhz(0.0).get()).unwrap(), 0.01);
        assert_eq!(t.eval(mhz(5.0).get()).unwrap(), 0.03);
        let strict = t.with_extrapolation(Extrapolation::Strict);
        assert!(matches!(strict.eval(mhz(5.0).get()), Err(Error::Range { .. })));
        assert_eq!(strict.eval(mhz(2.0).get()).unwrap(), 0.03);
    }

    #[test]
    fn tabulated_rejects_bad_grids() {
        let one = [(mhz(1.0), Rate::per_us(0.01))];
        assert!(TabulatedSpectrum::new(one).is_err());
        let dup = [(mhz(1.0), Rate::per_us(0.01)), (mhz(1.0), Rate::per_us(0.02))];
        assert!(TabulatedSpectrum::new(dup).is_err());
        let neg = [(mhz(1.0), Rate::per_us(0.01)), (mhz(2.0), Rate::per_us(-0.02))];
        assert!(TabulatedSpectrum::new(neg).is_err());
    }

    #[test]
    fn filter_peak_and_half_width() {
        let f = LorentzianFilter::new(mhz(10.0), Rate::per_us(1.0)).unwrap();
        let peak = f.eval(mhz(10.0)).unwrap();
        assert!((peak - 1.0 / PI).abs() < 1e-15);
        let c = f.center().get();
        let half = f.eval(AngularFrequency::new(c + 1.0)).unwrap();
        assert!((half - 0.5 * peak).abs() < 1e-15);
    }

    #[test]
    fn filter_delta_limit_refused() {
        let f = LorentzianFilter::new(mhz(10.0), Rate::ZERO).unwrap();
        assert!(f.is_delta());
        assert!(matches!(f.eval(mhz(10.0)), Err(Error::Domain(_))));
        assert!(LorentzianFilter::new(mhz(10.0), Rate::per_us(-1.0)).is_err());
    }

    #[test]
    fn filter_numeric_mass_over_hundred_widths() {
        // Composite Simpson on +-100 half-widths; compare to (2/pi) atan(100).
        let hw = 1.0;
        let f = LorentzianFilter::new(AngularFrequency::ZERO, Rate::per_us(hw)).unwrap();
        let n = 200_000;
        let (a, b) = (-100.0 * hw, 100.0 * hw);
        let h = (b - a) / n as f64;
        let mut sum = f.density(a) + f.density(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * f.density(a + h * i as f64);
        }
        let mass = sum * h / 3.0;
        assert!((mass - 0.99363).abs() < 1e-4, "mass = {mass}");
        assert!((mass - 2.0 / PI * 100f64.atan()).abs() < 1e-10);
    }
}
