//! Seeded synthetic data: Ramsey fringes, echo decays, hot-spot spectra and
//! swap line cuts. Used for fixtures and Monte-Carlo checks of the fits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::calibration::RamseyTrace;
use crate::defect::DefectParams;
use crate::error::{Error, Result};
use crate::oracle::{evolve, LindbladModel, DEFAULT_TRUNCATION};
use crate::spectral::{ParametricSpectrum, TabulatedSpectrum};
use crate::units::{AngularFrequency, Rate};

/// The generator behind every synthetic data set.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` equally spaced times from `0` to `t_end` inclusive.
pub fn linspace(t_end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n)
            .map(|i| if i + 1 == n { t_end } else { t_end * i as f64 / (n - 1) as f64 })
            .collect(),
    }
}

fn normal(sigma: f64) -> Result<Normal<f64>> {
    Normal::new(0.0, sigma).map_err(|e| Error::domain(e.to_string()))
}

/// Ramsey fringes `0.5 + 0.5 exp(-gamma_phi t) cos(2 pi (offset + nu_S) t)`
/// plus Gaussian noise with standard deviation `noise` times the fringe
/// amplitude.
pub fn ramsey_trace(
    stark_mhz: f64,
    dephasing: Rate,
    offset_mhz: f64,
    epsilon: f64,
    times: Vec<f64>,
    noise: f64,
    rng: &mut impl Rng,
) -> Result<RamseyTrace> {
    let amplitude = 0.5;
    let dist = normal(noise * amplitude)?;
    let f = offset_mhz + stark_mhz;
    let signal = times
        .iter()
        .map(|&t| {
            let clean = 0.5
                + amplitude
                    * (-dephasing.get() * t).exp()
                    * (std::f64::consts::TAU * f * t).cos();
            if noise > 0.0 {
                clean + dist.sample(rng)
            } else {
                clean
            }
        })
        .collect();
    RamseyTrace::new(times, signal, offset_mhz, epsilon)
}

/// Echo signal averaged over `randomizations` runs, each with a phase doing
/// a Gaussian random walk whose variance grows as `2 gamma t`. The average
/// of `cos(phase)` tends to `exp(-gamma t)`; the returned signal is
/// `0.5 + 0.5 <cos(phase)>`.
pub fn echo_decay(
    dephasing: Rate,
    times: &[f64],
    randomizations: usize,
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    if randomizations == 0 {
        return Err(Error::domain("need at least one randomization"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::domain("echo times must be nonnegative and increasing"));
    }
    let std = normal(1.0)?;
    let mut acc = vec![0.0; times.len()];
    for _ in 0..randomizations {
        let (mut phase, mut t_prev) = (0.0, 0.0);
        for (a, &t) in acc.iter_mut().zip(times) {
            let var = 2.0 * dephasing.get() * (t - t_prev);
            phase += var.sqrt() * std.sample(rng);
            t_prev = t;
            *a += phase.cos();
        }
    }
    let n = randomizations as f64;
    Ok(acc.into_iter().map(|a| 0.5 + 0.5 * a / n).collect())
}

/// Loss spectrum of a background plus defect hot spots, sampled on a uniform
/// grid with optional multiplicative Gaussian noise (clipped at zero).
pub fn hot_spot_spectrum(
    spectrum: &ParametricSpectrum,
    low: AngularFrequency,
    high: AngularFrequency,
    points: usize,
    noise: f64,
    rng: &mut impl Rng,
) -> Result<TabulatedSpectrum> {
    let clean = spectrum.sample(low, high, points)?;
    if noise <= 0.0 {
        return Ok(clean);
    }
    let dist = normal(noise)?;
    let noisy: Vec<_> = clean
        .points()
        .map(|(w, g)| (w, Rate::per_us((g.get() * (1.0 + dist.sample(rng))).max(0.0))))
        .collect();
    TabulatedSpectrum::new(noisy)
}

/// Excited population of a qubit swapping with a defect at `times` (starting
/// at zero), from the master-equation oracle.
pub fn swap_linecut(
    defect: &DefectParams,
    detuning: AngularFrequency,
    qubit_decay: Rate,
    times: &[f64],
) -> Result<Vec<f64>> {
    if times.len() < 2 || times[0] != 0.0 {
        return Err(Error::domain("swap times must start at zero"));
    }
    let step = times[1] - times[0];
    if times.windows(2).any(|w| ((w[1] - w[0]) - step).abs() > 1e-9 * step) {
        return Err(Error::domain("swap times must be uniformly spaced"));
    }
    let model = LindbladModel {
        detuning,
        coupling: defect.coupling(),
        qubit_decay,
        dephasing: Rate::ZERO,
        defect_decay: defect.decay(),
        truncation: Some(DEFAULT_TRUNCATION),
    };
    // an integer number of RK4 steps per sample
    let per_sample = (step / model.default_dt()).ceil().max(1.0) as usize;
    let dt = step / per_sample as f64;
    let t_end = times[times.len() - 1];
    let traj = evolve(&model, &model.excited_state(), t_end, dt, per_sample)?;
    Ok(traj.excited_populations())
}
