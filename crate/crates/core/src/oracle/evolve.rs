use num_complex::Complex64;
use serde::Serialize;

use super::density::{DensityMatrix, HERMITICITY_TOL, POSITIVITY_TOL, TRACE_TOL};
use super::model::LindbladModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub time: f64,
    pub rho: DensityMatrix,
    pub excited_population: f64,
}

/// Worst invariant values seen at any sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Integrity {
    pub max_trace_error: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

impl Default for Integrity {
    fn default() -> Self {
        Self {
            max_trace_error: 0.0,
            max_hermiticity_error: 0.0,
            min_eigenvalue: f64::INFINITY,
        }
    }
}

impl Integrity {
    pub fn merge(self, other: Integrity) -> Integrity {
        Integrity {
            max_trace_error: self.max_trace_error.max(other.max_trace_error),
            max_hermiticity_error: self.max_hermiticity_error.max(other.max_hermiticity_error),
            min_eigenvalue: self.min_eigenvalue.min(other.min_eigenvalue),
        }
    }

    pub fn within_tolerance(&self) -> bool {
        self.max_trace_error < TRACE_TOL
            && self.max_hermiticity_error < HERMITICITY_TOL
            && self.min_eigenvalue > -POSITIVITY_TOL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    /// Step actually taken (`t_final` divided into equal steps).
    pub dt: f64,
    pub integrity: Integrity,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.time).collect()
    }

    pub fn excited_populations(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.excited_population).collect()
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least the initial sample")
    }
}

/// Fixed-step RK4 integration from `rho0` to `t_final`, keeping every
/// `stride`-th step (plus the first and last).
///
/// `dt` is rounded down so that a whole number of steps lands on `t_final`.
/// Trace, Hermiticity and positivity are checked at every kept sample.
pub fn evolve(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    t_final: f64,
    dt: f64,
    stride: usize,
) -> Result<Trajectory> {
    model.check()?;
    if rho0.dim() != model.dim() {
        return Err(Error::domain(format!(
            "initial state has dim {}, model needs {}",
            rho0.dim(),
            model.dim()
        )));
    }
    rho0.validate()?;
    if !(t_final > 0.0) || !t_final.is_finite() {
        return Err(Error::domain(format!("t_final must be > 0, got {t_final}")));
    }
    if !(dt > 0.0) {
        return Err(Error::domain(format!("dt must be > 0, got {dt}")));
    }
    let max_dt = model.max_dt();
    if dt > max_dt {
        return Err(Error::Stability {
            time: 0.0,
            detail: format!("dt = {dt:.3e} us exceeds 0.05 / fastest scale"),
            suggested_dt: max_dt,
        });
    }
    let stride = stride.max(1);
    let steps = (t_final / dt).ceil().max(1.0) as usize;
    let h = t_final / steps as f64;

    let lind = model.lindbladian();
    let mut scratch = lind.scratch();
    let n = rho0.dim() * rho0.dim();
    let zero = Complex64::new(0.0, 0.0);
    let mut rho = rho0.as_slice().to_vec();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);

    let mut samples = Vec::with_capacity(steps / stride + 2);
    let mut integrity = Integrity::default();
    let mut record = |step: usize, rho: &[Complex64], integrity: &mut Integrity| -> Result<()> {
        let time = if step == steps { t_final } else { h * step as f64 };
        let state = DensityMatrix::from_raw(model.dim(), rho.to_vec());
        let te = state.trace_error();
        let he = state.hermiticity_error();
        let me = state.min_eigenvalue();
        *integrity = integrity.merge(Integrity {
            max_trace_error: te,
            max_hermiticity_error: he,
            min_eigenvalue: me,
        });
        if te >= TRACE_TOL || he >= HERMITICITY_TOL || me <= -POSITIVITY_TOL || !te.is_finite() {
            return Err(Error::Stability {
                time,
                detail: format!(
                    "trace error {te:.2e}, hermiticity error {he:.2e}, min eigenvalue {me:.2e}"
                ),
                suggested_dt: 0.5 * h,
            });
        }
        let excited_population = model.excited_population(&state);
        samples.push(Sample {
            time,
            rho: state,
            excited_population,
        });
        Ok(())
    };

    record(0, &rho, &mut integrity)?;
    for step in 1..=steps {
        lind.apply(&rho, &mut k1, &mut scratch);
        for i in 0..n {
            tmp[i] = rho[i] + 0.5 * h * k1[i];
        }
        lind.apply(&tmp, &mut k2, &mut scratch);
        for i in 0..n {
            tmp[i] = rho[i] + 0.5 * h * k2[i];
        }
        lind.apply(&tmp, &mut k3, &mut scratch);
        for i in 0..n {
            tmp[i] = rho[i] + h * k3[i];
        }
        lind.apply(&tmp, &mut k4, &mut scratch);
        let w = h / 6.0;
        for i in 0..n {
            rho[i] += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if step % stride == 0 || step == steps {
            record(step, &rho, &mut integrity)?;
        }
    }
    Ok(Trajectory {
        samples,
        dt: h,
        integrity,
    })
}
