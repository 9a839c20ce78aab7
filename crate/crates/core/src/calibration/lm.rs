//! Levenberg-Marquardt least squares with analytic Jacobians.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A scalar model `y = f(t; p)` with an analytic gradient in `p`.
pub(crate) trait Model {
    fn n_params(&self) -> usize;
    fn eval(&self, p: &[f64], t: f64) -> f64;
    /// Writes `df/dp` into `grad` (length `n_params`).
    fn grad(&self, p: &[f64], t: f64, grad: &mut [f64]);
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct LmConfig {
    pub max_iterations: usize,
    /// Tolerance on the scaled gradient (see `scaled_gradient`).
    pub gradient_tol: f64,
    pub step_tol: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            gradient_tol: 1e-10,
            step_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct LmOutcome {
    pub params: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub residual_norm: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn residuals<M: Model>(model: &M, p: &[f64], t: &[f64], y: &[f64]) -> DVector<f64> {
    DVector::from_iterator(t.len(), t.iter().zip(y).map(|(&ti, &yi)| model.eval(p, ti) - yi))
}

fn jacobian<M: Model>(model: &M, p: &[f64], t: &[f64]) -> DMatrix<f64> {
    let n = model.n_params();
    let mut jac = DMatrix::zeros(t.len(), n);
    let mut g = vec![0.0; n];
    for (i, &ti) in t.iter().enumerate() {
        model.grad(p, ti, &mut g);
        for (j, gj) in g.iter().enumerate() {
            jac[(i, j)] = *gj;
        }
    }
    jac
}

/// Scaled gradient: the largest `|J_j . r| / (|J_j| max(|r|, |y|))`. Far from
/// an exact fit this is the cosine between the residual and a Jacobian
/// column; near one the data norm takes over, so rounding noise in a tiny
/// residual does not block convergence.
fn scaled_gradient(jac: &DMatrix<f64>, r: &DVector<f64>, y_norm: f64) -> f64 {
    let scale = r.norm().max(y_norm);
    if scale == 0.0 {
        return 0.0;
    }
    let jtr = jac.transpose() * r;
    (0..jac.ncols())
        .map(|j| {
            let cn = jac.column(j).norm();
            if cn == 0.0 {
                0.0
            } else {
                jtr[j].abs() / (cn * scale)
            }
        })
        .fold(0.0, f64::max)
}

pub(crate) fn fit<M: Model>(
    model: &M,
    t: &[f64],
    y: &[f64],
    p0: &[f64],
    cfg: LmConfig,
) -> Result<LmOutcome> {
    let n = model.n_params();
    if t.len() <= n {
        return Err(Error::domain(format!(
            "need more than {n} samples for a {n}-parameter fit, got {}",
            t.len()
        )));
    }
    let mut p = p0.to_vec();
    let mut r = residuals(model, &p, t, y);
    let mut cost = r.norm_squared();
    if !cost.is_finite() {
        return Err(Error::fit("initial guess gives non-finite residuals", 0, f64::NAN));
    }
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut jac = jacobian(model, &p, t);
    let y_norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let slack = 8.0 * f64::EPSILON * (t.len() as f64).sqrt();

    while iterations < cfg.max_iterations {
        if scaled_gradient(&jac, &r, y_norm) <= cfg.gradient_tol {
            break;
        }
        iterations += 1;

        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &r;
        let mut accepted = false;
        for _ in 0..40 {
            let mut a = jtj.clone();
            for j in 0..n {
                let d = jtj[(j, j)].max(1e-300);
                a[(j, j)] += lambda * d;
            }
            let Some(chol) = a.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let delta = -chol.solve(&jtr);
            let trial: Vec<f64> = p.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
            let r_trial = residuals(model, &trial, t, y);
            let cost_trial = r_trial.norm_squared();
            let pnorm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            let step_small = delta.norm() <= cfg.step_tol * (pnorm + cfg.step_tol);
            // Near the optimum the cost change drops below the rounding noise
            // of the sum while the gradient is still resolvable.
            if cost_trial.is_finite() && cost_trial <= cost * (1.0 + slack) {
                p = trial;
                r = r_trial;
                cost = cost_trial;
                lambda = (lambda * 0.3).max(1e-12);
                accepted = true;
                break;
            }
            if step_small {
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            break;
        }
        jac = jacobian(model, &p, t);
    }

    let gradient_norm = scaled_gradient(&jac, &r, y_norm);
    let residual_norm = r.norm();
    let converged = gradient_norm <= cfg.gradient_tol;
    let sigmas = uncertainties(&jac, residual_norm, t.len());
    Ok(LmOutcome {
        params: p,
        sigmas,
        residual_norm,
        gradient_norm,
        iterations,
        converged,
    })
}

/// 1-sigma errors from `(J^T J)^-1 * RSS / (n - p)`.
pub(crate) fn uncertainties(jac: &DMatrix<f64>, residual_norm: f64, samples: usize) -> Vec<f64> {
    let n = jac.ncols();
    let dof = samples.saturating_sub(n).max(1) as f64;
    let s2 = residual_norm * residual_norm / dof;
    let jtj = jac.transpose() * jac;
    match jtj.clone().try_inverse() {
        Some(inv) => (0..n).map(|j| (inv[(j, j)].max(0.0) * s2).sqrt()).collect(),
        None => {
            let pinv = jtj
                .pseudo_inverse(1e-14)
                .unwrap_or_else(|_| DMatrix::zeros(n, n));
            (0..n).map(|j| (pinv[(j, j)].max(0.0) * s2).sqrt()).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Line;

    impl Model for Line {
        fn n_params(&self) -> usize {
            2
        }
        fn eval(&self, p: &[f64], t: f64) -> f64 {
            p[0] + p[1] * t
        }
        fn grad(&self, _p: &[f64], t: f64, g: &mut [f64]) {
            g[0] = 1.0;
            g[1] = t;
        }
    }

    struct Exp;

    impl Model for Exp {
        fn n_params(&self) -> usize {
            2
        }
        fn eval(&self, p: &[f64], t: f64) -> f64 {
            p[0] * (-p[1] * t).exp()
        }
        fn grad(&self, p: &[f64], t: f64, g: &mut [f64]) {
            let e = (-p[1] * t).exp();
            g[0] = e;
            g[1] = -t * p[0] * e;
        }
    }

    #[test]
    fn recovers_line_exactly() {
        let t: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = t.iter().map(|t| 2.0 - 0.5 * t).collect();
        let out = fit(&Line, &t, &y, &[0.0, 0.0], LmConfig::default()).unwrap();
        assert!(out.converged);
        assert!((out.params[0] - 2.0).abs() < 1e-9);
        assert!((out.params[1] + 0.5).abs() < 1e-9);
    }

    #[test]
    fn recovers_exponential_from_far_guess() {
        let t: Vec<f64> = (0..40).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = t.iter().map(|t| 3.0 * (-1.7 * t).exp()).collect();
        let out = fit(&Exp, &t, &y, &[1.0, 0.3], LmConfig::default()).unwrap();
        assert!(out.converged, "{out:?}");
        assert!((out.params[1] - 1.7).abs() < 1e-9);
    }

    #[test]
    fn too_few_samples() {
        assert!(fit(&Line, &[0.0, 1.0], &[0.0, 1.0], &[0.0, 0.0], LmConfig::default()).is_err());
    }
}
