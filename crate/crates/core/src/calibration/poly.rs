//! Linear least squares in even powers of the drive amplitude, no intercept.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::lm::uncertainties;
use super::FitReport;
use crate::error::{Error, Result};
use crate::units::{AngularFrequency, Rate};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StarkFit {
    pub quadratic: AngularFrequency,
    pub quartic: AngularFrequency,
    pub report: FitReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticFit {
    /// Coefficient of `x^2`, in 1/us per unit amplitude squared.
    pub coefficient: Rate,
    pub report: FitReport,
}

/// `nu_S(eps) = S eps^2 + K eps^4`.
pub fn fit_stark_poly(points: &[(f64, AngularFrequency)]) -> Result<StarkFit> {
    let pts: Vec<(f64, f64)> = points.iter().map(|&(e, v)| (e, v.get())).collect();
    let (c, report) = fit_even_powers(&pts, &[2, 4], &["S", "K"])?;
    Ok(StarkFit {
        quadratic: AngularFrequency::new(c[0]),
        quartic: AngularFrequency::new(c[1]),
        report,
    })
}

/// `gamma_phi(eps) = R eps^2`.
pub fn fit_dephasing_quadratic(points: &[(f64, Rate)]) -> Result<QuadraticFit> {
    quadratic(points, "R")
}

/// `gamma_phi(a) = c a^2` for applied flux-noise amplitude `a`.
pub fn fit_flux_noise_quadratic(points: &[(f64, Rate)]) -> Result<QuadraticFit> {
    quadratic(points, "coefficient")
}

fn quadratic(points: &[(f64, Rate)], name: &str) -> Result<QuadraticFit> {
    let pts: Vec<(f64, f64)> = points.iter().map(|&(e, v)| (e, v.get())).collect();
    let (c, report) = fit_even_powers(&pts, &[2], &[name])?;
    Ok(QuadraticFit {
        coefficient: Rate::per_us(c[0]),
        report,
    })
}

fn fit_even_powers(points: &[(f64, f64)], powers: &[i32], names: &[&str]) -> Result<(Vec<f64>, FitReport)> {
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::domain("fit points must be finite"));
    }
    let mut xs: Vec<f64> = points.iter().map(|p| p.0.abs()).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < 3 {
        return Err(Error::domain(format!(
            "need at least 3 distinct amplitudes, got {}",
            xs.len()
        )));
    }
    let (n, k) = (points.len(), powers.len());
    let mut a = DMatrix::zeros(n, k);
    for (i, &(x, _)) in points.iter().enumerate() {
        for (j, &p) in powers.iter().enumerate() {
            a[(i, j)] = x.powi(p);
        }
    }
    // Column equilibration keeps eps^2 and eps^4 columns comparable.
    let scales: Vec<f64> = (0..k).map(|j| a.column(j).norm()).collect();
    if scales.contains(&0.0) {
        return Err(Error::fit("rank-deficient design: all amplitudes are zero", 0, f64::NAN));
    }
    let mut scaled = a.clone();
    for (j, s) in scales.iter().enumerate() {
        scaled.column_mut(j).scale_mut(1.0 / s);
    }
    let b = DVector::from_iterator(n, points.iter().map(|p| p.1));
    let svd = scaled.clone().svd(true, true);
    let sv = &svd.singular_values;
    if sv.min() <= 1e-12 * sv.max() {
        return Err(Error::fit("rank-deficient design matrix", 0, f64::NAN));
    }
    let sol = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::fit(format!("least-squares solve failed: {e}"), 0, f64::NAN))?;
    let coeffs: Vec<f64> = sol.iter().zip(&scales).map(|(c, s)| c / s).collect();
    let resid = &a * DVector::from_column_slice(&coeffs) - &b;
    let rn = resid.norm();
    let sigmas = uncertainties(&a, rn, n);
    let mut report = FitReport::new(names, &coeffs, &sigmas);
    report.residual_norm = rn;
    report.gradient_norm = {
        let g = a.transpose() * &resid;
        g.amax()
    };
    report.iterations = 1;
    Ok((coeffs, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_data_gives_zero_coefficients() {
        let pts: Vec<(f64, AngularFrequency)> =
            [0.01, 0.02, 0.03].iter().map(|&e| (e, AngularFrequency::ZERO)).collect();
        let fit = fit_stark_poly(&pts).unwrap();
        assert_eq!(fit.quadratic.get(), 0.0);
        assert_eq!(fit.quartic.get(), 0.0);

        let pts: Vec<(f64, Rate)> = [0.01, 0.02, 0.03].iter().map(|&e| (e, Rate::ZERO)).collect();
        assert_eq!(fit_dephasing_quadratic(&pts).unwrap().coefficient.get(), 0.0);
        assert_eq!(fit_flux_noise_quadratic(&pts).unwrap().coefficient.get(), 0.0);
    }

    #[test]
    fn too_few_amplitudes() {
        let pts = [(0.01, Rate::per_us(1.0)), (0.02, Rate::per_us(4.0)), (0.02, Rate::per_us(4.0))];
        assert!(matches!(fit_dephasing_quadratic(&pts), Err(Error::Domain(_))));
    }

    #[test]
    fn synthetic_quadratic_exact() {
        let pts: Vec<(f64, Rate)> = (1..=6)
            .map(|i| {
                let a = 0.05 * i as f64;
                (a, Rate::per_us(37.5 * a * a))
            })
            .collect();
        let fit = fit_flux_noise_quadratic(&pts).unwrap();
        assert!((fit.coefficient.get() - 37.5).abs() < 1e-12);
        assert!(fit.report.residual_norm < 1e-10);
    }
}
