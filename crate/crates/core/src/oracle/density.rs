use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense density matrix, row-major, on the qubit (x) oscillator space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

/// Tolerances every valid state must meet.
pub const TRACE_TOL: f64 = 1e-9;
pub const HERMITICITY_TOL: f64 = 1e-12;
pub const POSITIVITY_TOL: f64 = 1e-9;

impl DensityMatrix {
    /// `|index><index|`.
    pub fn basis_state(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::domain(format!("basis index {index} out of range for dim {dim}")));
        }
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        data[index * dim + index] = Complex64::new(1.0, 0.0);
        Ok(Self { dim, data })
    }

    /// Takes ownership of row-major entries and checks the state invariants.
    pub fn from_row_major(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim || dim == 0 {
            return Err(Error::domain(format!(
                "expected {} entries for dim {dim}, got {}",
                dim * dim,
                data.len()
            )));
        }
        let rho = Self { dim, data };
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_raw(dim: usize, data: Vec<Complex64>) -> Self {
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// `|tr rho - 1|`.
    pub fn trace_error(&self) -> f64 {
        (self.trace() - Complex64::new(1.0, 0.0)).norm()
    }

    /// `max |rho_jk - conj(rho_kj)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.dim {
            for k in j..self.dim {
                worst = worst.max((self.get(j, k) - self.get(k, j).conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let d = self.dim;
        let m = DMatrix::from_fn(d, d, |j, k| 0.5 * (self.get(j, k) + self.get(k, j).conj()));
        m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn population(&self, index: usize) -> f64 {
        self.get(index, index).re
    }

    pub fn validate(&self) -> Result<()> {
        let te = self.trace_error();
        let he = self.hermiticity_error();
        let me = self.min_eigenvalue();
        if te > TRACE_TOL || he > HERMITICITY_TOL || me < -POSITIVITY_TOL {
            return Err(Error::domain(format!(
                "invalid density matrix: trace error {te:.2e}, hermiticity {he:.2e}, min eigenvalue {me:.2e}"
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_state_is_valid() {
        let rho = DensityMatrix::basis_state(6, 3).unwrap();
        rho.validate().unwrap();
        assert_eq!(rho.population(3), 1.0);
        assert!(DensityMatrix::basis_state(2, 2).is_err());
    }

    #[test]
    fn rejects_invalid_states() {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        // trace 2
        assert!(DensityMatrix::from_row_major(2, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).is_err());
        // not Hermitian
        assert!(DensityMatrix::from_row_major(2, vec![c(0.5, 0.0), c(0.1, 0.1), c(0.1, 0.1), c(0.5, 0.0)]).is_err());
        // negative eigenvalue: coherence larger than populations allow
        assert!(DensityMatrix::from_row_major(2, vec![c(0.5, 0.0), c(0.8, 0.0), c(0.8, 0.0), c(0.5, 0.0)]).is_err());
        // |+><+|
        assert!(DensityMatrix::from_row_major(2, vec![c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0)]).is_ok());
    }
}
