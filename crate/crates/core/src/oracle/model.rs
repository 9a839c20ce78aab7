use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::density::DensityMatrix;
use crate::defect::DefectParams;
use crate::error::{Error, Result};
use crate::units::{AngularFrequency, Rate};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Qubit, optionally coupled to a damped oscillator, in the frame rotating at
/// the oscillator frequency.
///
/// `H = Delta sigma_z / 2 + g (sigma_+ a + sigma_- a^dag)` with
/// `Delta = omega_q_tilde - omega_D`; dissipators `(gamma_phi/2) D[sigma_z]`,
/// `gamma_q D[sigma_-]` and `gamma_1D D[a]`. Basis index is
/// `qubit * levels + n` with qubit 0 = ground, 1 = excited.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LindbladModel {
    pub detuning: AngularFrequency,
    pub coupling: AngularFrequency,
    pub qubit_decay: Rate,
    pub dephasing: Rate,
    pub defect_decay: Rate,
    /// Highest oscillator Fock level kept; `None` for a bare qubit.
    pub truncation: Option<usize>,
}

/// Fock cutoff used unless the caller asks otherwise.
pub const DEFAULT_TRUNCATION: usize = 2;

/// Largest allowed `dt` times the fastest rate or frequency.
pub const MAX_STEP_FACTOR: f64 = 0.05;

/// `dt` times the fastest scale used when no step is given.
pub const DEFAULT_STEP_FACTOR: f64 = 0.005;

impl LindbladModel {
    /// Bare qubit in its own rotating frame.
    pub fn qubit_only(decay: Rate, dephasing: Rate) -> Result<Self> {
        let m = Self {
            detuning: AngularFrequency::ZERO,
            coupling: AngularFrequency::ZERO,
            qubit_decay: decay,
            dephasing,
            defect_decay: Rate::ZERO,
            truncation: None,
        };
        m.check()?;
        Ok(m)
    }

    /// Qubit at `omega_q` (already Stark shifted if relevant) coupled to `defect`.
    pub fn with_defect(
        omega_q: AngularFrequency,
        qubit_decay: Rate,
        dephasing: Rate,
        defect: &DefectParams,
        truncation: usize,
    ) -> Result<Self> {
        let m = Self {
            detuning: omega_q - defect.frequency(),
            coupling: defect.coupling(),
            qubit_decay,
            dephasing,
            defect_decay: defect.decay(),
            truncation: Some(truncation),
        };
        m.check()?;
        Ok(m)
    }

    pub fn check(&self) -> Result<()> {
        for (v, what) in [
            (self.qubit_decay.get(), "qubit decay"),
            (self.dephasing.get(), "dephasing"),
            (self.defect_decay.get(), "defect decay"),
        ] {
            Rate::nonnegative(v, what)?;
        }
        if !self.detuning.get().is_finite() || !self.coupling.get().is_finite() {
            return Err(Error::domain("detuning and coupling must be finite"));
        }
        if self.truncation == Some(0) {
            return Err(Error::domain("oscillator truncation must be >= 1"));
        }
        if self.truncation.is_none() && (self.coupling.get() != 0.0 || self.defect_decay.get() != 0.0) {
            return Err(Error::domain("coupling or defect decay given without an oscillator"));
        }
        Ok(())
    }

    pub fn levels(&self) -> usize {
        self.truncation.map_or(1, |n| n + 1)
    }

    pub fn dim(&self) -> usize {
        2 * self.levels()
    }

    /// Index of `|qubit, n>`.
    pub fn index(&self, excited: bool, n: usize) -> usize {
        usize::from(excited) * self.levels() + n
    }

    /// `|e, 0>`: excited qubit, empty oscillator.
    pub fn excited_state(&self) -> DensityMatrix {
        DensityMatrix::basis_state(self.dim(), self.index(true, 0)).expect("index in range")
    }

    /// Qubit excited-state population, traced over the oscillator.
    pub fn excited_population(&self, rho: &DensityMatrix) -> f64 {
        (0..self.levels()).map(|n| rho.population(self.index(true, n))).sum()
    }

    /// Fastest rate or frequency in the rotating frame.
    pub fn fastest_scale(&self) -> f64 {
        [
            self.detuning.get().abs(),
            self.coupling.get().abs(),
            self.qubit_decay.get(),
            self.dephasing.get(),
            self.defect_decay.get(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Upper bound on the RK4 step, `0.05 / fastest scale`.
    pub fn max_dt(&self) -> f64 {
        let s = self.fastest_scale();
        if s == 0.0 {
            f64::INFINITY
        } else {
            MAX_STEP_FACTOR / s
        }
    }

    pub fn default_dt(&self) -> f64 {
        let s = self.fastest_scale();
        if s == 0.0 {
            f64::INFINITY
        } else {
            DEFAULT_STEP_FACTOR / s
        }
    }

    pub(crate) fn lindbladian(&self) -> Lindbladian {
        let lv = self.levels();
        let dim = self.dim();
        let idx = |q: bool, n: usize| usize::from(q) * lv + n;
        let c = |re: f64| Complex64::new(re, 0.0);

        let mut h = SparseOp::default();
        let half_delta = 0.5 * self.detuning.get();
        for n in 0..lv {
            h.push(idx(false, n), idx(false, n), c(-half_delta));
            h.push(idx(true, n), idx(true, n), c(half_delta));
        }
        let g = self.coupling.get();
        if g != 0.0 {
            // sigma_+ a |g, n> = sqrt(n) |e, n-1>, plus the Hermitian conjugate.
            for n in 1..lv {
                let v = c(g * (n as f64).sqrt());
                h.push(idx(true, n - 1), idx(false, n), v);
                h.push(idx(false, n), idx(true, n - 1), v);
            }
        }

        let mut jumps = Vec::new();
        let gphi = self.dephasing.get();
        if gphi > 0.0 {
            let mut sz = SparseOp::default();
            for n in 0..lv {
                sz.push(idx(false, n), idx(false, n), c(-1.0));
                sz.push(idx(true, n), idx(true, n), c(1.0));
            }
            jumps.push((0.5 * gphi, sz));
        }
        let gq = self.qubit_decay.get();
        if gq > 0.0 {
            let mut sm = SparseOp::default();
            for n in 0..lv {
                sm.push(idx(false, n), idx(true, n), c(1.0));
            }
            jumps.push((gq, sm));
        }
        let gd = self.defect_decay.get();
        if gd > 0.0 && self.truncation.is_some() {
            let mut a = SparseOp::default();
            for q in [false, true] {
                for n in 1..lv {
                    a.push(idx(q, n - 1), idx(q, n), c((n as f64).sqrt()));
                }
            }
            jumps.push((gd, a));
        }

        // H_eff = H - (i/2) sum_k r_k L_k^dag L_k
        let mut heff = vec![ZERO; dim * dim];
        for &(r, col, v) in &h.entries {
            heff[r * dim + col] += v;
        }
        for (rate, op) in &jumps {
            for &(r1, c1, v1) in &op.entries {
                for &(r2, c2, v2) in &op.entries {
                    if r1 == r2 {
                        // (L^dag L)_{c1 c2} += conj(L_{r c1}) L_{r c2}
                        heff[c1 * dim + c2] += Complex64::new(0.0, -0.5 * rate) * v1.conj() * v2;
                    }
                }
            }
        }
        let mut heff_sparse = SparseOp::default();
        for r in 0..dim {
            for col in 0..dim {
                let v = heff[r * dim + col];
                if v != ZERO {
                    heff_sparse.push(r, col, v);
                }
            }
        }
        Lindbladian {
            dim,
            heff: heff_sparse,
            jumps,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub(crate) struct SparseOp {
    entries: Vec<(usize, usize, Complex64)>,
}

impl SparseOp {
    fn push(&mut self, row: usize, col: usize, v: Complex64) {
        self.entries.push((row, col, v));
    }
}

/// The generator written as `M + M^dag + sym(sum_k r_k L_k rho L_k^dag)` with
/// `M = -i H_eff rho`, so the output is Hermitian to the last bit whenever
/// `rho` is.
pub(crate) struct Lindbladian {
    dim: usize,
    heff: SparseOp,
    jumps: Vec<(f64, SparseOp)>,
}

pub(crate) struct Scratch {
    m: Vec<Complex64>,
    x: Vec<Complex64>,
    d: Vec<Complex64>,
}

impl Lindbladian {
    pub fn scratch(&self) -> Scratch {
        let n = self.dim * self.dim;
        Scratch {
            m: vec![ZERO; n],
            x: vec![ZERO; n],
            d: vec![ZERO; n],
        }
    }

    pub fn apply(&self, rho: &[Complex64], out: &mut [Complex64], s: &mut Scratch) {
        let d = self.dim;
        let minus_i = Complex64::new(0.0, -1.0);
        s.m.fill(ZERO);
        for &(r, c, v) in &self.heff.entries {
            let coef = minus_i * v;
            let (dst, src) = (r * d, c * d);
            for k in 0..d {
                s.m[dst + k] += coef * rho[src + k];
            }
        }
        s.d.fill(ZERO);
        for (rate, op) in &self.jumps {
            // X = L rho
            s.x.fill(ZERO);
            for &(r, c, v) in &op.entries {
                let (dst, src) = (r * d, c * d);
                for k in 0..d {
                    s.x[dst + k] += v * rho[src + k];
                }
            }
            // D += rate X L^dag ; (X L^dag)_{jk} = sum_b X_{jb} conj(L_{kb})
            for &(k, b, v) in &op.entries {
                let coef = *rate * v.conj();
                for j in 0..d {
                    s.d[j * d + k] += s.x[j * d + b] * coef;
                }
            }
        }
        for j in 0..d {
            for k in 0..d {
                let m = s.m[j * d + k] + s.m[k * d + j].conj();
                let jump = 0.5 * (s.d[j * d + k] + s.d[k * d + j].conj());
                out[j * d + k] = m + jump;
            }
        }
    }
}
