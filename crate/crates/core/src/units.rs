//! Frequency and rate newtypes.
//!
//! Internally every frequency is an angular frequency in rad/us and every rate
//! is in 1/us. External files carry ordinary frequencies in MHz; the factor
//! 2*pi is applied only by the `*_mhz` constructors and accessors here.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Angular frequency in rad/us.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AngularFrequency(f64);

impl AngularFrequency {
    pub const ZERO: Self = Self(0.0);

    pub const fn new(rad_per_us: f64) -> Self {
        Self(rad_per_us)
    }

    /// From an ordinary frequency `f` in MHz (`omega = 2*pi*f`).
    pub fn from_mhz(mhz: f64) -> Self {
        Self(TAU * mhz)
    }

    pub const fn get(self) -> f64 {
        self.0
    }

    /// Ordinary frequency in MHz.
    pub fn mhz(self) -> f64 {
        self.0 / TAU
    }

    pub fn abs(self) -> Self {
        Self(self.0.abs())
    }
}

impl Add for AngularFrequency {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl Sub for AngularFrequency {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self(self.0 - rhs.0)
    }
}

impl Neg for AngularFrequency {
    type Output = Self;
    fn neg(self) -> Self {
        Self(-self.0)
    }
}

impl fmt::Display for AngularFrequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} rad/us", self.0)
    }
}

/// Rate in 1/us. Used for decay rates and for Lorentzian widths.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Rate(f64);

impl Rate {
    pub const ZERO: Self = Self(0.0);

    pub const fn per_us(value: f64) -> Self {
        Self(value)
    }

    /// Checked constructor for widths and decay rates.
    pub fn nonnegative(value: f64, what: &str) -> Result<Self> {
        if value.is_finite() && value >= 0.0 {
            Ok(Self(value))
        } else {
            Err(Error::domain(format!("{what} must be finite and >= 0, got {value}")))
        }
    }

    /// From a rate quoted as `rate/2pi` in MHz, the way dephasing rates and
    /// couplings are usually reported.
    pub fn from_mhz(mhz: f64) -> Self {
        Self(TAU * mhz)
    }

    pub const fn get(self) -> f64 {
        self.0
    }

    /// The rate divided by 2*pi, in MHz.
    pub fn mhz(self) -> f64 {
        self.0 / TAU
    }
}

impl Add for Rate {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} /us", self.0)
    }
}
