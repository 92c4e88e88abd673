//! Precision budget shared by every analytic computation.
//!
//! `working_digits` drives ordinary evaluation; `certify_digits` is used when a
//! candidate relation or witness is re-checked from scratch.

use rug::float::Constant;
use rug::{Complex, Float};

use crate::error::{Error, Result};

const LOG2_10: f64 = std::f64::consts::LOG2_10;
/// Extra decimal digits carried internally on top of the requested budget.
const GUARD_DIGITS: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct PrecisionContext {
    working_digits: u32,
    certify_digits: u32,
}

impl PrecisionContext {
    pub fn new(working_digits: u32, certify_digits: u32) -> Result<Self> {
        if working_digits < 30 {
            return Err(Error::InvalidPrecision(format!(
                "working_digits = {working_digits} < 30"
            )));
        }
        if certify_digits < 2 * working_digits {
            return Err(Error::InvalidPrecision(format!(
                "certify_digits = {certify_digits} < 2 * working_digits = {}",
                2 * working_digits
            )));
        }
        Ok(Self {
            working_digits,
            certify_digits,
        })
    }

    /// Context with `certify_digits = 2 * working_digits`.
    pub fn with_digits(working_digits: u32) -> Result<Self> {
        Self::new(working_digits, 2 * working_digits)
    }

    pub fn working_digits(&self) -> u32 {
        self.working_digits
    }

    pub fn certify_digits(&self) -> u32 {
        self.certify_digits
    }

    /// Internal binary precision for working-level evaluation.
    pub fn bits(&self) -> u32 {
        digits_to_bits(self.working_digits + GUARD_DIGITS)
    }

    /// The context used for certification: certify digits become the working budget.
    pub fn certifying(&self) -> Self {
        Self {
            working_digits: self.certify_digits,
            certify_digits: 2 * self.certify_digits,
        }
    }

    /// Numeric-zero acceptance threshold `10^-(working - 15)`.
    pub fn accept_tol(&self) -> f64 {
        pow10(-(self.working_digits as i32 - 15))
    }

    /// Numeric-zero rejection threshold `10^-(working / 4)`.
    pub fn reject_tol(&self) -> f64 {
        pow10(-((self.working_digits / 4) as i32))
    }

    /// Residual bound used for analytic identities, `10^-(working - 10)`.
    pub fn identity_tol(&self) -> f64 {
        pow10(-(self.working_digits as i32 - 10))
    }

    /// Certification threshold `10^-(certify - 20)`.
    pub fn certify_tol(&self) -> f64 {
        pow10(-(self.certify_digits as i32 - 20))
    }

    /// Distance to the lattice below which the Weierstrass function is treated as a pole.
    pub fn pole_radius(&self) -> f64 {
        pow10(-((self.working_digits / 4) as i32))
    }
}

impl Default for PrecisionContext {
    fn default() -> Self {
        Self {
            working_digits: 64,
            certify_digits: 128,
        }
    }
}

pub fn digits_to_bits(digits: u32) -> u32 {
    (digits as f64 * LOG2_10).ceil() as u32 + 8
}

/// `10^e` as f64; saturates to 0 below the subnormal range.
pub fn pow10(e: i32) -> f64 {
    10f64.powi(e)
}

pub(crate) fn pi(bits: u32) -> Float {
    Float::with_val(bits, Constant::Pi)
}

#[cfg(test)]
pub(crate) fn cplx(bits: u32, re: f64, im: f64) -> Complex {
    Complex::with_val(bits, (re, im))
}

pub(crate) fn abs_f64(z: &Complex) -> f64 {
    Float::with_val(53, z.abs_ref()).to_f64()
}

/// Short human-readable form of a complex number for messages.
pub(crate) fn display_c(z: &Complex) -> String {
    let (re, im) = to_c64(z);
    format!("{re}{im:+}i")
}

pub(crate) fn to_c64(z: &Complex) -> (f64, f64) {
    (z.real().to_f64(), z.imag().to_f64())
}
