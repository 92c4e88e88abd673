//! Integer 2x2 matrices acting on the upper half-plane and reduction into the
//! standard fundamental domain of SL2(Z).

use rug::{Complex, Float};
use serde::{Deserialize, Serialize};

/// Integer matrix `(a b; c d)` acting by Möbius transformations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntMatrix {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl IntMatrix {
    pub const IDENTITY: IntMatrix = IntMatrix::new(1, 0, 0, 1);
    pub const S: IntMatrix = IntMatrix::new(0, -1, 1, 0);
    pub const T: IntMatrix = IntMatrix::new(1, 1, 0, 1);

    pub const fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        Self { a, b, c, d }
    }

    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    pub fn mul(&self, rhs: &IntMatrix) -> IntMatrix {
        IntMatrix::new(
            self.a * rhs.a + self.b * rhs.c,
            self.a * rhs.b + self.b * rhs.d,
            self.c * rhs.a + self.d * rhs.c,
            self.c * rhs.b + self.d * rhs.d,
        )
    }

    /// Adjugate `(d -b; -c a)`; the inverse Möbius map for any nonzero determinant.
    pub fn adjugate(&self) -> IntMatrix {
        IntMatrix::new(self.d, -self.b, -self.c, self.a)
    }

    pub fn neg(&self) -> IntMatrix {
        IntMatrix::new(-self.a, -self.b, -self.c, -self.d)
    }

    pub fn max_abs_entry(&self) -> u64 {
        [self.a, self.b, self.c, self.d]
            .iter()
            .map(|x| x.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    pub fn is_primitive(&self) -> bool {
        let g = [self.a, self.b, self.c, self.d]
            .iter()
            .fold(0u64, |g, x| gcd_u64(g, x.unsigned_abs()));
        g == 1
    }

    /// `(a tau + b) / (c tau + d)` at the precision of `tau`.
    pub fn act(&self, tau: &Complex) -> Complex {
        let p = tau.prec().0;
        let num = Complex::with_val(p, tau * self.a) + self.b;
        let den = Complex::with_val(p, tau * self.c) + self.d;
        num / den
    }

    /// Automorphy factor `c tau + d`.
    pub fn automorphy(&self, tau: &Complex) -> Complex {
        Complex::with_val(tau.prec().0, tau * self.c) + self.d
    }
}

pub(crate) fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Reduce `tau_raw` into the standard domain `|Re| <= 1/2, |tau| >= 1`.
///
/// Returns the reduced point and `gamma` in SL2(Z) with `gamma * tau_raw = tau`.
///
/// # Panics
/// If `Im(tau_raw) <= 0`.
pub fn reduce_to_fundamental(tau_raw: &Complex) -> (super::PeriodPoint, IntMatrix) {
    let (tau, gamma) = reduce_complex(tau_raw);
    (
        super::PeriodPoint {
            tau,
            domain: super::DomainTag::Standard,
        },
        gamma,
    )
}

pub(crate) fn reduce_complex(tau_raw: &Complex) -> (Complex, IntMatrix) {
    assert!(
        tau_raw.imag().is_sign_positive() && !tau_raw.imag().is_zero(),
        "reduce_to_fundamental requires Im(tau) > 0"
    );
    let prec = tau_raw.prec().0;
    let eps = Float::with_val(prec, Float::i_exp(1, -(prec as i32 - 16)));
    let one_minus = Float::with_val(prec, 1 - &eps);
    let mut t = tau_raw.clone();
    let mut gamma = IntMatrix::IDENTITY;
    for _ in 0..100_000 {
        let n = round_to_i64(t.real());
        if n != 0 {
            t -= n;
            gamma = IntMatrix::new(1, -n, 0, 1).mul(&gamma);
        }
        let norm = Float::with_val(prec, t.norm_ref());
        if norm < one_minus {
            t = Complex::with_val(prec, -1) / t;
            gamma = IntMatrix::S.mul(&gamma);
        } else {
            break;
        }
    }
    let mut reduced = gamma.act(tau_raw);
    // Fold the right edge onto the left one so the representative is canonical.
    let half = Float::with_val(prec, 0.5);
    if *reduced.real() > Float::with_val(prec, &half + &eps) {
        reduced -= 1;
        gamma = IntMatrix::new(1, -1, 0, 1).mul(&gamma);
    }
    (reduced, gamma)
}

pub(crate) fn round_to_i64(x: &Float) -> i64 {
    let r = x.clone().round();
    r.to_integer()
        .and_then(|i| i.to_i64())
        .expect("real part too large to reduce")
}

/// Whether `tau` lies in the standard domain up to `tol`.
pub fn in_standard_domain(tau: &Complex, tol: f64) -> bool {
    let re = tau.real().to_f64();
    let norm = Float::with_val(53, tau.norm_ref()).to_f64();
    re.abs() <= 0.5 + tol && norm >= 1.0 - tol && tau.imag().to_f64() > 0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::cplx;

    #[test]
    fn translation_only() {
        let tau = cplx(200, 5.0, 1.0);
        let (p, g) = reduce_to_fundamental(&tau);
        assert_eq!(g, IntMatrix::new(1, -5, 0, 1));
        assert!((p.tau.real().to_f64()).abs() < 1e-30);
        assert!((p.tau.imag().to_f64() - 1.0).abs() < 1e-30);
    }

    #[test]
    fn already_reduced_is_identity() {
        let tau = cplx(200, 0.2, 1.3);
        let (_, g) = reduce_to_fundamental(&tau);
        assert_eq!(g, IntMatrix::IDENTITY);
    }

    #[test]
    fn inversion_lands_in_domain() {
        let p = 200;
        let tau = Complex::with_val(p, -1) / cplx(p, 0.3, 1.0);
        let (red, g) = reduce_to_fundamental(&tau);
        assert_eq!(g.det(), 1);
        assert!(in_standard_domain(&red.tau, 1e-40));
        let diff = Complex::with_val(p, &red.tau - g.act(&tau));
        assert!(crate::precision::abs_f64(&diff) < 1e-55);
    }

    #[test]
    fn deep_point_near_real_axis() {
        let p = 300;
        let tau = cplx(p, 0.123456, 1e-4);
        let (red, g) = reduce_to_fundamental(&tau);
        assert_eq!(g.det(), 1);
        assert!(in_standard_domain(&red.tau, 1e-30));
    }
}
