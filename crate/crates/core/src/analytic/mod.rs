//! High-precision periods, Weierstrass functions and the Legendre uniformization.
//!
//! Every operation takes a [`PrecisionContext`] and works at `ctx.bits()`.
//! Lattices are always `Z + Z tau`; internally `tau` is moved into the
//! standard domain and the results are pulled back with the automorphy factor.

mod agm;
mod ellog;
mod jseries;
mod reduce;
mod theta;
mod weierstrass;

use rug::{Complex, Float};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::precision::{abs_f64, pi, PrecisionContext};

pub use ellog::elliptic_log;
pub use reduce::{in_standard_domain, reduce_to_fundamental, IntMatrix};

pub(crate) use reduce::{gcd_u64, reduce_complex};
pub(crate) use weierstrass::{coords_in, LatticeData};

/// Points closer than this to `0` or `1` (or larger than its inverse) are degenerate.
pub const DEFAULT_LAMBDA_EXCLUSION: f64 = 1e-6;

/// Coset representatives of `SL2(Z) / Gamma(2)`; `c * D` for the standard domain `D`
/// tiles the six-fold domain used for the Legendre uniformization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CosetRep {
    I,
    S,
    T,
    ST,
    TS,
    STS,
}

impl CosetRep {
    pub const ALL: [CosetRep; 6] = [
        CosetRep::I,
        CosetRep::S,
        CosetRep::T,
        CosetRep::ST,
        CosetRep::TS,
        CosetRep::STS,
    ];

    pub fn matrix(self) -> IntMatrix {
        let (s, t) = (IntMatrix::S, IntMatrix::T);
        match self {
            CosetRep::I => IntMatrix::IDENTITY,
            CosetRep::S => s,
            CosetRep::T => t,
            CosetRep::ST => s.mul(&t),
            CosetRep::TS => t.mul(&s),
            CosetRep::STS => s.mul(&t).mul(&s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DomainTag {
    /// `|Re tau| <= 1/2`, `|tau| >= 1`.
    Standard,
    /// `tau = c * tau_d` with `tau_d` standard.
    SixFold(CosetRep),
    Unreduced,
}

/// A point of the upper half-plane together with where it was reduced to.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodPoint {
    pub(crate) tau: Complex,
    pub(crate) domain: DomainTag,
}

impl PeriodPoint {
    pub fn new(tau: Complex) -> Result<Self> {
        if !(tau.imag().is_sign_positive() && !tau.imag().is_zero()) {
            return Err(Error::InvalidArgument("Im(tau) must be positive".into()));
        }
        Ok(Self {
            tau,
            domain: DomainTag::Unreduced,
        })
    }

    pub fn tau(&self) -> &Complex {
        &self.tau
    }

    pub fn domain(&self) -> DomainTag {
        self.domain
    }

    /// The point reduced into the standard domain.
    pub fn reduced(&self) -> (PeriodPoint, IntMatrix) {
        reduce_to_fundamental(&self.tau)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HalfPeriodValues {
    pub e1: Complex,
    pub e2: Complex,
    pub e3: Complex,
    pub g2: Complex,
    pub g3: Complex,
}

/// `z` in the parallelogram `{x + y tau : x, y in [0, 1)}` of its lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticLogarithm {
    pub z: Complex,
    pub tau: PeriodPoint,
}

impl EllipticLogarithm {
    /// Reduces `z` modulo `Z + Z tau`.
    pub fn new(z: &Complex, tau: &PeriodPoint) -> Self {
        let bits = z.prec().0.max(tau.tau.prec().0);
        let z = reduce_into_parallelogram(&Complex::with_val(bits, z), &tau.tau);
        Self {
            z,
            tau: tau.clone(),
        }
    }
}

/// Numeric point on `Y^2 Z = X (X - Z) (X - lambda Z)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Projective {
    /// `[0 : 1 : 0]`.
    Infinity,
    /// `[x : y : 1]`.
    Affine { x: Complex, y: Complex },
}

impl Projective {
    pub fn is_infinity(&self) -> bool {
        matches!(self, Projective::Infinity)
    }

    /// `[X, Y, Z]`.
    pub fn to_triple(&self, bits: u32) -> [Complex; 3] {
        match self {
            Projective::Infinity => [
                Complex::new(bits),
                Complex::with_val(bits, 1),
                Complex::new(bits),
            ],
            Projective::Affine { x, y } => [
                Complex::with_val(bits, x),
                Complex::with_val(bits, y),
                Complex::with_val(bits, 1),
            ],
        }
    }
}

/// Value of `j` from a truncated q-expansion with an explicit tail bound.
#[derive(Debug, Clone, PartialEq)]
pub struct JValue {
    pub value: Complex,
    pub truncation_bound: f64,
}

pub(crate) fn reduce_into_parallelogram(z: &Complex, tau: &Complex) -> Complex {
    let bits = z.prec().0;
    let (x, y) = coords_in(z, tau);
    let mut x = Float::with_val(bits, &x - x.clone().floor());
    let mut y = Float::with_val(bits, &y - y.clone().floor());
    let eps = Float::with_val(bits, Float::i_exp(1, -(bits as i32 - 20)));
    if Float::with_val(bits, 1 - &x) < eps {
        x = Float::new(bits);
    }
    if Float::with_val(bits, 1 - &y) < eps {
        y = Float::new(bits);
    }
    Complex::with_val(bits, tau * &y) + x
}

fn anharmonic_orbit(l: &Complex) -> [Complex; 6] {
    let bits = l.prec().0;
    let one = Complex::with_val(bits, 1);
    let om = Complex::with_val(bits, &one - l);
    let lm1 = Complex::with_val(bits, l - &one);
    [
        l.clone(),
        om.clone(),
        Complex::with_val(bits, &one / l),
        Complex::with_val(bits, &one / &om),
        Complex::with_val(bits, l / &lm1),
        Complex::with_val(bits, &lm1 / l),
    ]
}

fn agm_period(l: &Complex, bits: u32) -> Option<Complex> {
    let one = Complex::with_val(bits, 1);
    let a = Complex::with_val(bits, &one - l).sqrt();
    let b = Complex::with_val(bits, l.sqrt_ref());
    let ma = agm::agm(&one, &a, bits)?;
    let mb = agm::agm(&one, &b, bits)?;
    let t = (ma / mb).mul_i(false);
    (t.imag().is_sign_positive() && !t.imag().is_zero() && t.imag().to_f64() > 1e-12).then_some(t)
}

/// `tau` with `L(tau) = lambda`, lying in `c * D` for one of the six coset representatives.
pub fn period_from_lambda(lambda: &Complex, ctx: &PrecisionContext) -> Result<PeriodPoint> {
    period_from_lambda_with(lambda, ctx, DEFAULT_LAMBDA_EXCLUSION)
}

/// As [`period_from_lambda`] with an explicit exclusion radius around `0`, `1` and infinity.
pub fn period_from_lambda_with(
    lambda: &Complex,
    ctx: &PrecisionContext,
    exclusion: f64,
) -> Result<PeriodPoint> {
    let bits = ctx.bits();
    let lam = Complex::with_val(bits, lambda);
    let d0 = abs_f64(&lam);
    let d1 = abs_f64(&Complex::with_val(bits, &lam - 1u32));
    if d0 < exclusion || d1 < exclusion || d0 > 1.0 / exclusion {
        return Err(Error::DegenerateLambda(format!(
            "lambda = {} is within {exclusion} of a cusp",
            crate::precision::display_c(&lam)
        )));
    }
    let mut seed = None;
    for mu in anharmonic_orbit(&lam) {
        if let Some(t) = agm_period(&mu, bits) {
            seed = Some(t);
            break;
        }
    }
    let seed = seed.ok_or_else(|| Error::PrecisionExhausted("AGM did not converge".into()))?;
    let (tau_d, _) = reduce_complex(&seed);

    // Pick the coset whose L-value matches, comparing at modest precision.
    let low = 128u32;
    let tau_d_low = Complex::with_val(low, &tau_d);
    let mut best: Option<(f64, CosetRep)> = None;
    for rep in CosetRep::ALL {
        let t = rep.matrix().act(&tau_d_low);
        let ld = LatticeData::with_bits(&t, low, low, 0.0)?;
        let dist = abs_f64(&Complex::with_val(low, ld.lambda() - &lam));
        if best.is_none_or(|(d, _)| dist < d) {
            best = Some((dist, rep));
        }
    }
    let (_, rep) = best.expect("six candidates");
    let mut tau = rep.matrix().act(&tau_d);

    let tol = Float::with_val(bits, Float::i_exp(1, -(bits as i32 - 12)));
    let pi = pi(bits);
    let mut converged = false;
    for _ in 0..60 {
        let ld = LatticeData::with_bits(&tau, bits, bits, 0.0)?;
        let l = ld.lambda();
        let f = Complex::with_val(bits, &l - &lam);
        // dL/dtau = -i L (1 - L) (e1 - e3) / pi
        let one_minus = Complex::with_val(bits, 1 - &l);
        let e13 = Complex::with_val(bits, &ld.e[0] - &ld.e[2]);
        let deriv = (Complex::with_val(bits, &l * &one_minus) * e13 / &pi).mul_i(true);
        let step = f / deriv;
        tau -= &step;
        let size = Float::with_val(bits, step.abs_ref());
        if size <= Float::with_val(bits, &tol * Float::with_val(bits, tau.abs_ref())) {
            converged = true;
            break;
        }
    }
    if !converged || !tau.imag().is_sign_positive() {
        return Err(Error::PrecisionExhausted(
            "Newton refinement of the period did not converge".into(),
        ));
    }
    let check = LatticeData::with_bits(&tau, bits, bits, 0.0)?.lambda();
    let rel = abs_f64(&Complex::with_val(bits, check - &lam)) / d0;
    if rel > ctx.identity_tol() {
        return Err(Error::PrecisionExhausted(format!(
            "period round-trip residual {rel:e}"
        )));
    }
    Ok(PeriodPoint {
        tau,
        domain: DomainTag::SixFold(rep),
    })
}

pub fn half_periods(tau: &PeriodPoint, ctx: &PrecisionContext) -> Result<HalfPeriodValues> {
    let ld = LatticeData::new(&tau.tau, ctx)?;
    let g2 = ld.g2();
    let g3 = ld.g3();
    let [e1, e2, e3] = ld.e;
    Ok(HalfPeriodValues { e1, e2, e3, g2, g3 })
}

/// `(wp(z), wp'(z))` for the lattice `Z + Z tau`.
pub fn weierstrass_p(
    z: &Complex,
    tau: &PeriodPoint,
    ctx: &PrecisionContext,
) -> Result<(Complex, Complex)> {
    let ld = LatticeData::new(&tau.tau, ctx)?;
    ld.wp(&Complex::with_val(ld.bits, z))
}

/// `L(tau) = (e2 - e1) / (e3 - e1)`.
pub fn legendre_lambda(tau: &PeriodPoint, ctx: &PrecisionContext) -> Result<Complex> {
    Ok(LatticeData::new(&tau.tau, ctx)?.lambda())
}

/// `[xi : eta : 1]` for `z` off the lattice, `[0 : 1 : 0]` on it.
pub fn parametrize_point(z: &EllipticLogarithm, ctx: &PrecisionContext) -> Result<Projective> {
    let ld = LatticeData::new(&z.tau.tau, ctx)?;
    parametrize_with(&ld, &z.z)
}

pub(crate) fn parametrize_with(ld: &LatticeData, z: &Complex) -> Result<Projective> {
    let z = Complex::with_val(ld.bits, z);
    match ld.wp(&z) {
        Err(Error::PoleAtLatticePoint) => Ok(Projective::Infinity),
        Err(e) => Err(e),
        Ok((p, dp)) => {
            let bits = ld.bits;
            let e31 = Complex::with_val(bits, &ld.e[2] - &ld.e[0]);
            let x = Complex::with_val(bits, &p - &ld.e[0]) / e31;
            let s3 = Complex::with_val(bits, ld.s.square_ref()) * &ld.s;
            let y = dp / (s3 * 2u32);
            Ok(Projective::Affine { x, y })
        }
    }
}

/// `j(tau)` from `terms` terms of its q-expansion at `tau` as given.
pub fn j_from_q_series(tau: &PeriodPoint, terms: usize, ctx: &PrecisionContext) -> Result<JValue> {
    let im = tau.tau.imag().to_f64();
    if im < 0.1 {
        return Err(Error::InsufficientImaginaryPart(im));
    }
    if terms < 20 {
        return Err(Error::InvalidArgument(format!("terms = {terms} < 20")));
    }
    let (value, truncation_bound) = jseries::j_series(&tau.tau, terms, ctx.bits());
    Ok(JValue {
        value,
        truncation_bound,
    })
}

/// `j(tau)` at full precision: reduces `tau` first and picks the number of terms.
pub fn j_invariant_of_tau(tau: &Complex, bits: u32) -> Complex {
    let (t, _) = reduce_complex(&Complex::with_val(bits, tau));
    let terms = jseries::terms_for(t.imag().to_f64(), bits + 64);
    jseries::j_series(&t, terms, bits).0
}

/// `J(lambda) = 2^8 (lambda^2 - lambda + 1)^3 / (lambda^2 (lambda - 1)^2)` for complex input.
pub fn j_of_lambda_complex(lambda: &Complex) -> Complex {
    let bits = lambda.prec().0;
    let l2 = Complex::with_val(bits, lambda.square_ref());
    let inner = Complex::with_val(bits, &l2 - lambda) + 1u32;
    let num = Complex::with_val(bits, inner.square_ref()) * &inner * 256u32;
    let lm1 = Complex::with_val(bits, lambda - 1u32);
    let den = l2 * Complex::with_val(bits, lm1.square_ref());
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::cplx;

    fn ctx() -> PrecisionContext {
        PrecisionContext::with_digits(64).unwrap()
    }

    #[test]
    fn lambda_one_half_gives_i() {
        let c = ctx();
        let p = period_from_lambda(&cplx(c.bits(), 0.5, 0.0), &c).unwrap();
        let d = Complex::with_val(c.bits(), &p.tau - Complex::with_val(c.bits(), (0, 1)));
        assert!(abs_f64(&d) < 1e-60);
        let l = legendre_lambda(&p, &c).unwrap() - 0.5;
        assert!(abs_f64(&l) < 1e-60);
    }

    #[test]
    fn lambda_two_has_j_1728() {
        let c = ctx();
        let p = period_from_lambda(&cplx(c.bits(), 2.0, 0.0), &c).unwrap();
        let j = j_invariant_of_tau(&p.tau, c.bits()) - 1728u32;
        assert!(abs_f64(&j) < 1e-50);
    }

    #[test]
    fn degenerate_lambda_rejected() {
        let c = ctx();
        for v in [0.0, 1.0, 1.0 + 1e-8, 1e7] {
            assert!(matches!(
                period_from_lambda(&cplx(c.bits(), v, 0.0), &c),
                Err(Error::DegenerateLambda(_))
            ));
        }
    }

    #[test]
    fn round_trip_over_orbit_and_complex_values() {
        let c = ctx();
        for (re, im) in [(-3.7, 0.0), (0.2, 0.0), (4.1, 0.0), (0.5, 2.0), (-1.0, -0.3), (0.99, 0.0)] {
            let lam = cplx(c.bits(), re, im);
            let p = period_from_lambda(&lam, &c).unwrap();
            let back = legendre_lambda(&p, &c).unwrap();
            let rel = abs_f64(&(back - &lam)) / abs_f64(&lam);
            assert!(rel < 1e-54, "lambda = {re} + {im} i, rel = {rel:e}");
        }
    }

    #[test]
    fn half_periods_at_i() {
        let c = ctx();
        let t = PeriodPoint::new(cplx(c.bits(), 0.0, 1.0)).unwrap();
        let h = half_periods(&t, &c).unwrap();
        assert!(abs_f64(&h.e2) < 1e-60);
        assert!(abs_f64(&Complex::with_val(c.bits(), &h.e1 + &h.e3)) < 1e-60);
        assert!(abs_f64(&h.g3) < 1e-40);
    }

    #[test]
    fn j_special_values() {
        let c = ctx();
        let bits = c.bits();
        let i = PeriodPoint::new(cplx(bits, 0.0, 1.0)).unwrap();
        let v = j_from_q_series(&i, 60, &c).unwrap();
        assert!(abs_f64(&(v.value - 1728u32)) < 1e-50);
        let rho = PeriodPoint::new(Complex::with_val(bits, (0.5, Float::with_val(bits, 3).sqrt() / 2u32))).unwrap();
        let v = j_from_q_series(&rho, 80, &c).unwrap();
        assert!(abs_f64(&v.value) < 1e-30);
        let two_i = PeriodPoint::new(cplx(bits, 0.0, 2.0)).unwrap();
        let v = j_from_q_series(&two_i, 40, &c).unwrap();
        assert!(abs_f64(&(v.value - 287496u32)) < 1e-50);
    }

    #[test]
    fn j_needs_imaginary_part() {
        let c = ctx();
        let t = PeriodPoint::new(cplx(c.bits(), 0.0, 0.05)).unwrap();
        assert!(matches!(
            j_from_q_series(&t, 30, &c),
            Err(Error::InsufficientImaginaryPart(_))
        ));
    }

    #[test]
    fn lambda_is_gamma2_invariant() {
        let c = ctx();
        let t = PeriodPoint::new(cplx(c.bits(), 0.31, 0.77)).unwrap();
        let t2 = PeriodPoint::new(Complex::with_val(c.bits(), &t.tau + 2u32)).unwrap();
        let a = legendre_lambda(&t, &c).unwrap();
        let b = legendre_lambda(&t2, &c).unwrap();
        assert!(abs_f64(&(a - b)) < 1e-55);
    }

    #[test]
    fn parametrize_lattice_point_is_infinity() {
        let c = ctx();
        let t = PeriodPoint::new(cplx(c.bits(), 0.1, 1.2)).unwrap();
        let z = EllipticLogarithm::new(&Complex::with_val(c.bits(), &t.tau + 3u32), &t);
        assert!(parametrize_point(&z, &c).unwrap().is_infinity());
        let half = EllipticLogarithm::new(&cplx(c.bits(), 0.5, 0.0), &t);
        match parametrize_point(&half, &c).unwrap() {
            Projective::Affine { x, .. } => assert!(abs_f64(&x) < 1e-55),
            Projective::Infinity => panic!("1/2 is not a lattice point"),
        }
    }
}
