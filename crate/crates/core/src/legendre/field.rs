//! Scalar fields the group law runs over: exact rationals, exact elements of
//! a real or imaginary quadratic field, and complex numerics with a tolerance.

use std::fmt::Debug;

use rug::{Complex, Float, Integer, Rational};

use crate::precision::abs_f64;

pub trait FieldElem: Clone + Debug + Send + Sync {
    fn zero_like(&self) -> Self;
    fn from_i64_like(&self, n: i64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// `None` for zero.
    fn inv(&self) -> Option<Self>;
    /// Exact zero test, or within tolerance for numerics.
    fn is_zero(&self) -> bool;

    fn one_like(&self) -> Self {
        self.from_i64_like(1)
    }
    fn square(&self) -> Self {
        self.mul(self)
    }
    fn eq_elem(&self, o: &Self) -> bool {
        self.sub(o).is_zero()
    }
}

impl FieldElem for Rational {
    fn zero_like(&self) -> Self {
        Rational::new()
    }
    fn from_i64_like(&self, n: i64) -> Self {
        Rational::from(n)
    }
    fn add(&self, o: &Self) -> Self {
        Rational::from(self + o)
    }
    fn sub(&self, o: &Self) -> Self {
        Rational::from(self - o)
    }
    fn mul(&self, o: &Self) -> Self {
        Rational::from(self * o)
    }
    fn neg(&self) -> Self {
        Rational::from(-self)
    }
    fn inv(&self) -> Option<Self> {
        (!FieldElem::is_zero(self)).then(|| Rational::from(self.recip_ref()))
    }
    fn is_zero(&self) -> bool {
        *self.numer() == 0
    }
}

/// `a + b sqrt(d)` for a fixed squarefree `d != 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadElem {
    pub a: Rational,
    pub b: Rational,
    pub d: i64,
}

impl QuadElem {
    pub fn new(a: Rational, b: Rational, d: i64) -> Self {
        Self { a, b, d }
    }

    pub fn from_rational(a: Rational, d: i64) -> Self {
        Self::new(a, Rational::new(), d)
    }

    /// `sqrt(d)` itself.
    pub fn root(d: i64) -> Self {
        Self::new(Rational::new(), Rational::from(1), d)
    }

    pub fn conj(&self) -> Self {
        Self::new(self.a.clone(), Rational::from(-&self.b), self.d)
    }

    /// `a^2 - d b^2`.
    pub fn norm(&self) -> Rational {
        Rational::from(self.a.square_ref()) - Rational::from(self.b.square_ref()) * self.d
    }

    /// The complex embedding with `sqrt(d) -> +sqrt(d)` (`+i sqrt|d|` for `d < 0`).
    pub fn embed(&self, bits: u32) -> Complex {
        let a = Float::with_val(bits, &self.a);
        let r = Float::with_val(bits, self.d.unsigned_abs()).sqrt();
        let b = Float::with_val(bits, &self.b) * r;
        if self.d < 0 {
            Complex::with_val(bits, (a, b))
        } else {
            Complex::with_val(bits, (a + b, 0))
        }
    }

    pub fn is_rational(&self) -> bool {
        *self.b.numer() == 0
    }

    /// Least common denominator of `a` and `b`.
    pub fn denominator_lcm(&self) -> Integer {
        self.a.denom().clone().lcm(self.b.denom())
    }
}

impl FieldElem for QuadElem {
    fn zero_like(&self) -> Self {
        Self::new(Rational::new(), Rational::new(), self.d)
    }
    fn from_i64_like(&self, n: i64) -> Self {
        Self::new(Rational::from(n), Rational::new(), self.d)
    }
    fn add(&self, o: &Self) -> Self {
        Self::new(Rational::from(&self.a + &o.a), Rational::from(&self.b + &o.b), self.d)
    }
    fn sub(&self, o: &Self) -> Self {
        Self::new(Rational::from(&self.a - &o.a), Rational::from(&self.b - &o.b), self.d)
    }
    fn mul(&self, o: &Self) -> Self {
        let aa = Rational::from(&self.a * &o.a);
        let bb = Rational::from(&self.b * &o.b) * self.d;
        let ab = Rational::from(&self.a * &o.b);
        let ba = Rational::from(&self.b * &o.a);
        Self::new(aa + bb, ab + ba, self.d)
    }
    fn neg(&self) -> Self {
        Self::new(Rational::from(-&self.a), Rational::from(-&self.b), self.d)
    }
    fn inv(&self) -> Option<Self> {
        let n = self.norm();
        if *n.numer() == 0 {
            return None;
        }
        let c = self.conj();
        Some(Self::new(
            Rational::from(&c.a / &n),
            Rational::from(&c.b / &n),
            self.d,
        ))
    }
    fn is_zero(&self) -> bool {
        *self.a.numer() == 0 && *self.b.numer() == 0
    }
}

/// Complex number compared against zero with an absolute tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct NumElem {
    pub v: Complex,
    pub tol: f64,
}

impl NumElem {
    pub fn new(v: Complex, tol: f64) -> Self {
        Self { v, tol }
    }

    fn bits(&self) -> u32 {
        self.v.prec().0
    }

    fn wrap(&self, v: Complex) -> Self {
        Self { v, tol: self.tol }
    }
}

impl FieldElem for NumElem {
    fn zero_like(&self) -> Self {
        self.wrap(Complex::new(self.bits()))
    }
    fn from_i64_like(&self, n: i64) -> Self {
        self.wrap(Complex::with_val(self.bits(), n))
    }
    fn add(&self, o: &Self) -> Self {
        self.wrap(Complex::with_val(self.bits(), &self.v + &o.v))
    }
    fn sub(&self, o: &Self) -> Self {
        self.wrap(Complex::with_val(self.bits(), &self.v - &o.v))
    }
    fn mul(&self, o: &Self) -> Self {
        self.wrap(Complex::with_val(self.bits(), &self.v * &o.v))
    }
    fn neg(&self) -> Self {
        self.wrap(Complex::with_val(self.bits(), -&self.v))
    }
    fn inv(&self) -> Option<Self> {
        (!self.is_zero()).then(|| self.wrap(Complex::with_val(self.bits(), 1) / &self.v))
    }
    fn is_zero(&self) -> bool {
        abs_f64(&self.v) < self.tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_inverse() {
        let x = QuadElem::new(Rational::from((3, 2)), Rational::from(-5), -1);
        let y = x.inv().unwrap();
        let one = x.mul(&y);
        assert!(one.eq_elem(&x.one_like()));
        let r = QuadElem::root(3);
        assert!(r.square().eq_elem(&r.from_i64_like(3)));
    }

    #[test]
    fn embedding_of_i() {
        let i = QuadElem::root(-1).embed(64);
        assert_eq!(i.imag().to_f64(), 1.0);
        assert_eq!(i.real().to_f64(), 0.0);
    }
}
