//! Group law on the Legendre curves `Y^2 Z = X (X - Z) (X - lambda Z)`.

mod field;

use rug::{Complex, Integer, Rational};

use crate::error::{Error, Result};
use crate::precision::abs_f64;

pub use field::{FieldElem, NumElem, QuadElem};

/// Exact rational or numeric complex scalar.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Exact(Rational),
    Numeric(Complex),
}

impl Scalar {
    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn to_complex(&self, bits: u32) -> Complex {
        match self {
            Scalar::Exact(q) => Complex::with_val(bits, q),
            Scalar::Numeric(z) => Complex::with_val(bits, z),
        }
    }
}

/// The Legendre parameter `lambda`, never `0` or `1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LegendreParam(Scalar);

impl LegendreParam {
    pub fn exact(q: Rational) -> Result<Self> {
        if q == 0 || q == 1 {
            return Err(Error::DegenerateLambda(format!("lambda = {q}")));
        }
        Ok(Self(Scalar::Exact(q)))
    }

    pub fn numeric(z: Complex) -> Result<Self> {
        let d0 = abs_f64(&z);
        let d1 = abs_f64(&Complex::with_val(z.prec().0, &z - 1u32));
        if d0 == 0.0 || d1 == 0.0 {
            return Err(Error::DegenerateLambda("lambda is 0 or 1".into()));
        }
        Ok(Self(Scalar::Numeric(z)))
    }

    pub fn value(&self) -> &Scalar {
        &self.0
    }

    pub fn is_exact(&self) -> bool {
        self.0.is_exact()
    }
}

/// `2^8 (l^2 - l + 1)^3 / (l^2 (l - 1)^2)` over any field.
pub fn j_of<F: FieldElem>(l: &F) -> Option<F> {
    let l2 = l.square();
    let inner = l2.sub(l).add(&l.one_like());
    let num = inner.square().mul(&inner).mul(&l.from_i64_like(256));
    let lm1 = l.sub(&l.one_like());
    let den = l2.mul(&lm1.square());
    den.inv().map(|d| num.mul(&d))
}

/// `J(lambda)`, exact for exact input.
pub fn j_invariant(lambda: &LegendreParam) -> Result<Scalar> {
    match &lambda.0 {
        Scalar::Exact(q) => j_rational(q).map(Scalar::Exact),
        Scalar::Numeric(z) => {
            let e = NumElem::new(z.clone(), 0.0);
            j_of(&e)
                .map(|v| Scalar::Numeric(v.v))
                .ok_or_else(|| Error::DegenerateLambda("lambda is 0 or 1".into()))
        }
    }
}

pub fn j_rational(lambda: &Rational) -> Result<Rational> {
    j_of(lambda).ok_or_else(|| Error::DegenerateLambda(format!("lambda = {lambda}")))
}

/// A point on `E_lambda`, normalized to `[x : y : 1]` or `[0 : 1 : 0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint<F> {
    lambda: F,
    affine: Option<(F, F)>,
}

impl<F: FieldElem> CurvePoint<F> {
    pub fn infinity(lambda: F) -> Self {
        Self {
            lambda,
            affine: None,
        }
    }

    /// Affine point, checked against the curve equation.
    pub fn new(lambda: F, x: F, y: F) -> Result<Self> {
        if !on_curve(&lambda, &x, &y) {
            return Err(Error::NotOnCurve);
        }
        Ok(Self {
            lambda,
            affine: Some((x, y)),
        })
    }

    /// From projective coordinates `[X : Y : Z]`, not all zero.
    pub fn from_projective(lambda: F, xyz: [F; 3]) -> Result<Self> {
        let [x, y, z] = xyz;
        match z.inv() {
            Some(zi) => Self::new(lambda, x.mul(&zi), y.mul(&zi)),
            None => {
                if !x.is_zero() || y.is_zero() {
                    return Err(Error::NotOnCurve);
                }
                Ok(Self::infinity(lambda))
            }
        }
    }

    pub(crate) fn new_unchecked(lambda: F, x: F, y: F) -> Self {
        Self {
            lambda,
            affine: Some((x, y)),
        }
    }

    pub fn lambda(&self) -> &F {
        &self.lambda
    }

    pub fn is_infinity(&self) -> bool {
        self.affine.is_none()
    }

    pub fn xy(&self) -> Option<(&F, &F)> {
        self.affine.as_ref().map(|(x, y)| (x, y))
    }

    pub fn to_projective(&self) -> [F; 3] {
        let l = &self.lambda;
        match &self.affine {
            None => [l.zero_like(), l.one_like(), l.zero_like()],
            Some((x, y)) => [x.clone(), y.clone(), l.one_like()],
        }
    }

    /// `-[X : Y : Z] = [X : -Y : Z]`.
    pub fn neg(&self) -> Self {
        Self {
            lambda: self.lambda.clone(),
            affine: self.affine.as_ref().map(|(x, y)| (x.clone(), y.neg())),
        }
    }

    pub fn same_point(&self, o: &Self) -> bool {
        match (&self.affine, &o.affine) {
            (None, None) => true,
            (Some((x1, y1)), Some((x2, y2))) => x1.eq_elem(x2) && y1.eq_elem(y2),
            _ => false,
        }
    }

    fn check_parent(&self, o: &Self) -> Result<()> {
        if self.lambda.eq_elem(&o.lambda) {
            Ok(())
        } else {
            Err(Error::ParentMismatch)
        }
    }
}

fn on_curve<F: FieldElem>(lambda: &F, x: &F, y: &F) -> bool {
    let one = x.one_like();
    let rhs = x.mul(&x.sub(&one)).mul(&x.sub(lambda));
    y.square().eq_elem(&rhs)
}

/// Chord-and-tangent sum.
pub fn add<F: FieldElem>(p: &CurvePoint<F>, q: &CurvePoint<F>) -> Result<CurvePoint<F>> {
    p.check_parent(q)?;
    let (x1, y1) = match &p.affine {
        None => return Ok(q.clone()),
        Some(c) => c,
    };
    let (x2, y2) = match &q.affine {
        None => return Ok(p.clone()),
        Some(c) => c,
    };
    let lam = &p.lambda;
    let one = lam.one_like();
    let a2 = one.add(lam).neg();
    let slope = if x1.eq_elem(x2) {
        if y1.add(y2).is_zero() {
            return Ok(CurvePoint::infinity(lam.clone()));
        }
        // (3 x^2 + 2 a2 x + lambda) / (2 y)
        let three = lam.from_i64_like(3);
        let two = lam.from_i64_like(2);
        let num = three.mul(&x1.square()).add(&two.mul(&a2).mul(x1)).add(lam);
        let den = two.mul(y1);
        match den.inv() {
            Some(d) => num.mul(&d),
            None => return Ok(CurvePoint::infinity(lam.clone())),
        }
    } else {
        let den = x2.sub(x1).inv().ok_or(Error::NotOnCurve)?;
        y2.sub(y1).mul(&den)
    };
    let x3 = slope.square().sub(&a2).sub(x1).sub(x2);
    let y3 = y1.add(&slope.mul(&x3.sub(x1))).neg();
    Ok(CurvePoint::new_unchecked(lam.clone(), x3, y3))
}

pub fn double<F: FieldElem>(p: &CurvePoint<F>) -> CurvePoint<F> {
    add(p, p).expect("same parent")
}

/// `x(2P) = (x^2 - lambda)^2 / (4 x (x - 1) (x - lambda))`; `None` when `2P = O`.
pub fn x_double<F: FieldElem>(x: &F, lambda: &F) -> Option<F> {
    let one = x.one_like();
    let num = x.square().sub(lambda).square();
    let den = x.mul(&x.sub(&one)).mul(&x.sub(lambda)).mul(&x.from_i64_like(4));
    den.inv().map(|d| num.mul(&d))
}

/// `k P` by double-and-add.
pub fn scalar_mul<F: FieldElem>(k: i64, p: &CurvePoint<F>) -> CurvePoint<F> {
    let base = if k < 0 { p.neg() } else { p.clone() };
    let mut n = k.unsigned_abs();
    let mut acc = CurvePoint::infinity(p.lambda.clone());
    let mut pow = base;
    while n > 0 {
        if n & 1 == 1 {
            acc = add(&acc, &pow).expect("same parent");
        }
        n >>= 1;
        if n > 0 {
            pow = double(&pow);
        }
    }
    acc
}

/// Smallest `n <= max_order` with `n P = O`.
pub fn is_torsion<F: FieldElem>(p: &CurvePoint<F>, max_order: u32) -> Result<Option<u32>> {
    if max_order > 64 {
        return Err(Error::InvalidArgument(format!("max_order = {max_order} > 64")));
    }
    let mut q = p.clone();
    for n in 1..=max_order {
        if q.is_infinity() {
            return Ok(Some(n));
        }
        q = add(&q, p)?;
    }
    Ok(None)
}

/// Exact square root of a nonnegative rational, if it is a square.
pub fn rational_sqrt(q: &Rational) -> Option<Rational> {
    if *q < 0 {
        return None;
    }
    let (n, d) = (q.numer(), q.denom());
    if !n.is_perfect_square() || !d.is_perfect_square() {
        return None;
    }
    Some(Rational::from((Integer::from(n.sqrt_ref()), Integer::from(d.sqrt_ref()))))
}

/// Rational points with `x = p / q`, `|p|, q <= bound`, `y > 0`, excluding 2-torsion.
pub fn small_rational_points(lambda: &Rational, bound: i64) -> Vec<CurvePoint<Rational>> {
    let mut out = Vec::new();
    for q in 1..=bound {
        for p in -bound..=bound {
            if Integer::from(p).gcd(&Integer::from(q)) != 1 {
                continue;
            }
            let x = Rational::from((p, q));
            let rhs = (&x * Rational::from(&x - 1u32)) * Rational::from(&x - lambda);
            if rhs == 0 {
                continue;
            }
            if let Some(y) = rational_sqrt(&rhs) {
                out.push(CurvePoint::new_unchecked(lambda.clone(), x, y));
            }
        }
    }
    out
}
