//! Weil, H1 and Néron–Tate heights.
//!
//! Heights of points are heights of the projective embedding `[X : Y : Z]`.
//! Points may live over `Q` or over a quadratic field `Q(sqrt d)`.

use rug::{Complex, Float, Integer, Rational};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::legendre::{double, x_double, CurvePoint, FieldElem, QuadElem, Scalar};
use crate::lll::complex_relation_basis;
use crate::precision::abs_f64;

/// Default cap on the bit size of a coordinate during doubling.
pub const DEFAULT_COORDINATE_CAP_BITS: u64 = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeightValue {
    pub value: f64,
    pub error_bound: f64,
}

/// `max(|p|, |q|)` for exact rationals, `+inf` otherwise.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum H1 {
    Finite(Integer),
    Infinite,
}

fn ln_int(n: &Integer) -> f64 {
    if *n == 0 {
        return f64::NEG_INFINITY;
    }
    let bits = n.significant_bits();
    if bits < 1000 {
        return n.to_f64().abs().ln();
    }
    // ln |n| = ln(|n| / 2^k) + k ln 2
    let k = bits - 64;
    let top = Integer::from(n.abs_ref()) >> k;
    top.to_f64().ln() + k as f64 * std::f64::consts::LN_2
}

pub fn weil_height_rational(x: &Rational) -> HeightValue {
    let m = x.numer().clone().abs().max(x.denom().clone());
    HeightValue {
        value: ln_int(&m).max(0.0),
        error_bound: 0.0,
    }
}

pub fn h1_height(x: &Scalar) -> H1 {
    match x {
        Scalar::Exact(q) => H1::Finite(q.numer().clone().abs().max(q.denom().clone())),
        Scalar::Numeric(_) => H1::Infinite,
    }
}

/// Fields whose points have a computable absolute Weil height.
pub trait HeightField: FieldElem {
    /// Logarithmic height of the projective point with the given coordinates.
    fn projective_height(coords: &[Self]) -> f64;
    /// Rough storage size in bits.
    fn bit_size(&self) -> u64;
}

fn rational_bits(q: &Rational) -> u64 {
    (q.numer().significant_bits() + q.denom().significant_bits()) as u64
}

impl HeightField for Rational {
    fn projective_height(coords: &[Self]) -> f64 {
        let l = coords
            .iter()
            .fold(Integer::from(1), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<Integer> = coords
            .iter()
            .map(|c| c.numer() * Integer::from(&l / c.denom()))
            .collect();
        let g = ints.iter().fold(Integer::new(), |g, x| g.gcd(x));
        ints.iter()
            .map(|x| ln_int(&Integer::from(x / &g)))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn bit_size(&self) -> u64 {
        rational_bits(self)
    }
}

/// Integer coordinates of `a + b sqrt d` in an integral basis `{1, omega}`.
fn ok_coords(a: &Integer, b: &Integer, d: i64) -> (Integer, Integer) {
    if d.rem_euclid(4) == 1 {
        // omega = (1 + sqrt d) / 2, sqrt d = 2 omega - 1
        (Integer::from(a - b), Integer::from(b * 2u32))
    } else {
        (a.clone(), b.clone())
    }
}

/// `(p + q omega) * omega` in coordinates.
fn times_omega(p: &Integer, q: &Integer, d: i64) -> (Integer, Integer) {
    if d.rem_euclid(4) == 1 {
        let c = (d - 1) / 4;
        (Integer::from(q * c), Integer::from(p + q))
    } else {
        (Integer::from(q * d), p.clone())
    }
}

/// Norm of the ideal generated by elements given in integral-basis coordinates.
fn ideal_norm(gens: &[(Integer, Integer)], d: i64) -> Integer {
    let mut vecs = Vec::with_capacity(2 * gens.len());
    for (p, q) in gens {
        vecs.push((p.clone(), q.clone()));
        vecs.push(times_omega(p, q, d));
    }
    let mut g = Integer::new();
    for i in 0..vecs.len() {
        for j in i + 1..vecs.len() {
            let m = Integer::from(&vecs[i].0 * &vecs[j].1) - Integer::from(&vecs[i].1 * &vecs[j].0);
            g = g.gcd(&m);
        }
    }
    g
}

impl HeightField for QuadElem {
    fn projective_height(coords: &[Self]) -> f64 {
        let d = coords[0].d;
        let l = coords
            .iter()
            .fold(Integer::from(1), |acc, c| acc.lcm(&c.denominator_lcm()));
        let scaled: Vec<(Integer, Integer)> = coords
            .iter()
            .map(|c| {
                let a = Rational::from(&c.a * &l);
                let b = Rational::from(&c.b * &l);
                (a.numer().clone(), b.numer().clone())
            })
            .collect();
        let gens: Vec<(Integer, Integer)> = scaled.iter().map(|(a, b)| ok_coords(a, b, d)).collect();
        let norm = ideal_norm(&gens, d);
        let bits = 64 + scaled
            .iter()
            .map(|(a, b)| a.significant_bits().max(b.significant_bits()))
            .max()
            .unwrap_or(0)
            * 2;
        let emb = |sign: i32| -> f64 {
            scaled
                .iter()
                .map(|(a, b)| {
                    let mut e = QuadElem::new(Rational::from(a.clone()), Rational::from(b.clone()), d);
                    if sign < 0 {
                        e = e.conj();
                    }
                    let v = e.embed(bits);
                    let m = Float::with_val(bits, v.abs_ref());
                    if m.is_zero() {
                        f64::NEG_INFINITY
                    } else {
                        m.ln().to_f64()
                    }
                })
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let arch = if d < 0 { emb(1) } else { 0.5 * (emb(1) + emb(-1)) };
        arch - 0.5 * ln_int(&norm)
    }

    fn bit_size(&self) -> u64 {
        rational_bits(&self.a) + rational_bits(&self.b)
    }
}

/// Height of `[X : Y : Z]` for a curve point; `0` at the identity.
pub fn point_height<F: HeightField>(p: &CurvePoint<F>) -> f64 {
    if p.is_infinity() {
        return 0.0;
    }
    F::projective_height(&p.to_projective())
}

fn lambda_constant<F: HeightField>(lambda: &F) -> f64 {
    let h = F::projective_height(&[lambda.clone(), lambda.one_like()]);
    12.0 * h.max(1.0)
}

fn point_bits<F: HeightField>(p: &CurvePoint<F>) -> u64 {
    p.xy().map_or(0, |(x, y)| x.bit_size().max(y.bit_size()))
}

/// `4^-n h(2^n P)` at the largest `n <= max_doublings` within the default coordinate cap.
pub fn neron_tate<F: HeightField>(p: &CurvePoint<F>, max_doublings: u32) -> Result<HeightValue> {
    neron_tate_capped(p, max_doublings, DEFAULT_COORDINATE_CAP_BITS)
}

pub fn neron_tate_capped<F: HeightField>(
    p: &CurvePoint<F>,
    max_doublings: u32,
    cap_bits: u64,
) -> Result<HeightValue> {
    if max_doublings > 10 {
        return Err(Error::InvalidArgument(format!(
            "max_doublings = {max_doublings} > 10"
        )));
    }
    let start = point_bits(p);
    if start > cap_bits {
        return Err(Error::CoordinateBlowup {
            bits: start,
            cap: cap_bits,
        });
    }
    let c = lambda_constant(p.lambda());
    let mut q = p.clone();
    let mut n = 0u32;
    while n < max_doublings && !q.is_infinity() {
        let next = double(&q);
        if point_bits(&next) > cap_bits {
            break;
        }
        q = next;
        n += 1;
    }
    if q.is_infinity() {
        // Torsion: the limit is exactly zero.
        return Ok(HeightValue {
            value: 0.0,
            error_bound: c / 4f64.powi(max_doublings as i32),
        });
    }
    let scale = 4f64.powi(n as i32);
    Ok(HeightValue {
        value: point_height(&q) / scale,
        error_bound: c / scale,
    })
}

/// Canonical height from the x-coordinate alone,
/// `(3/2) 4^-n h(x(2^n P))`, in the same normalization as [`neron_tate`].
///
/// Only `x` is needed, so points whose `y` lies outside the field of `x`
/// (for example points on quadratic twists) are covered.
pub fn neron_tate_x<F: HeightField>(x: &F, lambda: &F, max_doublings: u32) -> Result<HeightValue> {
    if max_doublings > 10 {
        return Err(Error::InvalidArgument(format!(
            "max_doublings = {max_doublings} > 10"
        )));
    }
    let c = lambda_constant(lambda);
    let mut cur = x.clone();
    let mut n = 0u32;
    while n < max_doublings {
        match x_double(&cur, lambda) {
            None => {
                return Ok(HeightValue {
                    value: 0.0,
                    error_bound: c / 4f64.powi(max_doublings as i32),
                })
            }
            Some(next) => {
                if next.bit_size() > DEFAULT_COORDINATE_CAP_BITS {
                    break;
                }
                cur = next;
                n += 1;
            }
        }
    }
    let scale = 4f64.powi(n as i32);
    let h = F::projective_height(&[cur.clone(), cur.one_like()]);
    Ok(HeightValue {
        value: 1.5 * h / scale,
        error_bound: c / scale,
    })
}

/// Outcome of comparing `h(phi P)` with `deg phi * h(P)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityResidual {
    pub residual: f64,
    pub budget: f64,
}

impl IdentityResidual {
    pub fn holds(&self) -> bool {
        self.residual <= self.budget
    }
}

/// `|h(phi P) - deg(phi) h(P)|` together with its error budget.
pub fn check_isogeny_height_identity<F: HeightField, G: HeightField>(
    p: &CurvePoint<F>,
    phi_degree: u64,
    phi_image: &CurvePoint<G>,
    max_doublings: u32,
) -> Result<IdentityResidual> {
    let h1 = neron_tate(p, max_doublings)?;
    let h2 = neron_tate(phi_image, max_doublings)?;
    let deg = phi_degree as f64;
    Ok(IdentityResidual {
        residual: (h2.value - deg * h1.value).abs(),
        budget: h2.error_bound + deg * h1.error_bound,
    })
}

/// As [`check_isogeny_height_identity`] from x-coordinates only.
pub fn check_isogeny_height_identity_x<F: HeightField, G: HeightField>(
    p: (&F, &F),
    phi_degree: u64,
    image: (&G, &G),
    max_doublings: u32,
) -> Result<IdentityResidual> {
    let h1 = neron_tate_x(p.0, p.1, max_doublings)?;
    let h2 = neron_tate_x(image.0, image.1, max_doublings)?;
    let deg = phi_degree as f64;
    Ok(IdentityResidual {
        residual: (h2.value - deg * h1.value).abs(),
        budget: h2.error_bound + deg * h1.error_bound,
    })
}

/// Recognizes a numeric value as an element of `Q(sqrt d)` with denominators
/// of at most `max_bits` bits.
pub fn recognize_quadratic(v: &Complex, d: i64, max_bits: u32) -> Option<QuadElem> {
    let bits = v.prec().0;
    if 2 * max_bits + 40 > bits {
        return None;
    }
    let root = QuadElem::root(d).embed(bits);
    let one = Complex::with_val(bits, 1);
    let values = [Complex::with_val(bits, v), one, root];
    let weight = Float::with_val(bits, Float::i_exp(1, (bits - 20) as i32));
    let rows = complex_relation_basis(&values, &weight);
    for row in rows.iter().take(2) {
        let (c0, c1, c2) = (&row[0], &row[1], &row[2]);
        if *c0 == 0 || c0.significant_bits() > max_bits {
            continue;
        }
        let a = Rational::from((Integer::from(-c1), c0.clone()));
        let b = Rational::from((Integer::from(-c2), c0.clone()));
        let cand = QuadElem::new(a, b, d);
        let err = abs_f64(&Complex::with_val(bits, cand.embed(bits) - v));
        let scale = abs_f64(v).max(1.0);
        if err < scale * 2f64.powi(-(bits as i32) / 2) {
            return Some(cand);
        }
    }
    None
}

/// Recognizes a numeric value as a rational with numerator and denominator
/// of at most `max_bits` bits.
pub fn recognize_rational(v: &Complex, max_bits: u32) -> Option<Rational> {
    let bits = v.prec().0;
    if 2 * max_bits + 40 > bits {
        return None;
    }
    let scale = abs_f64(v).max(1.0);
    if v.imag().to_f64().abs() > scale * 2f64.powi(-(bits as i32) / 2) {
        return None;
    }
    let values = [Float::with_val(bits, v.real()), Float::with_val(bits, 1)];
    let weight = Float::with_val(bits, Float::i_exp(1, (bits - 20) as i32));
    let rows = crate::lll::real_relation_basis(&values, &weight);
    let row = &rows[0];
    if row[0] == 0 || row[0].significant_bits() > max_bits || row[1].significant_bits() > max_bits {
        return None;
    }
    let cand = Rational::from((Integer::from(-&row[1]), row[0].clone()));
    let err = Float::with_val(bits, v.real() - &cand).to_f64().abs();
    (err < scale * 2f64.powi(-(bits as i32) / 2)).then_some(cand)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::legendre::{scalar_mul, small_rational_points};
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn rational_recognition() {
        let bits = 256;
        let v = Complex::with_val(bits, (Rational::from((-355, 113)), 0));
        assert_eq!(recognize_rational(&v, 64), Some(q(-355, 113)));
        let pi = Complex::with_val(bits, rug::float::Constant::Pi);
        assert_eq!(recognize_rational(&pi, 64), None);
    }

    #[test]
    fn weil_examples() {
        assert!((weil_height_rational(&q(1, 2)).value - 2f64.ln()).abs() < 1e-15);
        assert_eq!(weil_height_rational(&q(0, 1)).value, 0.0);
        assert!((weil_height_rational(&q(-7, 3)).value - 7f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn h1_examples() {
        assert_eq!(h1_height(&Scalar::Exact(q(3, 7))), H1::Finite(Integer::from(7)));
        assert_eq!(h1_height(&Scalar::Exact(q(5, 1))), H1::Finite(Integer::from(5)));
        let third = Complex::with_val(64, 1) / 3u32;
        assert_eq!(h1_height(&Scalar::Numeric(third)), H1::Infinite);
    }

    #[test]
    fn torsion_height_vanishes() {
        let l = q(3, 1);
        let t = CurvePoint::new(l, q(0, 1), q(0, 1)).unwrap();
        let h = neron_tate(&t, 6).unwrap();
        assert!(h.value <= h.error_bound);
    }

    #[test]
    fn quadratic_height_agrees_with_rational_on_rationals() {
        let pts = small_rational_points(&q(1, 3), 12);
        for p in pts.iter().take(4) {
            let (x, y) = p.xy().unwrap();
            for d in [-1, 3, 5] {
                let lift = |r: &Rational| QuadElem::from_rational(r.clone(), d);
                let pq = CurvePoint::new(lift(p.lambda()), lift(x), lift(y)).unwrap();
                assert!((point_height(&pq) - point_height(p)).abs() < 1e-12, "d = {d}");
            }
        }
    }

    #[test]
    fn quadratic_height_is_scale_invariant() {
        let d = -1;
        let a = QuadElem::new(q(3, 1), q(2, 1), d);
        let b = QuadElem::new(q(1, 5), q(-1, 1), d);
        let c = QuadElem::new(q(1, 1), q(0, 1), d);
        let base = QuadElem::projective_height(&[a.clone(), b.clone(), c.clone()]);
        let k = QuadElem::new(q(7, 3), q(11, 1), d);
        let scaled = QuadElem::projective_height(&[a.mul(&k), b.mul(&k), c.mul(&k)]);
        assert!((base - scaled).abs() < 1e-12);
    }

    #[test]
    fn naive_minus_canonical_within_constant() {
        for l in [q(1, 3), q(-1, 1), q(2, 1), q(5, 1), q(1, 2)] {
            for p in small_rational_points(&l, 10).iter().take(3) {
                let h = point_height(p);
                let hh = neron_tate(p, 8).unwrap();
                let c = lambda_constant(&l);
                assert!((h - hh.value).abs() < c, "lambda = {l}");
            }
        }
    }

    #[test]
    fn x_only_height_matches_projective() {
        for l in [q(1, 3), q(5, 1), q(-3, 1)] {
            for p in small_rational_points(&l, 10).iter().take(3) {
                let a = neron_tate(p, 7).unwrap();
                let b = neron_tate_x(p.xy().unwrap().0, &l, 7).unwrap();
                assert!((a.value - b.value).abs() <= a.error_bound + b.error_bound);
                assert!((a.value - b.value).abs() < 1e-3 * a.value.max(1.0), "{a:?} {b:?}");
            }
        }
    }

    #[test]
    fn recognizes_gaussian_rational() {
        let bits = 400;
        let v = QuadElem::new(q(-17, 12), q(5, 7), -1);
        let got = recognize_quadratic(&v.embed(bits), -1, 40).unwrap();
        assert_eq!(got, v);
        let w = QuadElem::new(q(3, 4), q(-2, 9), 3);
        assert_eq!(recognize_quadratic(&w.embed(bits), 3, 40).unwrap(), w);
    }

    #[test]
    fn multiplication_scaling() {
        let l = q(1, 3);
        let p = small_rational_points(&l, 12)
            .into_iter()
            .find(|p| crate::legendre::is_torsion(p, 16).unwrap().is_none())
            .unwrap();
        for k in [2i64, 3] {
            let r = check_isogeny_height_identity(&p, (k * k) as u64, &scalar_mul(k, &p), 6).unwrap();
            assert!(r.holds(), "k = {k}: {r:?}");
        }
    }

    proptest! {
        #[test]
        fn weil_height_inversion_symmetric(n in -10_000i64..10_000, d in 1i64..10_000) {
            prop_assume!(n != 0);
            let x = q(n, d);
            let inv = Rational::from(x.recip_ref());
            prop_assert_eq!(weil_height_rational(&x).value, weil_height_rational(&inv).value);
        }

        #[test]
        fn neron_tate_even_and_error_monotone(idx in 0usize..8) {
            let l = q(1, 3);
            let pts = small_rational_points(&l, 12);
            let p = &pts[idx % pts.len()];
            let a = neron_tate(p, 5).unwrap();
            let b = neron_tate(&p.neg(), 5).unwrap();
            prop_assert_eq!(a.value, b.value);
            let c = neron_tate(p, 6).unwrap();
            prop_assert!(c.error_bound < a.error_bound);
        }
    }
}
