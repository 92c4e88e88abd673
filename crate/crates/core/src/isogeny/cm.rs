//! Complex multiplication detection and class numbers of imaginary quadratic orders.

use rug::ops::Pow;
use rug::{Complex, Float, Integer};

use crate::analytic::{reduce_to_fundamental, PeriodPoint};
use crate::error::{Error, Result};
use crate::lll::complex_relation_basis;
use crate::precision::{abs_f64, pow10, PrecisionContext};

/// Largest `|Delta|` accepted by [`class_number`].
pub const MAX_ABS_DISCRIMINANT: i64 = 1_000_000;

/// `tau` is a root of the primitive form `a X^2 + b X + c` with `Delta = b^2 - 4ac < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CMWitness {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub discriminant: i64,
    /// `(Delta + sqrt(Delta)) / 2`, generating the order of discriminant `Delta`.
    pub rho0: Complex,
}

impl CMWitness {
    pub fn from_form(a: i64, b: i64, c: i64, bits: u32) -> Result<Self> {
        let disc = b * b - 4 * a * c;
        if disc >= 0 || a == 0 {
            return Err(Error::InvalidDiscriminant(disc));
        }
        let root = Float::with_val(bits, -disc).sqrt();
        let rho0 = Complex::with_val(bits, (Float::with_val(bits, disc) / 2, root / 2));
        Ok(Self {
            a,
            b,
            c,
            discriminant: disc,
            rho0,
        })
    }
}

fn validate(disc: i64) -> Result<()> {
    if disc >= 0 || disc.rem_euclid(4) > 1 || -disc > MAX_ABS_DISCRIMINANT {
        return Err(Error::InvalidDiscriminant(disc));
    }
    Ok(())
}

fn gcd(a: i64, b: i64) -> i64 {
    crate::analytic::gcd_u64(a.unsigned_abs(), b.unsigned_abs()) as i64
}

/// Reduced primitive forms `(a, b, c)` of discriminant `disc`:
/// `|b| <= a <= c`, with `b >= 0` when `|b| = a` or `a = c`.
pub fn reduced_forms(disc: i64) -> Result<Vec<(i64, i64, i64)>> {
    validate(disc)?;
    let mut out = Vec::new();
    let mut a = 1i64;
    while 3 * a * a <= -disc {
        for b in -a + 1..=a {
            if (b - disc).rem_euclid(2) != 0 {
                continue;
            }
            let num = b * b - disc;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (c == a && b < 0) {
                continue;
            }
            if gcd(gcd(a, b), c) == 1 {
                out.push((a, b, c));
            }
        }
        a += 1;
    }
    Ok(out)
}

/// Number of reduced primitive forms of discriminant `disc`.
pub fn class_number(disc: i64) -> Result<u64> {
    Ok(reduced_forms(disc)?.len() as u64)
}

/// Degree `(Delta^2 - Delta) / 4` of multiplication by `rho0`.
pub fn endomorphism_degree(cm: &CMWitness) -> u64 {
    let d = cm.discriminant as i128;
    ((d * d - d) / 4) as u64
}

/// Smallest-discriminant primitive quadratic relation for `tau` with
/// coefficients bounded by `coeff_bound`.
pub fn detect_cm(tau: &PeriodPoint, coeff_bound: u64, ctx: &PrecisionContext) -> Result<Option<CMWitness>> {
    let bits = ctx.bits();
    let t = Complex::with_val(bits, tau.tau());
    let values = [Complex::with_val(bits, t.square_ref()), t.clone(), Complex::with_val(bits, 1)];
    let weight = Float::with_val(bits, 10).pow(ctx.working_digits() as i32 - 10);
    let rows = complex_relation_basis(&values, &weight);

    let mut cands: Vec<[Integer; 3]> = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        cands.push([r[0].clone(), r[1].clone(), r[2].clone()]);
        for s in rows.iter().skip(i + 1) {
            for sign in [1i32, -1] {
                cands.push([
                    (&r[0] + &s[0] * Integer::from(sign)),
                    (&r[1] + &s[1] * Integer::from(sign)),
                    (&r[2] + &s[2] * Integer::from(sign)),
                ]);
            }
        }
    }

    let mut best: Option<(i64, (i64, i64, i64))> = None;
    let mut ambiguous = None;
    for cand in cands {
        let Some(mut f) = normalize(&cand, coeff_bound) else { continue };
        let disc = f.1 * f.1 - 4 * f.0 * f.2;
        if disc >= 0 {
            continue;
        }
        if f.0 < 0 {
            f = (-f.0, -f.1, -f.2);
        }
        let resid = Complex::with_val(bits, &values[0] * f.0) + Complex::with_val(bits, &t * f.1) + f.2;
        let r = abs_f64(&resid);
        if r < ctx.accept_tol() {
            if best.is_none_or(|(d, _)| -disc < -d) {
                best = Some((disc, f));
            }
        } else if r < ctx.reject_tol() {
            ambiguous = Some(r);
        }
    }
    let Some((disc, (a, b, c))) = best else {
        return match ambiguous {
            Some(r) => Err(Error::PrecisionExhausted(format!(
                "quadratic relation residual {r:e} between thresholds"
            ))),
            None => Ok(None),
        };
    };
    confirm_reduced_root(&t, disc, ctx)?;
    Ok(Some(CMWitness::from_form(a, b, c, bits)?))
}

/// Divides out the content; `None` if zero or beyond the coefficient bound.
fn normalize(v: &[Integer; 3], bound: u64) -> Option<(i64, i64, i64)> {
    let g = Integer::from(v[0].gcd_ref(&v[1])).gcd(&v[2]);
    if g == 0 {
        return None;
    }
    let e: Vec<i64> = v
        .iter()
        .map(|x| Integer::from(x / &g).to_i64())
        .collect::<Option<Vec<_>>>()?;
    if e.iter().any(|x| x.unsigned_abs() > bound) || e[0] == 0 {
        return None;
    }
    Some((e[0], e[1], e[2]))
}

/// The reduced representative of `tau` must be the root of a reduced form of `disc`.
fn confirm_reduced_root(tau: &Complex, disc: i64, ctx: &PrecisionContext) -> Result<()> {
    if -disc > MAX_ABS_DISCRIMINANT {
        return Ok(());
    }
    let bits = ctx.bits();
    let (red, _) = reduce_to_fundamental(tau);
    let sq = Float::with_val(bits, -disc).sqrt();
    let tol = pow10(-(ctx.working_digits() as i32) / 2);
    for (a, b, _) in reduced_forms(disc)? {
        let root = Complex::with_val(bits, (Float::with_val(bits, -b), sq.clone())) / (2 * a);
        for shift in [0i64, 1, -1] {
            let cand = Complex::with_val(bits, &root + shift);
            if abs_f64(&Complex::with_val(bits, red.tau() - &cand)) < tol {
                return Ok(());
            }
        }
    }
    Err(Error::PrecisionExhausted(format!(
        "reduced point does not match any reduced form of discriminant {disc}"
    )))
}
