//! Inverse of the Legendre uniformization.

use rug::{Complex, Float};

use super::agm::carlson_rf;
use super::weierstrass::LatticeData;
use super::{EllipticLogarithm, PeriodPoint, Projective};
use crate::error::{Error, Result};
use crate::precision::{abs_f64, PrecisionContext};

const SEED_BITS: u32 = 96;

/// `z` in the fundamental parallelogram with `parametrize_point(z) = point`.
pub fn elliptic_log(
    point: &Projective,
    lambda: &Complex,
    tau: &PeriodPoint,
    ctx: &PrecisionContext,
) -> Result<EllipticLogarithm> {
    let ld = LatticeData::new(&tau.tau, ctx)?;
    let lam = ld.lambda();
    let gap = abs_f64(&Complex::with_val(ld.bits, &lam - lambda));
    if gap > ctx.reject_tol() * abs_f64(lambda).max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "lambda does not match L(tau) (difference {gap:e})"
        )));
    }
    let z = elliptic_log_with(&ld, point, ctx)?;
    Ok(EllipticLogarithm {
        z,
        tau: tau.clone(),
    })
}

pub(crate) fn elliptic_log_with(
    ld: &LatticeData,
    point: &Projective,
    ctx: &PrecisionContext,
) -> Result<Complex> {
    let bits = ld.bits;
    let (x, y) = match point {
        Projective::Infinity => return Ok(Complex::new(bits)),
        Projective::Affine { x, y } => (Complex::with_val(bits, x), Complex::with_val(bits, y)),
    };
    let lam = ld.lambda();
    let rhs = Complex::with_val(bits, &x * Complex::with_val(bits, &x - 1u32))
        * Complex::with_val(bits, &x - &lam);
    let lhs = Complex::with_val(bits, y.square_ref());
    let scale = abs_f64(&x).powi(3).max(1.0);
    let tol = ctx.identity_tol();
    if abs_f64(&(lhs - &rhs)) > tol * scale {
        return Err(Error::NotOnCurve);
    }

    // Exact 2-torsion: snap to the half-period.
    if abs_f64(&y) < tol * scale.sqrt() {
        let half = |re: u32, im: u32| {
            (Complex::with_val(bits, &ld.tau * im) + re) / 2u32
        };
        let cands = [
            (Complex::new(bits), half(1, 0)),
            (Complex::with_val(bits, 1), half(0, 1)),
            (lam.clone(), half(1, 1)),
        ];
        let (_, z) = cands
            .into_iter()
            .min_by(|a, b| {
                let da = abs_f64(&Complex::with_val(bits, &a.0 - &x));
                let db = abs_f64(&Complex::with_val(bits, &b.0 - &x));
                da.total_cmp(&db)
            })
            .expect("three half-periods");
        return Ok(ld.reduce_to_parallelogram(&z));
    }

    // Targets on the reduced lattice: P = u^2 wp, P' = u^3 wp'.
    let e31 = Complex::with_val(bits, &ld.e[2] - &ld.e[0]);
    let p = Complex::with_val(bits, &x * &e31) + &ld.e[0];
    let s3 = Complex::with_val(bits, ld.s.square_ref()) * &ld.s;
    let dp = Complex::with_val(bits, &y * &s3) * 2u32;
    let u2 = Complex::with_val(bits, ld.u.square_ref());
    let u3 = Complex::with_val(bits, &u2 * &ld.u);
    let pd = Complex::with_val(bits, &p * &u2);
    let dpd = Complex::with_val(bits, &dp * &u3);

    let seed = carlson_seed(ld, &pd)
        .and_then(|z| newton(ld, &pd, z, 40))
        .or_else(|| grid_seed(ld, &pd).and_then(|z| newton(ld, &pd, z, 80)))
        .ok_or_else(|| Error::PrecisionExhausted("elliptic logarithm did not converge".into()))?;
    let mut zd = seed;
    let (_, dq) = ld.wp_d(&ld.center_d(&zd));
    let same = abs_f64(&Complex::with_val(bits, &dq - &dpd));
    let opposite = abs_f64(&Complex::with_val(bits, &dq + &dpd));
    if opposite < same {
        zd = -zd;
    }
    let z = Complex::with_val(bits, &zd * &ld.u);
    Ok(ld.reduce_to_parallelogram(&z))
}

fn carlson_seed(ld: &LatticeData, pd: &Complex) -> Option<Complex> {
    let b = SEED_BITS;
    let p = Complex::with_val(b, pd);
    let args: Vec<Complex> = ld
        .e_d
        .iter()
        .map(|e| Complex::with_val(b, &p - e))
        .collect();
    let z = carlson_rf(&args[0], &args[1], &args[2], b)?;
    let m = abs_f64(&z);
    m.is_finite().then_some(z)
}

fn grid_seed(ld: &LatticeData, pd: &Complex) -> Option<Complex> {
    let n = 24;
    let b = ld.bits;
    let mut best: Option<(f64, Complex)> = None;
    for i in 0..n {
        for k in 0..n {
            let fx = (i as f64 + 0.5) / n as f64 - 0.5;
            let fy = (k as f64 + 0.5) / n as f64 - 0.5;
            let z = Complex::with_val(b, &ld.tau_d * fy) + fx;
            let (p, _) = ld.wp_d(&z);
            let d = abs_f64(&Complex::with_val(b, &p - pd));
            if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                best = Some((d, z));
            }
        }
    }
    best.map(|(_, z)| z)
}

fn newton(ld: &LatticeData, pd: &Complex, seed: Complex, max_iter: usize) -> Option<Complex> {
    let bits = ld.bits;
    let mut z = ld.center_d(&Complex::with_val(bits, &seed));
    let tol = Float::with_val(bits, Float::i_exp(1, -(bits as i32 - 16)));
    let scale = abs_f64(pd).max(1.0);
    for _ in 0..max_iter {
        let (p, dp) = ld.wp_d(&z);
        if dp.real().is_nan() || dp.is_zero() {
            return None;
        }
        let step = Complex::with_val(bits, &p - pd) / &dp;
        if !step.real().is_finite() || !step.imag().is_finite() {
            return None;
        }
        z -= &step;
        z = ld.center_d(&z);
        if Float::with_val(bits, step.abs_ref()) < tol {
            let (p, _) = ld.wp_d(&z);
            let res = abs_f64(&Complex::with_val(bits, &p - pd)) / scale;
            return (res < 2f64.powi(-(bits as i32) / 2)).then_some(z);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{parametrize_point, period_from_lambda};
    use crate::precision::cplx;

    fn ctx() -> PrecisionContext {
        PrecisionContext::with_digits(64).unwrap()
    }

    #[test]
    fn identity_and_two_torsion() {
        let c = ctx();
        let b = c.bits();
        let lam = cplx(b, 3.0, 0.0);
        let t = period_from_lambda(&lam, &c).unwrap();
        let z = elliptic_log(&Projective::Infinity, &lam, &t, &c).unwrap();
        assert!(z.z.is_zero());
        let p = Projective::Affine {
            x: Complex::new(b),
            y: Complex::new(b),
        };
        let z = elliptic_log(&p, &lam, &t, &c).unwrap();
        assert!(abs_f64(&(z.z - 0.5)) < 1e-60);
    }

    #[test]
    fn round_trip_through_parametrization() {
        let c = ctx();
        let b = c.bits();
        for (lr, li, zr, zi) in [
            (0.5, 0.0, 0.31, 0.44),
            (-2.5, 0.0, 0.73, 0.12),
            (0.2, 0.7, 0.05, 0.9),
            (4.0, 0.0, 0.5, 0.5),
        ] {
            let lam = cplx(b, lr, li);
            let t = period_from_lambda(&lam, &c).unwrap();
            let zr = Complex::with_val(b, &t.tau * zi) + zr;
            let w = EllipticLogarithm::new(&zr, &t);
            let pt = parametrize_point(&w, &c).unwrap();
            let back = elliptic_log(&pt, &lam, &t, &c).unwrap();
            let d = abs_f64(&Complex::with_val(b, &back.z - &w.z));
            assert!(d < 1e-54, "lambda = {lr}+{li}i: {d:e}");
        }
    }

    #[test]
    fn off_curve_rejected() {
        let c = ctx();
        let b = c.bits();
        let lam = cplx(b, 3.0, 0.0);
        let t = period_from_lambda(&lam, &c).unwrap();
        let p = Projective::Affine {
            x: cplx(b, 2.0, 0.0),
            y: cplx(b, 1.0, 0.0),
        };
        assert!(matches!(elliptic_log(&p, &lam, &t, &c), Err(Error::NotOnCurve)));
    }
}
