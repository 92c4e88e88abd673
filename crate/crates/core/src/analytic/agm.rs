//! Complex arithmetic-geometric mean and Carlson's symmetric integral `R_F`.

use rug::{Complex, Float};

use crate::precision::abs_f64;

/// `M(a, b)` with the right-choice square root at every step.
pub(crate) fn agm(a: &Complex, b: &Complex, bits: u32) -> Option<Complex> {
    let mut a = Complex::with_val(bits, a);
    let mut b = Complex::with_val(bits, b);
    let tol = Float::with_val(bits, Float::i_exp(1, -(bits as i32 - 4)));
    for _ in 0..(4 * bits as usize + 64) {
        let next_a = Complex::with_val(bits, &a + &b) / 2u32;
        let mut next_b = Complex::with_val(bits, &a * &b).sqrt();
        let d_minus = Float::with_val(bits, Complex::with_val(bits, &next_a - &next_b).abs_ref());
        let d_plus = Float::with_val(bits, Complex::with_val(bits, &next_a + &next_b).abs_ref());
        if d_plus < d_minus {
            next_b = -next_b;
        }
        let gap = Float::with_val(bits, Complex::with_val(bits, &next_a - &next_b).abs_ref());
        let scale = Float::with_val(bits, next_a.abs_ref());
        a = next_a;
        b = next_b;
        if scale.is_zero() {
            return None;
        }
        if gap <= Float::with_val(bits, &scale * &tol) {
            return Some(a);
        }
    }
    None
}

/// Carlson's `R_F(x, y, z)` by duplication, in double-ish precision `bits`.
///
/// For distinct `e_k` and a point `p`, `R_F(p - e1, p - e2, p - e3)` is an
/// elliptic logarithm of `p` up to sign and periods.
pub(crate) fn carlson_rf(x: &Complex, y: &Complex, z: &Complex, bits: u32) -> Option<Complex> {
    let mut x = Complex::with_val(bits, x);
    let mut y = Complex::with_val(bits, y);
    let mut z = Complex::with_val(bits, z);
    for _ in 0..200 {
        let sx = Complex::with_val(bits, x.sqrt_ref());
        let sy = Complex::with_val(bits, y.sqrt_ref());
        let sz = Complex::with_val(bits, z.sqrt_ref());
        let lam = Complex::with_val(bits, &sx * &sy)
            + Complex::with_val(bits, &sx * &sz)
            + Complex::with_val(bits, &sy * &sz);
        x = (x + &lam) / 4u32;
        y = (y + &lam) / 4u32;
        z = (z + &lam) / 4u32;
        let mean = Complex::with_val(bits, &x + &y) + &z;
        let mean = mean / 3u32;
        let m = abs_f64(&mean);
        if m == 0.0 || !m.is_finite() {
            return None;
        }
        let dx = abs_f64(&Complex::with_val(bits, &mean - &x));
        let dy = abs_f64(&Complex::with_val(bits, &mean - &y));
        let dz = abs_f64(&Complex::with_val(bits, &mean - &z));
        if dx.max(dy).max(dz) / m < 2f64.powi(-(bits as i32) / 6) {
            let xd = Complex::with_val(bits, &mean - &x) / &mean;
            let yd = Complex::with_val(bits, &mean - &y) / &mean;
            let zd = -(Complex::with_val(bits, &xd + &yd));
            let e2 = Complex::with_val(bits, &xd * &yd) - Complex::with_val(bits, zd.square_ref());
            let e3 = Complex::with_val(bits, &xd * &yd) * &zd;
            let e2sq = Complex::with_val(bits, e2.square_ref());
            let series = Complex::with_val(bits, 1)
                - Complex::with_val(bits, &e2 / 10u32)
                + Complex::with_val(bits, &e3 / 14u32)
                + e2sq / 24u32
                - Complex::with_val(bits, &e2 * &e3) * 3u32 / 44u32;
            return Some(series / mean.sqrt());
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::cplx;

    #[test]
    fn agm_of_one_and_sqrt_two() {
        // Gauss's constant: M(1, sqrt 2) = 1.19814023473559220744...
        let bits = 200;
        let b = Complex::with_val(bits, 2).sqrt();
        let m = agm(&cplx(bits, 1.0, 0.0), &b, bits).unwrap();
        assert!((m.real().to_f64() - 1.198_140_234_735_592_2).abs() < 1e-15);
        assert!(m.imag().to_f64().abs() < 1e-50);
    }

    #[test]
    fn rf_matches_lemniscate_value() {
        // R_F(0, 1, 2) = 1.31102877714605990523...
        let v = carlson_rf(&cplx(64, 0.0, 0.0), &cplx(64, 1.0, 0.0), &cplx(64, 2.0, 0.0), 64).unwrap();
        assert!((v.real().to_f64() - 1.311_028_777_146_06).abs() < 1e-12);
    }
}
