//! Jacobi theta functions in the nome `q = exp(i pi tau)`, evaluated for `tau`
//! in (or near) the standard fundamental domain where the series converge fast.

use rug::Complex;

use crate::precision::pi;

pub(crate) struct ThetaSeries {
    bits: u32,
    tail_bits: u32,
    tau: Complex,
    q: Complex,
    q_quarter: Complex,
    /// Theta null values `theta_2(0), theta_3(0), theta_4(0)`.
    pub nulls: [Complex; 3],
}

impl ThetaSeries {
    #[cfg(test)]
    pub fn new(tau: &Complex, bits: u32) -> Self {
        Self::with_tail(tau, bits, bits)
    }

    /// Series are truncated once terms drop below `2^-tail_bits`.
    pub fn with_tail(tau: &Complex, bits: u32, tail_bits: u32) -> Self {
        let pi = pi(bits);
        let i_pi_tau = Complex::with_val(bits, tau * &pi).mul_i(false);
        let q = Complex::with_val(bits, i_pi_tau.exp_ref());
        let q_quarter = Complex::with_val(bits, &i_pi_tau / 4u32).exp();
        let mut s = ThetaSeries {
            bits,
            tail_bits: tail_bits.max(bits),
            tau: Complex::with_val(bits, tau),
            q,
            q_quarter,
            nulls: [
                Complex::new(bits),
                Complex::new(bits),
                Complex::new(bits),
            ],
        };
        let zero = Complex::new(bits);
        let [_, t2, t3, t4] = s.at(&zero);
        s.nulls = [t2, t3, t4];
        s
    }

    fn term_count(&self, im_v: f64) -> usize {
        let im_tau = self.tau.imag().to_f64();
        let target = self.tail_bits as f64 * std::f64::consts::LN_2 + 10.0;
        // Require pi*Im(tau)*n^2 - 2 n |Im v| > target.
        let a = std::f64::consts::PI * im_tau;
        let b = 2.0 * im_v.abs();
        let n = (b + (b * b + 4.0 * a * target).sqrt()) / (2.0 * a);
        n.ceil() as usize + 2
    }

    /// `[theta_1(v), theta_2(v), theta_3(v), theta_4(v)]`.
    pub fn at(&self, v: &Complex) -> [Complex; 4] {
        let bits = self.bits;
        let n_terms = self.term_count(v.imag().to_f64());
        let w = Complex::with_val(bits, v.mul_i_ref(false)).exp();
        let w_inv = Complex::with_val(bits, 1) / &w;
        let w2 = Complex::with_val(bits, w.square_ref());
        let w2_inv = Complex::with_val(bits, w_inv.square_ref());
        let q2 = Complex::with_val(bits, self.q.square_ref());

        // theta_1, theta_2: sum over n >= 0 of q^{n(n+1)} (w^{2n+1} -/+ w^{-(2n+1)}).
        let mut s1 = Complex::new(bits);
        let mut s2 = Complex::new(bits);
        let mut r = Complex::with_val(bits, 1); // q^{n(n+1)}
        let mut step = q2.clone(); // q^{2(n+1)}
        let mut wp = w.clone();
        let mut wm = w_inv.clone();
        // theta_3, theta_4: sum over n >= 1 of q^{n^2} (w^{2n} + w^{-2n}).
        let mut s3 = Complex::with_val(bits, 1);
        let mut s4 = Complex::with_val(bits, 1);
        let mut qn2 = self.q.clone(); // q^{n^2}
        let mut qstep = Complex::with_val(bits, &self.q * &q2); // q^{2n+1}
        let mut vp = w2.clone();
        let mut vm = w2_inv.clone();
        for n in 0..n_terms {
            let diff = Complex::with_val(bits, &wp - &wm);
            let sum = Complex::with_val(bits, &wp + &wm);
            let t1 = Complex::with_val(bits, &r * &diff);
            let t2 = Complex::with_val(bits, &r * &sum);
            if n % 2 == 0 {
                s1 += &t1;
            } else {
                s1 -= &t1;
            }
            s2 += &t2;
            r *= &step;
            step *= &q2;
            wp *= &w2;
            wm *= &w2_inv;

            let c = Complex::with_val(bits, &vp + &vm);
            let t = Complex::with_val(bits, &qn2 * &c);
            s3 += &t;
            if n % 2 == 0 {
                s4 -= &t;
            } else {
                s4 += &t;
            }
            qn2 *= &qstep;
            qstep *= &q2;
            vp *= &w2;
            vm *= &w2_inv;
        }
        // theta_1 = 2 q^{1/4} sum (-1)^n q^{n(n+1)} sin((2n+1)v), sin = (w - 1/w)/(2i).
        let theta1 = Complex::with_val(bits, &self.q_quarter * &s1).mul_i(true);
        let theta2 = Complex::with_val(bits, &self.q_quarter * &s2);
        [theta1, theta2, s3, s4]
    }
}

/// `theta_3(tau)^2` in double precision straight from the series; only used to
/// pick a consistent square-root branch.
pub(crate) fn theta3_squared_f64(tau: &Complex) -> Option<(f64, f64)> {
    let (re, im) = (tau.real().to_f64(), tau.imag().to_f64());
    if im < 1e-3 {
        return None;
    }
    // q = exp(i pi tau)
    let mag = (-std::f64::consts::PI * im).exp();
    let arg = std::f64::consts::PI * re;
    let mut sum = (1.0f64, 0.0f64);
    let mut n = 1u64;
    loop {
        let n2 = (n * n) as f64;
        let m = mag.powf(n2);
        if m < 1e-20 {
            break;
        }
        let a = arg * n2;
        sum.0 += 2.0 * m * a.cos();
        sum.1 += 2.0 * m * a.sin();
        n += 1;
        if n > 100_000 {
            return None;
        }
    }
    Some((sum.0 * sum.0 - sum.1 * sum.1, 2.0 * sum.0 * sum.1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::{abs_f64, cplx};
    use rug::Float;

    #[test]
    fn jacobi_identity_holds() {
        // theta_3^4 = theta_2^4 + theta_4^4
        let bits = 300;
        let th = ThetaSeries::new(&cplx(bits, 0.21, 1.1), bits);
        let [t2, t3, t4] = &th.nulls;
        let lhs = Complex::with_val(bits, t3.square_ref()).square();
        let rhs = Complex::with_val(bits, t2.square_ref()).square()
            + Complex::with_val(bits, t4.square_ref()).square();
        assert!(abs_f64(&(lhs - rhs)) < 1e-80);
    }

    #[test]
    fn theta1_derivative_identity() {
        // theta_1'(0) = theta_2 theta_3 theta_4 via a central difference.
        let bits = 300;
        let th = ThetaSeries::new(&cplx(bits, -0.3, 0.95), bits);
        let h = Complex::with_val(bits, (Float::with_val(bits, Float::i_exp(1, -60)), 0));
        let mh = Complex::with_val(bits, -&h);
        let d = (Complex::with_val(bits, &th.at(&h)[0] - &th.at(&mh)[0])) / (h * 2u32);
        let [t2, t3, t4] = &th.nulls;
        let prod = Complex::with_val(bits, t2 * t3) * t4;
        assert!(abs_f64(&(d - prod)) < 1e-30);
    }

    #[test]
    fn f64_theta_matches() {
        let bits = 200;
        let tau = cplx(bits, 0.1, 0.9);
        let th = ThetaSeries::new(&tau, bits);
        let sq = Complex::with_val(bits, th.nulls[1].square_ref());
        let (re, im) = theta3_squared_f64(&tau).unwrap();
        assert!((sq.real().to_f64() - re).abs() < 1e-12);
        assert!((sq.imag().to_f64() - im).abs() < 1e-12);
    }
}
