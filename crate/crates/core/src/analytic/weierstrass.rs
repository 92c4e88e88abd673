//! Per-lattice data for `Lambda_tau = Z + Z tau`: the reduction into the
//! standard domain, theta constants there, and the half-period values pulled
//! back to the raw lattice.

use rug::{Complex, Float};

use super::reduce::{reduce_complex, round_to_i64, IntMatrix};
use super::theta::{theta3_squared_f64, ThetaSeries};
use crate::error::{Error, Result};
use crate::precision::{abs_f64, digits_to_bits, pi, PrecisionContext};

pub(crate) struct LatticeData {
    pub bits: u32,
    pub tau: Complex,
    /// Reduced point `tau_d = gamma * tau`.
    pub tau_d: Complex,
    /// `u = c tau + d`, so that `Lambda_tau = u Lambda_{tau_d}`.
    pub u: Complex,
    theta: ThetaSeries,
    pi: Float,
    /// Half-period values on the reduced lattice.
    pub e_d: [Complex; 3],
    /// Half-period values on the raw lattice.
    pub e: [Complex; 3],
    /// A fixed square root of `e3 - e1`.
    pub s: Complex,
    pole_radius: f64,
}

impl LatticeData {
    pub fn new(tau: &Complex, ctx: &PrecisionContext) -> Result<Self> {
        Self::with_bits(tau, ctx.bits(), digits_to_bits(ctx.certify_digits()), ctx.pole_radius())
    }

    pub fn with_bits(tau: &Complex, bits: u32, tail_bits: u32, pole_radius: f64) -> Result<Self> {
        if !(tau.imag().is_sign_positive() && !tau.imag().is_zero()) {
            return Err(Error::InvalidArgument("Im(tau) must be positive".into()));
        }
        let tau = Complex::with_val(bits, tau);
        let (tau_d, gamma) = reduce_complex(&tau);
        let u = gamma.automorphy(&tau);
        let theta = ThetaSeries::with_tail(&tau_d, bits, tail_bits);
        let pi = pi(bits);
        let pi2_3 = Float::with_val(bits, pi.square_ref()) / 3u32;
        let [t2, t3, t4] = &theta.nulls;
        let p4 = |t: &Complex| Complex::with_val(bits, t.square_ref()).square();
        let (t2_4, t3_4, t4_4) = (p4(t2), p4(t3), p4(t4));
        let e1 = Complex::with_val(bits, &t3_4 + &t4_4) * &pi2_3;
        let e2 = Complex::with_val(bits, &t2_4 - &t4_4) * &pi2_3;
        let e3 = -(Complex::with_val(bits, &t2_4 + &t3_4) * &pi2_3);
        let e_d = [e1, e2, e3];

        let u2 = Complex::with_val(bits, u.square_ref());
        let IntMatrix { a, b, c, d } = gamma;
        let pick = |x: i64, y: i64| -> Complex {
            let k = match (x.rem_euclid(2), y.rem_euclid(2)) {
                (1, 0) => 0,
                (1, 1) => 1,
                (0, 1) => 2,
                _ => unreachable!("gamma is unimodular"),
            };
            Complex::with_val(bits, &e_d[k] / &u2)
        };
        let e = [pick(a, c), pick(a - b, d - c), pick(b, d)];

        let diff = Complex::with_val(bits, &e[2] - &e[0]);
        let mut s = diff.sqrt();
        // Match i pi theta_3(tau)^2 on the raw point when the direct series is usable.
        let estimate = match theta3_squared_f64(&tau) {
            Some((re, im)) => {
                let p = std::f64::consts::PI;
                Complex::with_val(53, (-p * im, p * re))
            }
            None => {
                let t3sq = Complex::with_val(bits, t3.square_ref()) * &pi;
                Complex::with_val(53, t3sq.mul_i(false) / &u)
            }
        };
        let plus = abs_f64(&Complex::with_val(53, &s - &estimate));
        let minus = abs_f64(&Complex::with_val(53, &s + &estimate));
        if minus < plus {
            s = -s;
        }
        Ok(Self {
            bits,
            tau,
            tau_d,
            u,
            theta,
            pi,
            e_d,
            e,
            s,
            pole_radius,
        })
    }

    pub fn g2(&self) -> Complex {
        let sq = |x: &Complex| Complex::with_val(self.bits, x.square_ref());
        (sq(&self.e[0]) + sq(&self.e[1]) + sq(&self.e[2])) * 2u32
    }

    pub fn g3(&self) -> Complex {
        Complex::with_val(self.bits, &self.e[0] * &self.e[1]) * &self.e[2] * 4u32
    }

    /// `L(tau) = (e2 - e1) / (e3 - e1)`.
    pub fn lambda(&self) -> Complex {
        let num = Complex::with_val(self.bits, &self.e[1] - &self.e[0]);
        let den = Complex::with_val(self.bits, &self.e[2] - &self.e[0]);
        num / den
    }

    /// Representative of `z` in the half-open parallelogram `{x + y tau : x, y in [0, 1)}`.
    pub fn reduce_to_parallelogram(&self, z: &Complex) -> Complex {
        super::reduce_into_parallelogram(&Complex::with_val(self.bits, z), &self.tau)
    }

    /// Position of `z / u` relative to the nearest point of `Lambda_{tau_d}`.
    fn centered_d(&self, z: &Complex) -> Complex {
        self.center_d(&Complex::with_val(self.bits, z / &self.u))
    }

    /// `zd` translated by a point of `Lambda_{tau_d}` into the cell around the origin.
    pub fn center_d(&self, zd: &Complex) -> Complex {
        let (x, y) = coords_in(zd, &self.tau_d);
        let nx = round_to_i64(&x);
        let ny = round_to_i64(&y);
        let shift = Complex::with_val(self.bits, &self.tau_d * ny) + nx;
        Complex::with_val(self.bits, zd - shift)
    }

    /// Distance from `z` to the raw lattice.
    pub fn lattice_distance(&self, z: &Complex) -> f64 {
        let c = self.centered_d(z);
        let mut best = f64::INFINITY;
        for dx in -1i64..=1 {
            for dy in -1i64..=1 {
                let p = Complex::with_val(self.bits, &self.tau_d * dy) + dx;
                best = best.min(abs_f64(&Complex::with_val(self.bits, &c - &p)));
            }
        }
        best * abs_f64(&self.u)
    }

    /// `(wp(z), wp'(z))` on the raw lattice.
    pub fn wp(&self, z: &Complex) -> Result<(Complex, Complex)> {
        if self.lattice_distance(z) < self.pole_radius {
            return Err(Error::PoleAtLatticePoint);
        }
        let (p, dp) = self.wp_d(&self.centered_d(z));
        let u2 = Complex::with_val(self.bits, self.u.square_ref());
        let u3 = Complex::with_val(self.bits, &u2 * &self.u);
        Ok((p / u2, dp / u3))
    }

    /// `(wp, wp')` on the reduced lattice at a point already near the origin cell.
    pub fn wp_d(&self, zd: &Complex) -> (Complex, Complex) {
        let bits = self.bits;
        let v = Complex::with_val(bits, zd * &self.pi);
        let [th1, th2, th3, th4] = self.theta.at(&v);
        let [t2, t3, t4] = &self.theta.nulls;
        let pi2 = Float::with_val(bits, self.pi.square_ref());
        let t34 = Complex::with_val(bits, t3 * t4);
        let ratio = Complex::with_val(bits, &th2 / &th1);
        let p = Complex::with_val(bits, &t34 * &ratio).square() * &pi2 + &self.e_d[0];
        let nulls = Complex::with_val(bits, t2 * &t34).square();
        let pi3 = Float::with_val(bits, &pi2 * &self.pi);
        let num = Complex::with_val(bits, &th2 * &th3) * &th4 * nulls * pi3 * 2u32;
        let th1_3 = Complex::with_val(bits, th1.square_ref()) * &th1;
        let dp = -(num / th1_3);
        (p, dp)
    }
}

/// Real coordinates `(x, y)` of `z = x + y tau`.
pub(crate) fn coords_in(z: &Complex, tau: &Complex) -> (Float, Float) {
    let bits = z.prec().0.max(tau.prec().0);
    let y = Float::with_val(bits, z.imag() / tau.imag());
    let x = Float::with_val(bits, z.real() - Float::with_val(bits, &y * tau.real()));
    (x, y)
}
