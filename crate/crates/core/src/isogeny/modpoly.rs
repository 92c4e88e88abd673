//! Classical modular polynomials by q-expansion sampling and interpolation.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::{Arc, RwLock};

use rug::{Complex, Float, Integer, Rational};

use crate::analytic::{j_invariant_of_tau, IntMatrix};
use crate::error::{Error, Result};
use crate::precision::{digits_to_bits, PrecisionContext};

/// Largest level computed by default.
pub const DEFAULT_LEVEL_CAP: u32 = 7;

/// `Phi_N(X, Y)` with exact integer coefficients, keyed by `(eX, eY)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModularPolynomial {
    pub level: u32,
    pub coeffs: BTreeMap<(u32, u32), Integer>,
}

/// `psi(N) = N prod_{p | N} (1 + 1/p)`.
pub fn psi(n: u32) -> u32 {
    let mut m = n;
    let mut out = n;
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            out = out / p * (p + 1);
            while m.is_multiple_of(p) {
                m /= p;
            }
        }
        p += 1;
    }
    if m > 1 {
        out = out / m * (m + 1);
    }
    out
}

/// Primitive `(a b; 0 d)` with `ad = N`, `0 <= b < d`, `gcd(a, b, d) = 1`.
pub fn primitive_cosets(n: u32) -> Vec<IntMatrix> {
    let mut out = Vec::new();
    for a in 1..=n {
        if !n.is_multiple_of(a) {
            continue;
        }
        let d = n / a;
        for b in 0..d {
            let g = crate::analytic::IntMatrix::new(a as i64, b as i64, 0, d as i64);
            if g.is_primitive() {
                out.push(g);
            }
        }
    }
    out
}

impl ModularPolynomial {
    pub fn degree(&self) -> u32 {
        psi(self.level)
    }

    pub fn coeff(&self, ex: u32, ey: u32) -> Integer {
        self.coeffs.get(&(ex, ey)).cloned().unwrap_or_default()
    }

    pub fn is_symmetric(&self) -> bool {
        self.coeffs
            .iter()
            .all(|(&(ex, ey), c)| self.coeffs.get(&(ey, ex)) == Some(c))
    }

    pub fn degree_in_x(&self) -> u32 {
        self.coeffs.keys().map(|k| k.0).max().unwrap_or(0)
    }

    /// Exact value at rational arguments.
    pub fn eval_rational(&self, x: &Rational, y: &Rational) -> Rational {
        let deg = self.degree_in_x().max(self.coeffs.keys().map(|k| k.1).max().unwrap_or(0));
        let mut xp = vec![Rational::from(1)];
        let mut yp = vec![Rational::from(1)];
        for i in 1..=deg as usize {
            xp.push(Rational::from(&xp[i - 1] * x));
            yp.push(Rational::from(&yp[i - 1] * y));
        }
        let mut s = Rational::new();
        for (&(ex, ey), c) in &self.coeffs {
            s += Rational::from(&xp[ex as usize] * &yp[ey as usize]) * c;
        }
        s
    }

    pub fn eval_complex(&self, x: &Complex, y: &Complex) -> Complex {
        let bits = x.prec().0.max(y.prec().0);
        let deg = self.coeffs.keys().map(|k| k.0.max(k.1)).max().unwrap_or(0) as usize;
        let mut xp = vec![Complex::with_val(bits, 1)];
        let mut yp = vec![Complex::with_val(bits, 1)];
        for i in 1..=deg {
            xp.push(Complex::with_val(bits, &xp[i - 1] * x));
            yp.push(Complex::with_val(bits, &yp[i - 1] * y));
        }
        let mut s = Complex::new(bits);
        for (&(ex, ey), c) in &self.coeffs {
            s += Complex::with_val(bits, &xp[ex as usize] * &yp[ey as usize]) * c;
        }
        s
    }

    /// Text form: header `PHI N <N> DEG <d>`, then `eX eY coefficient` per
    /// nonzero monomial sorted by `eX` then `eY`, both descending.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "PHI N {} DEG {}", self.level, self.degree()).expect("string write");
        for (&(ex, ey), c) in self.coeffs.iter().rev() {
            writeln!(out, "{ex} {ey} {c}").expect("string write");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Parse { position: 0, reason: "empty input".into() })?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        let bad_header = || Error::Parse {
            position: 0,
            reason: format!("bad header {header:?}"),
        };
        if parts.len() != 5 || parts[0] != "PHI" || parts[1] != "N" || parts[3] != "DEG" {
            return Err(bad_header());
        }
        let level: u32 = parts[2].parse().map_err(|_| bad_header())?;
        let deg: u32 = parts[4].parse().map_err(|_| bad_header())?;
        if level == 0 || deg != psi(level) {
            return Err(bad_header());
        }
        let mut coeffs = BTreeMap::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let err = |reason: &str| Error::Parse {
                position: i,
                reason: reason.to_string(),
            };
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(err("expected `eX eY coefficient`"));
            }
            let ex: u32 = f[0].parse().map_err(|_| err("bad exponent"))?;
            let ey: u32 = f[1].parse().map_err(|_| err("bad exponent"))?;
            let c: Integer = f[2].parse().map_err(|_| err("bad coefficient"))?;
            if c == 0 {
                return Err(err("zero coefficient"));
            }
            if coeffs.insert((ex, ey), c).is_some() {
                return Err(err("duplicate monomial"));
            }
        }
        Ok(Self { level, coeffs })
    }
}

static CACHE: RwLock<Option<HashMap<u32, Arc<ModularPolynomial>>>> = RwLock::new(None);

/// `Phi_N`, memoized per level.
pub fn modular_polynomial(n: u32, ctx: &PrecisionContext) -> Result<Arc<ModularPolynomial>> {
    modular_polynomial_capped(n, ctx, DEFAULT_LEVEL_CAP)
}

pub fn modular_polynomial_capped(
    n: u32,
    ctx: &PrecisionContext,
    cap: u32,
) -> Result<Arc<ModularPolynomial>> {
    if n == 0 || n > cap {
        return Err(Error::LevelTooLarge(n, cap));
    }
    if let Some(p) = CACHE
        .read()
        .expect("modular polynomial cache poisoned")
        .as_ref()
        .and_then(|m| m.get(&n))
    {
        return Ok(p.clone());
    }
    let poly = Arc::new(compute(n, ctx)?.0);
    let mut guard = CACHE.write().expect("modular polynomial cache poisoned");
    let map = guard.get_or_insert_with(HashMap::new);
    Ok(map.entry(n).or_insert(poly).clone())
}

/// Interpolated coefficients at `bits` together with the largest rounding residue.
fn interpolate(n: u32, bits: u32) -> (BTreeMap<(u32, u32), Float>, f64) {
    let deg = psi(n) as usize;
    let cosets = primitive_cosets(n);
    let mut ys = Vec::with_capacity(deg + 1);
    // rows[k][e] = coefficient of X^e of prod (X - j(M tau_k)).
    let mut rows: Vec<Vec<Float>> = Vec::with_capacity(deg + 1);
    for k in 0..=deg {
        let t = 1.0 + 0.3 * k as f64 / deg as f64;
        let tau = Complex::with_val(bits, (0, Float::with_val(bits, t)));
        ys.push(j_invariant_of_tau(&tau, bits).real().clone());
        let mut poly = vec![Complex::with_val(bits, 1)];
        for m in &cosets {
            let root = j_invariant_of_tau(&m.act(&tau), bits);
            let mut next = vec![Complex::new(bits); poly.len() + 1];
            for (i, c) in poly.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= Complex::with_val(bits, c * &root);
            }
            poly = next;
        }
        rows.push(poly.into_iter().map(|c| c.real().clone()).collect());
    }
    let mut out = BTreeMap::new();
    let mut worst = 0f64;
    for e in 0..=deg {
        let vals: Vec<Float> = rows.iter().map(|r| r[e].clone()).collect();
        let coeffs = newton_interpolate(&ys, &vals, bits);
        for (f, c) in coeffs.into_iter().enumerate() {
            let r = Float::with_val(bits, c.round_ref());
            let resid = Float::with_val(53, &c - &r).to_f64().abs();
            worst = worst.max(resid);
            out.insert((e as u32, f as u32), r);
        }
    }
    (out, worst)
}

/// Monomial coefficients of the interpolating polynomial through `(x_k, v_k)`.
fn newton_interpolate(xs: &[Float], vs: &[Float], bits: u32) -> Vec<Float> {
    let n = xs.len();
    let mut dd: Vec<Float> = vs.to_vec();
    for j in 1..n {
        for i in (j..n).rev() {
            let num = Float::with_val(bits, &dd[i] - &dd[i - 1]);
            let den = Float::with_val(bits, &xs[i] - &xs[i - j]);
            dd[i] = num / den;
        }
    }
    // Expand the Newton form into monomials.
    let mut poly = vec![Float::new(bits); n];
    for i in (0..n).rev() {
        // poly = poly * (x - xs[i]) + dd[i]
        let mut next = vec![Float::new(bits); n];
        for k in 0..n {
            if k + 1 < n {
                next[k + 1] += &poly[k];
            }
            next[k] -= Float::with_val(bits, &poly[k] * &xs[i]);
        }
        next[0] += &dd[i];
        poly = next;
    }
    poly
}

/// Per-level diagnostics from the two-precision computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationReport {
    pub bits: (u32, u32),
    pub residues: (f64, f64),
}

/// Computes `Phi_N` at two precisions and requires identical integer rounding
/// with residues below `1e-10`, raising the precision until that holds.
pub fn compute(n: u32, ctx: &PrecisionContext) -> Result<(ModularPolynomial, InterpolationReport)> {
    let deg = psi(n) as f64;
    // Coefficient sizes grow roughly like exp(6 psi log N); add room for the Vandermonde loss.
    let estimate = (6.0 * deg * (n as f64).ln() / std::f64::consts::LN_10 + 15.0 * deg + 40.0) as u32;
    let mut bits = digits_to_bits(estimate.max(ctx.working_digits()));
    for _ in 0..6 {
        let (a, ra) = interpolate(n, bits);
        let (b, rb) = interpolate(n, bits + 128);
        let agree = a.len() == b.len() && a.iter().all(|(k, v)| b.get(k) == Some(v));
        if agree && ra < 1e-10 && rb < 1e-10 {
            let mut coeffs = BTreeMap::new();
            for (k, v) in a {
                if let Some(i) = v.to_integer() {
                    if i != 0 {
                        coeffs.insert(k, i);
                    }
                }
            }
            let poly = ModularPolynomial { level: n, coeffs };
            return Ok((
                poly,
                InterpolationReport {
                    bits: (bits, bits + 128),
                    residues: (ra, rb),
                },
            ));
        }
        bits *= 2;
    }
    Err(Error::PrecisionExhausted(format!(
        "modular polynomial of level {n} did not stabilize"
    )))
}
