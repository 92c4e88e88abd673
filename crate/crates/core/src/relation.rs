//! Bounded integer relations among elliptic logarithms on two isogenous lattices.
//!
//! A relation is `sum (a_k + b_k rho) u_k = gamma1 + gamma2 tau1`, where the
//! `u_k` are the logs `z_i` on `Z + Z tau1` followed by the transported logs
//! `alpha w_j`.

use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Complex, Float, Rational};

use crate::analytic::{coords_in, elliptic_log, parametrize_point, period_from_lambda, EllipticLogarithm, PeriodPoint, Projective};
use crate::error::{Error, Result};
use crate::heights::{recognize_rational, HeightField};
use crate::isogeny::{find_isogeny_matrix, relation_candidates, IsogenyWitness, MATRIX_LEVEL_CAP};
use crate::legendre::{add, scalar_mul, CurvePoint};
use crate::lll::complex_relation_basis;
use crate::precision::{abs_f64, PrecisionContext};

/// Reduced vectors examined after lattice reduction.
const ENUMERATED_VECTORS: usize = 8;
/// Scaling exponent is `working_digits - LATTICE_MARGIN`.
const LATTICE_MARGIN: i32 = 10;
/// Largest coordinate size attempted in the exact group-law check.
const ALGEBRAIC_BIT_CAP: u64 = 1 << 20;

/// `(tau1, z_1..z_m, tau2, w_1..w_n)` plus the multiplier carrying `Z + Z tau2` into `Z + Z tau1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogConfiguration {
    pub tau1: PeriodPoint,
    pub z: Vec<EllipticLogarithm>,
    pub tau2: PeriodPoint,
    pub w: Vec<EllipticLogarithm>,
    /// `A - C tau1` for the witness `tau1 = M tau2`; `1` when the lattices coincide.
    pub alpha: Complex,
}

impl LogConfiguration {
    /// Checks that every log lives on its lattice.
    pub fn new(
        tau1: PeriodPoint,
        z: Vec<EllipticLogarithm>,
        tau2: PeriodPoint,
        w: Vec<EllipticLogarithm>,
        alpha: Complex,
    ) -> Result<Self> {
        if z.iter().any(|l| l.tau.tau() != tau1.tau()) || w.iter().any(|l| l.tau.tau() != tau2.tau()) {
            return Err(Error::Validation("log does not belong to the stated lattice".into()));
        }
        if alpha.is_zero() {
            return Err(Error::Validation("alpha must be nonzero".into()));
        }
        Ok(Self { tau1, z, tau2, w, alpha })
    }

    /// Uses the transport multiplier of `witness`.
    pub fn with_witness(
        tau1: PeriodPoint,
        z: Vec<EllipticLogarithm>,
        tau2: PeriodPoint,
        w: Vec<EllipticLogarithm>,
        witness: &IsogenyWitness,
    ) -> Result<Self> {
        let alpha = witness.transport(tau1.tau());
        Self::new(tau1, z, tau2, w, alpha)
    }

    pub fn len(&self) -> usize {
        self.z.len() + self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `z_1, .., z_m, alpha w_1, .., alpha w_n` at `bits`.
    fn terms(&self, bits: u32) -> Vec<Complex> {
        self.z
            .iter()
            .map(|l| Complex::with_val(bits, &l.z))
            .chain(self.w.iter().map(|l| Complex::with_val(bits, &self.alpha * &l.z)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationWitness {
    pub a: Vec<i64>,
    pub b: Vec<i64>,
    pub gamma1: i64,
    pub gamma2: i64,
    pub rho: Complex,
    pub residual: f64,
    pub t_used: f64,
    /// Constant in `|gamma| <= kappa T^4`.
    pub kappa: f64,
}

impl RelationWitness {
    pub fn max_coefficient(&self) -> u64 {
        self.a.iter().chain(&self.b).map(|x| x.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn gamma_bound(&self) -> f64 {
        self.kappa * self.t_used.powi(4)
    }

    pub fn satisfies_gamma_bound(&self) -> bool {
        let g = self.gamma1.unsigned_abs().max(self.gamma2.unsigned_abs()) as f64;
        g <= self.gamma_bound()
    }
}

/// `kappa = k (1 + |rho|) (1 + |tau1|) (1 + |tau2|) max(1, |alpha|) (1 + (1 + |Re tau1|) / Im tau1)`.
///
/// Logs in their parallelograms have `|z| <= 1 + |tau|`, so the combination has
/// modulus at most `kappa T / (1 + (1 + |Re tau1|) / Im tau1)`, and solving for
/// the lattice coordinates costs the last factor.
pub fn gamma_kappa(cfg: &LogConfiguration, rho: &Complex) -> f64 {
    let t1 = cfg.tau1.tau();
    let k = cfg.len().max(1) as f64;
    let im = t1.imag().to_f64();
    k * (1.0 + abs_f64(rho))
        * (1.0 + abs_f64(t1))
        * (1.0 + abs_f64(cfg.tau2.tau()))
        * abs_f64(&cfg.alpha).max(1.0)
        * (1.0 + (1.0 + t1.real().to_f64().abs()) / im)
}

/// `sum (a + b rho) u` for integer coefficient vectors.
fn combination(terms: &[Complex], a: &[i64], b: &[i64], rho: &Complex, bits: u32) -> Complex {
    let mut s = Complex::new(bits);
    for (k, u) in terms.iter().enumerate() {
        if a[k] != 0 {
            s += Complex::with_val(bits, u * a[k]);
        }
        if b[k] != 0 {
            s += Complex::with_val(bits, u * rho) * b[k];
        }
    }
    s
}

/// Nearest lattice point `(g1, g2)` to `s` and the distance to it.
fn nearest_lattice_point(s: &Complex, tau: &Complex, bits: u32) -> Option<(i64, i64, f64)> {
    let (x, y) = coords_in(s, tau);
    let g1 = x.round().to_integer()?.to_i64()?;
    let g2 = y.round().to_integer()?.to_i64()?;
    let lat = Complex::with_val(bits, tau * g2) + g1;
    Some((g1, g2, abs_f64(&Complex::with_val(bits, s - lat))))
}

/// First nonzero entry positive.
fn normalize_signs(a: &mut [i64], b: &mut [i64]) {
    if let Some(&lead) = a.iter().chain(b.iter()).find(|&&x| x != 0) {
        if lead < 0 {
            a.iter_mut().chain(b.iter_mut()).for_each(|x| *x = -*x);
        }
    }
}

/// Smallest-coefficient relation with `max(|a_k|, |b_k|) <= t`; ties prefer fewer nonzero `b_k`.
pub fn find_relation(
    cfg: &LogConfiguration,
    rho: &Complex,
    t: f64,
    ctx: &PrecisionContext,
) -> Result<Option<RelationWitness>> {
    if !(t >= 1.0) {
        return Err(Error::InvalidArgument(format!("T = {t} < 1")));
    }
    if cfg.is_empty() {
        return Err(Error::InvalidArgument("empty configuration".into()));
    }
    let bits = ctx.bits();
    let k = cfg.len();
    let use_rho = !rho.is_zero();
    let rho = Complex::with_val(bits, rho);
    let tau1 = Complex::with_val(bits, cfg.tau1.tau());
    let terms = cfg.terms(bits);

    let mut values = terms.clone();
    if use_rho {
        values.extend(terms.iter().map(|u| Complex::with_val(bits, u * &rho)));
    }
    values.push(Complex::with_val(bits, -1));
    values.push(Complex::with_val(bits, -&tau1));
    let weight = Float::with_val(bits, 10).pow(ctx.working_digits() as i32 - LATTICE_MARGIN);
    let mut rows = complex_relation_basis(&values, &weight);
    rows.truncate(ENUMERATED_VECTORS);
    let width = values.len();

    let kappa = gamma_kappa(cfg, &rho);
    let mut best: Option<RelationWitness> = None;
    let mut ambiguous: Option<f64> = None;
    for cand in relation_candidates(&rows) {
        let coeffs: Option<Vec<i64>> = cand[..width].iter().map(|x| x.to_i64()).collect();
        let Some(coeffs) = coeffs else { continue };
        let mut a = coeffs[..k].to_vec();
        let mut b = if use_rho { coeffs[k..2 * k].to_vec() } else { vec![0; k] };
        if a.iter().chain(&b).all(|&x| x == 0) {
            continue;
        }
        let max = a.iter().chain(&b).map(|x| x.unsigned_abs()).max().unwrap_or(0);
        if max as f64 > t {
            continue;
        }
        normalize_signs(&mut a, &mut b);
        let s = combination(&terms, &a, &b, &rho, bits);
        let Some((g1, g2, resid)) = nearest_lattice_point(&s, &tau1, bits) else { continue };
        if resid < ctx.accept_tol() {
            let w = RelationWitness {
                a,
                b,
                gamma1: g1,
                gamma2: g2,
                rho: rho.clone(),
                residual: resid,
                t_used: t,
                kappa,
            };
            let better = match &best {
                None => true,
                Some(cur) => {
                    let key = |r: &RelationWitness| (r.max_coefficient(), r.b.iter().filter(|&&x| x != 0).count());
                    (key(&w), &w.a, &w.b) < (key(cur), &cur.a, &cur.b)
                }
            };
            if better {
                best = Some(w);
            }
        } else if resid < ctx.reject_tol() {
            ambiguous = Some(ambiguous.map_or(resid, |r: f64| r.min(resid)));
        }
    }
    match (best, ambiguous) {
        (Some(w), _) => {
            if !w.satisfies_gamma_bound() {
                return Err(Error::Validation(format!(
                    "gamma = ({}, {}) exceeds kappa T^4 = {:e}",
                    w.gamma1,
                    w.gamma2,
                    w.gamma_bound()
                )));
            }
            Ok(Some(w))
        }
        (None, Some(r)) => Err(Error::PrecisionExhausted(format!(
            "relation residual {r:e} between accept and reject thresholds"
        ))),
        (None, None) => Ok(None),
    }
}

/// Exact sections behind a configuration: `P_i` on `E_lambda`, `Q_j` on `E_mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveData {
    pub lambda: Rational,
    pub mu: Rational,
    pub p: Vec<CurvePoint<Rational>>,
    pub q: Vec<CurvePoint<Rational>>,
}

fn to_projective(p: &CurvePoint<Rational>, bits: u32) -> Projective {
    match p.xy() {
        None => Projective::Infinity,
        Some((x, y)) => Projective::Affine {
            x: Complex::with_val(bits, (x, 0)),
            y: Complex::with_val(bits, (y, 0)),
        },
    }
}

fn rational_complex(q: &Rational, bits: u32) -> Complex {
    Complex::with_val(bits, (q, 0))
}

/// Re-checks a witness at certify precision.
///
/// Without `points` the stored logs are re-evaluated at `certify_digits`, so they
/// must carry that much precision. With `points` every log is recomputed from the
/// sections and, when `rho = 0`, the relation is also verified with the exact
/// group law on `E_lambda`.
pub fn certify_relation(
    cfg: &LogConfiguration,
    witness: &RelationWitness,
    points: Option<&CurveData>,
    isogeny: Option<&IsogenyWitness>,
    ctx: &PrecisionContext,
) -> Result<bool> {
    let cert = ctx.certifying();
    let bits = cert.bits();
    let k = cfg.len();
    if witness.a.len() != k || witness.b.len() != k {
        return Err(Error::InvalidArgument("witness length does not match configuration".into()));
    }
    let rho = Complex::with_val(bits, &witness.rho);

    let (tau1, terms) = match points {
        None => {
            let tau1 = Complex::with_val(bits, cfg.tau1.tau());
            (tau1, cfg.terms(bits))
        }
        Some(data) => {
            if data.p.len() != cfg.z.len() || data.q.len() != cfg.w.len() {
                return Err(Error::InvalidArgument("section count does not match configuration".into()));
            }
            let lam = rational_complex(&data.lambda, bits);
            let mu = rational_complex(&data.mu, bits);
            let t1 = period_from_lambda(&lam, &cert)?;
            let t2 = period_from_lambda(&mu, &cert)?;
            let gap1 = abs_f64(&Complex::with_val(bits, t1.tau() - cfg.tau1.tau()));
            let gap2 = abs_f64(&Complex::with_val(bits, t2.tau() - cfg.tau2.tau()));
            if gap1 > ctx.reject_tol() || gap2 > ctx.reject_tol() {
                return Err(Error::Validation("configuration periods do not match the sections".into()));
            }
            let alpha = if data.q.is_empty() {
                Complex::with_val(bits, 1)
            } else {
                let iso = isogeny.ok_or_else(|| {
                    Error::InvalidArgument("an isogeny witness is required to transport Q-sections".into())
                })?;
                IsogenyWitness::new(iso.matrix, t1.tau(), t2.tau(), cert.accept_tol())?.transport(t1.tau())
            };
            let mut terms = Vec::with_capacity(k);
            for p in &data.p {
                terms.push(elliptic_log(&to_projective(p, bits), &lam, &t1, &cert)?.z);
            }
            for q in &data.q {
                let w = elliptic_log(&to_projective(q, bits), &mu, &t2, &cert)?.z;
                terms.push(Complex::with_val(bits, &alpha * &w));
            }
            (t1.tau().clone(), terms)
        }
    };

    let s = combination(&terms, &witness.a, &witness.b, &rho, bits);
    let Some((_, _, resid)) = nearest_lattice_point(&s, &tau1, bits) else {
        return Ok(false);
    };
    if !(resid < ctx.certify_tol()) {
        return Ok(false);
    }

    if let Some(data) = points {
        if rho.is_zero() {
            if let Some(holds) = algebraic_check(witness, data, isogeny, &cert)? {
                return Ok(holds);
            }
            log::debug!("exact group-law check inconclusive; numeric certification only");
        }
    }
    Ok(true)
}

/// `sum a_i P_i + sum a_{m+j} phi(Q_j) = O` with exact arithmetic on `E_lambda`.
/// `None` when an image is not rational or coordinates would grow past the cap.
fn algebraic_check(
    witness: &RelationWitness,
    data: &CurveData,
    isogeny: Option<&IsogenyWitness>,
    cert: &PrecisionContext,
) -> Result<Option<bool>> {
    let mut pts: Vec<CurvePoint<Rational>> = data.p.clone();
    if !data.q.is_empty() {
        let Some(iso) = isogeny else { return Ok(None) };
        let bits = cert.bits();
        let lam = rational_complex(&data.lambda, bits);
        let mu = rational_complex(&data.mu, bits);
        let t1 = period_from_lambda(&lam, cert)?;
        let t2 = period_from_lambda(&mu, cert)?;
        let iso = IsogenyWitness::new(iso.matrix, t1.tau(), t2.tau(), cert.accept_tol())?;
        for q in &data.q {
            let w = elliptic_log(&to_projective(q, bits), &mu, &t2, cert)?;
            let img = crate::isogeny::map_point_analytic(&w, &iso, &t1, cert)?;
            let point = match parametrize_point(&img, cert)? {
                Projective::Infinity => CurvePoint::infinity(data.lambda.clone()),
                Projective::Affine { x, y } => {
                    let max_bits = bits / 3;
                    let (Some(x), Some(y)) = (recognize_rational(&x, max_bits), recognize_rational(&y, max_bits)) else {
                        return Ok(None);
                    };
                    match CurvePoint::new(data.lambda.clone(), x, y) {
                        Ok(p) => p,
                        Err(_) => return Ok(None),
                    }
                }
            };
            pts.push(point);
        }
    }
    let mut acc = CurvePoint::infinity(data.lambda.clone());
    for (i, p) in pts.iter().enumerate() {
        let a = witness.a[i];
        if a == 0 {
            continue;
        }
        let size = p.xy().map_or(0, |(x, y)| x.bit_size() + y.bit_size());
        if a.unsigned_abs().pow(2).saturating_mul(size.max(1)) > ALGEBRAIC_BIT_CAP {
            return Ok(None);
        }
        let term = scalar_mul(a, p);
        acc = add(&acc, &term)?;
    }
    Ok(Some(acc.is_infinity()))
}

/// Counts, for each `T` in `t_grid`, the samples with a certified relation and an
/// isogeny matrix whose entries are all at most `T`.
///
/// Samples are certified from their stored logs, so they should carry
/// `certify_digits` of precision. The multiplier `alpha` of each sample is
/// replaced by the transport of the matrix found for `(tau1, tau2)`.
pub fn count_zt_hits(
    samples: &[LogConfiguration],
    rho: &Complex,
    t_grid: &[f64],
    ctx: &PrecisionContext,
) -> Result<Vec<(f64, usize)>> {
    if t_grid.iter().any(|&t| !(t >= 1.0)) || t_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("T grid must be ascending with entries >= 1".into()));
    }
    let Some(&t_max) = t_grid.last() else { return Ok(Vec::new()) };
    let n_max = (2.0 * t_max * t_max).min(MATRIX_LEVEL_CAP as f64) as u32;
    let thresholds: Vec<Option<f64>> = samples
        .par_iter()
        .map(|s| sample_threshold(s, rho, t_max, n_max.max(1), ctx))
        .collect();
    Ok(t_grid
        .iter()
        .map(|&t| (t, thresholds.iter().filter(|x| x.is_some_and(|v| v <= t)).count()))
        .collect())
}

/// Smallest `T` admitting a certified witness for the sample, if any within `t_max`.
fn sample_threshold(cfg: &LogConfiguration, rho: &Complex, t_max: f64, n_max: u32, ctx: &PrecisionContext) -> Option<f64> {
    let iso = match find_isogeny_matrix(&cfg.tau1, &cfg.tau2, n_max, ctx) {
        Ok(Some(iso)) => iso,
        Ok(None) => return None,
        Err(e) => {
            log::debug!("isogeny search failed: {e}");
            return None;
        }
    };
    let entries = iso.matrix.max_abs_entry() as f64;
    if entries > t_max {
        return None;
    }
    let mut cfg = cfg.clone();
    let bits = cfg.alpha.prec().0.max(cfg.tau1.tau().prec().0);
    let tau1 = Complex::with_val(bits, cfg.tau1.tau());
    cfg.alpha = iso.transport(&tau1);
    let rel = match find_relation(&cfg, rho, t_max, ctx) {
        Ok(Some(r)) => r,
        Ok(None) => return None,
        Err(e) => {
            log::debug!("relation search failed: {e}");
            return None;
        }
    };
    match certify_relation(&cfg, &rel, None, None, ctx) {
        Ok(true) => Some((rel.max_coefficient() as f64).max(entries)),
        _ => None,
    }
}
