//! Cyclic isogenies between period lattices: modular polynomials, period
//! matrices, transport of elliptic logarithms, and CM detection.

mod cm;
mod modpoly;

use std::collections::BTreeSet;

use rug::ops::Pow;
use rug::{Complex, Float, Integer, Rational};

use crate::analytic::{reduce_complex, EllipticLogarithm, IntMatrix, PeriodPoint};
use crate::error::{Error, Result};
use crate::lll::complex_relation_basis;
use crate::precision::{abs_f64, PrecisionContext};

pub use cm::{class_number, detect_cm, endomorphism_degree, reduced_forms, CMWitness, MAX_ABS_DISCRIMINANT};
pub use modpoly::{
    compute as compute_modular_polynomial, modular_polynomial, modular_polynomial_capped, primitive_cosets, psi,
    InterpolationReport, ModularPolynomial, DEFAULT_LEVEL_CAP,
};

/// Default constant `c` in the entry bound `max |entry| <= c N^10`.
pub const DEFAULT_ENTRY_CONSTANT: f64 = 1e6;
/// Largest `N_max` accepted by [`find_isogeny_matrix`].
pub const MATRIX_LEVEL_CAP: u32 = 1024;
/// Entries beyond this are never representable witnesses (keeps determinants in `i64`).
const MAX_MATRIX_ENTRY: u64 = 1 << 31;
/// Levels up to this bound are confirmed by enumerating every coset.
pub const EXHAUSTIVE_LEVEL: u32 = 64;

/// Primitive `M = (A B; C D)` with `tau1 = M tau2` and `det M = N`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsogenyWitness {
    pub matrix: IntMatrix,
    pub n: u32,
    /// `C tau2 + D`.
    pub alpha: Complex,
}

impl IsogenyWitness {
    /// Validates the matrix against the pair and fills `alpha`.
    pub fn new(matrix: IntMatrix, tau1: &Complex, tau2: &Complex, tol: f64) -> Result<Self> {
        let det = matrix.det();
        if det <= 0 || !matrix.is_primitive() {
            return Err(Error::Validation(format!("matrix {matrix:?} is not primitive of positive determinant")));
        }
        let resid = abs_f64(&Complex::with_val(tau1.prec().0, tau1 - matrix.act(tau2)));
        if !(resid < tol) {
            return Err(Error::Validation(format!("matrix does not map tau2 to tau1 (residual {resid:e})")));
        }
        Ok(Self {
            matrix,
            n: det as u32,
            alpha: matrix.automorphy(tau2),
        })
    }

    /// `A - C tau1 = N / alpha`, the multiplier sending `Z + Z tau2` into `Z + Z tau1`.
    pub fn transport(&self, tau1: &Complex) -> Complex {
        let m = &self.matrix;
        Complex::with_val(tau1.prec().0, m.a - Complex::with_val(tau1.prec().0, tau1 * m.c))
    }
}

/// Exact test `Phi_N(j1, j2) = 0`.
pub fn is_cyclic_isogenous(j1: &Rational, j2: &Rational, n: u32) -> Result<bool> {
    let phi = modular_polynomial(n, &PrecisionContext::default())?;
    Ok(phi.eval_rational(j1, j2) == 0)
}

/// Sign with the first nonzero entry of `(C, D)` positive.
fn normalize_sign(m: IntMatrix) -> IntMatrix {
    let lead = if m.c != 0 { m.c } else { m.d };
    if lead < 0 {
        m.neg()
    } else {
        m
    }
}

fn tie_key(m: &IntMatrix) -> (u32, [u64; 4]) {
    (
        m.det() as u32,
        [m.c, m.d, m.a, m.b].map(|x| x.unsigned_abs()),
    )
}

/// Elements of SL2(Z) that can relate two points of the closed standard domain.
fn boundary_moves() -> Vec<IntMatrix> {
    let gens = [IntMatrix::T, IntMatrix::new(1, -1, 0, 1), IntMatrix::S];
    let mut out: BTreeSet<(i64, i64, i64, i64)> = BTreeSet::new();
    let mut layer = vec![IntMatrix::IDENTITY];
    out.insert((1, 0, 0, 1));
    for _ in 0..3 {
        let mut next = Vec::new();
        for w in &layer {
            for g in &gens {
                let m = normalize_sign(g.mul(w));
                if out.insert((m.a, m.b, m.c, m.d)) {
                    next.push(m);
                }
            }
        }
        layer = next;
    }
    out.into_iter().map(|(a, b, c, d)| IntMatrix::new(a, b, c, d)).collect()
}

/// Outcome of classifying one candidate matrix.
enum Verdict {
    Accept(IntMatrix),
    Ambiguous(u32),
    Reject,
}

struct Classifier<'a> {
    tau1: &'a Complex,
    tau2: &'a Complex,
    n_max: u32,
    entry_constant: f64,
    accept: f64,
    reject: f64,
}

impl Classifier<'_> {
    fn classify(&self, m: IntMatrix) -> Verdict {
        let det = m.det();
        if det <= 0 || det as u64 > self.n_max as u64 || !m.is_primitive() {
            return Verdict::Reject;
        }
        if m.max_abs_entry() as f64 > self.entry_constant * (det as f64).powi(10) {
            return Verdict::Reject;
        }
        let den = m.automorphy(self.tau2);
        if den.is_zero() {
            return Verdict::Reject;
        }
        let r = abs_f64(&Complex::with_val(self.tau1.prec().0, self.tau1 - m.act(self.tau2)));
        if r < self.accept {
            Verdict::Accept(normalize_sign(m))
        } else if r < self.reject {
            Verdict::Ambiguous(det as u32)
        } else {
            Verdict::Reject
        }
    }
}

/// Minimal-determinant primitive `M` with `tau1 = M tau2` and `det M <= n_max`.
///
/// Ties are broken by `(|C|, |D|, |A|, |B|)` lexicographically.
pub fn find_isogeny_matrix(
    tau1: &PeriodPoint,
    tau2: &PeriodPoint,
    n_max: u32,
    ctx: &PrecisionContext,
) -> Result<Option<IsogenyWitness>> {
    find_isogeny_matrix_with(tau1, tau2, n_max, DEFAULT_ENTRY_CONSTANT, ctx)
}

pub fn find_isogeny_matrix_with(
    tau1: &PeriodPoint,
    tau2: &PeriodPoint,
    n_max: u32,
    entry_constant: f64,
    ctx: &PrecisionContext,
) -> Result<Option<IsogenyWitness>> {
    if n_max == 0 || n_max > MATRIX_LEVEL_CAP {
        return Err(Error::LevelTooLarge(n_max, MATRIX_LEVEL_CAP));
    }
    let bits = ctx.bits();
    let t1 = Complex::with_val(bits, tau1.tau());
    let t2 = Complex::with_val(bits, tau2.tau());
    let cls = Classifier {
        tau1: &t1,
        tau2: &t2,
        n_max,
        entry_constant,
        accept: ctx.accept_tol(),
        reject: ctx.reject_tol(),
    };
    let mut found: Vec<IntMatrix> = Vec::new();
    let mut ambiguous: Option<u32> = None;
    let mut note = |v: Verdict, found: &mut Vec<IntMatrix>| match v {
        Verdict::Accept(m) => found.push(m),
        Verdict::Ambiguous(n) => ambiguous = Some(ambiguous.map_or(n, |a| a.min(n))),
        Verdict::Reject => {}
    };

    // Route 1: integer relation C tau1 tau2 + D tau1 - A tau2 - B = 0.
    let values = [
        Complex::with_val(bits, &t1 * &t2),
        t1.clone(),
        t2.clone(),
        Complex::with_val(bits, 1),
    ];
    let weight = Float::with_val(bits, 10).pow(ctx.working_digits() as i32 - 10);
    let rows = complex_relation_basis(&values, &weight);
    let mut lll_found = Vec::new();
    for cand in relation_candidates(&rows) {
        if let Some(m) = relation_to_matrix(&cand) {
            note(cls.classify(m), &mut lll_found);
        }
    }

    // Route 2: every coset of level <= EXHAUSTIVE_LEVEL.
    // Nothing below the smallest relation found needs enumerating past it.
    let lll_best = lll_found.iter().map(|m| m.det() as u32).min();
    let exhaustive_to = n_max.min(EXHAUSTIVE_LEVEL).min(lll_best.unwrap_or(u32::MAX));
    let (t1_red, g1) = reduce_complex(&t1);
    let g1_inv = g1.adjugate();
    let moves = boundary_moves();
    for n in 1..=exhaustive_to {
        for r in primitive_cosets(n) {
            let sigma = r.act(&t2);
            let (s_red, g2) = reduce_complex(&sigma);
            let gap = abs_f64(&Complex::with_val(53, &s_red - &t1_red));
            if gap > 1.5 {
                continue;
            }
            for mv in &moves {
                let moved = mv.act(&s_red);
                if abs_f64(&Complex::with_val(53, &moved - &t1_red)) > 1e-6 {
                    continue;
                }
                let m = g1_inv.mul(mv).mul(&g2).mul(&r);
                note(cls.classify(m), &mut found);
            }
        }
    }

    // The coset enumeration must reproduce any relation found in its range.
    for m in &lll_found {
        if (m.det() as u32) <= exhaustive_to && !found.contains(m) {
            return Err(Error::PrecisionExhausted(format!(
                "relation {m:?} not confirmed by coset enumeration"
            )));
        }
    }
    found.extend(lll_found);
    let best = found.into_iter().min_by_key(tie_key);
    if let Some(n) = ambiguous {
        if best.is_none_or(|m| n < m.det() as u32) {
            return Err(Error::PrecisionExhausted(format!(
                "isogeny residual at level {n} lies between accept and reject thresholds"
            )));
        }
    }
    match best {
        Some(m) => Ok(Some(IsogenyWitness::new(m, &t1, &t2, ctx.accept_tol())?)),
        None => Ok(None),
    }
}

/// Reduced rows together with all `+-` pairwise combinations.
pub(crate) fn relation_candidates(rows: &[Vec<Integer>]) -> Vec<Vec<Integer>> {
    let k = rows.first().map_or(0, |r| r.len());
    let mut out: Vec<Vec<Integer>> = rows.to_vec();
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            for sign in [1i32, -1] {
                out.push(
                    (0..k)
                        .map(|c| &rows[i][c] + Integer::from(&rows[j][c] * sign))
                        .collect(),
                );
            }
        }
    }
    out
}

fn relation_to_matrix(row: &[Integer]) -> Option<IntMatrix> {
    let g = row[..4].iter().fold(Integer::new(), |g, x| g.gcd(x));
    if g == 0 {
        return None;
    }
    let e: Vec<i64> = row[..4]
        .iter()
        .map(|x| Integer::from(x / &g).to_i64())
        .collect::<Option<Vec<_>>>()?;
    if e.iter().any(|x| x.unsigned_abs() > MAX_MATRIX_ENTRY) {
        return None;
    }
    let (c, d, a, b) = (e[0], e[1], -e[2], -e[3]);
    Some(IntMatrix::new(a, b, c, d))
}

/// `beta w` reduced into the parallelogram of `tau1`, where `beta = A - C tau1`
/// sends `Z + Z tau2` into `Z + Z tau1`.
pub fn map_point_analytic(
    w: &EllipticLogarithm,
    witness: &IsogenyWitness,
    tau1: &PeriodPoint,
    ctx: &PrecisionContext,
) -> Result<EllipticLogarithm> {
    let bits = ctx.bits();
    let t1 = Complex::with_val(bits, tau1.tau());
    let t2 = Complex::with_val(bits, w.tau.tau());
    let resid = abs_f64(&Complex::with_val(bits, &t1 - witness.matrix.act(&t2)));
    if !(resid < ctx.reject_tol()) {
        return Err(Error::Validation(format!(
            "witness does not relate the lattices (residual {resid:e})"
        )));
    }
    let beta = witness.transport(&t1);
    let z = Complex::with_val(bits, &beta * &w.z);
    Ok(EllipticLogarithm::new(&z, tau1))
}
