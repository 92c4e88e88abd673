//! Asymmetry and genericity checks run before a scan.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Complex, Integer, Rational};
use serde::{Deserialize, Serialize};

use super::poly::{Poly, RatFunc};
use super::spec::{CurveSpec, Section};
use crate::analytic::{period_from_lambda, EllipticLogarithm, PeriodPoint};
use crate::error::{Error, Result};
use crate::isogeny::find_isogeny_matrix;
use crate::precision::PrecisionContext;
use crate::relation::{find_relation, LogConfiguration};

/// Fixed parameters used to measure fiber sizes.
const FIBER_PROBES: [(i64, i64); 6] = [(7, 3), (-11, 5), (13, 17), (29, 7), (-5, 23), (41, 11)];
const FIBER_PROBE_COUNT: usize = 3;
pub const GENERICITY_SAMPLES: usize = 3;
/// Height bound for random genericity samples.
pub const GENERICITY_HEIGHT: i64 = 1000;
/// Samples below this height are redrawn.
pub const GENERICITY_MIN_HEIGHT: i64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AsymmetryReport {
    /// Degrees of `J o lambda` and `J o mu` as maps of the parameter line.
    pub raw_deg_x: u64,
    pub raw_deg_y: u64,
    /// Degree of `t -> (J(lambda(t)), J(mu(t)))` onto its image.
    pub fibration_degree: u64,
    /// Raw degrees divided by the fibration degree.
    pub deg_x: u64,
    pub deg_y: u64,
    pub asymmetric: bool,
}

/// `num - j den` for `F = num / den`, or zero when `F` is constant.
fn fiber_poly(f: &RatFunc, j: &Rational) -> Poly {
    if f.is_constant() {
        return Poly::zero();
    }
    f.num().sub(&f.den().scale(j))
}

/// Number of distinct finite `t` with the same image as `t0`.
fn fiber_size(jl: &RatFunc, jm: &RatFunc, t0: &Rational) -> Option<u64> {
    let j1 = jl.eval(t0)?;
    let j2 = jm.eval(t0)?;
    let g = fiber_poly(jl, &j1).gcd(&fiber_poly(jm, &j2));
    Some(g.degree()? as u64)
}

pub fn asymmetry_check(spec: &CurveSpec) -> Result<AsymmetryReport> {
    let jl = spec
        .lambda
        .j_compose()
        .ok_or_else(|| Error::Validation("lambda map is constantly 0 or 1".into()))?;
    let jm = spec
        .mu
        .j_compose()
        .ok_or_else(|| Error::Validation("mu map is constantly 0 or 1".into()))?;
    let raw_x = jl.map_degree() as u64;
    let raw_y = jm.map_degree() as u64;
    if raw_x == 0 && raw_y == 0 {
        return Err(Error::ConstantMapDegenerate);
    }
    let fibration = if raw_x > 0 && raw_y > 0 {
        let sizes: Vec<u64> = FIBER_PROBES
            .iter()
            .filter_map(|&(p, q)| fiber_size(&jl, &jm, &Rational::from((p, q))))
            .filter(|&s| s > 0)
            .take(FIBER_PROBE_COUNT)
            .collect();
        if sizes.len() < FIBER_PROBE_COUNT {
            return Err(Error::Validation("could not probe generic fibers".into()));
        }
        sizes.iter().fold(0, |g, &s| crate::analytic::gcd_u64(g, s))
    } else {
        1
    };
    let (deg_x, deg_y) = (raw_x / fibration, raw_y / fibration);
    Ok(AsymmetryReport {
        raw_deg_x: raw_x,
        raw_deg_y: raw_y,
        fibration_degree: fibration,
        deg_x,
        deg_y,
        asymmetric: deg_x != deg_y,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenericitySample {
    pub t: String,
    /// Determinant of an isogeny matrix found at the sample.
    pub isogeny_level: Option<u32>,
    pub p_relation: Option<Vec<i64>>,
    pub q_relation: Option<Vec<i64>>,
}

impl GenericitySample {
    pub fn passed(&self) -> bool {
        self.isogeny_level.is_none() && self.p_relation.is_none() && self.q_relation.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenericityReport {
    pub samples: Vec<GenericitySample>,
}

impl GenericityReport {
    pub fn passed(&self) -> bool {
        self.samples.iter().all(GenericitySample::passed)
    }

    pub fn failure_summary(&self) -> String {
        self.samples
            .iter()
            .filter(|s| !s.passed())
            .map(|s| {
                let mut parts = Vec::new();
                if let Some(n) = s.isogeny_level {
                    parts.push(format!("isogeny of degree {n}"));
                }
                if let Some(a) = &s.p_relation {
                    parts.push(format!("P-relation {a:?}"));
                }
                if let Some(b) = &s.q_relation {
                    parts.push(format!("Q-relation {b:?}"));
                }
                format!("t = {}: {}", s.t, parts.join(", "))
            })
            .collect::<Vec<_>>()
            .join("; ")
    }
}

pub(crate) fn period_of(v: &Rational, ctx: &PrecisionContext) -> Result<PeriodPoint> {
    period_from_lambda(&Complex::with_val(ctx.bits(), (v, 0)), ctx)
}

pub(crate) fn section_logs(
    sections: &[Section],
    t0: &Rational,
    f0: &Rational,
    tau: &PeriodPoint,
    ctx: &PrecisionContext,
) -> Result<Vec<EllipticLogarithm>> {
    sections.iter().map(|s| s.at(t0, f0).log(f0, tau, ctx)).collect()
}

/// Relation with `max |a_k| <= t` among logs on a single lattice.
fn single_lattice_relation(
    tau: &PeriodPoint,
    logs: Vec<EllipticLogarithm>,
    t: f64,
    ctx: &PrecisionContext,
) -> Result<Option<Vec<i64>>> {
    if logs.is_empty() {
        return Ok(None);
    }
    let one = Complex::with_val(ctx.bits(), 1);
    let cfg = LogConfiguration::new(tau.clone(), logs, tau.clone(), Vec::new(), one)?;
    Ok(find_relation(&cfg, &Complex::new(ctx.bits()), t, ctx)?.map(|w| w.a))
}

/// Checks at random parameters that the two fibers are not isogenous
/// and that neither family of sections is dependent on its own.
pub fn genericity_check(
    spec: &CurveSpec,
    n_max: u32,
    t_relation: f64,
    seed: u64,
    ctx: &PrecisionContext,
) -> Result<GenericityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(GENERICITY_SAMPLES);
    let mut attempts = 0;
    while samples.len() < GENERICITY_SAMPLES {
        attempts += 1;
        if attempts > 1000 {
            return Err(Error::Validation("no valid random parameter for genericity check".into()));
        }
        let t0 = Rational::from((
            rng.gen_range(-GENERICITY_HEIGHT..=GENERICITY_HEIGHT),
            rng.gen_range(1..=GENERICITY_HEIGHT),
        ));
        if Integer::from(t0.numer().abs_ref()).max(t0.denom().clone()) < GENERICITY_MIN_HEIGHT {
            continue;
        }
        let Some((l0, m0)) = spec.fiber(&t0) else { continue };
        let tau1 = period_of(&l0, ctx)?;
        let tau2 = period_of(&m0, ctx)?;
        let isogeny_level = find_isogeny_matrix(&tau1, &tau2, n_max, ctx)?.map(|w| w.n);
        let z = section_logs(&spec.p_sections, &t0, &l0, &tau1, ctx)?;
        let w = section_logs(&spec.q_sections, &t0, &m0, &tau2, ctx)?;
        samples.push(GenericitySample {
            t: t0.to_string(),
            isogeny_level,
            p_relation: single_lattice_relation(&tau1, z, t_relation, ctx)?,
            q_relation: single_lattice_relation(&tau2, w, t_relation, ctx)?,
        });
    }
    Ok(GenericityReport { samples })
}
