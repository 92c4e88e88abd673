//! Height-bounded scans over rational parameters and the exact isogeny-locus oracle.

use std::cmp::Ordering;
use std::sync::Arc;

use rayon::prelude::*;
use rug::{Complex, Integer, Rational};
use serde::{Deserialize, Serialize};

use super::hypotheses::{asymmetry_check, genericity_check, section_logs, AsymmetryReport, GenericityReport};
use super::poly::Poly;
use super::spec::{CurveSpec, SectionValue};
use crate::analytic::{gcd_u64, period_from_lambda_with, DEFAULT_LAMBDA_EXCLUSION};
use crate::error::{Error, Result};
use crate::heights::{neron_tate_x, weil_height_rational};
use crate::isogeny::{
    detect_cm, find_isogeny_matrix, modular_polynomial, IsogenyWitness, ModularPolynomial, DEFAULT_LEVEL_CAP,
};
use crate::legendre::j_rational;
use crate::precision::{abs_f64, PrecisionContext};
use crate::relation::{certify_relation, find_relation, CurveData, LogConfiguration, RelationWitness};

/// Doublings used for canonical heights in findings.
const HEIGHT_DOUBLINGS: u32 = 8;
/// Coefficient bound for CM detection on the constant side.
const CM_COEFF_BOUND: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub h1_max: u64,
    pub n_max: u32,
    pub t_relation: f64,
    pub precision: PrecisionContext,
    /// Parameters closer than this to `0`, `1` or infinity are not uniformized.
    pub exclusion_radius: f64,
    /// Worker threads; `0` uses the rayon default.
    pub threads: usize,
    pub override_asymmetry: bool,
    pub seed: u64,
}

impl ScanConfig {
    pub fn new(h1_max: u64, n_max: u32, t_relation: f64, precision: PrecisionContext) -> Result<Self> {
        let c = Self {
            h1_max,
            n_max,
            t_relation,
            precision,
            exclusion_radius: DEFAULT_LAMBDA_EXCLUSION,
            threads: 0,
            override_asymmetry: false,
            seed: 0,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_max == 0 || self.n_max > DEFAULT_LEVEL_CAP {
            return Err(Error::LevelTooLarge(self.n_max, DEFAULT_LEVEL_CAP));
        }
        if !(self.t_relation >= 1.0) {
            return Err(Error::Validation(format!("t_relation = {} < 1", self.t_relation)));
        }
        if !(self.exclusion_radius > 0.0 && self.exclusion_radius < 0.5) {
            return Err(Error::Validation(format!(
                "exclusion_radius = {} outside (0, 1/2)",
                self.exclusion_radius
            )));
        }
        Ok(())
    }
}

/// `max(|p|, q)` for `p / q` in lowest terms.
pub fn h1(t: &Rational) -> Integer {
    Integer::from(t.numer().abs_ref()).max(t.denom().clone())
}

/// Order used for enumeration and output: height, then numerator, then denominator.
pub fn height_order(a: &Rational, b: &Rational) -> Ordering {
    h1(a)
        .cmp(&h1(b))
        .then_with(|| a.numer().cmp(b.numer()))
        .then_with(|| a.denom().cmp(b.denom()))
}

fn rationals_of_height(h: u64) -> Vec<Rational> {
    if h == 1 {
        return vec![Rational::from(-1), Rational::new(), Rational::from(1)];
    }
    let hi = h as i64;
    let mut out: Vec<Rational> = (-hi + 1..hi)
        .filter(|p| gcd_u64(p.unsigned_abs(), h) == 1)
        .map(|p| Rational::from((p, hi)))
        .collect();
    for q in 1..hi {
        if gcd_u64(h, q as u64) == 1 {
            out.push(Rational::from((hi, q)));
            out.push(Rational::from((-hi, q)));
        }
    }
    out.sort_by(height_order);
    out
}

/// Every rational of height at most `h1_max`, once each, in [`height_order`].
pub fn enumerate_rationals(h1_max: u64) -> impl Iterator<Item = Rational> {
    (1..=h1_max).flat_map(rationals_of_height)
}

/// [`enumerate_rationals`] restricted to parameters where both fibers are smooth.
pub fn enumerate_parameters(spec: &CurveSpec, h1_max: u64) -> impl Iterator<Item = Rational> + '_ {
    enumerate_rationals(h1_max).filter(move |t| spec.fiber(t).is_some())
}

/// Parameter at which `Phi_N(j(mu), j(lambda)) = 0` for the listed levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hit {
    pub t0: Rational,
    pub levels: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skip {
    pub t0: Rational,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FindingHeights {
    pub h_lambda: f64,
    pub h_mu: f64,
    /// Canonical heights of `P_1..P_m, Q_1..Q_n`; `None` when not computable.
    pub canonical: Vec<Option<f64>>,
}

/// Observed sizes beside the shapes of the height, period and coefficient bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    /// `h(lambda0) / D0` with `D0 = 1`.
    pub height_ratio: f64,
    /// `|tau1| / D0^2` with `D0 = 1`.
    pub tau_ratio: f64,
    /// Largest relation coefficient or matrix entry.
    pub coefficient_size: u64,
    /// `max |gamma| / (kappa T^4)`.
    pub gamma_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Finding {
    pub t0: Rational,
    pub lambda0: Rational,
    pub mu0: Rational,
    pub levels: Vec<u32>,
    pub tau1: Complex,
    pub tau2: Complex,
    pub isogeny: IsogenyWitness,
    pub relation: RelationWitness,
    pub heights: FindingHeights,
    pub diagnostics: Diagnostics,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub asymmetry: AsymmetryReport,
    pub genericity: GenericityReport,
    pub enumerated: usize,
    pub hits: Vec<Hit>,
    pub findings: Vec<Finding>,
    pub skipped: Vec<Skip>,
}

impl ScanReport {
    /// Parameters whose hit levels include `n`.
    pub fn hits_at_level(&self, n: u32) -> Vec<Rational> {
        self.hits
            .iter()
            .filter(|h| h.levels.contains(&n))
            .map(|h| h.t0.clone())
            .collect()
    }
}

enum PointOutcome {
    Finding(Box<Finding>),
    Nothing,
    Skip(String),
}

struct ScanContext<'a> {
    spec: &'a CurveSpec,
    config: &'a ScanConfig,
    phis: Vec<Arc<ModularPolynomial>>,
    constant_side: bool,
}

impl ScanContext<'_> {
    fn levels(&self, lambda0: &Rational, mu0: &Rational) -> Result<Vec<u32>> {
        let j1 = j_rational(lambda0)?;
        let j2 = j_rational(mu0)?;
        Ok(self
            .phis
            .iter()
            .filter(|phi| phi.eval_rational(&j2, &j1) == 0)
            .map(|phi| phi.level)
            .collect())
    }

    fn process(&self, t0: &Rational, lambda0: &Rational, mu0: &Rational, levels: &[u32]) -> Result<PointOutcome> {
        let ctx = &self.config.precision;
        let cert = ctx.certifying();
        let r = self.config.exclusion_radius;
        let bits = cert.bits();
        let tau1 = period_from_lambda_with(&Complex::with_val(bits, (lambda0, 0)), &cert, r)?;
        let tau2 = period_from_lambda_with(&Complex::with_val(bits, (mu0, 0)), &cert, r)?;
        let Some(iso) = find_isogeny_matrix(&tau1, &tau2, self.config.n_max, ctx)? else {
            return Ok(PointOutcome::Skip(format!(
                "no period matrix of determinant <= {} for hit levels {levels:?}",
                self.config.n_max
            )));
        };
        if !levels.contains(&iso.n) {
            return Ok(PointOutcome::Skip(format!(
                "period matrix determinant {} is not among hit levels {levels:?}",
                iso.n
            )));
        }
        let spec = self.spec;
        let z = section_logs(&spec.p_sections, t0, lambda0, &tau1, &cert)?;
        let w = section_logs(&spec.q_sections, t0, mu0, &tau2, &cert)?;
        let cfg = LogConfiguration::with_witness(tau1.clone(), z, tau2.clone(), w, &iso)?;
        let rho = if self.constant_side {
            match detect_cm(&tau1, CM_COEFF_BOUND, ctx)? {
                Some(cm) => cm.rho0,
                None => Complex::new(bits),
            }
        } else {
            Complex::new(bits)
        };
        let Some(rel) = find_relation(&cfg, &rho, self.config.t_relation, ctx)? else {
            return Ok(PointOutcome::Nothing);
        };

        let p_vals: Vec<SectionValue> = spec.p_sections.iter().map(|s| s.at(t0, lambda0)).collect();
        let q_vals: Vec<SectionValue> = spec.q_sections.iter().map(|s| s.at(t0, mu0)).collect();
        let p_pts: Option<Vec<_>> = p_vals.iter().map(|v| v.rational_point(lambda0)).collect();
        let q_pts: Option<Vec<_>> = q_vals.iter().map(|v| v.rational_point(mu0)).collect();
        let data = match (p_pts, q_pts) {
            (Some(p), Some(q)) => Some(CurveData {
                lambda: lambda0.clone(),
                mu: mu0.clone(),
                p,
                q,
            }),
            _ => None,
        };
        let certified = certify_relation(&cfg, &rel, data.as_ref(), Some(&iso), ctx)?;
        if !certified {
            return Ok(PointOutcome::Skip(format!(
                "relation a = {:?}, b = {:?} failed certification",
                rel.a, rel.b
            )));
        }

        let canonical = p_vals
            .iter()
            .map(|v| (v, lambda0))
            .chain(q_vals.iter().map(|v| (v, mu0)))
            .map(|(v, f0)| match v.x() {
                None => Some(0.0),
                Some(x) => neron_tate_x(x, f0, HEIGHT_DOUBLINGS).ok().map(|h| h.value),
            })
            .collect();
        let h_lambda = weil_height_rational(lambda0).value;
        let g = rel.gamma1.unsigned_abs().max(rel.gamma2.unsigned_abs()) as f64;
        let diagnostics = Diagnostics {
            height_ratio: h_lambda,
            tau_ratio: abs_f64(tau1.tau()),
            coefficient_size: rel.max_coefficient().max(iso.matrix.max_abs_entry()),
            gamma_ratio: g / rel.gamma_bound(),
        };
        Ok(PointOutcome::Finding(Box::new(Finding {
            t0: t0.clone(),
            lambda0: lambda0.clone(),
            mu0: mu0.clone(),
            levels: levels.to_vec(),
            tau1: tau1.tau().clone(),
            tau2: tau2.tau().clone(),
            isogeny: iso,
            relation: rel,
            heights: FindingHeights {
                h_lambda,
                h_mu: weil_height_rational(mu0).value,
                canonical,
            },
            diagnostics,
            certified,
        })))
    }
}

/// Checks the hypotheses, then scans every parameter of height at most `h1_max`.
pub fn scan(spec: &CurveSpec, config: &ScanConfig) -> Result<ScanReport> {
    config.validate()?;
    let asymmetry = asymmetry_check(spec)?;
    if !asymmetry.asymmetric && !config.override_asymmetry {
        return Err(Error::NotAsymmetric {
            deg_x: asymmetry.deg_x,
            deg_y: asymmetry.deg_y,
        });
    }
    let genericity = genericity_check(spec, config.n_max, config.t_relation, config.seed, &config.precision)?;
    if !genericity.passed() {
        return Err(Error::GenericityFailed(genericity.failure_summary()));
    }
    let phis = (1..=config.n_max)
        .map(|n| modular_polynomial(n, &config.precision))
        .collect::<Result<Vec<_>>>()?;
    let sc = ScanContext {
        spec,
        config,
        phis,
        constant_side: spec.lambda.is_constant() || spec.mu.is_constant(),
    };
    let params: Vec<Rational> = enumerate_parameters(spec, config.h1_max).collect();

    let run = || {
        params
            .par_iter()
            .map(|t0| {
                let (l0, m0) = spec.fiber(t0).expect("enumerated parameters have smooth fibers");
                let levels = match sc.levels(&l0, &m0) {
                    Ok(l) => l,
                    Err(e) => return (Vec::new(), PointOutcome::Skip(e.to_string())),
                };
                if levels.is_empty() {
                    return (levels, PointOutcome::Nothing);
                }
                let outcome = sc
                    .process(t0, &l0, &m0, &levels)
                    .unwrap_or_else(|e| PointOutcome::Skip(e.to_string()));
                (levels, outcome)
            })
            .collect::<Vec<_>>()
    };
    let outcomes = if config.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(run)
    } else {
        run()
    };

    let mut report = ScanReport {
        asymmetry,
        genericity,
        enumerated: params.len(),
        hits: Vec::new(),
        findings: Vec::new(),
        skipped: Vec::new(),
    };
    for (t0, (levels, outcome)) in params.into_iter().zip(outcomes) {
        if !levels.is_empty() {
            report.hits.push(Hit { t0: t0.clone(), levels });
        }
        match outcome {
            PointOutcome::Finding(f) => report.findings.push(*f),
            PointOutcome::Skip(reason) => {
                log::info!("skipping t = {t0}: {reason}");
                report.skipped.push(Skip { t0, reason });
            }
            PointOutcome::Nothing => {}
        }
    }
    report.findings.sort_by(|a, b| h1(&a.t0).cmp(&h1(&b.t0)).then_with(|| a.t0.cmp(&b.t0)));
    Ok(report)
}

/// Numerator of `Phi_N(J(lambda(t)), J(mu(t)))` as a primitive integer polynomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocusPolynomial {
    pub level: u32,
    /// Ascending coefficients; empty for the zero polynomial.
    pub coeffs: Vec<Integer>,
}

impl LocusPolynomial {
    /// Vanishes identically: the fibers are isogenous for every `t`.
    pub fn is_degenerate(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Rational roots of height at most `h_max`, ascending. Empty when degenerate.
    pub fn rational_roots(&self, h_max: u64) -> Vec<Rational> {
        rational_roots(&self.coeffs, h_max)
    }
}

/// Exact locus polynomial at level `n`. Constant parameter maps are allowed.
pub fn isogeny_locus_oracle(spec: &CurveSpec, n: u32) -> Result<LocusPolynomial> {
    let phi = modular_polynomial(n, &PrecisionContext::default())?;
    let jl = spec.lambda.j_compose().ok_or(Error::ConstantMapDegenerate)?;
    let jm = spec.mu.j_compose().ok_or(Error::ConstantMapDegenerate)?;
    let d = phi.degree() as usize;
    let powers = |p: &Poly| {
        let mut v = vec![Poly::constant(Rational::from(1))];
        for i in 0..d {
            let next = v[i].mul(p);
            v.push(next);
        }
        v
    };
    let (a, b, c, e) = (powers(jl.num()), powers(jl.den()), powers(jm.num()), powers(jm.den()));
    let mut total = Poly::zero();
    for (&(ex, ey), coeff) in &phi.coeffs {
        let (ex, ey) = (ex as usize, ey as usize);
        let term = a[ex].mul(&b[d - ex]).mul(&c[ey]).mul(&e[d - ey]);
        total = total.add(&term.scale(&Rational::from(coeff)));
    }
    let coeffs = if total.is_zero() { Vec::new() } else { total.primitive_integer() };
    Ok(LocusPolynomial { level: n, coeffs })
}

/// `q^deg f(p / q)`.
fn homogeneous_eval(coeffs: &[Integer], p: i64, q: i64) -> Integer {
    let deg = coeffs.len() - 1;
    let mut acc = Integer::new();
    let mut qpow = Integer::from(1);
    // Horner in p with q powers accumulated from the top coefficient down.
    for (i, c) in coeffs.iter().rev().enumerate() {
        acc = acc * p + Integer::from(c * &qpow);
        if i < deg {
            qpow *= q;
        }
    }
    acc
}

/// Rational roots `p / q` with `max(|p|, q) <= h_max` by the rational root theorem.
pub fn rational_roots(coeffs: &[Integer], h_max: u64) -> Vec<Rational> {
    let Some(low) = coeffs.iter().position(|c| *c != 0) else { return Vec::new() };
    let mut roots = Vec::new();
    if low > 0 && h_max >= 1 {
        roots.push(Rational::new());
    }
    let f = &coeffs[low..];
    if f.len() > 1 {
        let a0 = &f[0];
        let an = f.last().expect("nonempty");
        for q in 1..=h_max {
            if !an.is_divisible_u(q as u32) {
                continue;
            }
            for p in 1..=h_max {
                if gcd_u64(p, q) != 1 || !a0.is_divisible_u(p as u32) {
                    continue;
                }
                for s in [p as i64, -(p as i64)] {
                    if homogeneous_eval(f, s, q as i64) == 0 {
                        roots.push(Rational::from((s, q as i64)));
                    }
                }
            }
        }
    }
    roots.sort();
    roots
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::spec::parse_spec;

    fn spec(lambda: &str, mu: &str, p: &str) -> CurveSpec {
        parse_spec(&format!(
            r#"{{"name": "t", "lambda": "{lambda}", "mu": "{mu}", "p_sections": [{{"x": "{p}", "sign": "+"}}]}}"#
        ))
        .unwrap()
    }

    /// Coprime pairs by a plain double loop.
    fn brute_count(h: i64) -> usize {
        let mut n = 0;
        for p in -h..=h {
            for q in 1..=h {
                if Integer::from(p).gcd(&Integer::from(q)) == 1 {
                    n += 1;
                }
            }
        }
        n
    }

    #[test]
    fn enumeration_small() {
        let v: Vec<Rational> = enumerate_rationals(1).collect();
        assert_eq!(v, vec![Rational::from(-1), Rational::new(), Rational::from(1)]);
        let v: Vec<String> = enumerate_rationals(2).map(|r| r.to_string()).collect();
        assert_eq!(v, ["-1", "0", "1", "-2", "-1/2", "1/2", "2"]);
        assert_eq!(enumerate_rationals(0).count(), 0);
    }

    #[test]
    fn enumeration_matches_brute_force() {
        for h in [3, 10, 17] {
            let v: Vec<Rational> = enumerate_rationals(h as u64).collect();
            assert_eq!(v.len(), brute_count(h));
            let mut s = v.clone();
            s.sort();
            s.dedup();
            assert_eq!(s.len(), v.len());
            assert!(v.windows(2).all(|w| height_order(&w[0], &w[1]) == Ordering::Less));
        }
    }

    #[test]
    fn parameters_skip_degenerate_fibers() {
        let s = spec("t", "t + 2", "t + 3");
        let v: Vec<String> = enumerate_parameters(&s, 2).map(|r| r.to_string()).collect();
        // t = 0, 1 (lambda) and t = -1, -2 (mu) are removed.
        assert_eq!(v, ["-1/2", "1/2", "2"]);
    }

    #[test]
    fn oracle_degenerate_and_degrees() {
        let s = spec("t", "1 - t", "t + 3");
        assert!(isogeny_locus_oracle(&s, 1).unwrap().is_degenerate());
        let s = spec("t", "t + 2", "t + 3");
        let o = isogeny_locus_oracle(&s, 1).unwrap();
        assert!(o.degree().unwrap() <= 12);
        assert_eq!(o.rational_roots(100), vec![Rational::from((-1, 2))]);
        // Bezout: psi(2) (deg J o lambda + deg J o mu) = 3 (6 + 12).
        let s = spec("t", "t^2", "t + 3");
        assert!(isogeny_locus_oracle(&s, 2).unwrap().degree().unwrap() <= 54);
    }

    #[test]
    fn root_search() {
        // (2t - 3)(t + 5) t^2 = 2t^4 + 7t^3 - 15t^2
        let c: Vec<Integer> = [0, 0, -15, 7, 2].iter().map(|&x| Integer::from(x)).collect();
        assert_eq!(
            rational_roots(&c, 10),
            vec![Rational::from(-5), Rational::new(), Rational::from((3, 2))]
        );
        assert_eq!(rational_roots(&c, 4), vec![Rational::new(), Rational::from((3, 2))]);
        assert!(rational_roots(&[], 5).is_empty());
    }

    #[test]
    fn landen_point_is_found() {
        let ctx = PrecisionContext::with_digits(40).unwrap();
        let s = spec("t", "t^2/144", "t - 4");
        let mut cfg = ScanConfig::new(6, 3, 10.0, ctx).unwrap();
        cfg.threads = 1;
        let rep = scan(&s, &cfg).unwrap();
        let f: Vec<&Finding> = rep.findings.iter().filter(|f| f.t0 == 4).collect();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].isogeny.n, 2);
        assert_eq!(f[0].relation.a, vec![2]);
        assert!(f[0].certified);
        let oracle: Vec<Rational> = isogeny_locus_oracle(&s, 2)
            .unwrap()
            .rational_roots(6)
            .into_iter()
            .filter(|t| s.fiber(t).is_some())
            .collect();
        let mut hits = rep.hits_at_level(2);
        hits.sort();
        assert_eq!(hits, oracle);
    }

    #[test]
    fn refuses_symmetric_without_override() {
        let ctx = PrecisionContext::with_digits(40).unwrap();
        let s = spec("t", "t + 2", "t + 3");
        let mut cfg = ScanConfig::new(3, 2, 10.0, ctx).unwrap();
        assert!(matches!(scan(&s, &cfg), Err(Error::NotAsymmetric { .. })));
        cfg.override_asymmetry = true;
        let rep = scan(&s, &cfg).unwrap();
        assert_eq!(rep.hits_at_level(1), vec![Rational::from((-1, 2))]);
        cfg.h1_max = 0;
        assert!(scan(&s, &cfg).unwrap().findings.is_empty());
    }
}
