//! Curve spec documents: the JSON input describing a family and its sections.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Complex, Float, Rational};
use serde::{Deserialize, Serialize};

use super::parse::parse_rational_function;
use super::poly::RatFunc;
use crate::analytic::{elliptic_log, EllipticLogarithm, PeriodPoint, Projective};
use crate::error::{Error, Result};
use crate::legendre::{rational_sqrt, CurvePoint};
use crate::precision::PrecisionContext;

/// Seed for the sample points used to validate sections.
const VALIDATION_SEED: u64 = 0x5eed_0001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionDocument {
    pub x: String,
    pub sign: Sign,
}

/// On-disk form of a [`CurveSpec`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    pub name: String,
    pub lambda: String,
    pub mu: String,
    #[serde(default)]
    pub p_sections: Vec<SectionDocument>,
    #[serde(default)]
    pub q_sections: Vec<SectionDocument>,
}

/// `(x(t), +-sqrt(x (x - 1) (x - f(t))))` on the Legendre curve of parameter `f(t)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub x: RatFunc,
    pub sign: Sign,
}

/// A section specialized at one parameter value.
#[derive(Debug, Clone, PartialEq)]
pub enum SectionValue {
    Infinity,
    /// `y = sign * sqrt(y2)`, with `sqrt` of a negative number on the positive imaginary axis.
    Affine { x: Rational, y2: Rational, sign: Sign },
}

impl Section {
    pub fn at(&self, t0: &Rational, lambda0: &Rational) -> SectionValue {
        match self.x.eval(t0) {
            None => SectionValue::Infinity,
            Some(x) => {
                let y2 = (&x * Rational::from(&x - 1u32)) * Rational::from(&x - lambda0);
                SectionValue::Affine { x, y2, sign: self.sign }
            }
        }
    }
}

impl SectionValue {
    pub fn x(&self) -> Option<&Rational> {
        match self {
            SectionValue::Infinity => None,
            SectionValue::Affine { x, .. } => Some(x),
        }
    }

    /// Exact rational point when `y2` is a rational square.
    pub fn rational_point(&self, lambda0: &Rational) -> Option<CurvePoint<Rational>> {
        match self {
            SectionValue::Infinity => Some(CurvePoint::infinity(lambda0.clone())),
            SectionValue::Affine { x, y2, sign } => {
                let mut y = rational_sqrt(y2)?;
                if *sign == Sign::Minus {
                    y = -y;
                }
                CurvePoint::new(lambda0.clone(), x.clone(), y).ok()
            }
        }
    }

    pub fn to_projective(&self, bits: u32) -> Projective {
        match self {
            SectionValue::Infinity => Projective::Infinity,
            SectionValue::Affine { x, y2, sign } => {
                let r = Float::with_val(bits, y2).abs().sqrt();
                let mut y = if *y2 < 0 {
                    Complex::with_val(bits, (0, r))
                } else {
                    Complex::with_val(bits, (r, 0))
                };
                if *sign == Sign::Minus {
                    y = -y;
                }
                Projective::Affine {
                    x: Complex::with_val(bits, (x, 0)),
                    y,
                }
            }
        }
    }

    /// Elliptic logarithm on `Z + Z tau` with `L(tau) = lambda0`.
    pub fn log(&self, lambda0: &Rational, tau: &PeriodPoint, ctx: &PrecisionContext) -> Result<EllipticLogarithm> {
        let bits = ctx.bits();
        let lam = Complex::with_val(bits, (lambda0, 0));
        elliptic_log(&self.to_projective(bits), &lam, tau, ctx)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveSpec {
    pub name: String,
    pub lambda: RatFunc,
    pub mu: RatFunc,
    pub p_sections: Vec<Section>,
    pub q_sections: Vec<Section>,
    pub document: SpecDocument,
}

fn field_err(field: &str, e: Error) -> Error {
    match e {
        Error::Parse { position, reason } => Error::Parse {
            position,
            reason: format!("in {field}: {reason}"),
        },
        other => other,
    }
}

/// Byte offset of a 1-based line and column.
fn offset_of(text: &str, line: usize, column: usize) -> usize {
    let mut off = 0;
    for (i, l) in text.split_inclusive('\n').enumerate() {
        if i + 1 == line {
            return off + column.saturating_sub(1);
        }
        off += l.len();
    }
    off
}

/// Parses and validates a JSON spec document.
pub fn parse_spec(text: &str) -> Result<CurveSpec> {
    let doc: SpecDocument = serde_json::from_str(text).map_err(|e| Error::Parse {
        position: offset_of(text, e.line(), e.column()),
        reason: e.to_string(),
    })?;
    spec_from_document(doc)
}

pub fn spec_from_document(doc: SpecDocument) -> Result<CurveSpec> {
    let lambda = parse_rational_function(&doc.lambda).map_err(|e| field_err("lambda", e))?;
    let mu = parse_rational_function(&doc.mu).map_err(|e| field_err("mu", e))?;
    let sections = |docs: &[SectionDocument], field: &str| -> Result<Vec<Section>> {
        docs.iter()
            .enumerate()
            .map(|(i, s)| {
                Ok(Section {
                    x: parse_rational_function(&s.x).map_err(|e| field_err(&format!("{field}[{i}].x"), e))?,
                    sign: s.sign,
                })
            })
            .collect()
    };
    let spec = CurveSpec {
        name: doc.name.clone(),
        p_sections: sections(&doc.p_sections, "p_sections")?,
        q_sections: sections(&doc.q_sections, "q_sections")?,
        lambda,
        mu,
        document: doc,
    };
    spec.validate()?;
    Ok(spec)
}

fn is_cusp(f: &RatFunc) -> bool {
    f.is_constant() && (f.is_zero() || f.eval(&Rational::new()) == Some(Rational::from(1)))
}

impl CurveSpec {
    pub fn m(&self) -> usize {
        self.p_sections.len()
    }

    pub fn n(&self) -> usize {
        self.q_sections.len()
    }

    fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::Validation("name must be nonempty".into()));
        }
        if self.lambda.is_constant() && self.mu.is_constant() {
            return Err(Error::ConstantMapDegenerate);
        }
        if is_cusp(&self.lambda) || is_cusp(&self.mu) {
            return Err(Error::Validation("a parameter map is constantly 0 or 1".into()));
        }
        if self.m() + self.n() == 0 {
            return Err(Error::Validation("at least one section is required".into()));
        }
        // Sections must specialize to points at generic parameters.
        let mut rng = ChaCha8Rng::seed_from_u64(VALIDATION_SEED);
        let mut checked = 0;
        for _ in 0..1000 {
            if checked == 3 {
                break;
            }
            let t0 = Rational::from((rng.gen_range(-997i64..=997), rng.gen_range(1i64..=997)));
            if self.fiber(&t0).is_none() {
                continue;
            }
            for (sections, field) in [(&self.p_sections, "p_sections"), (&self.q_sections, "q_sections")] {
                for (i, s) in sections.iter().enumerate() {
                    if s.x.eval(&t0).is_none() {
                        return Err(Error::Validation(format!(
                            "{field}[{i}] has no point at generic t (pole at t = {t0})"
                        )));
                    }
                }
            }
            checked += 1;
        }
        if checked < 3 {
            return Err(Error::Validation("could not find generic parameters to validate sections".into()));
        }
        Ok(())
    }

    /// `(lambda(t0), mu(t0))` when both are defined and avoid `{0, 1}`.
    pub fn fiber(&self, t0: &Rational) -> Option<(Rational, Rational)> {
        let l = self.lambda.eval(t0)?;
        let m = self.mu.eval(t0)?;
        let bad = |v: &Rational| *v == 0 || *v == 1;
        if bad(&l) || bad(&m) {
            return None;
        }
        Some((l, m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(lambda: &str, mu: &str) -> String {
        format!(
            r#"{{"name": "t", "lambda": "{lambda}", "mu": "{mu}", "p_sections": [{{"x": "t - 4", "sign": "+"}}], "q_sections": [{{"x": "2", "sign": "-"}}]}}"#
        )
    }

    #[test]
    fn minimal_valid() {
        let s = parse_spec(&doc("t", "t + 2")).unwrap();
        assert_eq!((s.m(), s.n()), (1, 1));
        assert_eq!(s.fiber(&Rational::from(3)), Some((Rational::from(3), Rational::from(5))));
        assert_eq!(s.fiber(&Rational::from(1)), None);
    }

    #[test]
    fn constant_maps_rejected() {
        assert!(matches!(parse_spec(&doc("3", "1/2")), Err(Error::ConstantMapDegenerate)));
        assert!(matches!(parse_spec(&doc("1", "t")), Err(Error::Validation(_))));
    }

    #[test]
    fn malformed_function() {
        match parse_spec(&doc("1/ ", "t")) {
            Err(Error::Parse { reason, .. }) => assert!(reason.contains("lambda")),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_spec("{\"name\": 3}"), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_spec(r#"{"name": "a", "lambda": "t", "mu": "t", "extra": 1}"#),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn section_values() {
        let s = parse_spec(&doc("t", "t + 2")).unwrap();
        let l0 = Rational::from(4);
        let v = s.p_sections[0].at(&Rational::from(4), &l0);
        assert_eq!(v, SectionValue::Affine { x: Rational::new(), y2: Rational::new(), sign: Sign::Plus });
        assert!(v.rational_point(&l0).is_some());
        let w = s.p_sections[0].at(&Rational::from(9), &Rational::from(9));
        // x = 5 on E_9: 5 * 4 * (-4) = -80, not a square.
        assert!(w.rational_point(&Rational::from(9)).is_none());
        match w.to_projective(64) {
            Projective::Affine { y, .. } => assert!(y.real().is_zero() && *y.imag() > 0),
            _ => panic!(),
        }
    }
}
