//! Findings serialization: JSON lines or CSV, each preceded by a header.
//!
//! CSV column order is the field order of [`FindingRecord`]. List-valued
//! fields are space-separated; a missing canonical height is written as `NA`.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::hypotheses::AsymmetryReport;
use super::scan::{h1, Finding, ScanConfig};
use crate::error::{Error, Result};

pub const TOOL_NAME: &str = "unlikely";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputHeader {
    pub tool: String,
    pub version: String,
    pub spec: String,
    pub seed: u64,
    pub config: ScanConfig,
    pub asymmetry: AsymmetryReport,
    pub enumerated: usize,
    pub hits: usize,
    pub skipped: usize,
}

impl OutputHeader {
    pub fn new(spec: &str, config: &ScanConfig, asymmetry: AsymmetryReport) -> Self {
        Self {
            tool: TOOL_NAME.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            spec: spec.into(),
            seed: config.seed,
            config: *config,
            asymmetry,
            enumerated: 0,
            hits: 0,
            skipped: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FindingRecord {
    pub t0: String,
    pub h1: String,
    pub lambda0: String,
    pub mu0: String,
    pub levels: String,
    pub isogeny_degree: u32,
    /// `A B C D`.
    pub matrix: String,
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub relation_a: String,
    pub relation_b: String,
    pub gamma1: i64,
    pub gamma2: i64,
    pub rho_re: f64,
    pub rho_im: f64,
    pub residual: f64,
    pub t_used: f64,
    pub kappa: f64,
    pub tau1_re: f64,
    pub tau1_im: f64,
    pub tau2_re: f64,
    pub tau2_im: f64,
    pub h_lambda: f64,
    pub h_mu: f64,
    pub canonical_heights: String,
    pub height_ratio: f64,
    pub tau_ratio: f64,
    pub coefficient_size: u64,
    pub gamma_ratio: f64,
    pub certified: bool,
}

fn join<T: ToString>(v: impl IntoIterator<Item = T>) -> String {
    v.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

impl From<&Finding> for FindingRecord {
    fn from(f: &Finding) -> Self {
        let m = &f.isogeny.matrix;
        let alpha = &f.isogeny.alpha;
        let r = &f.relation;
        Self {
            t0: f.t0.to_string(),
            h1: h1(&f.t0).to_string(),
            lambda0: f.lambda0.to_string(),
            mu0: f.mu0.to_string(),
            levels: join(&f.levels),
            isogeny_degree: f.isogeny.n,
            matrix: join([m.a, m.b, m.c, m.d]),
            alpha_re: alpha.real().to_f64(),
            alpha_im: alpha.imag().to_f64(),
            relation_a: join(&r.a),
            relation_b: join(&r.b),
            gamma1: r.gamma1,
            gamma2: r.gamma2,
            rho_re: r.rho.real().to_f64(),
            rho_im: r.rho.imag().to_f64(),
            residual: r.residual,
            t_used: r.t_used,
            kappa: r.kappa,
            tau1_re: f.tau1.real().to_f64(),
            tau1_im: f.tau1.imag().to_f64(),
            tau2_re: f.tau2.real().to_f64(),
            tau2_im: f.tau2.imag().to_f64(),
            h_lambda: f.heights.h_lambda,
            h_mu: f.heights.h_mu,
            canonical_heights: join(
                f.heights
                    .canonical
                    .iter()
                    .map(|h| h.map_or_else(|| "NA".to_string(), |v| v.to_string())),
            ),
            height_ratio: f.diagnostics.height_ratio,
            tau_ratio: f.diagnostics.tau_ratio,
            coefficient_size: f.diagnostics.coefficient_size,
            gamma_ratio: f.diagnostics.gamma_ratio,
            certified: f.certified,
        }
    }
}

/// Writes the header and one record per certified finding, in the given order.
pub fn emit_findings<W: Write>(out: &mut W, header: &OutputHeader, findings: &[Finding], format: OutputFormat) -> Result<()> {
    let records: Vec<FindingRecord> = findings.iter().filter(|f| f.certified).map(FindingRecord::from).collect();
    let head = serde_json::to_string(header)?;
    match format {
        OutputFormat::Json => {
            writeln!(out, "{head}")?;
            for r in &records {
                writeln!(out, "{}", serde_json::to_string(r)?)?;
            }
        }
        OutputFormat::Csv => {
            writeln!(out, "# {head}")?;
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
            w.write_record(CSV_COLUMNS)?;
            for r in &records {
                w.serialize(r)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            out.write_all(&bytes)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Column names of the CSV form.
pub const CSV_COLUMNS: [&str; 30] = [
    "t0",
    "h1",
    "lambda0",
    "mu0",
    "levels",
    "isogeny_degree",
    "matrix",
    "alpha_re",
    "alpha_im",
    "relation_a",
    "relation_b",
    "gamma1",
    "gamma2",
    "rho_re",
    "rho_im",
    "residual",
    "t_used",
    "kappa",
    "tau1_re",
    "tau1_im",
    "tau2_re",
    "tau2_im",
    "h_lambda",
    "h_mu",
    "canonical_heights",
    "height_ratio",
    "tau_ratio",
    "coefficient_size",
    "gamma_ratio",
    "certified",
];

/// Reads back the output of [`emit_findings`].
pub fn parse_findings<R: BufRead>(input: R, format: OutputFormat) -> Result<(OutputHeader, Vec<FindingRecord>)> {
    let mut lines = input.lines();
    let first = lines.next().ok_or_else(|| Error::Parse {
        position: 0,
        reason: "missing header".into(),
    })??;
    let head_text = match format {
        OutputFormat::Json => first.as_str(),
        OutputFormat::Csv => first.strip_prefix("# ").ok_or_else(|| Error::Parse {
            position: 0,
            reason: "CSV output must start with '# ' and the header".into(),
        })?,
    };
    let header: OutputHeader = serde_json::from_str(head_text)?;
    let rest = lines.collect::<std::io::Result<Vec<String>>>()?;
    let records = match format {
        OutputFormat::Json => rest
            .iter()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(Error::from))
            .collect::<Result<Vec<FindingRecord>>>()?,
        OutputFormat::Csv => {
            let body = rest.join("\n");
            let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
            r.deserialize().collect::<std::result::Result<Vec<FindingRecord>, _>>()?
        }
    };
    Ok((header, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::IntMatrix;
    use crate::isogeny::IsogenyWitness;
    use crate::precision::PrecisionContext;
    use crate::relation::RelationWitness;
    use crate::search::scan::{Diagnostics, FindingHeights};
    use rug::{Complex, Rational};

    fn header() -> OutputHeader {
        let cfg = ScanConfig::new(10, 2, 5.0, PrecisionContext::with_digits(40).unwrap()).unwrap();
        let asym = AsymmetryReport {
            raw_deg_x: 6,
            raw_deg_y: 12,
            fibration_degree: 1,
            deg_x: 6,
            deg_y: 12,
            asymmetric: true,
        };
        OutputHeader::new("demo", &cfg, asym)
    }

    fn finding(t0: Rational) -> Finding {
        let tau = Complex::with_val(64, (0, 1));
        let tau2 = Complex::with_val(64, (0, 2));
        let m = IntMatrix { a: 2, b: 0, c: 0, d: 1 };
        Finding {
            lambda0: t0.clone(),
            mu0: Rational::from((1, 9)),
            t0,
            levels: vec![2],
            isogeny: IsogenyWitness::new(m, &tau2, &tau, 1e-10).unwrap(),
            tau1: tau2.clone(),
            tau2: tau,
            relation: RelationWitness {
                a: vec![2],
                b: vec![0],
                gamma1: 1,
                gamma2: 0,
                rho: Complex::new(64),
                residual: 1e-70,
                t_used: 10.0,
                kappa: 31.5,
            },
            heights: FindingHeights {
                h_lambda: 1.386,
                h_mu: 2.197,
                canonical: vec![Some(0.0), None],
            },
            diagnostics: Diagnostics {
                height_ratio: 1.386,
                tau_ratio: 2.0,
                coefficient_size: 2,
                gamma_ratio: 1e-5,
            },
            certified: true,
        }
    }

    fn emit(findings: &[Finding], format: OutputFormat) -> String {
        let mut buf = Vec::new();
        emit_findings(&mut buf, &header(), findings, format).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn empty_is_header_only() {
        let s = emit(&[], OutputFormat::Json);
        assert_eq!(s.lines().count(), 1);
        let (h, r) = parse_findings(s.as_bytes(), OutputFormat::Json).unwrap();
        assert_eq!(h, header());
        assert!(r.is_empty());
        let s = emit(&[], OutputFormat::Csv);
        assert_eq!(s.lines().count(), 2);
        assert!(parse_findings(s.as_bytes(), OutputFormat::Csv).unwrap().1.is_empty());
    }

    #[test]
    fn round_trip_both_formats() {
        let f = finding(Rational::from(4));
        for fmt in [OutputFormat::Json, OutputFormat::Csv] {
            let s = emit(std::slice::from_ref(&f), fmt);
            let (_, recs) = parse_findings(s.as_bytes(), fmt).unwrap();
            assert_eq!(recs, vec![FindingRecord::from(&f)]);
            assert_eq!(recs[0].canonical_heights, "0 NA");
            assert_eq!(recs[0].matrix, "2 0 0 1");
        }
    }

    #[test]
    fn json_key_order_is_fixed() {
        let s = emit(&[finding(Rational::from(4))], OutputFormat::Json);
        let line = s.lines().nth(1).unwrap();
        let keys: Vec<&str> = CSV_COLUMNS.to_vec();
        let mut last = 0;
        for k in keys {
            let at = line.find(&format!("\"{k}\":")).unwrap();
            assert!(at >= last);
            last = at;
        }
    }

    #[test]
    fn uncertified_not_emitted() {
        let mut f = finding(Rational::from(4));
        f.certified = false;
        assert_eq!(emit(&[f], OutputFormat::Json).lines().count(), 1);
    }
}
