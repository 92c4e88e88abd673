//! Curve specs, hypothesis checks, parameter scans and findings output.

pub mod hypotheses;
pub mod output;
pub mod parse;
pub mod poly;
pub mod scan;
pub mod spec;

pub use hypotheses::{asymmetry_check, genericity_check, AsymmetryReport, GenericityReport, GenericitySample};
pub use output::{emit_findings, parse_findings, FindingRecord, OutputFormat, OutputHeader};
pub use parse::parse_rational_function;
pub use poly::{Poly, RatFunc};
pub use scan::{
    enumerate_parameters, enumerate_rationals, isogeny_locus_oracle, rational_roots, scan, Finding, Hit,
    LocusPolynomial, ScanConfig, ScanReport, Skip,
};
pub use spec::{parse_spec, CurveSpec, Section, SectionDocument, Sign, SpecDocument};
