use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Complex;

use unlikely_core::analytic::{EllipticLogarithm, PeriodPoint};
use unlikely_core::isogeny::{compute_modular_polynomial, primitive_cosets};
use unlikely_core::relation::{count_zt_hits, LogConfiguration};
use unlikely_core::search::{
    asymmetry_check, emit_findings, genericity_check, isogeny_locus_oracle, parse_spec, scan, CurveSpec,
    OutputFormat, OutputHeader, ScanConfig,
};
use unlikely_core::{PrecisionContext, Result};

#[derive(Parser)]
#[command(name = "unlikely", version, about = "Scan Legendre families for isogenies with dependent sections")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report the asymmetry and genericity checks for a spec.
    Check {
        spec: PathBuf,
        #[command(flatten)]
        opts: ScanOpts,
    },
    /// Scan parameters of bounded height and emit certified findings.
    Scan {
        spec: PathBuf,
        #[command(flatten)]
        opts: ScanOpts,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Write findings here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print the exact isogeny-locus polynomial and its small rational roots.
    Oracle {
        spec: PathBuf,
        /// Isogeny degree N.
        #[arg(long, default_value_t = 2)]
        level: u32,
        #[arg(long, default_value_t = 100)]
        h1_max: u64,
    },
    /// Count synthetic configurations with bounded witnesses over a grid of T.
    CountZt {
        /// Random configurations.
        #[arg(long, default_value_t = 20)]
        samples: usize,
        /// Configurations with a planted isogeny and relation.
        #[arg(long, default_value_t = 10)]
        planted: usize,
        /// Comma-separated ascending T values.
        #[arg(long, default_value = "1,2,3,5,10")]
        t_grid: String,
        #[arg(long, default_value_t = 40)]
        digits: u32,
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the modular polynomial of level N.
    Modpoly {
        n: u32,
        #[arg(long, default_value_t = 64)]
        digits: u32,
    },
}

#[derive(Args, Clone)]
struct ScanOpts {
    #[arg(long, default_value_t = 100)]
    h1_max: u64,
    #[arg(long, default_value_t = 3)]
    n_max: u32,
    #[arg(long, default_value_t = 10.0)]
    t_relation: f64,
    /// Working decimal digits; certification uses twice as many.
    #[arg(long, default_value_t = 40)]
    digits: u32,
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long)]
    override_asymmetry: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl ScanOpts {
    fn config(&self) -> Result<ScanConfig> {
        let mut c = ScanConfig::new(
            self.h1_max,
            self.n_max,
            self.t_relation,
            PrecisionContext::with_digits(self.digits)?,
        )?;
        c.threads = self.threads;
        c.override_asymmetry = self.override_asymmetry;
        c.seed = self.seed;
        Ok(c)
    }
}

fn load_spec(path: &PathBuf) -> Result<CurveSpec> {
    parse_spec(&fs::read_to_string(path)?)
}

fn run(cli: Cli) -> Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Check { spec, opts } => {
            let spec = load_spec(&spec)?;
            let cfg = opts.config()?;
            let asym = asymmetry_check(&spec)?;
            let gen = genericity_check(&spec, cfg.n_max, cfg.t_relation, cfg.seed, &cfg.precision)?;
            let report = serde_json::json!({
                "spec": spec.name,
                "seed": cfg.seed,
                "asymmetry": asym,
                "genericity": gen,
                "genericity_passed": gen.passed(),
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
        }
        Command::Scan {
            spec,
            opts,
            format,
            output,
        } => {
            let spec = load_spec(&spec)?;
            let cfg = opts.config()?;
            let report = scan(&spec, &cfg)?;
            let mut header = OutputHeader::new(&spec.name, &cfg, report.asymmetry);
            header.enumerated = report.enumerated;
            header.hits = report.hits.len();
            header.skipped = report.skipped.len();
            let format = match format {
                Format::Json => OutputFormat::Json,
                Format::Csv => OutputFormat::Csv,
            };
            match output {
                Some(p) => emit_findings(&mut fs::File::create(p)?, &header, &report.findings, format)?,
                None => emit_findings(&mut out, &header, &report.findings, format)?,
            }
            for s in &report.skipped {
                eprintln!("skipped t = {}: {}", s.t0, s.reason);
            }
            eprintln!(
                "{} parameters, {} hits, {} findings, {} skipped",
                report.enumerated,
                report.hits.len(),
                report.findings.len(),
                report.skipped.len()
            );
        }
        Command::Oracle { spec, level, h1_max } => {
            let spec = load_spec(&spec)?;
            let poly = isogeny_locus_oracle(&spec, level)?;
            let roots: Vec<String> = poly
                .rational_roots(h1_max)
                .into_iter()
                .filter(|t| spec.fiber(t).is_some())
                .map(|t| t.to_string())
                .collect();
            let report = serde_json::json!({
                "spec": spec.name,
                "level": level,
                "degenerate": poly.is_degenerate(),
                "degree": poly.degree(),
                "coefficients": poly.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "rational_roots": roots,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
        }
        Command::CountZt {
            samples,
            planted,
            t_grid,
            digits,
            threads,
            seed,
        } => {
            let grid = t_grid
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| unlikely_core::Error::InvalidArgument(format!("--t-grid: {e}")))?;
            let ctx = PrecisionContext::with_digits(digits)?;
            let configs = synthetic_configurations(samples, planted, seed, &ctx)?;
            let rho = Complex::new(ctx.bits());
            let count = || count_zt_hits(&configs, &rho, &grid, &ctx);
            let rows = if threads > 0 {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()
                    .map_err(|e| unlikely_core::Error::InvalidArgument(e.to_string()))?
                    .install(count)?
            } else {
                count()?
            };
            writeln!(out, "T\thits\t(samples = {}, planted = {planted}, seed = {seed})", configs.len())?;
            for (t, n) in rows {
                writeln!(out, "{t}\t{n}")?;
            }
        }
        Command::Modpoly { n, digits } => {
            let (phi, rep) = compute_modular_polynomial(n, &PrecisionContext::with_digits(digits)?)?;
            write!(out, "{}", phi.to_text())?;
            eprintln!(
                "interpolated at {:?} bits, rounding residues {:e} and {:e}",
                rep.bits, rep.residues.0, rep.residues.1
            );
        }
    }
    Ok(())
}

/// `samples` independent configurations plus `planted` ones with `tau1 = M tau2`
/// for an upper-triangular coset `M` of level at most 3 and `z = alpha w`.
fn synthetic_configurations(
    samples: usize,
    planted: usize,
    seed: u64,
    ctx: &PrecisionContext,
) -> Result<Vec<LogConfiguration>> {
    let bits = ctx.certifying().bits();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random_tau = |rng: &mut ChaCha8Rng| {
        let re: f64 = rng.gen_range(-0.5..0.5);
        let im: f64 = rng.gen_range(1.0..2.0);
        PeriodPoint::new(Complex::with_val(bits, (re, im)))
    };
    let random_log = |rng: &mut ChaCha8Rng, tau: &PeriodPoint| {
        let (x, y): (f64, f64) = (rng.gen(), rng.gen());
        let z = Complex::with_val(bits, tau.tau() * y) + x;
        EllipticLogarithm::new(&z, tau)
    };
    let mut out = Vec::with_capacity(samples + planted);
    for _ in 0..samples {
        let t1 = random_tau(&mut rng)?;
        let t2 = random_tau(&mut rng)?;
        let z = vec![random_log(&mut rng, &t1)];
        let w = vec![random_log(&mut rng, &t2)];
        out.push(LogConfiguration::new(t1, z, t2, w, Complex::with_val(bits, 1))?);
    }
    for _ in 0..planted {
        let level = rng.gen_range(1..=3);
        let cosets = primitive_cosets(level);
        let m = cosets[rng.gen_range(0..cosets.len())];
        let t2 = random_tau(&mut rng)?;
        let t1 = PeriodPoint::new(m.act(t2.tau()))?;
        let alpha = Complex::with_val(bits, m.a - Complex::with_val(bits, t1.tau() * m.c));
        let w = random_log(&mut rng, &t2);
        let z = EllipticLogarithm::new(&Complex::with_val(bits, &alpha * &w.z), &t1);
        out.push(LogConfiguration::new(t1, vec![z], t2, vec![w], alpha)?);
    }
    Ok(out)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
