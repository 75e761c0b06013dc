use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use logbm_core::harness::{
    self, exit_code_for, BodySpec, EqualityBuilder, Format, Options, ReflectionSpec, Report,
};
use logbm_core::l0::GridSpec;
use logbm_core::Error;

#[derive(Parser, Debug)]
#[command(name = "logbm", version, about = "Numerical checks of log-Brunn-Minkowski type inequalities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// Combination parameters, comma separated.
    #[arg(long, global = true, value_delimiter = ',', default_values_t = harness::DEFAULT_LAMBDAS.to_vec())]
    lambda: Vec<f64>,
    /// circle-N, icosahedral-K, lattice-R or auto.
    #[arg(long, global = true, default_value = "auto")]
    grid_level: String,
    /// Decimal or 0x-prefixed hexadecimal.
    #[arg(long, global = true, default_value = "0x5EED", value_parser = parse_seed)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 1_000_000)]
    mc_samples: usize,
    /// Report path; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// csv or text.
    #[arg(long, global = true, default_value = "csv")]
    format: String,
    /// coordinate, dihedral-M, hyperoctahedral, sheared-coordinate, a JSON
    /// list of {normal, flipped}, or a file holding such a list.
    #[arg(long, global = true)]
    reflections: Option<String>,
    /// Use the plain grid even for polytope pairs.
    #[arg(long, global = true)]
    no_fan_rays: bool,
    /// Grid refinements allowed while a certified margin is not positive.
    #[arg(long, global = true, default_value_t = 2)]
    max_refinements: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Volume of the log-Minkowski combination against the geometric mean.
    VerifyLogbm { k: PathBuf, l: PathBuf },
    /// Log-Minkowski inequality for cone-volume measures.
    VerifyLogm { k: PathBuf, l: PathBuf },
    /// Equality for direct sums of dilates, or strictness for a pair.
    EqualitySuite { builder: PathBuf },
    /// Coordinate blocks of an unconditional body.
    DetectSum { body: PathBuf },
    /// Chamber and unconditionalization pipeline.
    Symmetrize { body: PathBuf },
    /// Gaussian-measure inequalities by Monte Carlo.
    GaussianSuite { k: PathBuf, l: PathBuf },
    /// Cone-volume measure comparison.
    Uniqueness { k: PathBuf, l: PathBuf },
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let r = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(h) => u64::from_str_radix(h, 16),
        None => s.parse(),
    };
    r.map_err(|e| format!("bad seed {s:?}: {e}"))
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::argument(format!("cannot read {}: {e}", path.display())))
}

fn body(path: &Path) -> Result<BodySpec, Error> {
    harness::parse_spec(&read(path)?).map_err(|e| Error::argument(format!("{}: {e}", path.display())))
}

fn options(c: &Common) -> Result<Options, Error> {
    let reflections = match &c.reflections {
        None => None,
        Some(r) => {
            let p = Path::new(r);
            let text = if !r.trim_start().starts_with('[') && p.is_file() { read(p)? } else { r.clone() };
            Some(ReflectionSpec::parse(&text)?)
        }
    };
    Ok(Options {
        lambdas: c.lambda.clone(),
        grid: c.grid_level.parse::<GridSpec>()?,
        seed: c.seed,
        mc_samples: c.mc_samples,
        reflections,
        fan_rays: !c.no_fan_rays,
        max_refinements: c.max_refinements,
    })
}

fn run(cli: &Cli) -> Result<Report, Error> {
    let opts = options(&cli.common)?;
    match &cli.command {
        Command::VerifyLogbm { k, l } => harness::verify_logbm(&body(k)?, &body(l)?, &opts),
        Command::VerifyLogm { k, l } => harness::verify_logm(&body(k)?, &body(l)?, &opts),
        Command::EqualitySuite { builder } => harness::equality_suite(&EqualityBuilder::parse(&read(builder)?)?, &opts),
        Command::DetectSum { body: b } => harness::detect_sum(&body(b)?, &opts),
        Command::Symmetrize { body: b } => harness::symmetrize_pipeline(&body(b)?, &opts),
        Command::GaussianSuite { k, l } => harness::gaussian_suite(&body(k)?, &body(l)?, &opts),
        Command::Uniqueness { k, l } => harness::uniqueness(&body(k)?, &body(l)?, &opts),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    let format = match cli.common.format.parse::<Format>() {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    };
    match run(&cli) {
        Ok(report) => {
            let text = report.render(format);
            match &cli.common.out {
                Some(path) => {
                    if let Err(e) = fs::write(path, text) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(3);
                    }
                }
                None => print!("{text}"),
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e) as u8)
        }
    }
}
