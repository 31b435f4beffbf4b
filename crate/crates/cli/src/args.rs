//! Command-line surface and its normalized form, [`RunConfig`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gamma_criteria::criterion::DEFAULT_CAP_BITS;

use crate::error::{CliError, Result};

pub const PREC_CAP_ENV: &str = "GAMMA_CRITERIA_PREC_CAP";

/// Largest `p` accepted by `pade`; exact rationals grow quickly.
pub const PADE_P_CAP: u32 = 6;

#[derive(Parser, Debug)]
#[command(name = "gamma-criteria", version, about = "Irrationality-criterion sequences for Euler's constant")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Worker threads for row-level parallelism (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Working-precision cap in bits.
    #[arg(long, global = true, env = PREC_CAP_ENV, default_value_t = DEFAULT_CAP_BITS)]
    pub prec_cap: u32,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Exit with code 4 if any row is uncertified at the precision cap.
    #[arg(long, global = true)]
    pub strict: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    /// One JSON object per line for row output, a single document otherwise.
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Ratios `0.7^n / {d_n L_{n,m}}` next to the published table.
    Table(TableArgs),
    /// Fractional parts and their running means, with checkpointing.
    Sweep(SweepArgs),
    /// Run an invariant suite and report per-check status.
    Verify(VerifyArgs),
    /// Euler's constant with a certified radius.
    Gamma(GammaArgs),
    /// The rational criterion built from `[n/n]` approximants of `ln(1+t)`.
    Pade(PadeArgs),
}

#[derive(Args, Debug)]
pub struct TableArgs {
    #[arg(long, default_value_t = 20)]
    pub n_max: u32,
    /// Comma-separated values of `m`.
    #[arg(long = "m", value_delimiter = ',', default_value = "0,1,2,3")]
    pub m: Vec<u32>,
    /// Bits of the fractional parts that must be certified.
    #[arg(long, default_value_t = 53)]
    pub frac_bits: u32,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 100)]
    pub n_max: u32,
    #[arg(long = "m", value_delimiter = ',', default_value = "0")]
    pub m: Vec<u32>,
    #[arg(long, default_value_t = 53)]
    pub frac_bits: u32,
    /// JSON-lines checkpoint; an existing file is resumed.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Identity,
    Lemma1,
    Lemma2,
    Bounds,
    Pade,
    Sondow,
    Table,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Identity => "identity",
            Suite::Lemma1 => "lemma1",
            Suite::Lemma2 => "lemma2",
            Suite::Bounds => "bounds",
            Suite::Pade => "pade",
            Suite::Sondow => "sondow",
            Suite::Table => "table",
            Suite::All => "all",
        }
    }
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    /// Quadrature tolerance overriding the per-suite defaults.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Classic,
    New,
    Identity,
}

#[derive(Args, Debug)]
pub struct GammaArgs {
    #[arg(long, default_value_t = 30)]
    pub digits: u32,
    #[arg(long, value_enum, default_value_t = Method::Classic)]
    pub method: Method,
}

#[derive(Args, Debug)]
pub struct PadeArgs {
    #[arg(long, default_value_t = 3)]
    pub p_max: u32,
    #[arg(long = "m", value_delimiter = ',', default_value = "0,1")]
    pub m: Vec<u32>,
    /// Digits in the decimal rendering of the exact fractional part.
    #[arg(long, default_value_t = 30)]
    pub digits: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Job {
    Table,
    Sweep,
    Verify(Suite),
    Gamma(Method),
    Pade,
}

/// Validated settings shared by all subcommands.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub job: Job,
    /// `n_max` for row commands, `p_max` for `pade`, digits for `gamma`.
    pub bound: u32,
    pub m_list: Vec<u32>,
    pub target_frac_bits: u32,
    pub decimal_digits: u32,
    pub tolerance: Option<f64>,
    pub prec_cap: u32,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub workers: Option<usize>,
    pub strict: bool,
}

fn positive(name: &str, v: u32) -> Result<u32> {
    if v == 0 {
        return Err(CliError::Usage(format!("--{name} must be positive")));
    }
    Ok(v)
}

fn m_list(mut m: Vec<u32>) -> Result<Vec<u32>> {
    if m.is_empty() {
        return Err(CliError::Usage("--m needs at least one value".into()));
    }
    m.sort_unstable();
    m.dedup();
    Ok(m)
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<RunConfig> {
        let mut cfg = RunConfig {
            job: Job::Table,
            bound: 0,
            m_list: Vec::new(),
            target_frac_bits: 53,
            decimal_digits: 30,
            tolerance: None,
            prec_cap: positive("prec-cap", cli.prec_cap)?,
            format: cli.format,
            out: cli.out,
            checkpoint: None,
            workers: cli.workers,
            strict: cli.strict,
        };
        if cli.workers == Some(0) {
            return Err(CliError::Usage("--workers must be positive".into()));
        }
        match cli.command {
            Command::Table(a) => {
                cfg.bound = positive("n-max", a.n_max)?;
                cfg.m_list = m_list(a.m)?;
                cfg.target_frac_bits = positive("frac-bits", a.frac_bits)?;
            }
            Command::Sweep(a) => {
                cfg.job = Job::Sweep;
                cfg.bound = positive("n-max", a.n_max)?;
                cfg.m_list = m_list(a.m)?;
                cfg.target_frac_bits = positive("frac-bits", a.frac_bits)?;
                cfg.checkpoint = a.checkpoint;
            }
            Command::Verify(a) => {
                cfg.job = Job::Verify(a.suite);
                if let Some(t) = a.tol {
                    if !(t > 0.0 && t < 1.0) {
                        return Err(CliError::Usage("--tol must lie in (0, 1)".into()));
                    }
                }
                cfg.tolerance = a.tol;
            }
            Command::Gamma(a) => {
                cfg.job = Job::Gamma(a.method);
                cfg.bound = positive("digits", a.digits)?;
                let bits = (a.digits as f64 * std::f64::consts::LOG2_10).ceil() as u64 + 64;
                if bits > cfg.prec_cap as u64 {
                    return Err(CliError::Usage(format!(
                        "{} digits need about {bits} bits, above the cap of {} bits",
                        a.digits, cfg.prec_cap
                    )));
                }
            }
            Command::Pade(a) => {
                cfg.job = Job::Pade;
                if a.p_max > PADE_P_CAP {
                    return Err(CliError::Usage(format!("--p-max is capped at {PADE_P_CAP}")));
                }
                cfg.bound = a.p_max;
                cfg.m_list = m_list(a.m)?;
                cfg.decimal_digits = a.digits;
            }
        }
        Ok(cfg)
    }
}
