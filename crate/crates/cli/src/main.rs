//! cm-expand: expansion of a weight-2 form at a CM point with a certified
//! denominator, split into subcommands per pipeline stage.
//!
//! Exit codes: 0 success, 1 invalid config, 2 out of scope, 3 insufficient
//! precision, 4 rounding ambiguity during recovery.

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::Value;

use cm_expand::denominators::DenominatorCertificate;
use cm_expand::error::{Error, Result};

use config::JobConfig;

#[derive(Parser)]
#[command(name = "cm-expand", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Working precision in bits (overrides the config).
    #[arg(long, global = true)]
    prec: Option<usize>,
    /// Number of coefficients to compute (overrides the config).
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Parallelism degree.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output path (directory for `pipeline`, file otherwise; default stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute the denominator certificate for a configured basepoint.
    Denominator {
        #[arg(long)]
        config: PathBuf,
    },
    /// Expand the form at every conjugate basepoint and rescale by C^[l+1].
    Expand {
        #[arg(long)]
        config: PathBuf,
        /// Certificate file (defaults to C = 1).
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// Round rescaled coefficients to exact algebraic integers.
    Recover {
        #[arg(long)]
        config: PathBuf,
        /// Coefficients file produced by `expand`.
        #[arg(long)]
        coeffs: PathBuf,
    },
    /// denominator, expand, recover in sequence.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
    },
    /// Newton-polygon diagnostics of [p](T) at a rational j-invariant.
    Newton {
        #[arg(long)]
        p: u64,
        /// j-invariant as an integer or "num/den".
        #[arg(long)]
        j: String,
    },
    /// Coset and ramification diagnostics for the configured level structure.
    Cosets {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load_config(path: &Path, prec: Option<usize>, n: Option<usize>) -> Result<JobConfig> {
    let mut cfg = JobConfig::load(path)?;
    if let Some(p) = prec {
        if p < 32 {
            return Err(Error::InvalidInput("precision below 32 bits".into()));
        }
        cfg.precision = p;
    }
    if let Some(n) = n {
        cfg.n = n;
    }
    Ok(cfg)
}

fn read_json(path: &Path) -> Result<Value> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

fn emit(v: &Value, out: Option<&Path>) -> Result<()> {
    let text = format!("{}\n", serde_json::to_string_pretty(v)?);
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Whether a failure came from the recovery rounding step, which gets its
/// own exit code.
struct Failure {
    err: Error,
    recovery: bool,
}

fn run(cli: &Cli) -> std::result::Result<(), Failure> {
    let plain = |err: Error| Failure { err, recovery: false };
    if let Some(jobs) = cli.jobs {
        // ignore "already initialized" when tests invoke run twice
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    let out = cli.out.as_deref();
    match &cli.cmd {
        Cmd::Denominator { config } => {
            let cfg = load_config(config, cli.prec, cli.n).map_err(plain)?;
            let v = commands::cmd_denominator(&cfg).map_err(plain)?;
            emit(&v, out).map_err(plain)
        }
        Cmd::Expand { config, cert } => {
            let cfg = load_config(config, cli.prec, cli.n).map_err(plain)?;
            let cert = match cert {
                Some(p) => DenominatorCertificate::from_json(&read_json(p).map_err(plain)?)
                    .map_err(plain)?,
                None => DenominatorCertificate::default(),
            };
            let v = commands::cmd_expand(&cfg, &cert).map_err(plain)?;
            emit(&v, out).map_err(plain)
        }
        Cmd::Recover { config, coeffs } => {
            let cfg = load_config(config, cli.prec, cli.n).map_err(plain)?;
            let coeffs = read_json(coeffs).map_err(plain)?;
            let v = commands::cmd_recover(&cfg, &coeffs)
                .map_err(|err| Failure { err, recovery: true })?;
            emit(&v, out).map_err(plain)
        }
        Cmd::Pipeline { config } => {
            let cfg = load_config(config, cli.prec, cli.n).map_err(plain)?;
            let dir = out.ok_or_else(|| {
                plain(Error::InvalidInput(
                    "pipeline needs --out DIRECTORY".into(),
                ))
            })?;
            std::fs::create_dir_all(dir).map_err(|e| plain(e.into()))?;
            let cert_v = commands::cmd_denominator(&cfg).map_err(plain)?;
            emit(&cert_v, Some(&dir.join("certificate.json"))).map_err(plain)?;
            let cert = DenominatorCertificate::from_json(&cert_v).map_err(plain)?;
            let coeffs = commands::cmd_expand(&cfg, &cert).map_err(plain)?;
            emit(&coeffs, Some(&dir.join("coefficients.json"))).map_err(plain)?;
            let exact = commands::cmd_recover(&cfg, &coeffs)
                .map_err(|err| Failure { err, recovery: true })?;
            emit(&exact, Some(&dir.join("recovered.json"))).map_err(plain)
        }
        Cmd::Newton { p, j } => {
            let j = config::parse_rational(j).map_err(plain)?;
            let v = commands::cmd_newton(*p, &j).map_err(plain)?;
            emit(&v, out).map_err(plain)
        }
        Cmd::Cosets { config } => {
            let cfg = load_config(config, cli.prec, cli.n).map_err(plain)?;
            let v = commands::cmd_cosets(&cfg).map_err(plain)?;
            emit(&v, out).map_err(plain)
        }
    }
}

fn exit_code(f: &Failure) -> u8 {
    match &f.err {
        Error::Precision { .. } | Error::UndecidableValuation => {
            if f.recovery {
                4
            } else {
                3
            }
        }
        Error::OutOfScope(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.err);
            ExitCode::from(exit_code(&f))
        }
    }
}
