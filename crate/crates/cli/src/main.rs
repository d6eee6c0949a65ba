//! `bessel`: command-line front end for `bessel-core`.
//!
//! Exit status: 0 on success, 2 when an input fails validation, 1 on an
//! internal failure, 64 for an unknown or missing subcommand.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use bessel_core::{parse_complex, Error, OutputFormat, RunConfig};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

pub const EXIT_INTERNAL: u8 = 1;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_USAGE: u8 = 64;

#[derive(Debug, Parser)]
#[command(name = "bessel", version, about = "Green's operators, norms and domain diagnostics for complex Bessel operators")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// key=value configuration file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[arg(long, global = true, allow_hyphen_values = true)]
    pub t_min: Option<f64>,

    #[arg(long, global = true, allow_hyphen_values = true)]
    pub t_max: Option<f64>,

    /// Number of grid nodes.
    #[arg(long, global = true)]
    pub n: Option<usize>,

    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output format: json or csv.
    #[arg(long, alias = "out", global = true)]
    pub format: Option<String>,

    /// Tolerance override as name=value; repeatable.
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    pub tolerances: Vec<String>,
}

/// Coupling given either as `α` or as the order `m` with `α = m²`.
#[derive(Debug, Args, Clone)]
#[group(required = true, multiple = false)]
pub struct ParamArgs {
    #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
    pub alpha: Option<Complex64>,

    #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
    pub m: Option<Complex64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// The three norm estimates of Q or Z.
    Norm {
        #[command(flatten)]
        param: ParamArgs,
        /// Q or Z.
        #[arg(long, default_value = "Q")]
        kind: String,
    },
    /// Position of alpha relative to the critical parabola.
    Region {
        #[command(flatten)]
        param: ParamArgs,
    },
    /// Green identity residual at n and 2n nodes for a Gaussian source.
    GreenCheck {
        #[command(flatten)]
        param: ParamArgs,
        /// forward, two-sided, compressed-forward or compressed-two-sided.
        #[arg(long, default_value = "forward")]
        kind: String,
        /// Cutoff `a` for the compressed kinds.
        #[arg(long)]
        cutoff: Option<f64>,
        /// Centre of the source `exp(-s (x - c)^2)`.
        #[arg(long, default_value_t = 1.0)]
        center: f64,
        /// Sharpness `s` of the source.
        #[arg(long, default_value_t = 8.0)]
        sharpness: f64,
    },
    /// Boundary coefficients and domain classification of a sampled function.
    Boundary {
        #[command(flatten)]
        param: ParamArgs,
        /// CSV file with columns x,re,im on a log-uniform grid.
        #[arg(long, conflicts_with = "sample")]
        input: Option<PathBuf>,
        /// Built-in sample: power-plus, power-minus or smooth.
        #[arg(long, default_value = "power-plus")]
        sample: String,
        #[arg(long, default_value_t = 0.5)]
        plateau: f64,
        #[arg(long, default_value_t = 1.0)]
        support: f64,
    },
    /// One of the functional inequalities on its reference example.
    Check {
        /// estima, rellich, hardy or kato-bound.
        #[arg(long)]
        inequality: String,
        /// Order for kato-bound.
        #[arg(long, value_parser = complex_arg, allow_hyphen_values = true, default_value = "0.5+0.5i")]
        m: Complex64,
        /// Cutoff for kato-bound.
        #[arg(long, default_value_t = 8.0)]
        cutoff: f64,
    },
    /// Divergence profile on the critical line Re(m) = 1.
    Pathology {
        #[arg(long)]
        tau: f64,
        #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
        m: Complex64,
        /// The pathology grid spans t in [-depth, 0.05].
        #[arg(long, default_value_t = 40.0)]
        depth: f64,
        /// Cutoff of the compressed two-sided operator.
        #[arg(long, default_value_t = 1.0)]
        a: f64,
    },
    /// Bilinear forms of the first-order factorizations on interior bumps.
    Factorize {
        #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
        m: Complex64,
        /// plus or minus.
        #[arg(long, default_value = "plus")]
        sign: String,
    },
    /// Analyticity of the compressed forward family and the matrix Kato-Rellich checks.
    Holo {
        #[arg(long, value_parser = complex_arg, allow_hyphen_values = true, default_value = "0.25")]
        alpha0: Complex64,
        #[arg(long, default_value_t = 0.1)]
        radius: f64,
        /// Matrix size of the seeded family.
        #[arg(long, default_value_t = 50)]
        size: usize,
        /// Relative bound of the seeded family.
        #[arg(long, default_value_t = 0.5)]
        relative_bound: f64,
    },
    /// Runs the full acceptance suite.
    Report,
}

fn complex_arg(s: &str) -> Result<Complex64, String> {
    parse_complex(s).map_err(|e| e.to_string())
}

impl ParamArgs {
    pub fn alpha(&self) -> Complex64 {
        match (self.alpha, self.m) {
            (Some(a), _) => a,
            (None, Some(m)) => m * m,
            (None, None) => unreachable!("clap requires one of --alpha, --m"),
        }
    }
}

/// Failure of a subcommand, split by exit status.
#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Numerical(_) | Error::GridMismatch(_) => Failure::Internal(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

fn build_config(g: &GlobalArgs) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &g.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Validation(format!("cannot read {}: {e}", path.display())))?;
        cfg.merge(&text)?;
    }
    if let Some(v) = g.t_min {
        cfg.t_min = v;
    }
    if let Some(v) = g.t_max {
        cfg.t_max = v;
    }
    if let Some(v) = g.n {
        cfg.n = v;
    }
    if let Some(v) = g.seed {
        cfg.seed = v;
    }
    if let Some(f) = &g.format {
        cfg.format = f.parse::<OutputFormat>()?;
    }
    for kv in &g.tolerances {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Failure::Validation(format!("--tol expects NAME=VALUE, got '{kv}'")))?;
        cfg.set(k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                ErrorKind::InvalidSubcommand
                | ErrorKind::MissingSubcommand
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => EXIT_USAGE,
                _ => EXIT_VALIDATION,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = build_config(&cli.global).and_then(|cfg| commands::execute(&cli.command, &cfg));
    match result {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(EXIT_INTERNAL)
        }
    }
}
