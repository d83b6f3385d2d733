//! Command-line front end for the Temperley–Lieb channel toolkit.
//!
//! Exit codes: 0 when every check passes, 1 on a numerical failure, 2 on a
//! configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tlchan_core::par::Exec;
use tlchan_core::{AdmissibleTriple, Caps};

pub mod config;
pub mod tables;
pub mod verify;

use config::{Format, LogBaseArg, RunConfig};
use verify::Suite;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error(transparent)]
    Core(#[from] tlchan_core::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Numeric(_) | CliError::Core(_) => 1,
        }
    }
}

/// Rendered output plus any failed checks it recorded.
#[derive(Debug)]
pub struct Output {
    pub text: String,
    pub failures: Vec<String>,
}

impl Output {
    pub fn pass(text: String) -> Self {
        Output {
            text,
            failures: Vec::new(),
        }
    }

    pub fn with_failures(text: String, failures: Vec<String>) -> Self {
        Output { text, failures }
    }

    pub fn exit_code(&self) -> ExitCode {
        if self.failures.is_empty() {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(1)
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "tlchan",
    version,
    about = "Sweeps and checks for Temperley-Lieb quantum channels"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct Common {
    /// Largest Hilbert-space dimension materialised as a matrix side.
    #[arg(long, env = Caps::ENV_VAR)]
    pub cap: Option<u64>,
    /// Replace every check tolerance with this value.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long = "log-base", value_enum, default_value = "2")]
    pub log_base: LogBaseArg,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct Grid {
    /// A single local dimension.
    #[arg(long = "N", conflicts_with = "n_range")]
    pub n: Option<usize>,
    /// Inclusive range of local dimensions, `A..B`.
    #[arg(long = "N-range", value_parser = config::parse_range)]
    pub n_range: Option<(usize, usize)>,
    /// Admissible triple `l,m,k`; repeatable.
    #[arg(long = "triple", value_parser = config::parse_triple)]
    pub triples: Vec<AdmissibleTriple>,
    /// Run cells one at a time.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Dimensions of the irreducible representations `H_0..H_{n_max}`.
    Dims {
        #[arg(long = "N")]
        n: usize,
        #[arg(long = "n-max", default_value_t = 4)]
        n_max: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Isometry gaps and their bounds per `(N, triple)`, with a log-log fit per triple.
    GapSweep {
        #[command(flatten)]
        grid: Grid,
        #[command(flatten)]
        common: Common,
    },
    /// Capacity brackets of the approximating channel and its complement.
    CapacityTable {
        #[command(flatten)]
        grid: Grid,
        #[command(flatten)]
        common: Common,
    },
    /// Run invariant suites and print a JSON report.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        #[command(flatten)]
        common: Common,
    },
}

fn run_config(
    grid: Grid,
    common: Common,
    default_n: (usize, usize),
    default_triples: &[(usize, usize, usize)],
) -> Result<(RunConfig, Exec), CliError> {
    let triples = if grid.triples.is_empty() {
        default_triples
            .iter()
            .map(|&(l, m, k)| tlchan_core::qarith::check_admissible(l, m, k))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        grid.triples
    };
    let exec = if grid.sequential {
        Exec::Sequential
    } else {
        Exec::Parallel
    };
    Ok((
        RunConfig {
            n_values: config::n_values(grid.n, grid.n_range, default_n)?,
            triples,
            caps: config::caps(common.cap)?,
            tol: config::tolerance(common.tol)?,
            log_base: common.log_base.into(),
            format: common.format,
            out: common.out,
        },
        exec,
    ))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Execute a parsed command and write its output.
pub fn run(cli: Cli) -> Result<Output, CliError> {
    let (output, out) = match cli.command {
        Command::Dims { n, n_max, common } => {
            config::check_local_dim(n)?;
            config::caps(common.cap)?;
            (tables::dims(n, n_max, common.format)?, common.out)
        }
        Command::GapSweep { grid, common } => {
            let (cfg, exec) = run_config(grid, common, (3, 12), &[(2, 1, 1)])?;
            (tables::gap_sweep(&cfg, exec)?, cfg.out)
        }
        Command::CapacityTable { grid, common } => {
            let (cfg, exec) = run_config(
                grid,
                common,
                (3, 8),
                &[(1, 1, 0), (2, 1, 1), (1, 1, 2), (1, 2, 1)],
            )?;
            (tables::capacity_table(&cfg, exec)?, cfg.out)
        }
        Command::Verify { suite, common } => {
            let tol = config::tolerance(common.tol)?;
            let caps = config::caps(common.cap)?;
            let report = verify::run(suite, tol, caps)?;
            let failures = report
                .suites
                .iter()
                .flat_map(|s| {
                    s.checks
                        .iter()
                        .filter(|c| !c.pass)
                        .map(move |c| format!("{}: {}", s.suite, c.name))
                })
                .collect();
            let mut text = serde_json::to_string_pretty(&report)
                .map_err(|e| CliError::Numeric(e.to_string()))?;
            text.push('\n');
            (Output::with_failures(text, failures), common.out)
        }
    };
    emit(&out, &output.text)?;
    Ok(output)
}
