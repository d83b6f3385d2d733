use std::path::PathBuf;

use clap::ValueEnum;
use tlchan_core::entropic::LogBase;
use tlchan_core::qarith::check_admissible;
use tlchan_core::{AdmissibleTriple, Caps};

use crate::CliError;

/// Accepted range of the local dimension.
pub const N_MIN: usize = 2;
pub const N_MAX: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LogBaseArg {
    #[value(name = "2")]
    Two,
    #[value(name = "e")]
    E,
}

impl From<LogBaseArg> for LogBase {
    fn from(b: LogBaseArg) -> Self {
        match b {
            LogBaseArg::Two => LogBase::Two,
            LogBaseArg::E => LogBase::E,
        }
    }
}

/// Everything a sweep needs, validated.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub n_values: Vec<usize>,
    pub triples: Vec<AdmissibleTriple>,
    pub caps: Caps,
    pub tol: Option<f64>,
    pub log_base: LogBase,
    pub format: Format,
    pub out: Option<PathBuf>,
}

/// `A..B`, inclusive on both ends.
pub fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected A..B, got {s:?}"))?;
    let a: usize = a
        .trim()
        .parse()
        .map_err(|e| format!("bad range start {a:?}: {e}"))?;
    let b: usize = b
        .trim()
        .trim_start_matches('=')
        .parse()
        .map_err(|e| format!("bad range end {b:?}: {e}"))?;
    if a > b {
        return Err(format!("empty range {a}..{b}"));
    }
    Ok((a, b))
}

/// `l,m,k`, checked for admissibility.
pub fn parse_triple(s: &str) -> Result<AdmissibleTriple, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected l,m,k, got {s:?}"));
    }
    let mut v = [0usize; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p
            .parse()
            .map_err(|e| format!("bad triple entry {p:?}: {e}"))?;
    }
    check_admissible(v[0], v[1], v[2]).map_err(|e| e.to_string())
}

pub fn check_local_dim(n: usize) -> Result<usize, CliError> {
    if !(N_MIN..=N_MAX).contains(&n) {
        return Err(CliError::Config(format!(
            "N = {n} outside [{N_MIN}, {N_MAX}]"
        )));
    }
    Ok(n)
}

pub fn n_values(
    single: Option<usize>,
    range: Option<(usize, usize)>,
    default: (usize, usize),
) -> Result<Vec<usize>, CliError> {
    let (a, b) = match (single, range) {
        (Some(n), _) => (n, n),
        (None, Some(r)) => r,
        (None, None) => default,
    };
    check_local_dim(a)?;
    check_local_dim(b)?;
    Ok((a..=b).collect())
}

pub fn caps(cap: Option<u64>) -> Result<Caps, CliError> {
    match cap {
        None => Ok(Caps::default()),
        Some(0) => Err(CliError::Config("cap must be positive".into())),
        Some(c) => {
            let c =
                usize::try_from(c).map_err(|_| CliError::Config(format!("cap {c} too large")))?;
            Ok(Caps::new(c, Caps::DEFAULT_MAX_SQUARE.min(c)))
        }
    }
}

pub fn tolerance(tol: Option<f64>) -> Result<Option<f64>, CliError> {
    match tol {
        Some(t) if t.is_nan() || t < 0.0 || t.is_infinite() => Err(CliError::Config(format!(
            "tolerance must be finite and nonnegative, got {t}"
        ))),
        t => Ok(t),
    }
}
