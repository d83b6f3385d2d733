use crate::error::{Error, Result};

/// Size limits for dense objects.
///
/// `max_dim` bounds any Hilbert-space dimension that appears as a matrix side
/// (isometry rows, output dimensions). `max_square` bounds the side of square
/// operators that are materialised in full, such as Jones–Wenzl projectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    pub max_dim: usize,
    pub max_square: usize,
}

impl Caps {
    pub const DEFAULT_MAX_DIM: usize = 300_000;
    pub const DEFAULT_MAX_SQUARE: usize = 4096;

    /// Environment variable that overrides `max_dim`.
    pub const ENV_VAR: &'static str = "TLCHAN_CAP";

    pub fn new(max_dim: usize, max_square: usize) -> Self {
        Caps {
            max_dim,
            max_square: max_square.min(max_dim),
        }
    }

    /// Defaults, with `max_dim` taken from [`Caps::ENV_VAR`] when it parses.
    pub fn from_env() -> Self {
        let max_dim = std::env::var(Self::ENV_VAR)
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .filter(|&c| c > 0)
            .unwrap_or(Self::DEFAULT_MAX_DIM);
        Caps::new(max_dim, Self::DEFAULT_MAX_SQUARE)
    }

    pub(crate) fn check_dim(&self, what: &'static str, dim: u128) -> Result<usize> {
        if dim > self.max_dim as u128 {
            return Err(Error::CapExceeded {
                what,
                dim,
                cap: self.max_dim,
            });
        }
        Ok(dim as usize)
    }

    pub(crate) fn check_square(&self, what: &'static str, dim: u128) -> Result<usize> {
        if dim > self.max_square as u128 {
            return Err(Error::CapExceeded {
                what,
                dim,
                cap: self.max_square,
            });
        }
        Ok(dim as usize)
    }
}

impl Default for Caps {
    fn default() -> Self {
        Caps::new(Self::DEFAULT_MAX_DIM, Self::DEFAULT_MAX_SQUARE)
    }
}

/// `base^exp` without overflow, saturating at `u128::MAX`.
pub(crate) fn pow_dim(base: usize, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base as u128);
    }
    acc
}
