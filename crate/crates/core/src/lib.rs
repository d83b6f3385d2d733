//! Temperley–Lieb quantum channels of the free orthogonal quantum groups
//! `O_N^+`, built as explicit real matrices.
//!
//! The crate is organised bottom-up:
//!
//! - [`qarith`]: exact quantum integers, quantum factorials and theta-nets.
//! - [`tensorkit`]: dense real operators with tensor-leg bookkeeping.
//! - [`jones_wenzl`]: the Jones–Wenzl projectors `p_n` and orthonormal bases of `H_n`.
//! - [`channels`]: the Stinespring isometries `α`, `γ` and the channels they induce.
//! - [`entropic`]: entropies, coherent information, Holevo quantities and capacity brackets.
//! - [`distances`]: isometry gaps, Bures upper bounds, diamond lower bounds and rate fits.
//! - [`par`]: data-parallel sweeps over parameter grids, with a sequential fallback.

pub mod caps;
pub mod channels;
pub mod distances;
pub mod entropic;
pub mod error;
pub mod jones_wenzl;
pub mod par;
pub mod qarith;
pub mod tensorkit;

pub use caps::Caps;
pub use error::{Error, Result};
pub use qarith::AdmissibleTriple;
