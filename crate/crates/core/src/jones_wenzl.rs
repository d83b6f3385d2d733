//! Jones–Wenzl projectors `p_n : H_1^{⊗n} → H_n` and orthonormal bases of `H_n`.
//!
//! Projectors come from the Wenzl recursion
//!
//! ```text
//! p_{n+1} = p_n ⊗ 1 − ([n]_q / [n+1]_q) (p_n ⊗ 1) e_n (p_n ⊗ 1)
//! ```
//!
//! where `e_n = 1_{n−1} ⊗ T_2 T_2ᵀ` is the cap-cup on the last two legs.
//! Because `e_n` has rank `N^{n−1}`, the correction term is `X Xᵀ` with
//! `X = (p_n ⊗ 1)(1_{n−1} ⊗ T_2)`, which is nothing but a reshuffle of `p_n`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector};

use crate::caps::{pow_dim, Caps};
use crate::error::{Error, Result};
use crate::qarith::{qdim, QRational};
use crate::tensorkit::DenseOp;

/// Relative residual below which a vector counts as lying in `H_n`.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

/// Columns per block update in the pivoted orthonormalisation.
const PANEL: usize = 64;

#[derive(Clone, Debug)]
pub struct JwProjector {
    pub local_dim: usize,
    pub n: usize,
    matrix: DenseOp,
}

impl JwProjector {
    pub fn op(&self) -> &DenseOp {
        &self.matrix
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        self.matrix.matrix()
    }

    /// `dim(H_n) = [n+1]_q`, i.e. the rank of the projector.
    pub fn rank(&self) -> usize {
        irrep_dim(self.local_dim, self.n)
    }
}

/// `dim(H_n)` as a machine integer.
pub fn irrep_dim(local_dim: usize, n: usize) -> usize {
    qdim(local_dim as u64, n + 1)
        .ok()
        .and_then(|d| d.to_usize())
        .expect("irrep dimension fits in usize")
}

pub fn jw_projector(local_dim: usize, n: usize, caps: &Caps) -> Result<JwProjector> {
    if local_dim < 2 {
        return Err(Error::LocalDimTooSmall(local_dim as u64));
    }
    caps.check_square("Jones-Wenzl projector", pow_dim(local_dim, n))?;
    let nn = local_dim;
    let start = if n == 0 { 1 } else { nn };
    let mut p = DMatrix::<f64>::identity(start, start);
    for j in 1..n {
        // p holds p_j on N^j coordinates.
        let coeff = QRational::from_qints(&qdim(nn as u64, j)?, &qdim(nn as u64, j + 1)?).to_f64();
        let d = p.nrows();
        let inner = d / nn;
        let x = DMatrix::from_fn(d * nn, inner, |row, b| {
            let (a, jj) = (row / nn, row % nn);
            p[(a, b * nn + jj)]
        });
        let mut next = p.kronecker(&DMatrix::<f64>::identity(nn, nn));
        next.gemm(-coeff, &x, &x.transpose(), 1.0);
        p = (&next + next.transpose()) * 0.5;
    }
    let legs = vec![nn; n];
    let matrix = if n == 0 {
        DenseOp::square(p, vec![1])?
    } else {
        DenseOp::square(p, legs)?
    };
    Ok(JwProjector {
        local_dim,
        n,
        matrix,
    })
}

/// Column selection rule for orthonormalising the range of `p_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PivotRule {
    /// Largest remaining column norm, ties to the lowest index.
    #[default]
    LargestNorm,
    /// Columns in index order, skipping those already in the span.
    Natural,
}

/// An isometry `ι : H_n → H_1^{⊗n}` with `ι ιᵀ = p_n`.
#[derive(Clone, Debug)]
pub struct IrrepBasis {
    pub local_dim: usize,
    pub n: usize,
    iota: DMatrix<f64>,
}

impl IrrepBasis {
    pub fn iota(&self) -> &DMatrix<f64> {
        &self.iota
    }

    pub fn dim(&self) -> usize {
        self.iota.ncols()
    }

    /// Coordinates of a vector of `H_n` in this basis.
    pub fn coordinates(&self, v: &DVector<f64>) -> DVector<f64> {
        self.iota.tr_mul(v)
    }
}

pub fn irrep_basis(local_dim: usize, n: usize, caps: &Caps) -> Result<IrrepBasis> {
    let proj = jw_projector(local_dim, n, caps)?;
    Ok(irrep_basis_from(&proj, PivotRule::LargestNorm))
}

pub fn irrep_basis_from(proj: &JwProjector, rule: PivotRule) -> IrrepBasis {
    let iota = pivoted_range_basis(proj.matrix(), proj.rank(), rule);
    IrrepBasis {
        local_dim: proj.local_dim,
        n: proj.n,
        iota,
    }
}

fn choose_pivot(diag: &[f64], used: &[bool], rule: PivotRule) -> usize {
    match rule {
        PivotRule::LargestNorm => {
            let best = diag
                .iter()
                .zip(used)
                .filter(|(_, &u)| !u)
                .map(|(&d, _)| d)
                .fold(f64::NEG_INFINITY, f64::max);
            (0..diag.len())
                .find(|&i| !used[i] && diag[i] >= best - 1e-12)
                .expect("a pivot remains while rank is not exhausted")
        }
        PivotRule::Natural => (0..diag.len())
            .find(|&i| !used[i] && diag[i] > 1e-6)
            .expect("a pivot remains while rank is not exhausted"),
    }
}

/// Gram–Schmidt on the columns of a projector, pivoting by `rule`.
///
/// The residual projector `p − Q Qᵀ` is refreshed once per panel; inside a
/// panel only the pending columns are subtracted. Squared residual column
/// norms equal the diagonal of the residual projector, which is tracked
/// incrementally.
fn pivoted_range_basis(p: &DMatrix<f64>, rank: usize, rule: PivotRule) -> DMatrix<f64> {
    let dim = p.nrows();
    let mut resid = p.clone();
    let mut q = DMatrix::<f64>::zeros(dim, rank);
    let mut diag: Vec<f64> = p.diagonal().iter().copied().collect();
    let mut used = vec![false; dim];
    let mut applied = 0;
    for j in 0..rank {
        if j - applied == PANEL {
            let block = q.columns(applied, j - applied).into_owned();
            resid.gemm(-1.0, &block, &block.transpose(), 1.0);
            applied = j;
        }
        let piv = choose_pivot(&diag, &used, rule);
        let mut col = resid.column(piv).into_owned();
        for t in applied..j {
            let c = q[(piv, t)];
            col.axpy(-c, &q.column(t), 1.0);
        }
        let nrm = col.norm();
        col /= nrm;
        for (d, v) in diag.iter_mut().zip(col.iter()) {
            *d -= v * v;
        }
        q.set_column(j, &col);
        used[piv] = true;
    }
    q
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Membership {
    pub member: bool,
    /// `‖p_n v − v‖`.
    pub residual: f64,
}

pub fn membership(proj: &JwProjector, v: &DVector<f64>) -> Result<Membership> {
    let d = proj.matrix().nrows();
    if v.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: v.len(),
        });
    }
    let norm = v.norm();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let residual = (proj.matrix() * v - v).norm();
    Ok(Membership {
        member: residual <= MEMBERSHIP_TOL * norm,
        residual,
    })
}

pub fn in_irrep(v: &DVector<f64>, local_dim: usize, n: usize, caps: &Caps) -> Result<Membership> {
    let proj = jw_projector(local_dim, n, caps)?;
    membership(&proj, v)
}

type Slot<T> = Arc<Mutex<Option<Arc<T>>>>;

/// Thread-safe memo of projectors and bases keyed by `(N, n)`.
///
/// Distinct keys are built concurrently; a key is built at most once.
#[derive(Debug)]
pub struct JwCache {
    caps: Caps,
    projectors: Mutex<HashMap<(usize, usize), Slot<JwProjector>>>,
    bases: Mutex<HashMap<(usize, usize), Slot<IrrepBasis>>>,
}

fn memo<T, F>(
    map: &Mutex<HashMap<(usize, usize), Slot<T>>>,
    key: (usize, usize),
    build: F,
) -> Result<Arc<T>>
where
    F: FnOnce() -> Result<T>,
{
    let slot = {
        let mut guard = map.lock().expect("cache poisoned");
        guard.entry(key).or_default().clone()
    };
    let mut inner = slot.lock().expect("cache slot poisoned");
    if let Some(v) = inner.as_ref() {
        return Ok(v.clone());
    }
    let v = Arc::new(build()?);
    *inner = Some(v.clone());
    Ok(v)
}

impl JwCache {
    pub fn new(caps: Caps) -> Self {
        JwCache {
            caps,
            projectors: Mutex::new(HashMap::new()),
            bases: Mutex::new(HashMap::new()),
        }
    }

    pub fn caps(&self) -> &Caps {
        &self.caps
    }

    pub fn projector(&self, local_dim: usize, n: usize) -> Result<Arc<JwProjector>> {
        memo(&self.projectors, (local_dim, n), || {
            jw_projector(local_dim, n, &self.caps)
        })
    }

    pub fn basis(&self, local_dim: usize, n: usize) -> Result<Arc<IrrepBasis>> {
        memo(&self.bases, (local_dim, n), || {
            let proj = self.projector(local_dim, n)?;
            Ok(irrep_basis_from(&proj, PivotRule::LargestNorm))
        })
    }

    /// Drop everything built so far.
    pub fn clear(&self) {
        self.projectors.lock().expect("cache poisoned").clear();
        self.bases.lock().expect("cache poisoned").clear();
    }
}

impl Default for JwCache {
    fn default() -> Self {
        JwCache::new(Caps::default())
    }
}
