//! Dense real operators on tensor products of `H_1 = R^N`.
//!
//! Multi-indices are row-major over legs: the first leg is the most
//! significant digit, which matches the Kronecker product convention
//! `(A ⊗ B)[(i,j),(k,l)] = A[i,k] B[j,l]`.

use faer::{Mat, Side};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::caps::{pow_dim, Caps};
use crate::error::{Error, Result};

/// A real matrix whose rows and columns carry a tensor-factor structure.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOp {
    mat: DMatrix<f64>,
    row_legs: Vec<usize>,
    col_legs: Vec<usize>,
}

impl DenseOp {
    pub fn new(mat: DMatrix<f64>, row_legs: Vec<usize>, col_legs: Vec<usize>) -> Result<Self> {
        let rp: usize = row_legs.iter().product();
        let cp: usize = col_legs.iter().product();
        if rp != mat.nrows() {
            return Err(Error::LegMismatch {
                legs: row_legs,
                dim: mat.nrows(),
            });
        }
        if cp != mat.ncols() {
            return Err(Error::LegMismatch {
                legs: col_legs,
                dim: mat.ncols(),
            });
        }
        if mat.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(DenseOp {
            mat,
            row_legs,
            col_legs,
        })
    }

    /// Square operator with the same legs on both sides.
    pub fn square(mat: DMatrix<f64>, legs: Vec<usize>) -> Result<Self> {
        Self::new(mat, legs.clone(), legs)
    }

    /// A plain matrix seen as a single-leg operator.
    pub fn from_matrix(mat: DMatrix<f64>) -> Self {
        let (r, c) = mat.shape();
        DenseOp {
            mat,
            row_legs: vec![r],
            col_legs: vec![c],
        }
    }

    pub fn identity(legs: Vec<usize>) -> Self {
        let d: usize = legs.iter().product();
        DenseOp {
            mat: DMatrix::identity(d, d),
            row_legs: legs.clone(),
            col_legs: legs,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.mat
    }

    pub fn row_legs(&self) -> &[usize] {
        &self.row_legs
    }

    pub fn col_legs(&self) -> &[usize] {
        &self.col_legs
    }

    pub fn nrows(&self) -> usize {
        self.mat.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.mat.ncols()
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace()
    }

    pub fn is_square(&self) -> bool {
        self.mat.nrows() == self.mat.ncols()
    }
}

/// Tensor product `A ⊗ B`; leg lists concatenate.
pub fn kron(a: &DenseOp, b: &DenseOp, caps: &Caps) -> Result<DenseOp> {
    let rows = caps.check_dim("kron rows", a.nrows() as u128 * b.nrows() as u128)?;
    let cols = caps.check_dim("kron cols", a.ncols() as u128 * b.ncols() as u128)?;
    let max_entries = caps.max_square as u128 * caps.max_square as u128;
    if rows as u128 * cols as u128 > max_entries {
        return Err(Error::CapExceeded {
            what: "kron entries",
            dim: rows as u128 * cols as u128,
            cap: caps.max_square * caps.max_square,
        });
    }
    let mut row_legs = a.row_legs.clone();
    row_legs.extend_from_slice(&b.row_legs);
    let mut col_legs = a.col_legs.clone();
    col_legs.extend_from_slice(&b.col_legs);
    Ok(DenseOp {
        mat: a.mat.kronecker(&b.mat),
        row_legs,
        col_legs,
    })
}

/// Offsets contributed by every multi-index over `legs` (in the given order),
/// where `strides[j]` is the stride of `legs[j]` in the full index.
fn leg_offsets(dims: &[usize], strides: &[usize]) -> Vec<usize> {
    let mut offs = vec![0usize];
    for (&d, &s) in dims.iter().zip(strides) {
        let mut next = Vec::with_capacity(offs.len() * d);
        for &o in &offs {
            for i in 0..d {
                next.push(o + i * s);
            }
        }
        offs = next;
    }
    offs
}

fn strides_of(legs: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; legs.len()];
    for j in (0..legs.len().saturating_sub(1)).rev() {
        strides[j] = strides[j + 1] * legs[j + 1];
    }
    strides
}

/// Trace out every leg not listed in `keep`. Kept legs retain their order.
pub fn partial_trace(a: &DenseOp, keep: &[usize]) -> Result<DenseOp> {
    if a.row_legs != a.col_legs {
        return Err(Error::LegMismatch {
            legs: a.col_legs.clone(),
            dim: a.nrows(),
        });
    }
    let legs = &a.row_legs;
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if let Some(&bad) = keep.iter().find(|&&i| i >= legs.len()) {
        return Err(Error::InvalidLeg {
            index: bad,
            legs: legs.len(),
        });
    }
    let strides = strides_of(legs);
    let traced: Vec<usize> = (0..legs.len()).filter(|i| !keep.contains(i)).collect();
    let kd: Vec<usize> = keep.iter().map(|&i| legs[i]).collect();
    let ks: Vec<usize> = keep.iter().map(|&i| strides[i]).collect();
    let td: Vec<usize> = traced.iter().map(|&i| legs[i]).collect();
    let ts: Vec<usize> = traced.iter().map(|&i| strides[i]).collect();
    let koff = leg_offsets(&kd, &ks);
    let toff = leg_offsets(&td, &ts);
    let n = koff.len();
    let out = DMatrix::from_fn(n, n, |i, j| {
        toff.iter()
            .map(|&t| a.mat[(koff[i] + t, koff[j] + t)])
            .sum()
    });
    Ok(DenseOp {
        mat: out,
        row_legs: kd.clone(),
        col_legs: kd,
    })
}

/// The nested cup `T_{2r} = Σ |i_1…i_r⟩ ⊗ |i_r…i_1⟩` in `H_1^{⊗2r}`.
#[derive(Clone, Debug)]
pub struct CupVector {
    pub local_dim: usize,
    pub r: usize,
    pub vector: DVector<f64>,
}

impl CupVector {
    pub fn norm_squared(&self) -> f64 {
        self.vector.norm_squared()
    }
}

/// Row-major digits of `index` in base `base`, `len` digits long.
#[cfg(test)]
pub(crate) fn digits(mut index: usize, base: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for j in (0..len).rev() {
        out[j] = index % base;
        index /= base;
    }
    out
}

pub(crate) fn encode(digits: &[usize], base: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * base + d)
}

/// Index of the mirrored tuple `i_r … i_1` given the index of `i_1 … i_r`.
pub(crate) fn reversed_index(index: usize, base: usize, len: usize) -> usize {
    let mut src = index;
    let mut out = 0;
    for _ in 0..len {
        out = out * base + src % base;
        src /= base;
    }
    out
}

pub fn cup_vector(local_dim: usize, r: usize, caps: &Caps) -> Result<CupVector> {
    let half = caps.check_dim("cup half", pow_dim(local_dim, r))?;
    let dim = caps.check_dim("cup vector", pow_dim(local_dim, 2 * r))?;
    let mut vector = DVector::zeros(dim);
    for t in 0..half {
        vector[t * half + reversed_index(t, local_dim, r)] = 1.0;
    }
    Ok(CupVector {
        local_dim,
        r,
        vector,
    })
}

/// Apply `op` to a contiguous group of legs of every column of `x`.
///
/// Rows of `x` are indexed by `(pre, mid, post)` with `mid = op.ncols()`;
/// the result has rows `(pre, op.nrows(), post)`.
pub fn apply_on_legs(x: &DMatrix<f64>, op: &DMatrix<f64>, pre: usize, post: usize) -> DMatrix<f64> {
    let mid = op.ncols();
    let mid_out = op.nrows();
    assert_eq!(
        x.nrows(),
        pre * mid * post,
        "leg group does not tile the rows"
    );
    let cols = x.ncols();
    if post == 1 {
        let view = DMatrix::from_column_slice(mid, pre * cols, x.as_slice());
        let z = op * view;
        return DMatrix::from_vec(pre * mid_out, cols, z.data.into());
    }
    // Gather mid to the front: y[μ, s + (p + c·pre)·post].
    let blocks = pre * cols;
    let mut y = DMatrix::zeros(mid, post * blocks);
    let xs = x.as_slice();
    for b in 0..blocks {
        let base = b * mid * post;
        for mu in 0..mid {
            let src = &xs[base + mu * post..base + (mu + 1) * post];
            for (s, &v) in src.iter().enumerate() {
                y[(mu, s + b * post)] = v;
            }
        }
    }
    let z = op * y;
    let mut out = DMatrix::zeros(pre * mid_out * post, cols);
    let os = out.as_mut_slice();
    for b in 0..blocks {
        let base = b * mid_out * post;
        for nu in 0..mid_out {
            let dst = &mut os[base + nu * post..base + (nu + 1) * post];
            for (s, v) in dst.iter_mut().enumerate() {
                *v = z[(nu, s + b * post)];
            }
        }
    }
    out
}

/// Largest |A − Aᵀ| entry.
pub fn max_asymmetry(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..j {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

fn check_symmetric(a: &DMatrix<f64>) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: a.ncols(),
        });
    }
    let scale = a.amax().max(1.0);
    let asym = max_asymmetry(a);
    if asym > 1e-10 * scale {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(())
}

fn symmetrized(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric operator.
pub fn eigh(a: &DenseOp) -> Result<(DVector<f64>, DMatrix<f64>)> {
    eigh_mat(&a.mat)
}

pub fn eigh_mat(a: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    check_symmetric(a)?;
    let n = a.nrows();
    if n == 0 {
        return Ok((DVector::zeros(0), DMatrix::zeros(0, 0)));
    }
    let evd = to_faer(&symmetrized(a))
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::NonFinite)?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[i].total_cmp(&s[j]));
    let vals = DVector::from_iterator(n, order.iter().map(|&i| s[i]));
    let vecs = DMatrix::from_fn(n, n, |r, c| u[(r, order[c])]);
    Ok((vals, vecs))
}

/// Eigenvalues only (ascending); much cheaper than [`eigh`] on large inputs.
pub fn symmetric_eigenvalues(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_symmetric(a)?;
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    sorted_eigenvalues(&symmetrized(a))
}

/// Whether `A + shift·Id` is positive definite, by attempting a Cholesky factorisation.
pub fn shifted_positive_definite(a: &DMatrix<f64>, shift: f64) -> bool {
    let n = a.nrows();
    if n == 0 {
        return true;
    }
    let m = Mat::from_fn(n, n, |i, j| a[(i, j)] + if i == j { shift } else { 0.0 });
    m.llt(Side::Lower).is_ok()
}

fn to_faer(a: &DMatrix<f64>) -> Mat<f64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn sorted_eigenvalues(sym: &DMatrix<f64>) -> Result<Vec<f64>> {
    if sym.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut vals = to_faer(sym)
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::NonFinite)?;
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Below this side length the Gram matrix is diagonalised outright.
const DIRECT_GRAM_LIMIT: usize = 200;

/// Largest singular value.
pub fn op_norm(a: &DenseOp) -> f64 {
    op_norm_mat(&a.mat)
}

pub fn op_norm_mat(a: &DMatrix<f64>) -> f64 {
    let (r, c) = a.shape();
    if r == 0 || c == 0 {
        return 0.0;
    }
    let small = r.min(c);
    if small <= DIRECT_GRAM_LIMIT {
        let g = if c <= r {
            a.transpose() * a
        } else {
            a * a.transpose()
        };
        let top = sorted_eigenvalues(&symmetrized(&g))
            .ok()
            .and_then(|v| v.last().copied())
            .unwrap_or(f64::NAN);
        return top.max(0.0).sqrt();
    }
    let top = if c <= r {
        lanczos_top(c, |v| a.tr_mul(&(a * v)))
    } else {
        lanczos_top(r, |v| a * a.tr_mul(v))
    };
    top.max(0.0).sqrt()
}

/// Largest eigenvalue of a PSD operator given by its action, via Lanczos with
/// full reorthogonalisation.
fn lanczos_top<F>(dim: usize, apply: F) -> f64
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e3a_11c5);
    let mut q = DVector::from_fn(dim, |_, _| rng.gen::<f64>() - 0.5);
    q /= q.norm();
    let max_iter = dim.min(120);
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(max_iter);
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut top = 0.0;
    for j in 0..max_iter {
        let mut w = apply(&q);
        let alpha = q.dot(&w);
        basis.push(q.clone());
        alphas.push(alpha);
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dot(&w);
                w.axpy(-proj, b, 1.0);
            }
        }
        let beta = w.norm();
        let n = alphas.len();
        let t = DMatrix::from_fn(n, n, |i, k| {
            if i == k {
                alphas[i]
            } else if i + 1 == k {
                betas[i]
            } else if k + 1 == i {
                betas[k]
            } else {
                0.0
            }
        });
        let (vals, vecs) = eigh_mat(&t).expect("finite symmetric tridiagonal");
        let theta = vals[n - 1];
        top = theta;
        let resid = beta * vecs[(n - 1, n - 1)].abs();
        if resid <= 1e-14 * theta.abs().max(f64::MIN_POSITIVE)
            || beta <= 1e-300
            || j + 1 == max_iter
        {
            break;
        }
        betas.push(beta);
        q = w / beta;
    }
    top
}

/// Sum of singular values.
pub fn trace_norm(a: &DenseOp) -> f64 {
    trace_norm_mat(&a.mat)
}

pub fn trace_norm_mat(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    if a.nrows() == a.ncols() && max_asymmetry(a) <= 1e-12 * a.amax().max(1.0) {
        return sorted_eigenvalues(&symmetrized(a))
            .map(|v| v.iter().map(|x| x.abs()).sum())
            .unwrap_or(f64::NAN);
    }
    to_faer(a)
        .singular_values()
        .map(|v| v.iter().sum())
        .unwrap_or(f64::NAN)
}

/// Operator `Id_{pre} ⊗ T_2 ⊗ Id_{post}` applied from the right: returns
/// `A · (Id ⊗ T_2 ⊗ Id)` for `A` acting on `pre + 2 + post` legs of dimension `local_dim`.
pub fn contract_cup_right(
    a: &DMatrix<f64>,
    local_dim: usize,
    pre: usize,
    post: usize,
) -> DMatrix<f64> {
    let pre_d = local_dim.pow(pre as u32);
    let post_d = local_dim.pow(post as u32);
    let out_cols = pre_d * post_d;
    let mut out = DMatrix::zeros(a.nrows(), out_cols);
    for x in 0..pre_d {
        for y in 0..post_d {
            let mut col = out.column_mut(x * post_d + y);
            for i in 0..local_dim {
                let src = ((x * local_dim + i) * local_dim + i) * post_d + y;
                col += a.column(src);
            }
        }
    }
    out
}
