//! Stinespring isometries `α^{l,m}_k`, `γ^{l,m}_k` and the channels they induce.
//!
//! Every isometry maps `H_k` (coordinatised by [`IrrepBasis`]) into
//! `H_1^{⊗l} ⊗ H_1^{⊗m}`. Tracing the last `m` legs gives `Φ^{k→l}_m`
//! (from `α`) or `Ψ^{k→l}_m` (from `γ`); tracing the first `l` legs gives the
//! complementary channels.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::caps::{pow_dim, Caps};
use crate::error::{Error, Result};
use crate::jones_wenzl::{IrrepBasis, JwCache};
use crate::qarith::{normalization_ratio, AdmissibleTriple};
use crate::tensorkit::{
    apply_on_legs, kron, max_asymmetry, partial_trace, reversed_index, shifted_positive_definite,
    symmetric_eigenvalues, DenseOp,
};

/// Tolerance used when validating density matrices.
pub const DENSITY_TOL: f64 = 1e-9;

/// Above this side length the Choi matrix is certified through its factor.
pub const CHOI_DENSE_LIMIT: usize = 600;

/// An isometry `V : C^d → (⊗ out_legs) ⊗ (⊗ env_legs)`, rows row-major in `(out, env)`.
#[derive(Clone, Debug)]
pub struct Stinespring {
    matrix: DMatrix<f64>,
    out_legs: Vec<usize>,
    env_legs: Vec<usize>,
}

impl Stinespring {
    pub fn new(matrix: DMatrix<f64>, out_legs: Vec<usize>, env_legs: Vec<usize>) -> Result<Self> {
        let rows = out_legs.iter().product::<usize>() * env_legs.iter().product::<usize>();
        if rows != matrix.nrows() {
            return Err(Error::DimensionMismatch {
                expected: rows,
                got: matrix.nrows(),
            });
        }
        Ok(Stinespring {
            matrix,
            out_legs,
            env_legs,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn out_legs(&self) -> &[usize] {
        &self.out_legs
    }

    pub fn env_legs(&self) -> &[usize] {
        &self.env_legs
    }

    pub fn out_dim(&self) -> usize {
        self.out_legs.iter().product()
    }

    pub fn env_dim(&self) -> usize {
        self.env_legs.iter().product()
    }

    pub fn input_dim(&self) -> usize {
        self.matrix.ncols()
    }

    /// `‖VᵀV − Id‖` as an operator norm.
    pub fn isometry_defect(&self) -> f64 {
        let d = self.input_dim();
        let gram = self.matrix.transpose() * &self.matrix - DMatrix::<f64>::identity(d, d);
        crate::tensorkit::op_norm_mat(&gram)
    }

    /// The same map with output and environment exchanged.
    pub fn swapped(&self) -> Stinespring {
        let (o, e) = (self.out_dim(), self.env_dim());
        let mut m = DMatrix::zeros(o * e, self.input_dim());
        for c in 0..self.input_dim() {
            let src = self.matrix.column(c);
            let mut dst = m.column_mut(c);
            for oi in 0..o {
                for ei in 0..e {
                    dst[ei * o + oi] = src[oi * e + ei];
                }
            }
        }
        Stinespring {
            matrix: m,
            out_legs: self.env_legs.clone(),
            env_legs: self.out_legs.clone(),
        }
    }

    /// Extend the environment by `extra` unused dimensions (zero rows).
    pub fn pad_env(&self, extra: usize) -> Stinespring {
        let (o, e) = (self.out_dim(), self.env_dim());
        let e2 = e + extra;
        let mut m = DMatrix::zeros(o * e2, self.input_dim());
        for c in 0..self.input_dim() {
            for oi in 0..o {
                for ei in 0..e {
                    m[(oi * e2 + ei, c)] = self.matrix[(oi * e + ei, c)];
                }
            }
        }
        Stinespring {
            matrix: m,
            out_legs: self.out_legs.clone(),
            env_legs: vec![e2],
        }
    }

    /// Dilation of the tensor product channel; outputs and environments are
    /// grouped as `(o1, o2)` and `(e1, e2)`.
    pub fn tensor(&self, other: &Stinespring, caps: &Caps) -> Result<Stinespring> {
        let (o1, e1) = (self.out_dim(), self.env_dim());
        let (o2, e2) = (other.out_dim(), other.env_dim());
        let rows = caps.check_dim("tensor dilation", (o1 * e1) as u128 * (o2 * e2) as u128)?;
        let k = self.matrix.kronecker(&other.matrix);
        let mut m = DMatrix::zeros(rows, k.ncols());
        for c in 0..k.ncols() {
            for a in 0..o1 {
                for b in 0..e1 {
                    for x in 0..o2 {
                        for y in 0..e2 {
                            let src = (a * e1 + b) * (o2 * e2) + x * e2 + y;
                            let dst = (a * o2 + x) * (e1 * e2) + b * e2 + y;
                            m[(dst, c)] = k[(src, c)];
                        }
                    }
                }
            }
        }
        let mut out_legs = self.out_legs.clone();
        out_legs.extend_from_slice(&other.out_legs);
        let mut env_legs = self.env_legs.clone();
        env_legs.extend_from_slice(&other.env_legs);
        Ok(Stinespring {
            matrix: m,
            out_legs,
            env_legs,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IsometryKind {
    /// `α`, the Temperley–Lieb isometry.
    Alpha,
    /// `γ`, the bare cup embedding scaled by `N^{−r/2}`.
    Gamma,
}

#[derive(Clone, Debug)]
pub struct IsometryRec {
    pub local_dim: usize,
    pub triple: AdmissibleTriple,
    pub kind: IsometryKind,
    dilation: Arc<Stinespring>,
}

impl IsometryRec {
    pub fn dilation(&self) -> &Arc<Stinespring> {
        &self.dilation
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        self.dilation.matrix()
    }

    pub fn channel(&self, side: TracedSide) -> ChannelRec {
        ChannelRec {
            dilation: self.dilation.clone(),
            side,
            label: ChannelLabel::Tl {
                kind: self.kind,
                triple: self.triple,
                local_dim: self.local_dim,
            },
        }
    }
}

fn check_local_dim(local_dim: usize) -> Result<()> {
    if local_dim < 2 {
        return Err(Error::LocalDimTooSmall(local_dim as u64));
    }
    Ok(())
}

/// `γ = N^{−r/2} (id_{l−r} ⊗ T_{2r} ⊗ id_{m−r}) ι_k`.
pub fn gamma_isometry(
    local_dim: usize,
    triple: AdmissibleTriple,
    cache: &JwCache,
) -> Result<IsometryRec> {
    check_local_dim(local_dim)?;
    let caps = cache.caps();
    caps.check_dim("isometry rows", pow_dim(local_dim, triple.l + triple.m))?;
    let basis = cache.basis(local_dim, triple.k)?;
    let matrix = cup_embed(local_dim, &triple, &basis);
    Ok(IsometryRec {
        local_dim,
        triple,
        kind: IsometryKind::Gamma,
        dilation: Arc::new(Stinespring {
            matrix,
            out_legs: vec![local_dim; triple.l],
            env_legs: vec![local_dim; triple.m],
        }),
    })
}

fn cup_embed(local_dim: usize, t: &AdmissibleTriple, basis: &IrrepBasis) -> DMatrix<f64> {
    let n = local_dim;
    let a_dim = n.pow(t.out_free() as u32);
    let b_dim = n.pow(t.env_free() as u32);
    let cup = n.pow(t.r as u32);
    let env_dim = n.pow(t.m as u32);
    let scale = (cup as f64).sqrt().recip();
    let iota = basis.iota();
    let mut out = DMatrix::zeros(a_dim * cup * env_dim, iota.ncols());
    for a in 0..a_dim {
        for b in 0..b_dim {
            let src = iota.row(a * b_dim + b) * scale;
            for c in 0..cup {
                let out_idx = a * cup + c;
                let env_idx = reversed_index(c, n, t.r) * b_dim + b;
                out.row_mut(out_idx * env_dim + env_idx).copy_from(&src);
            }
        }
    }
    out
}

/// `(p_l ⊗ p_m) X` for `X` with rows on `H_1^{⊗l} ⊗ H_1^{⊗m}`, applied factor by factor.
pub fn project_pair(
    local_dim: usize,
    l: usize,
    m: usize,
    x: &DMatrix<f64>,
    cache: &JwCache,
) -> Result<DMatrix<f64>> {
    let pl = cache.projector(local_dim, l)?;
    let pm = cache.projector(local_dim, m)?;
    let out_dim = local_dim.pow(l as u32);
    let env_dim = local_dim.pow(m as u32);
    let y = apply_on_legs(x, pl.matrix(), 1, env_dim);
    Ok(apply_on_legs(&y, pm.matrix(), out_dim, 1))
}

/// `α = √([k+1]_q N^r / θ) (p_l ⊗ p_m) γ`.
pub fn alpha_isometry(
    local_dim: usize,
    triple: AdmissibleTriple,
    cache: &JwCache,
) -> Result<IsometryRec> {
    let gamma = gamma_isometry(local_dim, triple, cache)?;
    alpha_from_gamma(&gamma, cache)
}

pub fn alpha_from_gamma(gamma: &IsometryRec, cache: &JwCache) -> Result<IsometryRec> {
    let t = gamma.triple;
    let coeff = normalization_ratio(gamma.local_dim as u64, &t)?
        .recip()
        .to_f64()
        .sqrt();
    let projected = project_pair(gamma.local_dim, t.l, t.m, gamma.matrix(), cache)?;
    Ok(IsometryRec {
        local_dim: gamma.local_dim,
        triple: t,
        kind: IsometryKind::Alpha,
        dilation: Arc::new(Stinespring {
            matrix: projected * coeff,
            out_legs: gamma.dilation.out_legs.clone(),
            env_legs: gamma.dilation.env_legs.clone(),
        }),
    })
}

/// Which tensor factor of the dilation is discarded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TracedSide {
    /// Trace the environment: `Φ` or `Ψ`.
    Environment,
    /// Trace the output: the complementary channel.
    Output,
}

impl TracedSide {
    pub fn flip(self) -> Self {
        match self {
            TracedSide::Environment => TracedSide::Output,
            TracedSide::Output => TracedSide::Environment,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelLabel {
    Tl {
        kind: IsometryKind,
        triple: AdmissibleTriple,
        local_dim: usize,
    },
    Custom,
}

/// A channel given by a Stinespring dilation and the side that is traced.
#[derive(Clone, Debug)]
pub struct ChannelRec {
    dilation: Arc<Stinespring>,
    side: TracedSide,
    label: ChannelLabel,
}

impl fmt::Display for ChannelRec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.label {
            ChannelLabel::Tl {
                kind,
                triple,
                local_dim,
            } => {
                let name = match kind {
                    IsometryKind::Alpha => "Phi",
                    IsometryKind::Gamma => "Psi",
                };
                let c = if self.side == TracedSide::Output {
                    "^c"
                } else {
                    ""
                };
                write!(
                    f,
                    "{name}{c}[N={local_dim}, {}->{}, m={}]",
                    triple.k, triple.l, triple.m
                )
            }
            ChannelLabel::Custom => {
                write!(f, "channel[{} -> {}]", self.input_dim(), self.output_dim())
            }
        }
    }
}

/// Check dimensions, symmetry, trace and positivity of a density matrix and
/// return its symmetrised copy.
pub fn validate_density(rho: &DMatrix<f64>, dim: usize) -> Result<DMatrix<f64>> {
    if rho.nrows() != dim || rho.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: rho.nrows().max(rho.ncols()),
        });
    }
    if rho.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let asym = max_asymmetry(rho);
    if asym > DENSITY_TOL {
        return Err(Error::InvalidDensity(format!("asymmetry {asym:e}")));
    }
    let sym = (rho + rho.transpose()) * 0.5;
    let tr = sym.trace();
    if (tr - 1.0).abs() > DENSITY_TOL {
        return Err(Error::InvalidDensity(format!("trace {tr}")));
    }
    // ρ + tol·Id admits a Cholesky factor exactly when λ_min(ρ) > −tol.
    if !shifted_positive_definite(&sym, DENSITY_TOL) {
        let min = symmetric_eigenvalues(&sym)?.first().copied().unwrap_or(0.0);
        return Err(Error::InvalidDensity(format!("eigenvalue {min:e}")));
    }
    Ok(sym)
}

/// Result of a complete-positivity / trace-preservation check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CptpReport {
    pub min_eigenvalue: f64,
    /// `max |Tr_out J − Id|`.
    pub tp_residual: f64,
    /// Whether the Choi matrix was diagonalised in full.
    pub dense: bool,
}

impl CptpReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.min_eigenvalue >= -tol && self.tp_residual <= tol
    }
}

impl ChannelRec {
    /// A channel from an arbitrary dilation.
    pub fn from_dilation(dilation: Stinespring, side: TracedSide) -> Self {
        ChannelRec {
            dilation: Arc::new(dilation),
            side,
            label: ChannelLabel::Custom,
        }
    }

    pub fn dilation(&self) -> &Arc<Stinespring> {
        &self.dilation
    }

    pub fn side(&self) -> TracedSide {
        self.side
    }

    pub fn label(&self) -> ChannelLabel {
        self.label
    }

    pub fn complement(&self) -> ChannelRec {
        ChannelRec {
            dilation: self.dilation.clone(),
            side: self.side.flip(),
            label: self.label,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.dilation.input_dim()
    }

    pub fn output_legs(&self) -> &[usize] {
        match self.side {
            TracedSide::Environment => &self.dilation.out_legs,
            TracedSide::Output => &self.dilation.env_legs,
        }
    }

    pub fn output_dim(&self) -> usize {
        self.output_legs().iter().product()
    }

    /// Dimension of the discarded factor.
    pub fn discarded_dim(&self) -> usize {
        match self.side {
            TracedSide::Environment => self.dilation.env_dim(),
            TracedSide::Output => self.dilation.out_dim(),
        }
    }

    /// Dilation arranged as `(output, discarded)`.
    pub fn oriented(&self) -> Stinespring {
        match self.side {
            TracedSide::Environment => (*self.dilation).clone(),
            TracedSide::Output => self.dilation.swapped(),
        }
    }

    /// `X ↦ Tr_discarded(V X Vᵀ)` on an arbitrary (not necessarily positive) input.
    pub fn apply_map(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let v = self.dilation.matrix();
        let vx = v * x;
        let (o, e) = (self.dilation.out_dim(), self.dilation.env_dim());
        let c = x.ncols();
        match self.side {
            TracedSide::Environment => {
                let gather = |m: &DMatrix<f64>| {
                    let mut t = DMatrix::zeros(o, e * c);
                    for col in 0..c {
                        for oi in 0..o {
                            for ei in 0..e {
                                t[(oi, ei + col * e)] = m[(oi * e + ei, col)];
                            }
                        }
                    }
                    t
                };
                gather(&vx) * gather(v).transpose()
            }
            TracedSide::Output => {
                let a = DMatrix::from_column_slice(e, o * c, vx.as_slice());
                let b = DMatrix::from_column_slice(e, o * c, v.as_slice());
                a * b.transpose()
            }
        }
    }

    /// Apply the channel to a validated density matrix.
    pub fn apply(&self, rho: &DMatrix<f64>) -> Result<DenseOp> {
        let sym = validate_density(rho, self.input_dim())?;
        let out = self.apply_map(&sym);
        let out = (&out + out.transpose()) * 0.5;
        DenseOp::square(out, self.output_legs().to_vec())
    }

    /// Kraus operators obtained by slicing the dilation along the discarded factor.
    pub fn kraus_ops(&self) -> Vec<DMatrix<f64>> {
        let v = self.dilation.matrix();
        let (o, e) = (self.dilation.out_dim(), self.dilation.env_dim());
        let d = self.input_dim();
        match self.side {
            TracedSide::Environment => (0..e)
                .map(|ei| DMatrix::from_fn(o, d, |oi, c| v[(oi * e + ei, c)]))
                .collect(),
            TracedSide::Output => (0..o)
                .map(|oi| DMatrix::from_fn(e, d, |ei, c| v[(oi * e + ei, c)]))
                .collect(),
        }
    }

    /// `F` with `J = F Fᵀ`; rows `(input, output)`, one column per Kraus operator.
    pub fn choi_factor(&self) -> DMatrix<f64> {
        let v = self.dilation.matrix();
        let (o, e) = (self.dilation.out_dim(), self.dilation.env_dim());
        let d = self.input_dim();
        match self.side {
            TracedSide::Environment => DMatrix::from_fn(d * o, e, |row, ei| {
                let (i, oi) = (row / o, row % o);
                v[(oi * e + ei, i)]
            }),
            TracedSide::Output => DMatrix::from_fn(d * e, o, |row, oi| {
                let (i, ei) = (row / e, row % e);
                v[(oi * e + ei, i)]
            }),
        }
    }

    /// Choi matrix `Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)` (trace equals the input dimension).
    pub fn choi(&self) -> DenseOp {
        let f = self.choi_factor();
        let mut legs = vec![self.input_dim()];
        legs.extend_from_slice(self.output_legs());
        DenseOp::square(&f * f.transpose(), legs).expect("choi legs tile the matrix")
    }

    /// Positivity of the Choi matrix and `Tr_out J = Id`.
    pub fn certify_cptp(&self) -> Result<CptpReport> {
        let d = self.input_dim();
        let f = self.choi_factor();
        let side = f.nrows();
        let kcols = f.ncols();
        if side <= CHOI_DENSE_LIMIT || side <= kcols {
            let j = self.choi();
            let min_eigenvalue = symmetric_eigenvalues(j.matrix())?
                .first()
                .copied()
                .unwrap_or(0.0);
            let reduced = partial_trace(&j, &[0])?;
            let tp = (reduced.matrix() - DMatrix::<f64>::identity(d, d)).amax();
            return Ok(CptpReport {
                min_eigenvalue,
                tp_residual: tp,
                dense: true,
            });
        }
        // Nonzero spectrum of F Fᵀ is that of Fᵀ F; the rest is zero.
        let gram = f.transpose() * &f;
        let min_gram = symmetric_eigenvalues(&gram)?
            .first()
            .copied()
            .unwrap_or(0.0);
        let min_eigenvalue = min_gram.min(0.0);
        let o = side / d;
        let mut w = DMatrix::zeros(d, o * kcols);
        for e in 0..kcols {
            for i in 0..d {
                for oi in 0..o {
                    w[(i, oi + e * o)] = f[(i * o + oi, e)];
                }
            }
        }
        let tp = (&w * w.transpose() - DMatrix::<f64>::identity(d, d)).amax();
        Ok(CptpReport {
            min_eigenvalue,
            tp_residual: tp,
            dense: false,
        })
    }

    /// Tensor product with another channel: outputs `(self, other)`.
    pub fn tensor(&self, other: &ChannelRec, caps: &Caps) -> Result<ChannelRec> {
        let dil = self.oriented().tensor(&other.oriented(), caps)?;
        Ok(ChannelRec::from_dilation(dil, TracedSide::Environment))
    }
}

/// Identity channel on `C^d` (single Kraus operator, trivial environment).
pub fn identity_channel(d: usize) -> ChannelRec {
    let dil = Stinespring {
        matrix: DMatrix::identity(d, d),
        out_legs: vec![d],
        env_legs: vec![1],
    };
    ChannelRec::from_dilation(dil, TracedSide::Environment)
}

/// The α/γ pair of a triple, sharing one input basis.
#[derive(Clone, Debug)]
pub struct TlChannels {
    pub alpha: IsometryRec,
    pub gamma: IsometryRec,
}

impl TlChannels {
    pub fn build(local_dim: usize, triple: AdmissibleTriple, cache: &JwCache) -> Result<Self> {
        let gamma = gamma_isometry(local_dim, triple, cache)?;
        let alpha = alpha_from_gamma(&gamma, cache)?;
        Ok(TlChannels { alpha, gamma })
    }

    pub fn phi(&self) -> ChannelRec {
        self.alpha.channel(TracedSide::Environment)
    }

    pub fn phi_c(&self) -> ChannelRec {
        self.alpha.channel(TracedSide::Output)
    }

    pub fn psi(&self) -> ChannelRec {
        self.gamma.channel(TracedSide::Environment)
    }

    pub fn psi_c(&self) -> ChannelRec {
        self.gamma.channel(TracedSide::Output)
    }
}

/// `Ψ^{k→l}_m(ρ) = Tr_{last m−r}(ι ρ ιᵀ) ⊗ Id_{N^r}/N^r`, computed without the isometry.
pub fn psi_closed_form(
    local_dim: usize,
    triple: AdmissibleTriple,
    basis: &IrrepBasis,
    rho: &DMatrix<f64>,
    caps: &Caps,
) -> Result<DenseOp> {
    let embedded = embed_state(local_dim, triple.k, basis, rho)?;
    let keep: Vec<usize> = (0..triple.out_free()).collect();
    let reduced = partial_trace(&embedded, &keep)?;
    let mixed = maximally_mixed(local_dim, triple.r);
    kron(&reduced, &mixed, caps)
}

/// `Ψᶜ(ρ) = Id_{N^r}/N^r ⊗ Tr_{first l−r}(ι ρ ιᵀ)`.
pub fn psi_c_closed_form(
    local_dim: usize,
    triple: AdmissibleTriple,
    basis: &IrrepBasis,
    rho: &DMatrix<f64>,
    caps: &Caps,
) -> Result<DenseOp> {
    let embedded = embed_state(local_dim, triple.k, basis, rho)?;
    let keep: Vec<usize> = (triple.out_free()..triple.k).collect();
    let reduced = partial_trace(&embedded, &keep)?;
    let mixed = maximally_mixed(local_dim, triple.r);
    kron(&mixed, &reduced, caps)
}

fn embed_state(
    local_dim: usize,
    k: usize,
    basis: &IrrepBasis,
    rho: &DMatrix<f64>,
) -> Result<DenseOp> {
    let iota = basis.iota();
    if rho.nrows() != iota.ncols() || rho.ncols() != iota.ncols() {
        return Err(Error::DimensionMismatch {
            expected: iota.ncols(),
            got: rho.nrows(),
        });
    }
    DenseOp::square(iota * rho * iota.transpose(), vec![local_dim; k])
}

fn maximally_mixed(local_dim: usize, legs: usize) -> DenseOp {
    let d = local_dim.pow(legs as u32);
    DenseOp::square(DMatrix::identity(d, d) / d as f64, vec![local_dim; legs])
        .expect("identity tiles its legs")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qarith::check_admissible;
    use crate::tensorkit::cup_vector;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cache() -> JwCache {
        JwCache::default()
    }

    fn tri(l: usize, m: usize, k: usize) -> AdmissibleTriple {
        check_admissible(l, m, k).unwrap()
    }

    fn random_density(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
        let a = DMatrix::from_fn(d, d + 1, |_, _| rng.gen::<f64>() - 0.5);
        let r = &a * a.transpose();
        let tr = r.trace();
        r / tr
    }

    /// Oracle: Choi assembled entry by entry from the channel action.
    fn choi_by_action(ch: &ChannelRec) -> DMatrix<f64> {
        let d = ch.input_dim();
        let o = ch.output_dim();
        let mut j = DMatrix::zeros(d * o, d * o);
        for i in 0..d {
            for k in 0..d {
                let mut eik = DMatrix::zeros(d, d);
                eik[(i, k)] = 1.0;
                let block = ch.apply_map(&eik);
                j.view_mut((i * o, k * o), (o, o)).copy_from(&block);
            }
        }
        j
    }

    #[test]
    fn gamma_examples() {
        let c = cache();
        for n in [2usize, 3, 5] {
            let g = gamma_isometry(n, tri(1, 1, 0), &c).unwrap();
            let cup = cup_vector(n, 1, c.caps()).unwrap().vector / (n as f64).sqrt();
            assert_relative_eq!(g.matrix().column(0).into_owned(), cup, epsilon = 1e-15);
        }
        let g = gamma_isometry(3, tri(2, 0, 2), &c).unwrap();
        assert_eq!(g.matrix(), c.basis(3, 2).unwrap().iota());
        let g = gamma_isometry(3, tri(2, 1, 1), &c).unwrap();
        assert!(g.dilation().isometry_defect() < 1e-14);
    }

    #[test]
    fn alpha_examples() {
        let c = cache();
        let a = alpha_isometry(4, tri(1, 1, 0), &c).unwrap();
        let g = gamma_isometry(4, tri(1, 1, 0), &c).unwrap();
        assert_eq!(a.matrix(), g.matrix());

        let a = alpha_isometry(3, tri(2, 1, 1), &c).unwrap();
        assert!(a.dilation().isometry_defect() < 1e-9);
        // Range inside p_l ⊗ p_m.
        let reproj = project_pair(3, 2, 1, a.matrix(), &c).unwrap();
        assert!((reproj - a.matrix()).amax() < 1e-12);

        // ‖(p_l⊗p_m)γ v‖² = θ/([k+1] N^r) for unit v.
        let t = tri(2, 1, 1);
        let proj = project_pair(3, 2, 1, g_matrix(3, t, &c).as_ref(), &c).unwrap();
        let ratio = normalization_ratio(3, &t).unwrap().to_f64();
        for col in 0..proj.ncols() {
            assert_relative_eq!(proj.column(col).norm(), ratio.sqrt(), epsilon = 1e-12);
        }
    }

    fn g_matrix(n: usize, t: AdmissibleTriple, c: &JwCache) -> Box<DMatrix<f64>> {
        Box::new(gamma_isometry(n, t, c).unwrap().matrix().clone())
    }

    #[test]
    fn isometries_on_small_grid() {
        let c = cache();
        for n in [2usize, 3, 4] {
            for t in AdmissibleTriple::all_up_to(4) {
                let ch = TlChannels::build(n, t, &c).unwrap();
                assert!(ch.gamma.dilation().isometry_defect() < 1e-12, "γ {t} N={n}");
                assert!(ch.alpha.dilation().isometry_defect() < 1e-9, "α {t} N={n}");
            }
        }
    }

    #[test]
    fn phi_011_gives_maximally_mixed() {
        let c = cache();
        let ch = TlChannels::build(3, tri(1, 1, 0), &c).unwrap();
        let out = ch.phi().apply(&DMatrix::from_element(1, 1, 1.0)).unwrap();
        assert_relative_eq!(
            out.matrix(),
            &(DMatrix::<f64>::identity(3, 3) / 3.0),
            epsilon = 1e-15
        );
        let kraus = ch.phi().kraus_ops();
        assert_eq!(kraus.len(), 3);
        for (i, k) in kraus.iter().enumerate() {
            assert_eq!(k.shape(), (3, 1));
            assert_relative_eq!(k[(i, 0)], 1.0 / 3f64.sqrt(), epsilon = 1e-15);
            assert_relative_eq!(k.norm(), 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        }
    }

    #[test]
    fn identity_case_embeds_input() {
        let c = cache();
        let t = tri(2, 0, 2);
        let ch = TlChannels::build(3, t, &c).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rho = random_density(&mut rng, 8);
        let iota = c.basis(3, 2).unwrap();
        let out = ch.phi().apply(&rho).unwrap();
        let expect = iota.iota() * &rho * iota.iota().transpose();
        assert_relative_eq!(out.matrix(), &expect, epsilon = 1e-12);
        let kraus = ch.phi().kraus_ops();
        assert_eq!(kraus.len(), 1);
        assert_relative_eq!(kraus[0], iota.iota().clone(), epsilon = 1e-12);
    }

    #[test]
    fn psi_matches_closed_form() {
        let c = cache();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for n in [2usize, 3] {
            for t in AdmissibleTriple::all_up_to(4) {
                let ch = TlChannels::build(n, t, &c).unwrap();
                let basis = c.basis(n, t.k).unwrap();
                let rho = random_density(&mut rng, basis.dim());
                let num = ch.psi().apply(&rho).unwrap();
                let closed = psi_closed_form(n, t, &basis, &rho, c.caps()).unwrap();
                assert!((num.matrix() - closed.matrix()).amax() < 1e-12, "{t} N={n}");
                let num_c = ch.psi_c().apply(&rho).unwrap();
                let closed_c = psi_c_closed_form(n, t, &basis, &rho, c.caps()).unwrap();
                assert!(
                    (num_c.matrix() - closed_c.matrix()).amax() < 1e-12,
                    "{t}ᶜ N={n}"
                );
            }
        }
    }

    #[test]
    fn kraus_agrees_with_isometry() {
        let c = cache();
        let ch = TlChannels::build(3, tri(2, 1, 1), &c).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for channel in [ch.phi(), ch.phi_c(), ch.psi(), ch.psi_c()] {
            let kraus = channel.kraus_ops();
            let d = channel.input_dim();
            let sum = kraus
                .iter()
                .fold(DMatrix::zeros(d, d), |acc, k| acc + k.tr_mul(k));
            assert!((sum - DMatrix::<f64>::identity(d, d)).amax() < 1e-9);
            for _ in 0..3 {
                let rho = random_density(&mut rng, d);
                let via_kraus = kraus.iter().fold(
                    DMatrix::zeros(channel.output_dim(), channel.output_dim()),
                    |acc, k| acc + k * &rho * k.transpose(),
                );
                let direct = channel.apply(&rho).unwrap();
                assert!((via_kraus - direct.matrix()).amax() < 1e-10);
                assert_relative_eq!(direct.trace(), 1.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn choi_matches_action_and_certifies() {
        let c = cache();
        for t in AdmissibleTriple::all_up_to(4) {
            let ch = TlChannels::build(3, t, &c).unwrap();
            for channel in [ch.phi(), ch.phi_c(), ch.psi(), ch.psi_c()] {
                let rep = channel.certify_cptp().unwrap();
                assert!(rep.passes(1e-9), "{channel}: {rep:?}");
                if channel.input_dim() * channel.output_dim() <= 300 {
                    let j = channel.choi();
                    assert!((j.matrix() - choi_by_action(&channel)).amax() < 1e-12);
                    assert_relative_eq!(j.trace(), channel.input_dim() as f64, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn choi_routes_agree() {
        // The factor route and the dense route see the same spectrum.
        let c = cache();
        let ch = TlChannels::build(3, tri(3, 1, 2), &c).unwrap();
        let f = ch.psi().choi_factor();
        let dense = symmetric_eigenvalues(ch.psi().choi().matrix()).unwrap();
        let gram = symmetric_eigenvalues(&f.tr_mul(&f)).unwrap();
        let top_dense: Vec<f64> = dense.iter().rev().take(gram.len()).copied().collect();
        let top_gram: Vec<f64> = gram.iter().rev().copied().collect();
        for (a, b) in top_dense.iter().zip(&top_gram) {
            assert_relative_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn identity_channel_choi() {
        let ch = identity_channel(3);
        let j = ch.choi();
        let mut omega = DMatrix::zeros(9, 1);
        for i in 0..3 {
            omega[(i * 3 + i, 0)] = 1.0;
        }
        assert_relative_eq!(j.matrix(), &(&omega * omega.transpose()), epsilon = 1e-15);
        assert_eq!(ch.kraus_ops().len(), 1);
    }

    #[test]
    fn psi_choi_rank_bound() {
        let c = cache();
        let n = 3;
        let ch = TlChannels::build(n, tri(2, 1, 1), &c).unwrap();
        let vals = symmetric_eigenvalues(ch.psi().choi().matrix()).unwrap();
        let rank = vals.iter().filter(|v| v.abs() > 1e-10).count();
        assert!(rank <= n * ch.psi().input_dim());
    }

    #[test]
    fn complement_preserves_trace() {
        let c = cache();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for t in AdmissibleTriple::all_up_to(3) {
            let ch = TlChannels::build(4, t, &c).unwrap();
            let rho = random_density(&mut rng, ch.phi().input_dim());
            assert_relative_eq!(ch.phi().apply(&rho).unwrap().trace(), 1.0, epsilon = 1e-10);
            assert_relative_eq!(
                ch.phi_c().apply(&rho).unwrap().trace(),
                1.0,
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn basis_rotation_preserves_output_spectrum() {
        use crate::jones_wenzl::{irrep_basis_from, PivotRule};
        let c = cache();
        let n = 3;
        let t = tri(2, 2, 2);
        let ch = TlChannels::build(n, t, &c).unwrap();
        let b1 = c.basis(n, t.k).unwrap();
        let b2 = irrep_basis_from(&c.projector(n, t.k).unwrap(), PivotRule::Natural);
        // The same physical state in the two coordinate systems.
        let u = b1.iota().tr_mul(b2.iota());
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let rho2 = random_density(&mut rng, b2.dim());
        let rho1 = &u * &rho2 * u.transpose();
        let out1 = ch.phi().apply(&rho1).unwrap();
        // Build Φ against the second basis by re-coordinatising α.
        let alpha2 = ch.alpha.matrix() * &u;
        let dil2 = Stinespring::new(alpha2, vec![n; t.l], vec![n; t.m]).unwrap();
        let phi2 = ChannelRec::from_dilation(dil2, TracedSide::Environment);
        let out2 = phi2.apply(&rho2).unwrap();
        let s1 = symmetric_eigenvalues(out1.matrix()).unwrap();
        let s2 = symmetric_eigenvalues(out2.matrix()).unwrap();
        for (a, b) in s1.iter().zip(&s2) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn rejects_bad_densities() {
        let c = cache();
        let ch = TlChannels::build(3, tri(2, 1, 1), &c).unwrap();
        let phi = ch.phi();
        assert!(matches!(
            phi.apply(&DMatrix::identity(2, 2)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            phi.apply(&DMatrix::identity(3, 3)),
            Err(Error::InvalidDensity(_))
        ));
        let mut neg = DMatrix::<f64>::zeros(3, 3);
        neg[(0, 0)] = 1.5;
        neg[(1, 1)] = -0.5;
        assert!(matches!(phi.apply(&neg), Err(Error::InvalidDensity(_))));
        // Round-off asymmetry is tolerated.
        let mut rho = DMatrix::<f64>::identity(3, 3) / 3.0;
        rho[(0, 1)] = 1e-12;
        assert!(phi.apply(&rho).is_ok());
    }

    #[test]
    fn tensor_dilation_matches_kron_of_outputs() {
        let c = cache();
        let ch = TlChannels::build(3, tri(2, 1, 1), &c).unwrap();
        let prod = ch.psi().tensor(&identity_channel(2), c.caps()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let rho = random_density(&mut rng, 3);
        let sigma = random_density(&mut rng, 2);
        let out = prod.apply(&rho.kronecker(&sigma)).unwrap();
        let expect = ch.psi().apply(&rho).unwrap().matrix().kronecker(&sigma);
        assert!((out.matrix() - expect).amax() < 1e-12);
        assert_eq!(prod.output_legs(), &[3, 3, 2]);
    }

    #[test]
    fn rejects_oversized_triples() {
        let c = JwCache::new(Caps::new(500, 100));
        assert!(matches!(
            TlChannels::build(5, tri(2, 2, 2), &c),
            Err(Error::CapExceeded { .. })
        ));
    }
}
