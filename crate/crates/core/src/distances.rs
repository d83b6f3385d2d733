//! Distances between the Temperley–Lieb isometries and their channels.
//!
//! `bures_upper` is the Stinespring distance of one constructed dilation pair,
//! so it only bounds the Bures distance from above. `diamond_lower` evaluates
//! the difference on the maximally entangled input, a lower bound on the
//! diamond norm.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::caps::pow_dim;
use crate::channels::{project_pair, ChannelRec, TlChannels};
use crate::error::{Error, Result};
use crate::jones_wenzl::JwCache;
use crate::par::{self, Exec};
use crate::qarith::{defect_radicand, normalization_ratio, AdmissibleTriple};
use crate::tensorkit::{kron, op_norm, op_norm_mat, symmetric_eigenvalues, DenseOp};

/// Seed for the auxiliary isometry used by [`tensor_gap_check`].
pub const AUX_SEED: u64 = 0x5eed_0a11;

#[derive(Clone, Debug, PartialEq)]
pub struct GapReport {
    pub local_dim: usize,
    pub triple: AdmissibleTriple,
    /// `‖α − γ‖`.
    pub gap: f64,
    /// `‖γ − (p_l ⊗ p_m)γ‖` from the exact closed form.
    pub defect: f64,
    /// Deviation of the normalisation coefficient from one.
    pub coeff_dev: f64,
    pub triangle_bound: f64,
}

impl GapReport {
    pub fn satisfies_triangle(&self, slack: f64) -> bool {
        self.gap >= 0.0 && self.gap <= self.triangle_bound + slack
    }
}

/// `√(1 − θ/([k+1] N^r))`, with the inner value computed exactly.
pub fn projection_defect(local_dim: usize, triple: AdmissibleTriple) -> Result<f64> {
    let radicand = defect_radicand(local_dim as u64, &triple)?;
    if radicand.is_negative() {
        return Err(Error::NegativeRadicand(format!(
            "{radicand} at N={local_dim}, {triple}"
        )));
    }
    Ok(radicand.to_f64().sqrt())
}

/// `op_norm(γ − (p_l ⊗ p_m)γ)` computed from matrices.
pub fn numeric_projection_defect(
    local_dim: usize,
    triple: AdmissibleTriple,
    cache: &JwCache,
) -> Result<f64> {
    let chans = TlChannels::build(local_dim, triple, cache)?;
    let gamma = chans.gamma.matrix();
    let projected = project_pair(local_dim, triple.l, triple.m, gamma, cache)?;
    Ok(op_norm_mat(&(gamma - projected)))
}

fn coefficient_deviation(local_dim: usize, triple: AdmissibleTriple) -> Result<f64> {
    let ratio = normalization_ratio(local_dim as u64, &triple)?;
    Ok((ratio.recip().to_f64().sqrt() - 1.0).abs())
}

pub fn isometry_gap(
    local_dim: usize,
    triple: AdmissibleTriple,
    cache: &JwCache,
) -> Result<GapReport> {
    let chans = TlChannels::build(local_dim, triple, cache)?;
    gap_report(&chans)
}

/// Gap report for an already-built pair.
pub fn gap_report(chans: &TlChannels) -> Result<GapReport> {
    let (local_dim, triple) = (chans.alpha.local_dim, chans.alpha.triple);
    let gap = op_norm_mat(&(chans.alpha.matrix() - chans.gamma.matrix()));
    let defect = projection_defect(local_dim, triple)?;
    let coeff_dev = coefficient_deviation(local_dim, triple)?;
    Ok(GapReport {
        local_dim,
        triple,
        gap,
        defect,
        coeff_dev,
        triangle_bound: coeff_dev + defect,
    })
}

/// Gap reports for every point, in input order.
pub fn gap_sweep(
    points: &[(usize, AdmissibleTriple)],
    cache: &JwCache,
    exec: Exec,
) -> Vec<Result<GapReport>> {
    par::map(points, exec, |&(n, t)| isometry_gap(n, t, cache))
}

/// `‖V_A − V_B‖` for the dilations as constructed, with the smaller
/// environment padded by zero blocks.
pub fn bures_upper(a: &ChannelRec, b: &ChannelRec) -> Result<f64> {
    check_compatible(a, b)?;
    let va = a.oriented();
    let vb = b.oriented();
    let e = va.env_dim().max(vb.env_dim());
    let va = va.pad_env(e - va.env_dim());
    let vb = vb.pad_env(e - vb.env_dim());
    Ok(op_norm_mat(&(va.matrix() - vb.matrix())))
}

fn check_compatible(a: &ChannelRec, b: &ChannelRec) -> Result<()> {
    if a.input_dim() != b.input_dim() || a.output_dim() != b.output_dim() {
        return Err(Error::IncompatibleChannels(format!(
            "{a} has shape {}->{}, {b} has {}->{}",
            a.input_dim(),
            a.output_dim(),
            b.input_dim(),
            b.output_dim()
        )));
    }
    Ok(())
}

/// `‖(id ⊗ (A − B))(|Ω⟩⟨Ω|)‖₁` for the normalised maximally entangled `Ω`.
pub fn diamond_lower(a: &ChannelRec, b: &ChannelRec) -> Result<f64> {
    check_compatible(a, b)?;
    let d = a.input_dim() as f64;
    let fa = a.choi_factor();
    let fb = b.choi_factor();
    let side = fa.nrows();
    let cols = fa.ncols() + fb.ncols();
    let eigs = if side <= cols {
        let diff = &fa * fa.transpose() - &fb * fb.transpose();
        symmetric_eigenvalues(&((&diff + diff.transpose()) * 0.5))?
    } else {
        // With X = [F_A F_B] = Q [R_A R_B], the nonzero spectrum of
        // X diag(I, −I) Xᵀ is that of R_A R_Aᵀ − R_B R_Bᵀ.
        let mut x = DMatrix::zeros(side, cols);
        x.columns_mut(0, fa.ncols()).copy_from(&fa);
        x.columns_mut(fa.ncols(), fb.ncols()).copy_from(&fb);
        let r = x.qr().r();
        let ra = r.columns(0, fa.ncols());
        let rb = r.columns(fa.ncols(), fb.ncols());
        let core = ra * ra.transpose() - rb * rb.transpose();
        symmetric_eigenvalues(&((&core + core.transpose()) * 0.5))?
    };
    Ok(eigs.iter().map(|v| v.abs()).sum::<f64>() / d)
}

/// A `d_out × d_in` matrix with orthonormal columns, from a seeded QR.
pub fn random_isometry(d_in: usize, d_out: usize, seed: u64) -> DMatrix<f64> {
    assert!(d_in <= d_out, "isometry needs d_in <= d_out");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::from_fn(d_out, d_in, |_, _| rng.gen::<f64>() - 0.5);
    g.qr().q()
}

/// `‖(V_α − V_γ) ⊗ V'‖` for a seeded isometry `V' : C^{d_aux} → C^{2 d_aux}`.
pub fn tensor_gap_check(
    local_dim: usize,
    triple: AdmissibleTriple,
    d_aux: usize,
    cache: &JwCache,
) -> Result<f64> {
    let aux = random_isometry(d_aux, 2 * d_aux, AUX_SEED);
    tensor_gap_check_with(local_dim, triple, &aux, cache)
}

pub fn tensor_gap_check_with(
    local_dim: usize,
    triple: AdmissibleTriple,
    aux: &DMatrix<f64>,
    cache: &JwCache,
) -> Result<f64> {
    let caps = cache.caps();
    caps.check_dim(
        "tensored isometry rows",
        pow_dim(local_dim, triple.l + triple.m).saturating_mul(aux.nrows() as u128),
    )?;
    let chans = TlChannels::build(local_dim, triple, cache)?;
    let diff = DenseOp::from_matrix(chans.alpha.matrix() - chans.gamma.matrix());
    let prod = kron(&diff, &DenseOp::from_matrix(aux.clone()), caps)?;
    Ok(op_norm(&prod))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root of the summed squared residuals in log space.
    pub residual: f64,
}

/// Least-squares line through `(ln N, ln value)`.
pub fn convergence_fit(points: &[(f64, f64)]) -> Result<PowerFit> {
    if points.len() < 4 {
        return Err(Error::TooFewPoints(points.len()));
    }
    if let Some(&(_, v)) = points
        .iter()
        .find(|&&(n, v)| v.is_nan() || v <= 0.0 || n.is_nan() || n <= 0.0)
    {
        return Err(Error::NonPositiveValue(v));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(PowerFit {
        slope,
        intercept,
        residual,
    })
}
