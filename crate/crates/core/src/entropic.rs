//! Von Neumann entropy, coherent information, Holevo quantities, and the
//! finite-`N` capacity brackets of the approximating channels `Ψ`, `Ψᶜ`.
//!
//! All entropies are in bits.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::channels::{identity_channel, validate_density, ChannelRec, TlChannels};
use crate::error::{Error, Result};
use crate::jones_wenzl::{membership, JwCache};
use crate::qarith::AdmissibleTriple;
use crate::tensorkit::{encode, symmetric_eigenvalues};

/// Eigenvalues at or below this are dropped from entropy sums.
pub const EIGEN_FLOOR: f64 = 1e-14;

/// Agreement required between a numeric lower bound and its closed form.
pub const CERTIFY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    Two,
    E,
}

impl LogBase {
    /// Multiplier taking a value in bits to this base.
    pub fn from_bits(self) -> f64 {
        match self {
            LogBase::Two => 1.0,
            LogBase::E => std::f64::consts::LN_2,
        }
    }
}

/// `−Σ λ log₂ λ` over the spectrum of a density matrix.
pub fn entropy(rho: &DMatrix<f64>) -> Result<f64> {
    let sym = validate_density(rho, rho.nrows())?;
    Ok(entropy_unchecked(&sym))
}

fn entropy_unchecked(rho: &DMatrix<f64>) -> f64 {
    let vals = symmetric_eigenvalues(rho).expect("symmetrised input");
    -vals
        .iter()
        .filter(|&&v| v > EIGEN_FLOOR)
        .map(|&v| v * v.log2())
        .sum::<f64>()
}

/// A finite ensemble of input states.
#[derive(Clone, Debug)]
pub struct Ensemble {
    probabilities: Vec<f64>,
    states: Vec<DMatrix<f64>>,
}

impl Ensemble {
    pub fn new(probabilities: Vec<f64>, states: Vec<DMatrix<f64>>) -> Result<Self> {
        if probabilities.len() != states.len() || states.is_empty() {
            return Err(Error::InvalidEnsemble(format!(
                "{} probabilities for {} states",
                probabilities.len(),
                states.len()
            )));
        }
        if probabilities.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(Error::InvalidEnsemble("negative probability".into()));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidEnsemble(format!(
                "probabilities sum to {total}"
            )));
        }
        let d = states[0].nrows();
        let states = states
            .iter()
            .map(|s| validate_density(s, d))
            .collect::<Result<Vec<_>>>()?;
        Ok(Ensemble {
            probabilities,
            states,
        })
    }

    /// Uniform mixture of pure states.
    pub fn uniform_pure(vectors: &[DVector<f64>]) -> Result<Self> {
        let p = 1.0 / vectors.len().max(1) as f64;
        let states = vectors
            .iter()
            .map(|v| {
                let u = v / v.norm();
                &u * u.transpose()
            })
            .collect();
        Ensemble::new(vec![p; vectors.len()], states)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn states(&self) -> &[DMatrix<f64>] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn average(&self) -> DMatrix<f64> {
        let d = self.states[0].nrows();
        self.probabilities
            .iter()
            .zip(&self.states)
            .fold(DMatrix::zeros(d, d), |acc, (&p, s)| acc + s * p)
    }
}

/// Which side the explicit ensemble is built to favour.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnsembleSide {
    /// Free letters on the first `l − r` legs, alternating `0101…` tail.
    OutputBiased,
    /// Alternating `…1010` head, free letters on the last `m − r` legs.
    EnvironmentBiased,
}

/// Words with distinct neighbours of length `len`, in lexicographic order,
/// avoiding `forbid_first` and `forbid_last` at the two ends.
fn chain_words(
    alphabet: usize,
    len: usize,
    forbid_last: Option<usize>,
    forbid_first: Option<usize>,
) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut word = Vec::with_capacity(len);
    fn rec(
        alphabet: usize,
        len: usize,
        forbid_last: Option<usize>,
        forbid_first: Option<usize>,
        word: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if word.len() == len {
            out.push(word.clone());
            return;
        }
        for a in 0..alphabet {
            if word.is_empty() && forbid_first == Some(a) {
                continue;
            }
            if word.last() == Some(&a) {
                continue;
            }
            if word.len() + 1 == len && forbid_last == Some(a) {
                continue;
            }
            word.push(a);
            rec(alphabet, len, forbid_last, forbid_first, word, out);
            word.pop();
        }
    }
    rec(
        alphabet,
        len,
        forbid_last,
        forbid_first,
        &mut word,
        &mut out,
    );
    out
}

/// The basis words `ξ ∈ H_1^{⊗k}` behind the explicit ensembles (0-based letters).
///
/// The boundary constraint against the alternating part is kept even when that
/// part is empty, so the count is always `(N−1)^{free}`.
pub fn ensemble_words(
    local_dim: usize,
    triple: AdmissibleTriple,
    side: EnsembleSide,
) -> Vec<Vec<usize>> {
    let alternating =
        |len: usize, start: usize| -> Vec<usize> { (0..len).map(|i| (start + i) % 2).collect() };
    match side {
        EnsembleSide::OutputBiased => {
            let tail = alternating(triple.env_free(), 0);
            chain_words(local_dim, triple.out_free(), Some(0), None)
                .into_iter()
                .map(|mut w| {
                    w.extend_from_slice(&tail);
                    w
                })
                .collect()
        }
        EnsembleSide::EnvironmentBiased => {
            let h = triple.out_free();
            // Ends in letter 0: …1010.
            let head: Vec<usize> = (0..h).map(|i| (h - 1 - i) % 2).collect();
            chain_words(local_dim, triple.env_free(), None, Some(0))
                .into_iter()
                .map(|w| {
                    let mut full = head.clone();
                    full.extend_from_slice(&w);
                    full
                })
                .collect()
        }
    }
}

/// Uniform ensemble of the pure states `|ξ⟩⟨ξ|`, in the coordinates of the
/// cached basis of `H_k`. Every word is checked to lie in `H_k`.
pub fn explicit_ensemble(
    local_dim: usize,
    triple: AdmissibleTriple,
    side: EnsembleSide,
    cache: &JwCache,
) -> Result<Ensemble> {
    let proj = cache.projector(local_dim, triple.k)?;
    let basis = cache.basis(local_dim, triple.k)?;
    let full = local_dim.pow(triple.k as u32);
    let mut coords = Vec::new();
    for w in ensemble_words(local_dim, triple, side) {
        let mut v = DVector::zeros(full);
        v[encode(&w, local_dim)] = 1.0;
        let mem = membership(&proj, &v)?;
        if !mem.member {
            return Err(Error::InvalidEnsemble(format!(
                "word {w:?} leaves H_{} (residual {:e})",
                triple.k, mem.residual
            )));
        }
        coords.push(basis.coordinates(&v));
    }
    Ensemble::uniform_pure(&coords)
}

fn same_dilation(a: &ChannelRec, b: &ChannelRec) -> bool {
    std::sync::Arc::ptr_eq(a.dilation(), b.dilation()) && a.side() != b.side()
}

/// `H(Φ(ρ)) − H(Φᶜ(ρ))`.
pub fn coherent_information(
    channel: &ChannelRec,
    complement: &ChannelRec,
    rho: &DMatrix<f64>,
) -> Result<f64> {
    if !same_dilation(channel, complement) {
        return Err(Error::IncompatibleChannels(format!(
            "{channel} and {complement} are not complementary"
        )));
    }
    let out = channel.apply(rho)?;
    let env = complement.apply(rho)?;
    Ok(entropy_unchecked(out.matrix()) - entropy_unchecked(env.matrix()))
}

/// `H(Σ p_i Φ(ρ_i)) − Σ p_i H(Φ(ρ_i))`.
pub fn holevo_chi(channel: &ChannelRec, ensemble: &Ensemble) -> Result<f64> {
    let outs = ensemble
        .states()
        .iter()
        .map(|s| channel.apply(s))
        .collect::<Result<Vec<_>>>()?;
    let d = channel.output_dim();
    let mut avg = DMatrix::zeros(d, d);
    let mut mean_entropy = 0.0;
    for (&p, o) in ensemble.probabilities().iter().zip(&outs) {
        avg += o.matrix() * p;
        mean_entropy += p * entropy_unchecked(o.matrix());
    }
    Ok(entropy_unchecked(&avg) - mean_entropy)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    /// Classical capacity; brackets built here also contain `Q^{(1)}` and `χ`.
    C,
    Q1,
    Chi,
    P,
    Q,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BracketTarget {
    Psi,
    PsiC,
}

impl fmt::Display for BracketTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BracketTarget::Psi => write!(f, "Psi"),
            BracketTarget::PsiC => write!(f, "Psi^c"),
        }
    }
}

/// `lower ≤ Q^{(1)} ≤ C ≤ upper` in bits.
#[derive(Clone, Debug, PartialEq)]
pub struct CapacityBracket {
    pub lower: f64,
    pub upper: f64,
    pub quantity: Quantity,
    pub channel_tag: String,
    /// Coherent information actually achieved by the explicit ensemble.
    pub numeric_lower: f64,
    /// `|numeric_lower − lower| ≤ 1e−9`.
    pub certified: bool,
}

impl CapacityBracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn is_ordered(&self) -> bool {
        self.lower <= self.upper + 1e-12
    }
}

fn log2_or_zero(count: usize, x: f64) -> f64 {
    if count == 0 {
        0.0
    } else {
        count as f64 * x.log2()
    }
}

/// Bracket for `Ψ` (free legs `l − r`) or `Ψᶜ` (free legs `m − r`), with the
/// lower end reproduced as the coherent information of the explicit ensemble.
pub fn capacity_bracket(
    local_dim: usize,
    triple: AdmissibleTriple,
    which: BracketTarget,
    cache: &JwCache,
) -> Result<CapacityBracket> {
    let chans = TlChannels::build(local_dim, triple, cache)?;
    let (free, side, ch, comp) = match which {
        BracketTarget::Psi => (
            triple.out_free(),
            EnsembleSide::OutputBiased,
            chans.psi(),
            chans.psi_c(),
        ),
        BracketTarget::PsiC => (
            triple.env_free(),
            EnsembleSide::EnvironmentBiased,
            chans.psi_c(),
            chans.psi(),
        ),
    };
    let n = local_dim as f64;
    let lower = log2_or_zero(free, n - 1.0);
    let upper = log2_or_zero(free, n);
    let ens = explicit_ensemble(local_dim, triple, side, cache)?;
    let numeric_lower = coherent_information(&ch, &comp, &ens.average())?;
    Ok(CapacityBracket {
        lower,
        upper,
        quantity: Quantity::C,
        channel_tag: format!("{which}[N={local_dim},{triple}]"),
        numeric_lower,
        certified: (numeric_lower - lower).abs() <= CERTIFY_TOL,
    })
}

/// One-shot bracket for `Ψ ⊗ id_{d_aux}` using the product input
/// `ρ ⊗ Id/d_aux`, where `ρ` is the output-biased ensemble average.
pub fn product_ensemble_bounds(
    local_dim: usize,
    triple: AdmissibleTriple,
    d_aux: usize,
    cache: &JwCache,
) -> Result<CapacityBracket> {
    let chans = TlChannels::build(local_dim, triple, cache)?;
    let prod = chans.psi().tensor(&identity_channel(d_aux), cache.caps())?;
    let ens = explicit_ensemble(local_dim, triple, EnsembleSide::OutputBiased, cache)?;
    let aux = DMatrix::<f64>::identity(d_aux, d_aux) / d_aux as f64;
    let rho = ens.average().kronecker(&aux);
    let numeric_lower = coherent_information(&prod, &prod.complement(), &rho)?;
    let n = local_dim as f64;
    let aux_bits = (d_aux as f64).log2();
    let lower = log2_or_zero(triple.out_free(), n - 1.0) + aux_bits;
    let upper = log2_or_zero(triple.out_free(), n) + aux_bits;
    Ok(CapacityBracket {
        lower,
        upper,
        quantity: Quantity::C,
        channel_tag: format!("Psi[N={local_dim},{triple}]⊗id_{d_aux}"),
        numeric_lower,
        certified: (numeric_lower - lower).abs() <= CERTIFY_TOL,
    })
}
