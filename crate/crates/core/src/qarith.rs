//! Exact quantum integers, quantum factorials and theta-nets at `q + 1/q = N`.
//!
//! Quantum integers are produced by the integer recurrence
//! `[n+1] = N·[n] − [n−1]`, so nothing here ever touches a floating-point `q`.
//! The indexing follows `[n+1]_q = dim(H_n)` with the extra convention
//! `[0]_q = 1`.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// An exact nonnegative quantum integer.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QInt(BigUint);

impl QInt {
    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn into_inner(self) -> BigUint {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::INFINITY)
    }

    /// Exact conversion when the value fits.
    pub fn to_u128(&self) -> Option<u128> {
        self.0.to_u128()
    }

    pub fn to_usize(&self) -> Option<usize> {
        self.0.to_usize()
    }
}

impl From<u64> for QInt {
    fn from(v: u64) -> Self {
        QInt(BigUint::from(v))
    }
}

impl fmt::Display for QInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// An exact rational in lowest terms with positive denominator.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QRational(BigRational);

impl QRational {
    pub fn new(num: BigInt, den: BigInt) -> Self {
        // Ratio::new reduces and normalises the sign onto the numerator.
        QRational(BigRational::new(num, den))
    }

    pub fn from_qints(num: &QInt, den: &QInt) -> Self {
        Self::new(BigInt::from(num.0.clone()), BigInt::from(den.0.clone()))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn recip(&self) -> Self {
        QRational(self.0.recip())
    }

    pub fn one() -> Self {
        QRational(BigRational::one())
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.0)
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }
}

impl std::ops::Sub for &QRational {
    type Output = QRational;
    fn sub(self, rhs: &QRational) -> QRational {
        QRational(&self.0 - &rhs.0)
    }
}

impl std::ops::Mul for &QRational {
    type Output = QRational;
    fn mul(self, rhs: &QRational) -> QRational {
        QRational(&self.0 * &rhs.0)
    }
}

impl std::ops::Div for &QRational {
    type Output = QRational;
    fn div(self, rhs: &QRational) -> QRational {
        QRational(&self.0 / &rhs.0)
    }
}

impl fmt::Display for QRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

/// Correctly scaled float conversion for rationals whose parts overflow `f64`.
fn ratio_to_f64(r: &BigRational) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Shift both parts down to 64 significant bits and rescale.
    let num = r.numer();
    let den = r.denom();
    let nb = num.bits() as i64;
    let db = den.bits() as i64;
    let ns = (nb - 64).max(0);
    let ds = (db - 64).max(0);
    let n = (num >> ns as usize).to_f64().unwrap_or(0.0);
    let d = (den >> ds as usize).to_f64().unwrap_or(1.0);
    n / d * 2f64.powi((ns - ds) as i32)
}

/// An admissible triple `(l, m, k)`: `k` occurs in the fusion of `l ⊗ m`.
/// `r = (l + m − k)/2` counts the cups joining the two output groups.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AdmissibleTriple {
    pub l: usize,
    pub m: usize,
    pub k: usize,
    pub r: usize,
}

impl AdmissibleTriple {
    pub fn new(l: usize, m: usize, k: usize) -> Result<Self> {
        check_admissible(l, m, k)
    }

    /// Legs of the input that survive into the output group.
    pub fn out_free(&self) -> usize {
        self.l - self.r
    }

    /// Legs of the input that end up in the environment group.
    pub fn env_free(&self) -> usize {
        self.m - self.r
    }

    /// Every admissible triple with `l + m <= max_lm`, ordered by `(l, m, k)`.
    pub fn all_up_to(max_lm: usize) -> Vec<AdmissibleTriple> {
        let mut out = Vec::new();
        for l in 0..=max_lm {
            for m in 0..=(max_lm - l) {
                let lo = l.abs_diff(m);
                let mut k = lo;
                while k <= l + m {
                    out.push(AdmissibleTriple {
                        l,
                        m,
                        k,
                        r: (l + m - k) / 2,
                    });
                    k += 2;
                }
            }
        }
        out
    }
}

impl fmt::Display for AdmissibleTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.l, self.m, self.k)
    }
}

pub fn check_admissible(l: usize, m: usize, k: usize) -> Result<AdmissibleTriple> {
    if !(l + m + k).is_multiple_of(2) {
        return Err(Error::ParityViolation { l, m, k });
    }
    if k < l.abs_diff(m) || k > l + m {
        return Err(Error::OutOfFusionRange { l, m, k });
    }
    Ok(AdmissibleTriple {
        l,
        m,
        k,
        r: (l + m - k) / 2,
    })
}

fn check_local_dim(local_dim: u64) -> Result<()> {
    if local_dim < 2 {
        return Err(Error::LocalDimTooSmall(local_dim));
    }
    Ok(())
}

/// All quantum integers `[1]_q ..= [n]_q` (index 0 of the result is `[0]_q = 1`).
fn qdim_table(local_dim: u64, n: usize) -> Vec<BigUint> {
    let nn = BigUint::from(local_dim);
    let mut table = Vec::with_capacity(n + 1);
    table.push(BigUint::one());
    // Standard quantum integers with [0] = 0, [1] = 1. The sequence is
    // increasing for N >= 2, so the subtraction never underflows.
    let mut prev = BigUint::zero();
    let mut cur = BigUint::one();
    for _ in 1..=n {
        table.push(cur.clone());
        let next = &nn * &cur - &prev;
        prev = std::mem::replace(&mut cur, next);
    }
    table
}

/// `[n]_q` at `q + 1/q = N`; equals `dim(H_{n−1})` for `n >= 1`.
pub fn qdim(local_dim: u64, n: usize) -> Result<QInt> {
    check_local_dim(local_dim)?;
    Ok(QInt(qdim_table(local_dim, n).swap_remove(n)))
}

/// `[n]_q! = [n]_q · [n−1]_q ⋯ [1]_q`, with `[0]_q! = 1`.
pub fn qfact(local_dim: u64, n: usize) -> Result<QInt> {
    check_local_dim(local_dim)?;
    let table = qdim_table(local_dim, n);
    Ok(QInt(table.iter().skip(1).product()))
}

fn qfact_from(table: &[BigUint], n: usize) -> BigUint {
    table[1..=n].iter().product()
}

/// Theta-net of an admissible triple:
/// `[r]! [l−r]! [m−r]! [k+r+1]! / ([l]! [m]! [k]!)`.
pub fn theta(local_dim: u64, l: usize, m: usize, k: usize) -> Result<QRational> {
    check_local_dim(local_dim)?;
    let t = check_admissible(l, m, k)?;
    let table = qdim_table(local_dim, t.k + t.r + 1);
    let num = qfact_from(&table, t.r)
        * qfact_from(&table, t.l - t.r)
        * qfact_from(&table, t.m - t.r)
        * qfact_from(&table, t.k + t.r + 1);
    let den = qfact_from(&table, t.l) * qfact_from(&table, t.m) * qfact_from(&table, t.k);
    Ok(QRational::new(BigInt::from(num), BigInt::from(den)))
}

/// `θ / ([k+1]_q · N^r)`: the squared norm that `(p_l ⊗ p_m)` leaves on `γ`.
pub fn normalization_ratio(local_dim: u64, t: &AdmissibleTriple) -> Result<QRational> {
    let th = theta(local_dim, t.l, t.m, t.k)?;
    let dk = qdim(local_dim, t.k + 1)?;
    let nr = BigUint::from(local_dim).pow(t.r as u32);
    let den = QRational::new(BigInt::from(dk.into_inner() * nr), BigInt::one());
    Ok(&th / &den)
}

/// `1 − θ / ([k+1]_q · N^r)`, exactly.
pub fn defect_radicand(local_dim: u64, t: &AdmissibleTriple) -> Result<QRational> {
    let ratio = normalization_ratio(local_dim, t)?;
    Ok(&QRational::one() - &ratio)
}
