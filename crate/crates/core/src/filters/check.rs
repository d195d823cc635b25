use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use super::PeriodicFilterPair;
use crate::error::{Error, Result};
use crate::scalar::{cis_turns, Scalar};

/// Max over sample indices of `f(j)`.
fn max_over<T: Scalar>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> T {
    (0..n).into_par_iter().map(f).reduce(T::zero, T::max)
}

/// `e^{−iπrp/N}` for `p = 0..2N`.
fn twists<T: Scalar>(p: &PeriodicFilterPair<T>) -> Vec<Complex<T>> {
    let ts = p.ts();
    let (n, r) = (T::lit(ts.n() as f64), T::lit(ts.r() as f64));
    (0..ts.dilation())
        .map(|q| cis_turns(-r * T::from_usize_lossy(q) / (T::lit(2.0) * n)))
        .collect()
}

fn shift_stride<T: Scalar>(p: &PeriodicFilterPair<T>) -> Result<usize> {
    let n = p.len();
    let d = p.ts().dilation();
    if n % (2 * d) != 0 {
        return Err(Error::GridMismatch(format!(
            "u grid count {n} is not a multiple of 4N = {}",
            2 * d
        )));
    }
    Ok(n / d)
}

/// `max_u |𝕄₀(u + ¼) − 𝕄₀(u)|`.
pub fn check_m0_period<T: Scalar>(p: &PeriodicFilterPair<T>) -> Result<T> {
    shift_stride(p)?;
    let n = p.len();
    let quarter = n / 2;
    Ok(max_over(n, |j| (p.m0_at((j + quarter) % n) - p.m0_at(j)).abs()))
}

/// Residuals of the pairwise orthonormality conditions for filters `ℓ`, `k`:
/// the plain sum over the `2N` shifts `p/(4N)` minus `δ_{ℓk}`, and the sum
/// twisted by `e^{−iπrp/N}`.
pub fn check_orthonormality<T: Scalar>(
    pl: &PeriodicFilterPair<T>,
    pk: &PeriodicFilterPair<T>,
    same_index: bool,
) -> Result<(T, T)> {
    pl.same_layout(pk)?;
    let stride = shift_stride(pl)?;
    let n = pl.len();
    let tw = twists(pl);
    let delta = if same_index { T::one() } else { T::zero() };
    let (a1, a2, b1, b2) = (pl.lambda1(), pl.lambda2(), pk.lambda1(), pk.lambda2());
    let pairs: Vec<(T, T)> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut plain = Complex::default();
            let mut twisted = Complex::default();
            for (q, w) in tw.iter().enumerate() {
                let i = (j + q * stride) % n;
                let bracket = a1[i] * b1[i].conj() + a2[i] * b2[i].conj();
                plain = plain + bracket;
                twisted = twisted + w * bracket;
            }
            ((plain - delta).norm(), twisted.norm())
        })
        .collect();
    Ok(pairs
        .into_iter()
        .fold((T::zero(), T::zero()), |(x, y), (a, b)| (x.max(a), y.max(b))))
}

/// Residuals of `Σ_p 𝕄₀(u + p/4N) = 1` and `Σ_p e^{−iπrp/N} 𝕄₀(u + p/4N) = 0`.
pub fn check_scaling_conditions<T: Scalar>(p0: &PeriodicFilterPair<T>) -> Result<(T, T)> {
    let stride = shift_stride(p0)?;
    let n = p0.len();
    let tw = twists(p0);
    let pairs: Vec<(T, T)> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut plain = T::zero();
            let mut twisted = Complex::default();
            for (q, w) in tw.iter().enumerate() {
                let m = p0.m0_at((j + q * stride) % n);
                plain = plain + m;
                twisted = twisted + w.scale(m);
            }
            ((plain - T::one()).abs(), twisted.norm())
        })
        .collect();
    Ok(pairs
        .into_iter()
        .fold((T::zero(), T::zero()), |(x, y), (a, b)| (x.max(a), y.max(b))))
}

/// Residuals for one ordered filter pair.
#[derive(Debug, Clone, Serialize)]
pub struct PairResidual {
    pub l: usize,
    pub k: usize,
    pub plain: f64,
    pub twisted: f64,
}

/// Every condition for a bank `[Λ₀, …, Λ_{2N−1}]` (or any prefix).
#[derive(Debug, Clone, Serialize)]
pub struct BankReport {
    pub m0_period: f64,
    pub scaling_sum: f64,
    pub scaling_twisted: f64,
    pub dc_defect: f64,
    pub pairs: Vec<PairResidual>,
}

impl BankReport {
    /// Largest orthonormality residual over all pairs.
    pub fn max_pair(&self) -> f64 {
        self.pairs.iter().map(|p| p.plain.max(p.twisted)).fold(0.0, f64::max)
    }
}

/// Runs every checker on a bank whose first element is the low-pass filter.
pub fn check_bank<T: Scalar>(bank: &[PeriodicFilterPair<T>]) -> Result<BankReport> {
    let p0 = bank
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty filter bank".into()))?;
    let (s, t) = check_scaling_conditions(p0)?;
    let mut pairs = Vec::new();
    for l in 0..bank.len() {
        for k in l..bank.len() {
            let (plain, twisted) = check_orthonormality(&bank[l], &bank[k], l == k)?;
            pairs.push(PairResidual { l, k, plain: plain.as_f64(), twisted: twisted.as_f64() });
        }
    }
    Ok(BankReport {
        m0_period: check_m0_period(p0)?.as_f64(),
        scaling_sum: s.as_f64(),
        scaling_twisted: t.as_f64(),
        dc_defect: p0.dc_defect().as_f64(),
        pairs,
    })
}
