//! Truncated infinite products of filter symbols.
//!
//! `Ŵ(u) = Π_{i≥1} Λ_{μ_i}(u/(2N)^i)` where `μ` lists the packet digits
//! (least significant first) followed by `tail` low-pass factors. The
//! scaling function is the empty digit list and wavelet `k` the single digit
//! `k`. Arguments are produced by repeated division and the product is folded
//! from the deepest factor outward, so that
//! `Ŵ_{2Nn+k}(u) = Λ_k(u/2N)·Ŵ_n(u/2N)` holds bit for bit.

use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::filters::PeriodicFilterPair;
use crate::scalar::Scalar;

/// Upper bound on `digits + tail`.
pub const MAX_FACTORS: usize = 256;

/// Default number of low-pass tail factors.
pub const DEFAULT_DEPTH: usize = 40;

#[derive(Debug, Clone)]
pub struct ProductHat<T> {
    bank: Arc<[PeriodicFilterPair<T>]>,
    digits: Vec<usize>,
    tail: usize,
}

impl<T: Scalar> ProductHat<T> {
    pub fn new(bank: Arc<[PeriodicFilterPair<T>]>, digits: Vec<usize>, tail: usize) -> Result<Self> {
        let p0 = bank
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty filter bank".into()))?;
        if let Some(&bad) = digits.iter().find(|&&k| k >= bank.len()) {
            return Err(Error::InvalidParameter(format!(
                "digit {bad} has no filter (bank of {})",
                bank.len()
            )));
        }
        if bank.iter().any(|p| p.ts() != p0.ts()) {
            return Err(Error::InvalidParameter("bank mixes translation sets".into()));
        }
        if tail == 0 || digits.len() + tail > MAX_FACTORS {
            return Err(Error::InvalidParameter(format!(
                "product depth {} + {} outside 1..={MAX_FACTORS}",
                digits.len(),
                tail
            )));
        }
        Ok(Self { bank, digits, tail })
    }

    /// `φ̂` from a low-pass filter alone.
    pub fn scaling(p0: PeriodicFilterPair<T>, tail: usize) -> Result<Self> {
        Self::new(Arc::from(vec![p0]), Vec::new(), tail)
    }

    pub fn bank(&self) -> &Arc<[PeriodicFilterPair<T>]> {
        &self.bank
    }

    pub fn digits(&self) -> &[usize] {
        &self.digits
    }

    pub fn tail(&self) -> usize {
        self.tail
    }

    pub fn dilation(&self) -> usize {
        self.bank[0].ts().dilation()
    }

    fn factor_filter(&self, i: usize) -> &PeriodicFilterPair<T> {
        &self.bank[self.digits.get(i).copied().unwrap_or(0)]
    }

    fn factors(&self, u: T, out: &mut [Complex<T>; MAX_FACTORS]) -> usize {
        let len = self.digits.len() + self.tail;
        let d = T::from_usize_lossy(self.dilation());
        let mut a = u;
        for (i, slot) in out.iter_mut().enumerate().take(len) {
            a = a / d;
            *slot = self.factor_filter(i).eval(a);
        }
        len
    }

    /// `Ŵ(u)`.
    pub fn eval(&self, u: T) -> Complex<T> {
        let mut f = [Complex::default(); MAX_FACTORS];
        let len = self.factors(u, &mut f);
        f[..len].iter().rev().fold(Complex::new(T::one(), T::zero()), |v, x| x * v)
    }

    /// `Ŵ(u)` and the tail deviation `|P − P'|`, where `P'` omits the
    /// deepest factor.
    pub fn eval_with_tail(&self, u: T) -> (Complex<T>, T) {
        let mut f = [Complex::default(); MAX_FACTORS];
        let len = self.factors(u, &mut f);
        let one = Complex::new(T::one(), T::zero());
        let full = f[..len].iter().rev().fold(one, |v, x| x * v);
        let short = f[..len - 1].iter().rev().fold(one, |v, x| x * v);
        (full, (full - short).norm())
    }

    /// The same product with one more leading digit `k`.
    pub fn child(&self, k: usize) -> Result<Self> {
        let mut digits = Vec::with_capacity(self.digits.len() + 1);
        digits.push(k);
        digits.extend_from_slice(&self.digits);
        Self::new(self.bank.clone(), digits, self.tail)
    }
}
