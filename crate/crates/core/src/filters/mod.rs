//! The translation set `Ω = {0, r/N} + 2ℤ`, periodic filter pairs and the
//! filter-condition checkers.
//!
//! Everything here works in the normalized frequency `u`. A filter is stored
//! as its two ½-periodic components `Λ¹`, `Λ²` sampled on `[0, ½)`, and the
//! full symbol is `Λ(u) = Λ¹(u) + e^{−2πiur/N} Λ²(u)`.

mod check;
mod complete;

pub use check::{
    check_bank, check_m0_period, check_orthonormality, check_scaling_conditions, BankReport,
    PairResidual,
};
pub use complete::complete_filters;

use num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::Grid;
use crate::scalar::{cis_turns, Scalar};

/// The spectrum `Ω = {2n, 2n + r/N : n ∈ ℤ}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawTs")]
pub struct TranslationSet {
    #[serde(rename = "N")]
    n: u32,
    r: u32,
}

#[derive(Deserialize)]
struct RawTs {
    #[serde(rename = "N")]
    n: u32,
    r: u32,
}

impl TryFrom<RawTs> for TranslationSet {
    type Error = Error;
    fn try_from(raw: RawTs) -> Result<Self> {
        TranslationSet::new(raw.n, raw.r)
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl TranslationSet {
    /// Requires `r` odd, `1 ≤ r ≤ 2N − 1` and `gcd(r, N) = 1`.
    pub fn new(n: u32, r: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("N must be positive".into()));
        }
        if r % 2 == 0 || r < 1 || r > 2 * n - 1 || gcd(r, n) != 1 {
            return Err(Error::InvalidParameter(format!(
                "r = {r} is not admissible for N = {n} (need r odd, 1 <= r <= 2N-1, gcd(r, N) = 1)"
            )));
        }
        Ok(Self { n, r })
    }

    /// All admissible `r` for a given `N`.
    pub fn valid_r(n: u32) -> Vec<u32> {
        (1..2 * n.max(1)).filter(|&r| Self::new(n, r).is_ok()).collect()
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    /// Dilation factor `2N`.
    pub fn dilation(&self) -> usize {
        2 * self.n as usize
    }

    /// The coset offset `r/N`.
    pub fn shift<T: Scalar>(&self) -> T {
        T::lit(self.r as f64) / T::lit(self.n as f64)
    }

    /// The spectral set `Δ = [0, ½) ∪ [N/2, (N+1)/2)`.
    pub fn spectral_set(&self) -> [(f64, f64); 2] {
        let n = self.n as f64;
        [(0.0, 0.5), (n / 2.0, (n + 1.0) / 2.0)]
    }

    /// Elements of `Ω` in the window, ascending.
    pub fn points(&self, window: Interval) -> Vec<OmegaPoint> {
        // work in units of 1/N, where λ·N = 2nN + s·r is an integer
        let n = self.n as i64;
        let lo = (window.lo * n as f64 - 1e-9).ceil() as i64;
        let hi = if window.closed {
            (window.hi * n as f64 + 1e-9).floor() as i64
        } else {
            (window.hi * n as f64 - 1e-9).ceil() as i64 - 1
        };
        if hi < lo {
            return Vec::new();
        }
        let mut out = Vec::new();
        let first = lo.div_euclid(2 * n) - 1;
        let last = hi.div_euclid(2 * n) + 1;
        for period in first..=last {
            for shifted in [false, true] {
                let p = OmegaPoint { period, shifted };
                let k = p.numerator(self);
                if k >= lo && k <= hi {
                    out.push(p);
                }
            }
        }
        out.sort_by_key(|p| p.numerator(self));
        out
    }

    /// `λ ∈ Ω ∩ window` as reals.
    pub fn enumerate<T: Scalar>(&self, window: Interval) -> Vec<T> {
        self.points(window).into_iter().map(|p| p.value(self)).collect()
    }

    /// Whether `λ` is an element of `Ω` (within `1e−9`).
    pub fn contains(&self, lambda: f64) -> bool {
        let k = lambda * self.n as f64;
        let kr = k.round();
        if (k - kr).abs() > 1e-9 {
            return false;
        }
        let rem = (kr as i64).rem_euclid(2 * self.n as i64);
        rem == 0 || rem == self.r as i64
    }
}

/// A real interval used to enumerate translations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub closed: bool,
}

impl Interval {
    /// `[lo, hi)`.
    pub fn half_open(lo: f64, hi: f64) -> Self {
        Self { lo, hi, closed: false }
    }

    /// `[lo, hi]`.
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self { lo, hi, closed: true }
    }
}

/// An element `2·period + (shifted ? r/N : 0)` of `Ω`, kept exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OmegaPoint {
    pub period: i64,
    pub shifted: bool,
}

impl OmegaPoint {
    /// `λ·N` as an integer.
    pub fn numerator(&self, ts: &TranslationSet) -> i64 {
        2 * self.period * ts.n as i64 + if self.shifted { ts.r as i64 } else { 0 }
    }

    pub fn value<T: Scalar>(&self, ts: &TranslationSet) -> T {
        T::from_i64_lossy(self.numerator(ts)) / T::lit(ts.n as f64)
    }
}

/// Smallest multiple of `4N` that is at least 4096.
pub fn default_resolution(n: u32) -> usize {
    let q = 4 * n as usize;
    4096usize.div_ceil(q) * q
}

/// Trigonometric series `Σ c_k e^{−4πiku}` recovered from the samples of a
/// component when it has few terms. Lets analytic filters be evaluated
/// exactly between grid points.
#[derive(Debug, Clone, PartialEq)]
struct SparseSeries<T> {
    terms: Vec<(i64, Complex<T>)>,
}

const MAX_SERIES_TERMS: usize = 64;

impl<T: Scalar> SparseSeries<T> {
    fn detect(samples: &[Complex<T>]) -> Option<Self> {
        let n = samples.len();
        let mut buf = samples.to_vec();
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        let inv_n = T::one() / T::from_usize_lossy(n);
        let coeffs: Vec<Complex<T>> = buf.iter().map(|c| c.scale(inv_n)).collect();
        let max_c = coeffs.iter().map(|c| c.norm()).fold(T::zero(), T::max);
        let max_s = samples.iter().map(|c| c.norm()).fold(T::zero(), T::max);
        let cut = T::lit(1e-13) * max_c;
        let mut terms = Vec::new();
        for (j, c) in coeffs.iter().enumerate() {
            if c.norm() > cut && max_c > T::zero() {
                let k = if j < n.div_ceil(2) { j as i64 } else { j as i64 - n as i64 };
                terms.push((k, *c));
            }
        }
        if terms.len() > MAX_SERIES_TERMS.min(n / 4) {
            return None;
        }
        terms.sort_by_key(|t| t.0);
        let series = Self { terms };
        let tol = T::lit(256.0) * T::epsilon() * T::one().max(max_s);
        let step = T::one() / T::from_usize_lossy(2 * n);
        let ok = samples
            .iter()
            .enumerate()
            .all(|(j, s)| (series.eval(T::from_usize_lossy(j) * step) - s).norm() <= tol);
        ok.then_some(series)
    }

    fn eval(&self, u: T) -> Complex<T> {
        let two = T::lit(2.0);
        self.terms
            .iter()
            .fold(Complex::default(), |acc, (k, c)| acc + c * cis_turns(-two * T::from_i64_lossy(*k) * u))
    }
}

/// The pair `(Λ¹, Λ²)` of ½-periodic components of one filter.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicFilterPair<T> {
    ts: TranslationSet,
    u_grid: Grid<T>,
    lambda1: Vec<Complex<T>>,
    lambda2: Vec<Complex<T>>,
    series: Option<(SparseSeries<T>, SparseSeries<T>)>,
}

impl<T: Scalar> PeriodicFilterPair<T> {
    /// Wraps samples on `u_j = j/(2·count)`, `j = 0..count`; `count` must be a
    /// multiple of `4N`.
    pub fn from_samples(
        ts: TranslationSet,
        lambda1: Vec<Complex<T>>,
        lambda2: Vec<Complex<T>>,
    ) -> Result<Self> {
        let count = lambda1.len();
        if count == 0 || lambda2.len() != count {
            return Err(Error::GridMismatch(format!(
                "component lengths {} and {} differ or are empty",
                count,
                lambda2.len()
            )));
        }
        if count % (4 * ts.n() as usize) != 0 {
            return Err(Error::GridMismatch(format!(
                "u grid count {count} is not a multiple of 4N = {}",
                4 * ts.n()
            )));
        }
        for v in [&lambda1, &lambda2] {
            if let Some(i) = v.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite(i));
            }
        }
        let u_grid = Grid::new(T::zero(), T::one() / T::from_usize_lossy(2 * count), count)?;
        let series = SparseSeries::detect(&lambda1).zip(SparseSeries::detect(&lambda2));
        Ok(Self { ts, u_grid, lambda1, lambda2, series })
    }

    /// Samples closed-form components on `count` points of `[0, ½)`.
    pub fn from_fn(
        ts: TranslationSet,
        count: usize,
        f: impl Fn(T) -> (Complex<T>, Complex<T>),
    ) -> Result<Self> {
        let step = T::one() / T::from_usize_lossy(2 * count);
        let (l1, l2) = (0..count).map(|j| f(T::from_usize_lossy(j) * step)).unzip();
        Self::from_samples(ts, l1, l2)
    }

    /// Filter with both components identically zero.
    pub fn zero(ts: TranslationSet, count: usize) -> Result<Self> {
        Self::from_samples(ts, vec![Complex::default(); count], vec![Complex::default(); count])
    }

    pub fn ts(&self) -> &TranslationSet {
        &self.ts
    }

    pub fn u_grid(&self) -> &Grid<T> {
        &self.u_grid
    }

    pub fn len(&self) -> usize {
        self.lambda1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda1.is_empty()
    }

    pub fn lambda1(&self) -> &[Complex<T>] {
        &self.lambda1
    }

    pub fn lambda2(&self) -> &[Complex<T>] {
        &self.lambda2
    }

    /// Whether off-grid evaluation is exact (closed-form trigonometric
    /// components) rather than nearest-sample.
    pub fn is_analytic(&self) -> bool {
        self.series.is_some()
    }

    /// Coefficients `h_λ` with `Λ(u) = Σ_λ h_λ e^{−2πiλu}`, `λ ∈ Ω`, sorted
    /// by `λ`. Available for analytic filters only.
    pub fn two_scale_coefficients(&self) -> Option<Vec<(T, Complex<T>)>> {
        let (s1, s2) = self.series.as_ref()?;
        let two = T::lit(2.0);
        let shift = self.ts.shift::<T>();
        let mut out: Vec<(T, Complex<T>)> = s1
            .terms
            .iter()
            .map(|(k, c)| (two * T::from_i64_lossy(*k), *c))
            .chain(s2.terms.iter().map(|(k, c)| (two * T::from_i64_lossy(*k) + shift, *c)))
            .collect();
        out.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite shifts"));
        Some(out)
    }

    /// `(Λ¹(u), Λ²(u))` for any real `u`.
    pub fn components(&self, u: T) -> (Complex<T>, Complex<T>) {
        if let Some((s1, s2)) = &self.series {
            return (s1.eval(u), s2.eval(u));
        }
        let n = self.len();
        let pos = (u / self.u_grid.step).round();
        let idx = pos
            .to_i64()
            .map(|k| k.rem_euclid(n as i64) as usize)
            .unwrap_or(0);
        (self.lambda1[idx], self.lambda2[idx])
    }

    /// `Λ(u) = Λ¹(u) + e^{−2πiur/N} Λ²(u)`; the cross phase uses the
    /// unreduced `u`.
    pub fn eval(&self, u: T) -> Complex<T> {
        let (a, b) = self.components(u);
        a + cis_turns(-u * self.ts.shift::<T>()) * b
    }

    /// `𝕄₀(u) = |Λ¹(u)|² + |Λ²(u)|²`.
    pub fn m0(&self, u: T) -> T {
        let (a, b) = self.components(u);
        a.norm_sqr() + b.norm_sqr()
    }

    /// `𝕄₀` at sample `j`.
    pub(crate) fn m0_at(&self, j: usize) -> T {
        self.lambda1[j].norm_sqr() + self.lambda2[j].norm_sqr()
    }

    /// `|Λ(0) − 1|`, the low-pass normalization defect.
    pub fn dc_defect(&self) -> T {
        (self.eval(T::zero()) - Complex::new(T::one(), T::zero())).norm()
    }

    /// Multiplies both components by `c`.
    pub fn scaled(&self, c: Complex<T>) -> Result<Self> {
        Self::from_samples(
            self.ts,
            self.lambda1.iter().map(|v| v * c).collect(),
            self.lambda2.iter().map(|v| v * c).collect(),
        )
    }

    pub(crate) fn same_layout(&self, other: &Self) -> Result<()> {
        if self.ts != other.ts {
            return Err(Error::InvalidParameter(format!(
                "filters built for different translation sets (N={}, r={}) vs (N={}, r={})",
                self.ts.n, self.ts.r, other.ts.n, other.ts.r
            )));
        }
        if self.len() != other.len() {
            return Err(Error::GridMismatch(format!(
                "u grids of {} and {} samples",
                self.len(),
                other.len()
            )));
        }
        Ok(())
    }
}
