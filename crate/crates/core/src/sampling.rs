//! Uniform grids, sampled signals, quadrature inner products and the chirped
//! translation and dilation operators.
//!
//! A sample `values[i]` stands for the function on the cell
//! `[t_min + i·step, t_min + (i+1)·step)`. Point lookups off the grid use that
//! cell (sample-and-hold), which is exact for piecewise-constant functions
//! whose breakpoints sit on grid points and takes the right limit at jumps.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::canonical::CanonicalMatrix;
use crate::error::{Error, Result};
use crate::scalar::{cis_turns, Scalar};

/// Index-space tolerance for deciding that a point lies on the grid.
const SNAP: f64 = 1e-9;

/// A uniform grid `t_i = t_min + i·step`, `i = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid<T> {
    pub t_min: T,
    pub step: T,
    pub count: usize,
    /// Largest `|j|` accepted by [`dilate_chirp`]; unlimited when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_level: Option<u32>,
}

impl<T: Scalar> Grid<T> {
    pub fn new(t_min: T, step: T, count: usize) -> Result<Self> {
        if !(step > T::zero()) || !step.is_finite() || !t_min.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "grid step must be positive and finite (t_min = {t_min}, step = {step})"
            )));
        }
        if count == 0 {
            return Err(Error::InvalidParameter("grid count must be positive".into()));
        }
        Ok(Self { t_min, step, count, max_level: None })
    }

    /// Grid with step `1/(2N·K·(2N)^J)` covering `[lo, hi]`, with `t_min` a
    /// multiple of the step. Every `λ ∈ Ω` and every nonnegative dilation up to
    /// level `J` then maps grid points to grid points.
    pub fn numra(n: u32, max_level: u32, refine: usize, lo: T, hi: T) -> Result<Self> {
        if n == 0 || refine == 0 || !(hi > lo) {
            return Err(Error::InvalidParameter(format!(
                "numra grid needs N >= 1, K >= 1 and lo < hi (N = {n}, K = {refine})"
            )));
        }
        let d = 2 * n as usize;
        let denom = (d * refine) as f64 * (d as f64).powi(max_level as i32);
        let step = T::lit(1.0 / denom);
        let i_lo = (lo / step).floor();
        let i_hi = (hi / step).ceil();
        let count = (i_hi - i_lo).to_usize().unwrap_or(0) + 1;
        let mut g = Self::new(i_lo * step, step, count)?;
        g.max_level = Some(max_level);
        Ok(g)
    }

    pub fn with_max_level(mut self, level: u32) -> Self {
        self.max_level = Some(level);
        self
    }

    #[inline]
    pub fn point(&self, i: usize) -> T {
        self.t_min + T::from_usize_lossy(i) * self.step
    }

    pub fn points(&self) -> Vec<T> {
        (0..self.count).map(|i| self.point(i)).collect()
    }

    /// Last grid point.
    pub fn t_max(&self) -> T {
        self.point(self.count - 1)
    }

    /// Fractional index of `t`.
    #[inline]
    pub fn position(&self, t: T) -> T {
        (t - self.t_min) / self.step
    }

    /// Index of `t` when it is a grid point.
    pub fn index_of(&self, t: T) -> Option<usize> {
        let p = self.position(t);
        let r = p.round();
        if (p - r).abs() <= T::lit(SNAP) && r >= T::zero() {
            r.to_usize().filter(|&i| i < self.count)
        } else {
            None
        }
    }

    /// Index of the cell containing `t`, snapping points within tolerance of
    /// a grid point onto it.
    #[inline]
    pub fn cell_of(&self, t: T) -> Option<usize> {
        let p = self.position(t);
        let r = p.round();
        let i = if (p - r).abs() <= T::lit(SNAP) { r } else { p.floor() };
        if i < T::zero() {
            return None;
        }
        i.to_usize().filter(|&i| i < self.count)
    }

    /// Same points up to rounding.
    pub fn same_as(&self, other: &Self) -> bool {
        self.count == other.count
            && (self.step - other.step).abs() <= T::lit(1e-12) * self.step
            && (self.t_min - other.t_min).abs() <= T::lit(SNAP) * self.step
    }

    /// Total length `count·step`.
    pub fn span(&self) -> T {
        T::from_usize_lossy(self.count) * self.step
    }
}

/// Integer shift in grid steps for an on-grid translation.
pub fn shift_steps<T: Scalar>(grid: &Grid<T>, lambda: T) -> Result<i64> {
    let k = lambda / grid.step;
    let r = k.round();
    if (k - r).abs() > T::lit(SNAP) * T::one().max(r.abs()) {
        return Err(Error::OffGrid { lambda: lambda.as_f64(), step: grid.step.as_f64() });
    }
    Ok(r.to_i64().expect("finite shift"))
}

/// A complex function sampled on a uniform grid, zero outside its window.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal<T> {
    grid: Grid<T>,
    values: Vec<Complex<T>>,
}

impl<T: Scalar> SampledSignal<T> {
    pub fn new(grid: Grid<T>, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != grid.count {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.count
            )));
        }
        if let Some(i) = values.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        Self { grid, values: vec![Complex::default(); grid.count] }
    }

    pub fn from_fn(grid: Grid<T>, f: impl Fn(T) -> Complex<T>) -> Result<Self> {
        let values = (0..grid.count).map(|i| f(grid.point(i))).collect();
        Self::new(grid, values)
    }

    pub fn from_real_fn(grid: Grid<T>, f: impl Fn(T) -> T) -> Result<Self> {
        Self::from_fn(grid, |t| Complex::new(f(t), T::zero()))
    }

    /// Indicator of `[lo, hi)`, sampled with the right-limit convention.
    pub fn indicator(grid: Grid<T>, intervals: &[(T, T)]) -> Self {
        let eps = T::lit(SNAP) * grid.step;
        let values = (0..grid.count)
            .map(|i| {
                let t = grid.point(i);
                let inside = intervals.iter().any(|&(lo, hi)| t >= lo - eps && t < hi - eps);
                if inside {
                    Complex::new(T::one(), T::zero())
                } else {
                    Complex::default()
                }
            })
            .collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    /// Sample-and-hold value at an arbitrary `t` (zero outside the window).
    pub fn value_at(&self, t: T) -> Complex<T> {
        self.grid.cell_of(t).map_or_else(Complex::default, |i| self.values[i])
    }

    pub fn norm_sqr(&self) -> T {
        weighted_sum(&self.values, &self.values, self.grid.step).re
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().max(T::zero()).sqrt()
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| v * c).collect() }
    }

    pub fn map(&self, f: impl Fn(T, Complex<T>) -> Complex<T>) -> Result<Self> {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| f(self.grid.point(i), v))
            .collect();
        Self::new(self.grid, values)
    }

    /// `self + c·other` on the common grid.
    pub fn axpy(&self, c: Complex<T>, other: &Self) -> Result<Self> {
        let (g, a, b) = align(self, other)?;
        let values = a.iter().zip(&b).map(|(&x, &y)| x + c * y).collect();
        Ok(Self { grid: g, values })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(Complex::new(-T::one(), T::zero()), other)
    }

    /// Resamples onto `grid`, which must refine this grid's step and be
    /// index-aligned with it.
    pub fn resample_onto(&self, grid: &Grid<T>) -> Result<Self> {
        if self.grid.same_as(grid) {
            return Ok(Self { grid: *grid, values: self.values.clone() });
        }
        let q = refinement_ratio(&self.grid, grid)?;
        let off = shift_steps(grid, self.grid.t_min - grid.t_min)?;
        let values = (0..grid.count as i64)
            .map(|i| {
                let rel = i - off;
                if rel < 0 {
                    return Complex::default();
                }
                let src = (rel / q as i64) as usize;
                self.values.get(src).copied().unwrap_or_default()
            })
            .collect();
        Ok(Self { grid: *grid, values })
    }
}

fn refinement_ratio<T: Scalar>(coarse: &Grid<T>, fine: &Grid<T>) -> Result<usize> {
    let ratio = coarse.step / fine.step;
    let q = ratio.round();
    if q < T::one() || (ratio - q).abs() > T::lit(1e-9) * q {
        return Err(Error::GridMismatch(format!(
            "step {} is not an integer multiple of step {}",
            coarse.step, fine.step
        )));
    }
    Ok(q.to_usize().expect("positive ratio"))
}

/// Brings two signals onto a common grid: the finer step over the union of
/// both windows. Requires one step to be an integer multiple of the other and
/// the windows to be index-aligned on the finer grid.
fn align<T: Scalar>(
    f: &SampledSignal<T>,
    g: &SampledSignal<T>,
) -> Result<(Grid<T>, Vec<Complex<T>>, Vec<Complex<T>>)> {
    if f.grid.same_as(&g.grid) {
        return Ok((f.grid, f.values.clone(), g.values.clone()));
    }
    let (fine, coarse) = if f.grid.step <= g.grid.step { (f, g) } else { (g, f) };
    refinement_ratio(&coarse.grid, &fine.grid)?;
    let h = fine.grid.step;
    shift_steps(&fine.grid, coarse.grid.t_min - fine.grid.t_min)?;
    let lo = fine.grid.t_min.min(coarse.grid.t_min);
    let hi = (fine.grid.t_min + fine.grid.span()).max(coarse.grid.t_min + coarse.grid.span());
    let count = ((hi - lo) / h).round().to_usize().unwrap_or(0).max(1);
    let mut common = Grid::new(lo, h, count)?;
    common.max_level = fine.grid.max_level;
    let a = f.resample_onto(&common)?.values;
    let b = g.resample_onto(&common)?.values;
    Ok((common, a, b))
}

/// Trapezoid-weighted `h·Σ w_i f_i conj(g_i)` with half weights at the ends.
/// Summation is sequential so parallel callers reproduce serial results.
fn weighted_sum<T: Scalar>(f: &[Complex<T>], g: &[Complex<T>], h: T) -> Complex<T> {
    let n = f.len();
    if n == 0 {
        return Complex::default();
    }
    let mut acc = Complex::default();
    for (a, b) in f.iter().zip(g) {
        acc = acc + a * b.conj();
    }
    if n > 1 {
        let half = T::lit(0.5);
        acc = acc - (f[0] * g[0].conj() + f[n - 1] * g[n - 1].conj()).scale(half);
    }
    acc.scale(h)
}

/// Trapezoidal quadrature of `∫ f·conj(g)`.
pub fn inner_product<T: Scalar>(f: &SampledSignal<T>, g: &SampledSignal<T>) -> Result<Complex<T>> {
    if f.grid.same_as(&g.grid) {
        return Ok(weighted_sum(&f.values, &g.values, f.grid.step));
    }
    let (grid, a, b) = align(f, g)?;
    Ok(weighted_sum(&a, &b, grid.step))
}

/// `‖f − g‖₂`.
pub fn l2_distance<T: Scalar>(f: &SampledSignal<T>, g: &SampledSignal<T>) -> Result<T> {
    Ok(f.sub(g)?.norm())
}

/// `min_{|c|=1} ‖f − c·g‖₂`, the distance up to a global phase.
pub fn phase_aligned_distance<T: Scalar>(f: &SampledSignal<T>, g: &SampledSignal<T>) -> Result<T> {
    let ip = inner_product(f, g)?.norm();
    let d2 = f.norm_sqr() + g.norm_sqr() - T::lit(2.0) * ip;
    Ok(d2.max(T::zero()).sqrt())
}

/// `e^{−iπ(a/b)(t² − λ²)}`.
#[inline]
fn chirp<T: Scalar>(rate: T, t: T, lambda: T) -> Complex<T> {
    if rate == T::zero() {
        return Complex::new(T::one(), T::zero());
    }
    cis_turns(-rate * (t - lambda) * (t + lambda) / T::lit(2.0))
}

/// `t ↦ φ(t − λ)·e^{−iπ(a/b)(t² − λ²)}` on the same grid.
pub fn translate_chirp<T: Scalar>(
    phi: &SampledSignal<T>,
    lambda: T,
    m: &CanonicalMatrix<T>,
) -> Result<SampledSignal<T>> {
    m.require_b()?;
    let k = shift_steps(&phi.grid, lambda)?;
    let rate = m.chirp_rate();
    let g = phi.grid;
    let values = (0..g.count as i64)
        .map(|i| {
            let src = i - k;
            if src < 0 || src >= g.count as i64 {
                return Complex::default();
            }
            phi.values[src as usize] * chirp(rate, g.point(i as usize), lambda)
        })
        .collect();
    Ok(SampledSignal { grid: g, values })
}

/// `t ↦ (2N)^{j/2}·φ((2N)^j t − λ)·e^{−iπ(a/b)(t² − λ²)}` on the same grid.
///
/// For `j ≥ 0` on a NUMRA-compatible grid the argument is always a grid point;
/// for `j < 0` the value is read from the cell containing the argument.
pub fn dilate_chirp<T: Scalar>(
    phi: &SampledSignal<T>,
    j: i32,
    n: u32,
    lambda: T,
    m: &CanonicalMatrix<T>,
) -> Result<SampledSignal<T>> {
    if j == 0 {
        m.require_b()?;
        return translate_chirp(phi, lambda, m);
    }
    Ok(dilate_chirp_on(phi, &phi.grid, j, n, lambda, m)?.to_signal())
}

/// A signal stored only on the index range where it can be nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseElement<T> {
    grid: Grid<T>,
    start: usize,
    values: Vec<Complex<T>>,
}

impl<T: Scalar> SparseElement<T> {
    pub fn from_signal(f: &SampledSignal<T>) -> Self {
        match f.support() {
            Some((lo, hi)) => Self { grid: f.grid, start: lo, values: f.values[lo..=hi].to_vec() },
            None => Self { grid: f.grid, start: 0, values: Vec::new() },
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    /// Index range `start .. start + len` covered on the grid.
    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.values.len()
    }

    pub fn to_signal(&self) -> SampledSignal<T> {
        let mut values = vec![Complex::default(); self.grid.count];
        values[self.range()].copy_from_slice(&self.values);
        SampledSignal { grid: self.grid, values }
    }

    fn weight(&self, i: usize) -> T {
        let n = self.grid.count;
        if n > 1 && (i == 0 || i == n - 1) {
            T::lit(0.5)
        } else {
            T::one()
        }
    }

    /// Trapezoidal `⟨f, self⟩` for a dense `f` on the same grid.
    pub fn inner_from(&self, f: &SampledSignal<T>) -> Result<Complex<T>> {
        if !f.grid.same_as(&self.grid) {
            return Err(Error::GridMismatch("element and signal on different grids".into()));
        }
        let mut acc = Complex::default();
        for (k, v) in self.values.iter().enumerate() {
            let i = self.start + k;
            acc = acc + (f.values[i] * v.conj()).scale(self.weight(i));
        }
        Ok(acc.scale(self.grid.step))
    }

    /// Trapezoidal `⟨self, other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        if !other.grid.same_as(&self.grid) {
            return Err(Error::GridMismatch("elements on different grids".into()));
        }
        let (a, b) = (self.range(), other.range());
        let lo = a.start.max(b.start);
        let hi = a.end.min(b.end);
        let mut acc = Complex::default();
        for i in lo..hi {
            let x = self.values[i - a.start] * other.values[i - b.start].conj();
            acc = acc + x.scale(self.weight(i));
        }
        Ok(acc.scale(self.grid.step))
    }

    /// `out += c·self` on the element's range.
    pub fn add_scaled_into(&self, c: Complex<T>, out: &mut [Complex<T>]) {
        for (k, v) in self.values.iter().enumerate() {
            out[self.start + k] = out[self.start + k] + c * v;
        }
    }
}

impl<T: Scalar> SampledSignal<T> {
    /// First and last indices with a nonzero sample.
    pub fn support(&self) -> Option<(usize, usize)> {
        let lo = self.values.iter().position(|v| *v != Complex::default())?;
        let hi = self.values.iter().rposition(|v| *v != Complex::default())?;
        Some((lo, hi))
    }
}

/// `(2N)^{j/2} φ((2N)^j t − λ) e^{−iπ(a/b)(t² − λ²)}` sampled on `grid`
/// (which need not be `φ`'s grid), kept on its support only. `φ` is read
/// through its cells.
pub fn dilate_chirp_on<T: Scalar>(
    phi: &SampledSignal<T>,
    grid: &Grid<T>,
    j: i32,
    n: u32,
    lambda: T,
    m: &CanonicalMatrix<T>,
) -> Result<SparseElement<T>> {
    m.require_b()?;
    if n == 0 {
        return Err(Error::InvalidParameter("N must be positive".into()));
    }
    if let Some(max) = grid.max_level {
        if j.unsigned_abs() > max {
            return Err(Error::LevelOverflow { level: j, max });
        }
    }
    shift_steps(grid, lambda)?;
    let Some((lo, hi)) = phi.support() else {
        return Ok(SparseElement { grid: *grid, start: 0, values: Vec::new() });
    };
    let scale = T::from_usize_lossy(2 * n as usize).powi(j);
    let amp = scale.sqrt();
    let rate = m.chirp_rate();
    // preimage of φ's support cells [t_lo, t_hi + h) under t ↦ scale·t − λ
    let x_lo = phi.grid.point(lo);
    let x_hi = phi.grid.point(hi) + phi.grid.step;
    let p_lo = grid.position((x_lo + lambda) / scale).floor() - T::one();
    let p_hi = grid.position((x_hi + lambda) / scale).ceil() + T::one();
    let last = T::from_usize_lossy(grid.count - 1);
    let i_lo = p_lo.max(T::zero()).min(last).to_usize().unwrap_or(0);
    let i_hi = p_hi.max(T::zero()).min(last).to_usize().unwrap_or(0);
    if p_hi < T::zero() || p_lo > last {
        return Ok(SparseElement { grid: *grid, start: 0, values: Vec::new() });
    }
    let values = (i_lo..=i_hi)
        .map(|i| {
            let t = grid.point(i);
            let v = phi.value_at(scale * t - lambda);
            if v == Complex::default() {
                v
            } else {
                v * chirp(rate, t, lambda).scale(amp)
            }
        })
        .collect();
    Ok(SparseElement { grid: *grid, start: i_lo, values })
}
