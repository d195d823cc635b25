//! Forward and inverse linear canonical transform of sampled signals.
//!
//! Two paths share one quadrature rule (trapezoid, half weights at the
//! window ends):
//!
//! * [`lct_direct`] sums the kernel against the samples for every output
//!   frequency, `O(n_t·n_ω)`;
//! * [`lct_fast`] factors the kernel as chirp · DFT · chirp and runs in
//!   `O(n log n)` on the induced frequency grid
//!   `ω_k = 2π|b|·k/(n·step)`, `k = −n/2 .. n/2 − 1`.
//!
//! On that grid the two agree to rounding. The normalized frequency of the
//! filter layer is `u = ω/(2πb)`: [`hat_from_spectrum`] turns an LCT spectrum
//! into the 2π-convention Fourier transform `∫ g(t) e^{−2πitu} dt` of the
//! chirped signal `g(t) = f(t)·e^{iat²/(2b)}`.

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::canonical::CanonicalMatrix;
use crate::error::{Error, Result};
use crate::sampling::{Grid, SampledSignal};
use crate::scalar::{cis, cis_turns, Scalar};

/// LCT samples on a uniform frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LctSpectrum<T> {
    pub omega: Grid<T>,
    pub values: Vec<Complex<T>>,
}

impl<T: Scalar> LctSpectrum<T> {
    pub fn new(omega: Grid<T>, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != omega.count {
            return Err(Error::GridMismatch(format!(
                "{} values for a frequency grid of {} points",
                values.len(),
                omega.count
            )));
        }
        if let Some(i) = values.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { omega, values })
    }

    /// Trapezoidal `∫ F·conj(G) dω`.
    pub fn inner_product(&self, other: &Self) -> Result<Complex<T>> {
        if !self.omega.same_as(&other.omega) {
            return Err(Error::GridMismatch("spectra on different frequency grids".into()));
        }
        let a = SampledSignal::new(self.omega, self.values.clone())?;
        let b = SampledSignal::new(other.omega, other.values.clone())?;
        crate::sampling::inner_product(&a, &b)
    }

    pub fn norm(&self) -> T {
        self.inner_product(self).map(|z| z.re.max(T::zero()).sqrt()).unwrap_or_else(|_| T::nan())
    }
}

/// Selects the inverse transform path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    Direct,
    #[default]
    Fast,
}

fn trapezoid_weight<T: Scalar>(i: usize, n: usize) -> T {
    if n > 1 && (i == 0 || i == n - 1) {
        T::lit(0.5)
    } else {
        T::one()
    }
}

/// Frequency grid produced by [`lct_fast`] for a time grid and matrix.
pub fn induced_omega_grid<T: Scalar>(t_grid: &Grid<T>, m: &CanonicalMatrix<T>) -> Result<Grid<T>> {
    m.require_b()?;
    let n = t_grid.count;
    let d_omega = T::TAU() * m.b.abs() / t_grid.span();
    Grid::new(-T::from_usize_lossy(n / 2) * d_omega, d_omega, n)
}

/// Time grid dual to a frequency grid, i.e. the grid whose induced frequency
/// grid is `omega`, placed at `t_min`.
pub fn dual_time_grid<T: Scalar>(omega: &Grid<T>, m: &CanonicalMatrix<T>, t_min: T) -> Result<Grid<T>> {
    m.require_b()?;
    let n = omega.count;
    let step = T::TAU() * m.b.abs() / (T::from_usize_lossy(n) * omega.step);
    Grid::new(t_min, step, n)
}

/// Quadrature of `∫ f(t) K_M(t, ω) dt` for every `ω` in `omega`.
pub fn lct_direct<T: Scalar>(
    f: &SampledSignal<T>,
    m: &CanonicalMatrix<T>,
    omega: &Grid<T>,
) -> Result<LctSpectrum<T>> {
    m.require_b()?;
    let g = f.grid();
    let n = g.count;
    let h = g.step;
    let two = T::lit(2.0);
    // chirped, weighted samples; the ω-independent part of the kernel
    let pre: Vec<(T, Complex<T>)> = f
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != Complex::default())
        .map(|(i, &v)| {
            let t = g.point(i);
            (t, v * cis(m.a * t * t / (two * m.b)).scale(trapezoid_weight::<T>(i, n)))
        })
        .collect();
    let scale = m.prefactor().scale(h);
    let values = (0..omega.count)
        .into_par_iter()
        .map(|k| {
            let w = omega.point(k);
            let mut acc: Complex<T> = Complex::default();
            for &(t, v) in &pre {
                acc = acc + v * cis(-t * w / m.b);
            }
            acc * scale * cis(m.d * w * w / (two * m.b))
        })
        .collect();
    LctSpectrum::new(*omega, values)
}

/// Chirp · DFT · chirp evaluation on [`induced_omega_grid`].
pub fn lct_fast<T: Scalar>(f: &SampledSignal<T>, m: &CanonicalMatrix<T>) -> Result<LctSpectrum<T>> {
    m.require_b()?;
    let g = *f.grid();
    let n = g.count;
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let omega = induced_omega_grid(&g, m)?;
    let two = T::lit(2.0);
    let mut buf: Vec<Complex<T>> = f
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let t = g.point(i);
            v * cis(m.a * t * t / (two * m.b)).scale(trapezoid_weight::<T>(i, n))
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let sign: i64 = if m.b > T::zero() { 1 } else { -1 };
    let len = g.span();
    let scale = m.prefactor().scale(g.step);
    let half = (n / 2) as i64;
    let values = (0..n)
        .map(|k| {
            let q = k as i64 - half;
            let idx = (sign * q).rem_euclid(n as i64) as usize;
            let w = omega.point(k);
            let shift = cis_turns(-T::from_i64_lossy(sign * q) * g.t_min / len);
            buf[idx] * shift * scale * cis(m.d * w * w / (two * m.b))
        })
        .collect();
    LctSpectrum::new(omega, values)
}

/// Quadrature of `∫ F(ω) conj(K_M(t, ω)) dω` for every `t` in `t_grid`.
pub fn ilct_direct<T: Scalar>(
    spec: &LctSpectrum<T>,
    m: &CanonicalMatrix<T>,
    t_grid: &Grid<T>,
) -> Result<SampledSignal<T>> {
    m.require_b()?;
    let og = spec.omega;
    let n = og.count;
    let two = T::lit(2.0);
    let pre: Vec<(T, Complex<T>)> = spec
        .values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != Complex::default())
        .map(|(k, &v)| {
            let w = og.point(k);
            (w, v * cis(-m.d * w * w / (two * m.b)).scale(trapezoid_weight::<T>(k, n)))
        })
        .collect();
    let scale = m.prefactor().conj().scale(og.step);
    let values = (0..t_grid.count)
        .into_par_iter()
        .map(|i| {
            let t = t_grid.point(i);
            let mut acc: Complex<T> = Complex::default();
            for &(w, v) in &pre {
                acc = acc + v * cis(t * w / m.b);
            }
            acc * scale * cis(-m.a * t * t / (two * m.b))
        })
        .collect();
    SampledSignal::new(*t_grid, values)
}

/// Inverse of [`lct_fast`]; `t_grid` must be dual to the spectrum's grid
/// (same count, `step = 2π|b|/(n·Δω)`), at any offset.
pub fn ilct_fast<T: Scalar>(
    spec: &LctSpectrum<T>,
    m: &CanonicalMatrix<T>,
    t_grid: &Grid<T>,
) -> Result<SampledSignal<T>> {
    m.require_b()?;
    let og = spec.omega;
    let n = og.count;
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let dual = dual_time_grid(&og, m, t_grid.t_min)?;
    let half = (n / 2) as i64;
    let centered = (og.t_min + T::from_i64_lossy(half) * og.step).abs() <= T::lit(1e-9) * og.step;
    if t_grid.count != n || (dual.step - t_grid.step).abs() > T::lit(1e-9) * t_grid.step || !centered {
        return Err(Error::GridMismatch(
            "time grid is not dual to the spectrum's frequency grid".into(),
        ));
    }
    let two = T::lit(2.0);
    let sign: i64 = if m.b > T::zero() { 1 } else { -1 };
    let len = t_grid.span();
    let mut buf: Vec<Complex<T>> = (0..n)
        .map(|k| {
            let q = k as i64 - half;
            let w = og.point(k);
            spec.values[k]
                * cis(-m.d * w * w / (two * m.b))
                * cis_turns(T::from_i64_lossy(sign * q) * t_grid.t_min / len)
                    .scale(trapezoid_weight::<T>(k, n))
        })
        .collect();
    // Σ_k H_k e^{2πi s i (k − n/2)/n} = (−1)^i · Σ_k H_k e^{2πi s i k/n}
    let mut planner = FftPlanner::new();
    if sign > 0 {
        planner.plan_fft_inverse(n).process(&mut buf);
    } else {
        planner.plan_fft_forward(n).process(&mut buf);
    }
    let scale = m.prefactor().conj().scale(og.step);
    let values = (0..n)
        .map(|i| {
            let t = t_grid.point(i);
            let alt = if i % 2 == 0 { T::one() } else { -T::one() };
            buf[i].scale(alt) * scale * cis(-m.a * t * t / (two * m.b))
        })
        .collect();
    SampledSignal::new(*t_grid, values)
}

/// Inverse transform by the requested method.
pub fn ilct<T: Scalar>(
    spec: &LctSpectrum<T>,
    m: &CanonicalMatrix<T>,
    t_grid: &Grid<T>,
    method: Method,
) -> Result<SampledSignal<T>> {
    match method {
        Method::Direct => ilct_direct(spec, m, t_grid),
        Method::Fast => ilct_fast(spec, m, t_grid),
    }
}

/// `|⟨L_M f, L_M g⟩ − ⟨f, g⟩|` with both transforms from [`lct_fast`].
pub fn parseval_residual<T: Scalar>(
    f: &SampledSignal<T>,
    g: &SampledSignal<T>,
    m: &CanonicalMatrix<T>,
) -> Result<T> {
    if !f.grid().same_as(g.grid()) {
        return Err(Error::GridMismatch("Parseval check needs a common grid".into()));
    }
    let lhs = lct_fast(f, m)?.inner_product(&lct_fast(g, m)?)?;
    let rhs = crate::sampling::inner_product(f, g)?;
    Ok((lhs - rhs).norm())
}

/// Converts an LCT spectrum into samples `(u, ĝ(u))` of the 2π-convention
/// Fourier transform of the chirped signal, with `u = ω/(2πb)`.
pub fn hat_from_spectrum<T: Scalar>(
    spec: &LctSpectrum<T>,
    m: &CanonicalMatrix<T>,
) -> Result<Vec<(T, Complex<T>)>> {
    m.require_b()?;
    let inv_pre = m.prefactor().inv();
    let two = T::lit(2.0);
    Ok((0..spec.omega.count)
        .map(|k| {
            let w = spec.omega.point(k);
            let u = w / (T::TAU() * m.b);
            (u, spec.values[k] * inv_pre * cis(-m.d * w * w / (two * m.b)))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn gaussian(n: usize) -> SampledSignal<f64> {
        let h = 16.0 / n as f64;
        let g = Grid::new(-8.0, h, n).unwrap();
        SampledSignal::from_real_fn(g, |t| (-PI * t * t).exp()).unwrap()
    }

    fn rel_err(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
        (num / den).sqrt()
    }

    #[test]
    fn zero_in_zero_out() {
        let g = Grid::new(-1.0, 0.125, 16).unwrap();
        let z = SampledSignal::<f64>::zeros(g);
        let m = CanonicalMatrix::new(2.0, 1.0, 1.0, 1.0);
        assert!(lct_fast(&z, &m).unwrap().values.iter().all(|v| *v == Complex::default()));
        let og = induced_omega_grid(&g, &m).unwrap();
        assert!(lct_direct(&z, &m, &og).unwrap().values.iter().all(|v| *v == Complex::default()));
    }

    #[test]
    fn fast_rejects_non_power_of_two_and_degenerate_b() {
        let g = Grid::new(-1.0, 0.1, 20).unwrap();
        let z = SampledSignal::<f64>::zeros(g);
        assert!(matches!(lct_fast(&z, &CanonicalMatrix::fourier()), Err(Error::NotPowerOfTwo(20))));
        let g = Grid::new(-1.0, 0.125, 16).unwrap();
        let z = SampledSignal::<f64>::zeros(g);
        assert!(matches!(lct_fast(&z, &CanonicalMatrix::identity()), Err(Error::DegenerateB)));
    }

    #[test]
    fn fast_matches_direct_for_negative_b() {
        let f = gaussian(256);
        let m = CanonicalMatrix::frft(-1.1).unwrap();
        let fast = lct_fast(&f, &m).unwrap();
        let direct = lct_direct(&f, &m, &fast.omega).unwrap();
        assert!(rel_err(&fast.values, &direct.values) < 1e-12);
    }

    #[test]
    fn fourier_case_equals_plain_dft() {
        // grid-exact oracle: the scaled DFT sum written out directly
        let n = 128;
        let f = gaussian(n);
        let g = *f.grid();
        let spec = lct_fast(&f, &CanonicalMatrix::fourier()).unwrap();
        let pre = Complex::new(0.0, 2.0 * PI).sqrt().inv();
        for k in 0..n {
            let w = spec.omega.point(k);
            let mut acc = Complex::new(0.0, 0.0);
            for i in 0..n {
                let wt = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                acc += f.values()[i] * wt * Complex::from_polar(1.0, -g.point(i) * w);
            }
            let expect = acc * g.step * pre;
            assert_abs_diff_eq!((spec.values[k] - expect).norm(), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn fast_round_trip_is_exact_on_dual_grid() {
        let f = gaussian(512);
        let m = CanonicalMatrix::new(2.0, 1.0, 1.0, 1.0);
        let spec = lct_fast(&f, &m).unwrap();
        let back = ilct_fast(&spec, &m, f.grid()).unwrap();
        let e = rel_err(back.values(), f.values());
        assert!(e < 1e-12, "{e:e}");
    }

    #[test]
    fn ilct_rejects_non_dual_grid() {
        let f = gaussian(64);
        let m = CanonicalMatrix::fourier();
        let spec = lct_fast(&f, &m).unwrap();
        let other = Grid::new(-8.0, 0.3, 64).unwrap();
        assert!(ilct_fast(&spec, &m, &other).is_err());
    }

    #[test]
    fn modulus_even_for_even_input_when_a_equals_d() {
        let f = gaussian(256);
        let m = CanonicalMatrix::frft(0.7).unwrap();
        let og = Grid::new(-3.0, 0.25, 25).unwrap();
        let s = lct_direct(&f, &m, &og).unwrap();
        for k in 0..og.count {
            let mirror = og.count - 1 - k;
            assert_abs_diff_eq!(s.values[k].norm(), s.values[mirror].norm(), epsilon = 1e-12);
        }
    }

    #[test]
    fn hat_bridge_recovers_fourier_transform() {
        // Gaussian ĝ(u) = e^{−πu²} under the Fourier matrix
        let f = gaussian(1024);
        let m = CanonicalMatrix::fourier();
        let spec = lct_fast(&f, &m).unwrap();
        for (u, v) in hat_from_spectrum(&spec, &m).unwrap() {
            if u.abs() < 4.0 {
                assert_abs_diff_eq!((v - Complex::new((-PI * u * u).exp(), 0.0)).norm(), 0.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn single_precision_fast_path() {
        let h = 16.0f32 / 256.0;
        let g = Grid::new(-8.0f32, h, 256).unwrap();
        let f = SampledSignal::from_real_fn(g, |t| (-std::f32::consts::PI * t * t).exp()).unwrap();
        let m = CanonicalMatrix::<f32>::fourier();
        let spec = lct_fast(&f, &m).unwrap();
        let back = ilct_fast(&spec, &m, &g).unwrap();
        let err: f32 = back.values().iter().zip(f.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f32::max);
        assert!(err < 1e-5);
    }
}
