//! The chirped Haar family built on `A_N = ∪_{j<N} [2j/N, (2j+1)/N)`.

use num_complex::Complex;

use crate::canonical::CanonicalMatrix;
use crate::error::Result;
use crate::filters::{complete_filters, PeriodicFilterPair, TranslationSet};
use crate::sampling::{Grid, SampledSignal};
use crate::scalar::{cis_turns, Scalar};

/// The intervals making up `A_N`.
pub fn haar_intervals<T: Scalar>(ts: &TranslationSet) -> Vec<(T, T)> {
    let n = T::lit(ts.n() as f64);
    (0..ts.n())
        .map(|j| {
            let j = T::lit(j as f64);
            (T::lit(2.0) * j / n, (T::lit(2.0) * j + T::one()) / n)
        })
        .collect()
}

/// `φ = χ_{A_N}`.
pub fn haar_scaling<T: Scalar>(ts: &TranslationSet, grid: &Grid<T>) -> SampledSignal<T> {
    SampledSignal::indicator(*grid, &haar_intervals(ts))
}

/// Low-pass Haar filter with `Λ¹ = Λ² = (1/2N) Σ_{k<N} e^{iπa(4k)²/b} e^{−8πiuk}`.
pub fn haar_filters<T: Scalar>(
    ts: &TranslationSet,
    m: &CanonicalMatrix<T>,
    count: usize,
) -> Result<PeriodicFilterPair<T>> {
    m.require_b()?;
    let n = ts.n() as usize;
    let rate = m.a / m.b;
    let inv = T::one() / T::from_usize_lossy(2 * n);
    let chirps: Vec<Complex<T>> = (0..n)
        .map(|k| {
            let q = T::from_usize_lossy(4 * k);
            cis_turns(rate * q * q / T::lit(2.0))
        })
        .collect();
    PeriodicFilterPair::from_fn(*ts, count, |u| {
        let v = chirps
            .iter()
            .enumerate()
            .fold(Complex::default(), |acc, (k, c)| {
                acc + c * cis_turns(-T::lit(4.0) * u * T::from_usize_lossy(k))
            })
            .scale(inv);
        (v, v)
    })
}

/// The full Haar bank `Λ₀, …, Λ_{2N−1}`. `N = 1, 2` use closed-form
/// high-pass filters; larger `N` are completed pointwise.
pub fn haar_bank<T: Scalar>(
    ts: &TranslationSet,
    m: &CanonicalMatrix<T>,
    count: usize,
) -> Result<Vec<PeriodicFilterPair<T>>> {
    let p0 = haar_filters(ts, m, count)?;
    let half = T::lit(0.5);
    let quarter = T::lit(0.25);
    let one = Complex::new(T::one(), T::zero());
    match ts.n() {
        1 => {
            let hi = PeriodicFilterPair::from_fn(*ts, count, |_| {
                (Complex::new(-half, T::zero()), Complex::new(half, T::zero()))
            })?;
            Ok(vec![p0, hi])
        }
        2 => {
            // c = e^{16πia/b}, z = e^{−8πiu}
            let c = cis_turns(T::lit(8.0) * m.a / m.b);
            let cz = move |u: T| c * cis_turns(-T::lit(4.0) * u);
            let l1 = PeriodicFilterPair::from_fn(*ts, count, |u| {
                let v = (one - cz(u)).scale(quarter);
                (v, v)
            })?;
            let l2 = PeriodicFilterPair::from_fn(*ts, count, |u| {
                let v = (one + cz(u).conj()).scale(quarter);
                (-v, v)
            })?;
            let l3 = PeriodicFilterPair::from_fn(*ts, count, |u| {
                let v = (one - cz(u).conj()).scale(quarter);
                (v, -v)
            })?;
            Ok(vec![p0, l1, l2, l3])
        }
        _ => {
            let mut bank = vec![p0];
            let hi = complete_filters(&bank[0])?;
            bank.extend(hi);
            Ok(bank)
        }
    }
}

fn signed_indicator<T: Scalar>(grid: &Grid<T>, pieces: &[(f64, f64, f64)]) -> SampledSignal<T> {
    let mut out = SampledSignal::zeros(*grid);
    for &(lo, hi, s) in pieces {
        let ind = SampledSignal::indicator(*grid, &[(T::lit(lo), T::lit(hi))]);
        out = out
            .axpy(Complex::new(T::lit(s), T::zero()), &ind)
            .expect("same grid");
    }
    out
}

/// The three printed time-domain wavelets of the `N = 2` example, sampled
/// with right limits at the jumps.
pub fn printed_n2_wavelets<T: Scalar>(grid: &Grid<T>) -> [SampledSignal<T>; 3] {
    let left = [
        (-1.0, -0.875, -1.0),
        (-0.875, -0.75, 1.0),
        (-0.75, -0.625, -1.0),
        (-0.625, -0.5, 1.0),
    ];
    let right = [(0.0, 0.125, 1.0), (0.125, 0.25, -1.0), (0.25, 0.375, 1.0), (0.375, 0.5, -1.0)];
    let neg_right: Vec<_> = right.iter().map(|&(a, b, s)| (a, b, -s)).collect();
    let psi1 = signed_indicator(grid, &[(0.0, 0.5, 1.0), (1.0, 1.5, -1.0)]);
    let psi2 = signed_indicator(grid, &[&left[..], &neg_right[..]].concat());
    let psi3 = signed_indicator(grid, &[&left[..], &right[..]].concat());
    [psi1, psi2, psi3]
}

/// The printed chirped `N = 1` wavelet for `M = (2, 1, 1, 1)`:
/// `e^{−8iπt²}` on `[0, ½)` and `−e^{−2iπ(2t−1)²}` on `[½, 1)`.
pub fn printed_n1_chirped_wavelet<T: Scalar>(grid: &Grid<T>) -> SampledSignal<T> {
    let half = T::lit(0.5);
    let values = (0..grid.count)
        .map(|i| {
            let t = grid.point(i);
            // nudge right so rounding never moves a breakpoint to the left cell
            let x = t + grid.step * T::lit(1e-9);
            if x >= T::zero() && x < half {
                cis_turns(-T::lit(4.0) * t * t)
            } else if x >= half && x < T::one() {
                let s = T::lit(2.0) * t - T::one();
                -cis_turns(-s * s)
            } else {
                Complex::default()
            }
        })
        .collect();
    SampledSignal::new(*grid, values).expect("finite")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::{check_bank, check_m0_period, check_scaling_conditions};
    use std::f64::consts::PI;

    fn m2111() -> CanonicalMatrix<f64> {
        CanonicalMatrix::new(2.0, 1.0, 1.0, 1.0)
    }

    #[test]
    fn n1_is_constant_half() {
        let ts = TranslationSet::new(1, 1).unwrap();
        let p = haar_filters(&ts, &m2111(), 4096).unwrap();
        assert!(p.lambda1().iter().chain(p.lambda2()).all(|v| (v - Complex::new(0.5, 0.0)).norm() < 1e-15));
        assert!((p.eval(0.25) - Complex::new(0.5, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn n2_matches_cosine_form() {
        let ts = TranslationSet::new(2, 1).unwrap();
        for m in [CanonicalMatrix::fourier(), m2111(), CanonicalMatrix::new(0.3, 1.7, 0.0, 1.0 / 0.3)] {
            let p = haar_filters(&ts, &m, 4096).unwrap();
            let r = m.a / m.b;
            let integral = (16.0 * r).fract() == 0.0;
            for j in (0..4096).step_by(97) {
                let u = j as f64 / 8192.0;
                let th = 8.0 * PI * r - 4.0 * PI * u;
                let expect = Complex::from_polar(0.5 * th.cos(), th);
                assert!((p.lambda1()[j] - expect).norm() < 1e-13);
                assert!((p.m0(u) - 0.5 * th.cos().powi(2)).abs() < 1e-13);
                // the printed form carries the conjugate chirp; both agree when 16a/b ∈ ℤ
                let printed = Complex::from_polar(0.5 * (8.0 * PI * r + 4.0 * PI * u).cos(), -4.0 * PI * (2.0 * r + u));
                assert_eq!((p.lambda1()[j] - printed).norm() < 1e-13, integral);
            }
            assert!(check_m0_period(&p).unwrap() < 1e-12);
        }
    }

    #[test]
    fn banks_certify() {
        for n in 1..=3 {
            for r in TranslationSet::valid_r(n) {
                let ts = TranslationSet::new(n, r).unwrap();
                for m in [CanonicalMatrix::fourier(), m2111()] {
                    let bank = haar_bank(&ts, &m, crate::filters::default_resolution(n)).unwrap();
                    assert_eq!(bank.len(), 2 * n as usize);
                    let (s, t) = check_scaling_conditions(&bank[0]).unwrap();
                    assert!(s < 1e-12 && t < 1e-12);
                    let rep = check_bank(&bank).unwrap();
                    assert!(rep.max_pair() < 1e-10, "N={n} r={r}: {}", rep.max_pair());
                }
            }
        }
    }

    #[test]
    fn printed_wavelets_have_unit_norm() {
        let g = Grid::<f64>::new(-2.0, 1.0 / 256.0, 1025).unwrap();
        for w in printed_n2_wavelets(&g) {
            assert!((w.norm() - 1.0).abs() < 1e-12);
        }
        assert!((printed_n1_chirped_wavelet(&g).norm() - 1.0).abs() < 1e-12);
    }
}
