//! Time-domain samples from a Fourier transform.
//!
//! Returns cell averages `c_j = (1/h)∫_{t_j}^{t_j+h} f`, consistent with the
//! sample-and-hold reading of [`SampledSignal`]. With `L = n·h`,
//!
//! `c_j = Σ_k C_k e^{2πikj/n}`, `C_k = (1/L) Σ_{|m|≤M} f̂(ν) B(ν) e^{2πiν t_min}`,
//! `ν = (k + mn)/L`, `B(ν) = (e^{2πiνh} − 1)/(2πiνh)`,
//!
//! which is exact for the periodization of `f` with period `L` apart from the
//! alias truncation `M`. The function must be supported inside the window.

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::sampling::{Grid, SampledSignal};
use crate::scalar::{cis_turns, Scalar};

/// Default alias truncation `M`.
pub const DEFAULT_ALIAS_TERMS: usize = 16;

/// Box transfer `B(ν)` of cell averaging over a width-`h` cell.
fn cell_transfer<T: Scalar>(nu: T, h: T) -> Complex<T> {
    let x = nu * h;
    if x == T::zero() {
        return Complex::new(T::one(), T::zero());
    }
    let num = cis_turns(x) - Complex::new(T::one(), T::zero());
    num / Complex::new(T::zero(), T::TAU() * x)
}

/// Band frequencies `k/L`, `k = −⌊n/2⌋ .. ⌈n/2⌉ − 1`, in DFT order paired with
/// their bin index.
pub fn band_frequencies<T: Scalar>(grid: &Grid<T>) -> Vec<(usize, T)> {
    let n = grid.count;
    let len = grid.span();
    (0..n)
        .map(|k0| {
            let k = if k0 < n.div_ceil(2) { k0 as i64 } else { k0 as i64 - n as i64 };
            (k0, T::from_i64_lossy(k) / len)
        })
        .collect()
}

/// Cell-average samples of the function with transform `hat` (2π convention).
pub fn synthesize<T, F>(hat: F, grid: &Grid<T>, alias_terms: usize) -> Result<SampledSignal<T>>
where
    T: Scalar,
    F: Fn(T) -> Complex<T> + Sync,
{
    let n = grid.count;
    if n < 2 {
        return Err(Error::InvalidParameter("synthesis grid needs at least two points".into()));
    }
    let h = grid.step;
    let len = grid.span();
    let inv_len = T::one() / len;
    let m = alias_terms as i64;
    let mut spec: Vec<Complex<T>> = band_frequencies(grid)
        .into_par_iter()
        .map(|(_, nu0)| {
            let mut acc = Complex::default();
            for a in -m..=m {
                let nu = nu0 + T::from_i64_lossy(a) / h;
                acc = acc + hat(nu) * cell_transfer(nu, h) * cis_turns(nu * grid.t_min);
            }
            acc.scale(inv_len)
        })
        .collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut spec);
    SampledSignal::new(*grid, spec)
}
