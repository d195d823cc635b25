//! Orthogonal projections `P_j f = Σ_λ ⟨f, φ_{j,λ}⟩ φ_{j,λ}`.

use num_complex::Complex;
use rayon::prelude::*;

use crate::canonical::CanonicalMatrix;
use crate::error::{Error, Result};
use crate::filters::{Interval, TranslationSet};
use crate::sampling::SampledSignal;
use crate::scalar::Scalar;

use super::chirped_system;

#[derive(Debug, Clone)]
pub struct Projection<T> {
    pub level: i32,
    pub lambdas: Vec<T>,
    pub coefficients: Vec<Complex<T>>,
    /// `P_j f` restricted to the grid of `f`.
    pub signal: SampledSignal<T>,
    /// Set when the translation window misses part of the needed range.
    pub warning: Option<String>,
}

impl<T: Scalar> Projection<T> {
    /// `Σ |c_λ|²`, which equals `‖P_j f‖²` for an orthonormal system.
    pub fn energy(&self) -> T {
        self.coefficients.iter().map(|c| c.norm_sqr()).fold(T::zero(), |a, b| a + b)
    }
}

/// Closed range of `λ` for which `φ((2N)^j t − λ)` meets the support of `f`.
pub fn required_window<T: Scalar>(
    f: &SampledSignal<T>,
    phi: &SampledSignal<T>,
    n: u32,
    j: i32,
) -> Option<Interval> {
    let (f_lo, f_hi) = f.support()?;
    let (p_lo, p_hi) = phi.support()?;
    let fg = f.grid();
    let pg = phi.grid();
    let scale = (2.0 * n as f64).powi(j);
    let t0 = fg.point(f_lo).as_f64();
    let t1 = (fg.point(f_hi) + fg.step).as_f64();
    let s0 = pg.point(p_lo).as_f64();
    let s1 = (pg.point(p_hi) + pg.step).as_f64();
    Some(Interval::closed(scale * t0 - s1, scale * t1 - s0))
}

pub fn project<T: Scalar>(
    f: &SampledSignal<T>,
    phi: &SampledSignal<T>,
    ts: &TranslationSet,
    m: &CanonicalMatrix<T>,
    j: i32,
    window: Interval,
) -> Result<Projection<T>> {
    if !(window.hi >= window.lo) {
        return Err(Error::InvalidParameter(format!("empty window [{}, {}]", window.lo, window.hi)));
    }
    let warning = required_window(f, phi, ts.n(), j).and_then(|need| {
        (need.lo < window.lo || need.hi > window.hi).then(|| {
            format!(
                "translation window [{}, {}] does not cover [{:.6}, {:.6}] needed at level {j}",
                window.lo, window.hi, need.lo, need.hi
            )
        })
    });
    let system = chirped_system(phi, ts, m, j, window, f.grid())?;
    let coefficients = system
        .par_iter()
        .map(|(_, e)| e.inner_from(f))
        .collect::<Result<Vec<_>>>()?;
    let mut out = vec![Complex::default(); f.grid().count];
    for ((_, e), c) in system.iter().zip(&coefficients) {
        e.add_scaled_into(*c, &mut out);
    }
    Ok(Projection {
        level: j,
        lambdas: system.iter().map(|x| x.0).collect(),
        coefficients,
        signal: SampledSignal::new(*f.grid(), out)?,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{dilate_chirp, l2_distance, Grid};
    use crate::wavelets::haar_scaling;

    fn setup() -> (TranslationSet, Grid<f64>, SampledSignal<f64>) {
        let ts = TranslationSet::new(1, 1).unwrap();
        let g = Grid::new(-8.0, 1.0 / 1024.0, 16 * 1024 + 1).unwrap();
        let phi = haar_scaling(&ts, &g);
        (ts, g, phi)
    }

    #[test]
    fn basis_element_is_fixed() {
        let (ts, _, phi) = setup();
        let m = CanonicalMatrix::new(2.0, 1.0, 1.0, 1.0);
        let f = dilate_chirp(&phi, 0, 1, 3.0, &m).unwrap();
        let p = project(&f, &phi, &ts, &m, 0, Interval::closed(-8.0, 8.0)).unwrap();
        assert!(p.warning.is_none());
        assert!(l2_distance(&p.signal, &f).unwrap() < 1e-6);
    }

    #[test]
    fn narrow_window_warns() {
        let (ts, _, phi) = setup();
        let m = CanonicalMatrix::fourier();
        let f = SampledSignal::from_real_fn(*phi.grid(), |t| (-std::f64::consts::PI * t * t).exp()).unwrap();
        let p = project(&f, &phi, &ts, &m, 0, Interval::closed(-1.0, 1.0)).unwrap();
        assert!(p.warning.is_some());
        assert!(p.signal.norm() <= f.norm() + 1e-6);
    }

    #[test]
    fn gaussian_coarse_levels_follow_closed_form() {
        // ‖P_j f‖/‖f‖ = 2^{j/2 − 1/4} for j ≤ 0 while one box covers the Gaussian mass
        let (ts, _, phi) = setup();
        let m = CanonicalMatrix::fourier();
        let f = SampledSignal::from_real_fn(*phi.grid(), |t| (-std::f64::consts::PI * t * t).exp()).unwrap();
        for j in [-6, -8, -9] {
            let p = project(&f, &phi, &ts, &m, j, Interval::closed(-2.0, 2.0)).unwrap();
            let ratio = p.energy().sqrt() / f.norm();
            let expect = 2f64.powf(j as f64 / 2.0 - 0.25);
            assert!((ratio - expect).abs() < 1e-3 * expect, "j = {j}: {ratio} vs {expect}");
        }
    }
}
