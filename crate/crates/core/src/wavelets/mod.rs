//! Scaling functions and wavelets: cascade products, the Haar family,
//! refinement in time, Gram certification and projections onto `V_j`.

mod gram;
mod haar;
mod product;
mod project;
mod synth;

use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;

pub use gram::{cross_gram_max, gram, gram_signals, GramReport};
pub use haar::{
    haar_bank, haar_filters, haar_intervals, haar_scaling, printed_n1_chirped_wavelet,
    printed_n2_wavelets,
};
pub use product::{ProductHat, DEFAULT_DEPTH, MAX_FACTORS};
pub use project::{project, required_window, Projection};
pub use synth::{band_frequencies, synthesize, DEFAULT_ALIAS_TERMS};

use crate::canonical::CanonicalMatrix;
use crate::error::{Error, Result};
use crate::filters::{check_scaling_conditions, Interval, PeriodicFilterPair, TranslationSet};
use crate::sampling::{dilate_chirp_on, Grid, SampledSignal, SparseElement};
use crate::scalar::Scalar;

/// Largest accepted `|Λ₀(0) − 1|`.
pub const DC_TOL: f64 = 1e-10;

/// Largest accepted scaling-condition residual before a cascade.
pub const SCALING_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeOptions {
    /// Number of product factors `J`.
    pub depth: usize,
    /// Bound on `|Π_J − Π_{J−1}|` over the band.
    pub tol: f64,
    /// Alias terms used by the time-domain synthesis.
    pub alias_terms: usize,
}

impl Default for CascadeOptions {
    fn default() -> Self {
        Self { depth: DEFAULT_DEPTH, tol: 1e-8, alias_terms: DEFAULT_ALIAS_TERMS }
    }
}

#[derive(Debug, Clone)]
pub struct Cascade<T> {
    pub hat: ProductHat<T>,
    pub phi: SampledSignal<T>,
    /// Max tail deviation over the band of the output grid.
    pub tail_deviation: T,
    /// `max |φ̂(u) − Λ₀(u/2N) φ̂(u/2N)|` over the band.
    pub two_scale_residual: T,
}

fn max_par<T: Scalar>(xs: &[(usize, T)], f: impl Fn(T) -> T + Sync + Send) -> T {
    xs.par_iter().map(|&(_, u)| f(u)).reduce(T::zero, T::max)
}

fn check_low_pass<T: Scalar>(p0: &PeriodicFilterPair<T>) -> Result<()> {
    let dc = p0.dc_defect();
    if dc > T::lit(DC_TOL) {
        return Err(Error::ConditionViolated {
            condition: "low-pass normalization".into(),
            residual: dc.as_f64(),
            tol: DC_TOL,
        });
    }
    let (s, t) = check_scaling_conditions(p0)?;
    for (name, v) in [("3.4 (sum)", s), ("3.4 (twisted sum)", t)] {
        if v > T::lit(SCALING_TOL) {
            return Err(Error::ConditionViolated {
                condition: name.into(),
                residual: v.as_f64(),
                tol: SCALING_TOL,
            });
        }
    }
    Ok(())
}

/// `φ̂ = Π_{j=1}^{J} Λ₀(u/(2N)^j)` and its cell-average samples on `grid`.
pub fn cascade<T: Scalar>(
    p0: &PeriodicFilterPair<T>,
    grid: &Grid<T>,
    opts: &CascadeOptions,
) -> Result<Cascade<T>> {
    check_low_pass(p0)?;
    let hat = ProductHat::scaling(p0.clone(), opts.depth)?;
    let band = band_frequencies(grid);
    let tail = max_par(&band, |u| hat.eval_with_tail(u).1);
    if tail > T::lit(opts.tol) {
        return Err(Error::NotConverged { deviation: tail.as_f64(), tol: opts.tol });
    }
    let d = T::from_usize_lossy(p0.ts().dilation());
    let two_scale = max_par(&band, |u| (hat.eval(u) - p0.eval(u / d) * hat.eval(u / d)).norm());
    let phi = synthesize(|u| hat.eval(u), grid, opts.alias_terms)?;
    Ok(Cascade { hat, phi, tail_deviation: tail, two_scale_residual: two_scale })
}

/// `ψ̂_k(u) = Λ_k(u/2N) φ̂(u/2N)` as a product.
pub fn wavelet_hat<T: Scalar>(scaling: &ProductHat<T>, pk: &PeriodicFilterPair<T>) -> Result<ProductHat<T>> {
    let p0 = &scaling.bank()[0];
    if p0.ts() != pk.ts() {
        return Err(Error::GridMismatch("wavelet filter built for another translation set".into()));
    }
    let bank: Arc<[PeriodicFilterPair<T>]> = Arc::from(vec![p0.clone(), pk.clone()]);
    ProductHat::new(bank, vec![1], scaling.tail())
}

/// Time-domain wavelet for filter `pk` by synthesis from its transform.
pub fn wavelet_from_filters<T: Scalar>(
    scaling: &ProductHat<T>,
    pk: &PeriodicFilterPair<T>,
    grid: &Grid<T>,
    alias_terms: usize,
) -> Result<SampledSignal<T>> {
    let hat = wavelet_hat(scaling, pk)?;
    synthesize(|u| hat.eval(u), grid, alias_terms)
}

/// `t ↦ 2N Σ_λ h_λ f(2Nt − λ)`, the function whose transform is
/// `Λ(u/2N) f̂(u/2N)`. Exact on NUMRA grids for filters with finitely many
/// coefficients.
pub fn refine<T: Scalar>(
    parent: &SampledSignal<T>,
    filter: &PeriodicFilterPair<T>,
    grid: &Grid<T>,
) -> Result<SampledSignal<T>> {
    let coeffs = filter.two_scale_coefficients().ok_or_else(|| {
        Error::InvalidParameter("time-domain refinement needs a filter with finitely many coefficients".into())
    })?;
    let n = filter.ts().n();
    let amp = T::from_usize_lossy(filter.ts().dilation()).sqrt();
    let plain = CanonicalMatrix::<T>::fourier();
    let work = Grid { max_level: None, ..*grid };
    let mut out = vec![Complex::default(); grid.count];
    for (lambda, h) in coeffs {
        let e = dilate_chirp_on(parent, &work, 1, n, lambda, &plain)?;
        e.add_scaled_into(h.scale(amp), &mut out);
    }
    SampledSignal::new(*grid, out)
}

/// `{φ_{j,λ}}` for `λ ∈ Ω` in `window`, sampled on `grid`.
pub fn chirped_system<T: Scalar>(
    phi: &SampledSignal<T>,
    ts: &TranslationSet,
    m: &CanonicalMatrix<T>,
    j: i32,
    window: Interval,
    grid: &Grid<T>,
) -> Result<Vec<(T, SparseElement<T>)>> {
    ts.enumerate::<T>(window)
        .into_par_iter()
        .map(|lambda| Ok((lambda, dilate_chirp_on(phi, grid, j, ts.n(), lambda, m)?)))
        .collect()
}

/// Scaling function, wavelets and filters of one multiresolution.
#[derive(Debug, Clone)]
pub struct WaveletFamily<T> {
    pub ts: TranslationSet,
    pub m: CanonicalMatrix<T>,
    pub phi: SampledSignal<T>,
    pub psi: Vec<SampledSignal<T>>,
    pub filters: Vec<PeriodicFilterPair<T>>,
    pub hat: ProductHat<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyCheck<T> {
    /// `|‖φ‖ − 1|`.
    pub phi_norm_defect: T,
    /// `|φ̂(0) − 1|`.
    pub hat_dc_defect: T,
}

impl<T: Scalar> FamilyCheck<T> {
    pub fn passes(&self) -> bool {
        self.phi_norm_defect <= T::lit(0.02) && self.hat_dc_defect <= T::lit(1e-6)
    }
}

impl<T: Scalar> WaveletFamily<T> {
    /// Haar family: `φ = χ_{A_N}` exactly and wavelets by refinement when the
    /// filters allow it, by synthesis otherwise.
    pub fn haar(ts: TranslationSet, m: CanonicalMatrix<T>, grid: &Grid<T>, count: usize) -> Result<Self> {
        let filters = haar_bank(&ts, &m, count)?;
        let phi = haar_scaling(&ts, grid);
        Self::assemble(ts, m, phi, filters, grid, DEFAULT_DEPTH, DEFAULT_ALIAS_TERMS)
    }

    /// Family from a certified bank, `φ` by cascade.
    pub fn from_bank(
        m: CanonicalMatrix<T>,
        filters: Vec<PeriodicFilterPair<T>>,
        grid: &Grid<T>,
        opts: &CascadeOptions,
    ) -> Result<Self> {
        let p0 = filters
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty filter bank".into()))?;
        let ts = *p0.ts();
        if filters.len() != ts.dilation() {
            return Err(Error::InvalidParameter(format!(
                "bank has {} filters, expected 2N = {}",
                filters.len(),
                ts.dilation()
            )));
        }
        let c = cascade(p0, grid, opts)?;
        Self::assemble(ts, m, c.phi, filters, grid, opts.depth, opts.alias_terms)
    }

    fn assemble(
        ts: TranslationSet,
        m: CanonicalMatrix<T>,
        phi: SampledSignal<T>,
        filters: Vec<PeriodicFilterPair<T>>,
        grid: &Grid<T>,
        depth: usize,
        alias_terms: usize,
    ) -> Result<Self> {
        m.require_b()?;
        let hat = ProductHat::scaling(filters[0].clone(), depth)?;
        let psi = filters[1..]
            .par_iter()
            .map(|pk| {
                if pk.is_analytic() && filters[0].is_analytic() {
                    refine(&phi, pk, grid)
                } else {
                    wavelet_from_filters(&hat, pk, grid, alias_terms)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { ts, m, phi, psi, filters, hat })
    }

    pub fn check(&self) -> FamilyCheck<T> {
        FamilyCheck {
            phi_norm_defect: (self.phi.norm() - T::one()).abs(),
            hat_dc_defect: (self.hat.eval(T::zero()) - Complex::new(T::one(), T::zero())).norm(),
        }
    }

    /// Orthogonal projection onto `V_j` using translates in `window`.
    pub fn project(&self, f: &SampledSignal<T>, j: i32, window: Interval) -> Result<Projection<T>> {
        project(f, &self.phi, &self.ts, &self.m, j, window)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{l2_distance, phase_aligned_distance};
    use std::f64::consts::PI;

    fn n1() -> TranslationSet {
        TranslationSet::new(1, 1).unwrap()
    }

    #[test]
    fn haar_cascade_recovers_box() {
        let p0 = haar_filters(&n1(), &CanonicalMatrix::fourier(), 4096).unwrap();
        let g = Grid::new(-1.0, 1.0 / 1024.0, 3 * 1024).unwrap();
        let opts = CascadeOptions { depth: 20, tol: 1e-6, alias_terms: 16 };
        let c = cascade(&p0, &g, &opts).unwrap();
        let exact = haar_scaling(&n1(), &g);
        assert!(l2_distance(&c.phi, &exact).unwrap() < 1e-2);
        assert!(c.two_scale_residual < 1e-6);
        assert_eq!(c.hat.eval(0.0), Complex::new(1.0, 0.0));
    }

    #[test]
    fn strict_tolerance_needs_depth() {
        let p0 = haar_filters(&n1(), &CanonicalMatrix::fourier(), 4096).unwrap();
        let g = Grid::new(-1.0, 1.0 / 64.0, 256).unwrap();
        let opts = CascadeOptions { depth: 20, tol: 1e-8, alias_terms: 2 };
        assert!(matches!(cascade(&p0, &g, &opts), Err(Error::NotConverged { .. })));
        assert!(cascade(&p0, &g, &CascadeOptions { alias_terms: 2, ..Default::default() }).is_ok());
    }

    #[test]
    fn cascade_rejects_bad_low_pass() {
        let p0 = haar_filters(&n1(), &CanonicalMatrix::fourier(), 64).unwrap();
        let g = Grid::new(0.0, 0.125, 16).unwrap();
        let doubled = p0.scaled(Complex::new(2.0, 0.0)).unwrap();
        assert!(matches!(cascade(&doubled, &g, &Default::default()), Err(Error::ConditionViolated { .. })));
    }

    #[test]
    fn haar_wavelet_closed_form() {
        // ψ̂₁(2u) = ½(e^{−2πiu} − 1) φ̂(u)
        let bank = haar_bank(&n1(), &CanonicalMatrix::new(2.0, 1.0, 1.0, 1.0), 4096).unwrap();
        let phi = ProductHat::scaling(bank[0].clone(), 40).unwrap();
        let psi = wavelet_hat(&phi, &bank[1]).unwrap();
        for k in -50..50 {
            let u = k as f64 * 0.173;
            let lhs = psi.eval(2.0 * u);
            let rhs = (Complex::from_polar(1.0, -2.0 * PI * u) - 1.0).scale(0.5) * phi.eval(u);
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn refinement_gives_classical_haar() {
        let g = Grid::<f64>::numra(1, 4, 64, -1.0, 2.0).unwrap();
        let fam = WaveletFamily::haar(n1(), CanonicalMatrix::fourier(), &g, 4096).unwrap();
        let classical = SampledSignal::indicator(g, &[(0.0, 0.5)])
            .sub(&SampledSignal::indicator(g, &[(0.5, 1.0)]))
            .unwrap();
        assert!(phase_aligned_distance(&fam.psi[0], &classical).unwrap() < 1e-12);
        assert!(fam.check().passes());
    }

    #[test]
    fn n2_refinement_reproduces_printed_wavelets() {
        let ts = TranslationSet::new(2, 1).unwrap();
        let g = Grid::<f64>::numra(2, 2, 4, -2.0, 2.0).unwrap();
        let fam = WaveletFamily::haar(ts, CanonicalMatrix::fourier(), &g, 4096).unwrap();
        for (mine, printed) in fam.psi.iter().zip(printed_n2_wavelets(&g)) {
            assert!(l2_distance(mine, &printed).unwrap() < 1e-12);
        }
    }
}
