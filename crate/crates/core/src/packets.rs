//! Wavelet packets `W_n` indexed by base-`2N` digits, their orthonormality
//! certification and a quadrature packet transform.

use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canonical::CanonicalMatrix;
use crate::error::{Error, Result};
use crate::filters::{Interval, PeriodicFilterPair, TranslationSet};
use crate::sampling::{dilate_chirp_on, Grid, SampledSignal, SparseElement};
use crate::scalar::{cis_turns, Scalar};
use crate::wavelets::{band_frequencies, gram, refine, synthesize, GramReport, ProductHat};

/// Default Gram residual accepted by [`CertifiedBasis::certify`].
pub const CERTIFY_TOL: f64 = 1e-3;

/// A packet number with its base-`2N` expansion, least significant digit
/// first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PacketIndex {
    n: u64,
    base: u64,
    digits: Vec<usize>,
}

impl PacketIndex {
    pub fn new(n: u64, big_n: u32) -> Result<Self> {
        if big_n == 0 {
            return Err(Error::InvalidParameter("N must be positive".into()));
        }
        let base = 2 * big_n as u64;
        let mut digits = Vec::new();
        let mut rest = n;
        while rest > 0 {
            digits.push((rest % base) as usize);
            rest /= base;
        }
        Ok(Self { n, base, digits })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn digits(&self) -> &[usize] {
        &self.digits
    }

    /// `Σ digits[i]·(2N)^i`.
    pub fn reconstruct(&self) -> u64 {
        reconstruct(&self.digits, self.base)
    }

    /// Index `⌊n/2N⌋` of the packet this one refines, with the refining digit.
    pub fn parent(&self) -> Option<(u64, usize)> {
        (self.n > 0).then(|| (self.n / self.base, (self.n % self.base) as usize))
    }
}

/// Base-`2N` expansion of `n`.
pub fn digits(n: u64, big_n: u32) -> Result<PacketIndex> {
    PacketIndex::new(n, big_n)
}

pub fn reconstruct(digits: &[usize], base: u64) -> u64 {
    digits.iter().rev().fold(0u64, |acc, &d| acc * base + d as u64)
}

/// One packet: its product transform and time-domain samples.
#[derive(Debug, Clone)]
pub struct PacketNode<T> {
    pub index: PacketIndex,
    pub hat: ProductHat<T>,
    pub w: SampledSignal<T>,
}

impl<T: Scalar> PacketNode<T> {
    /// `Ŵ_n` on the band frequencies of the node's grid, in DFT order.
    pub fn w_hat(&self) -> Vec<(T, Complex<T>)> {
        band_frequencies(self.w.grid())
            .into_iter()
            .map(|(_, u)| (u, self.hat.eval(u)))
            .collect()
    }
}

/// How time-domain packets are produced.
#[derive(Debug, Clone)]
pub enum PacketSource<T> {
    /// Refinement in time from a known `φ`; exact for finite filters.
    Refine(SampledSignal<T>),
    /// Cell-average synthesis from the product with `M` alias terms.
    Synthesize { alias_terms: usize },
}

/// Product transform of `W_n`: the digits of `idx` followed by `depth`
/// low-pass factors, with the tail deviation checked over the band of `grid`.
pub fn packet_hat<T: Scalar>(
    idx: &PacketIndex,
    bank: &Arc<[PeriodicFilterPair<T>]>,
    depth: usize,
    tol: f64,
    grid: &Grid<T>,
) -> Result<ProductHat<T>> {
    if bank.len() as u64 != idx.base() {
        return Err(Error::InvalidParameter(format!(
            "bank of {} filters for base {}",
            bank.len(),
            idx.base()
        )));
    }
    let hat = ProductHat::new(bank.clone(), idx.digits().to_vec(), depth)?;
    let tail = band_frequencies(grid)
        .par_iter()
        .map(|&(_, u)| hat.eval_with_tail(u).1)
        .reduce(T::zero, T::max);
    if tail > T::lit(tol) {
        return Err(Error::NotConverged { deviation: tail.as_f64(), tol });
    }
    Ok(hat)
}

/// Packets `W_0 … W_{n_max}` on `grid`.
pub fn packet_generate<T: Scalar>(
    bank: &[PeriodicFilterPair<T>],
    n_max: u64,
    depth: usize,
    tol: f64,
    grid: &Grid<T>,
    source: &PacketSource<T>,
) -> Result<Vec<PacketNode<T>>> {
    let p0 = bank
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty filter bank".into()))?;
    let big_n = p0.ts().n();
    let bank: Arc<[PeriodicFilterPair<T>]> = Arc::from(bank.to_vec());
    let indices = (0..=n_max).map(|n| PacketIndex::new(n, big_n)).collect::<Result<Vec<_>>>()?;
    let hats = indices
        .par_iter()
        .map(|idx| packet_hat(idx, &bank, depth, tol, grid))
        .collect::<Result<Vec<_>>>()?;
    let signals: Vec<SampledSignal<T>> = match source {
        PacketSource::Refine(phi) => {
            if !phi.grid().same_as(grid) {
                return Err(Error::GridMismatch("φ is not on the packet grid".into()));
            }
            let mut out: Vec<SampledSignal<T>> = Vec::with_capacity(indices.len());
            for idx in &indices {
                let w = match idx.parent() {
                    None => phi.clone(),
                    Some((p, k)) => refine(&out[p as usize], &bank[k], grid)?,
                };
                out.push(w);
            }
            out
        }
        PacketSource::Synthesize { alias_terms } => hats
            .par_iter()
            .map(|h| synthesize(|u| h.eval(u), grid, *alias_terms))
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(indices
        .into_iter()
        .zip(hats)
        .zip(signals)
        .map(|((index, hat), w)| PacketNode { index, hat, w })
        .collect())
}

/// Largest `|Ŵ_{2Nn+k}(u) − Λ_k(u/2N) Ŵ_n(u/2N)|` over `us` for all children
/// present in `nodes` (which must be indexed by `n`).
pub fn recursion_residual<T: Scalar>(nodes: &[PacketNode<T>], us: &[T]) -> T {
    let mut worst = T::zero();
    for node in nodes {
        let Some((p, k)) = node.index.parent() else { continue };
        let parent = &nodes[p as usize];
        let lam = &parent.hat.bank()[k];
        let d = T::from_u64(node.index.base()).expect("small base");
        for &u in us {
            let lhs = node.hat.eval(u);
            let rhs = lam.eval(u / d) * parent.hat.eval(u / d);
            worst = worst.max((lhs - rhs).norm());
        }
    }
    worst
}

/// Labels of the Gram rows: `(n, j, λ)`.
pub type ElementLabel<T> = (u64, i32, T);

/// Gram of `{W_n(· − λ) e^{−iπ(a/b)(t² − λ²)}}` over all nodes and `λ ∈ Ω`
/// in `window`.
pub fn packet_gram<T: Scalar>(
    nodes: &[PacketNode<T>],
    ts: &TranslationSet,
    m: &CanonicalMatrix<T>,
    window: Interval,
) -> Result<(Vec<ElementLabel<T>>, GramReport<T>)> {
    let blocks: Vec<BasisBlock<T>> = nodes
        .iter()
        .map(|nd| BasisBlock { n: nd.index.n(), level: 0, lambdas: ts.enumerate(window) })
        .collect();
    let grid = nodes
        .first()
        .map(|nd| *nd.w.grid())
        .ok_or_else(|| Error::InvalidParameter("no packets".into()))?;
    let (labels, elems) = build_elements(nodes, &blocks, ts, m, &grid)?;
    Ok((labels, gram(&elems)?))
}

/// Packet `n` at level `j` with the listed translations.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisBlock<T> {
    pub n: u64,
    pub level: i32,
    pub lambdas: Vec<T>,
}

/// Samples below this fraction of the peak do not count as support.
const FIT_FLOOR: f64 = 1e-6;

/// Rejects a translate whose support would be cut off by the grid.
fn check_fits<T: Scalar>(w: &SampledSignal<T>, grid: &Grid<T>, j: i32, n: u32, lam: T) -> Result<()> {
    let peak = w.values().iter().map(|v| v.norm()).fold(T::zero(), T::max);
    let floor = peak * T::lit(FIT_FLOOR);
    let above = |v: &Complex<T>| v.norm() > floor;
    let (Some(lo), Some(hi)) = (w.values().iter().position(above), w.values().iter().rposition(above)) else {
        return Ok(());
    };
    let wg = w.grid();
    let scale = (2.0 * n as f64).powi(j);
    let s0 = (wg.point(lo).as_f64() + lam.as_f64()) / scale;
    let s1 = (wg.point(hi).as_f64() + wg.step.as_f64() + lam.as_f64()) / scale;
    let (g0, g1) = (grid.t_min.as_f64(), (grid.t_max() + grid.step).as_f64());
    let slack = grid.step.as_f64() * 1e-6;
    if s0 < g0 - slack || s1 > g1 + slack {
        return Err(Error::InvalidParameter(format!(
            "translate at level {j}, lambda {lam} spans [{s0}, {s1}], outside the grid [{g0}, {g1}]"
        )));
    }
    Ok(())
}

fn build_elements<T: Scalar>(
    nodes: &[PacketNode<T>],
    blocks: &[BasisBlock<T>],
    ts: &TranslationSet,
    m: &CanonicalMatrix<T>,
    grid: &Grid<T>,
) -> Result<(Vec<ElementLabel<T>>, Vec<SparseElement<T>>)> {
    let mut jobs = Vec::new();
    for b in blocks {
        let node = nodes
            .iter()
            .find(|nd| nd.index.n() == b.n)
            .ok_or_else(|| Error::InvalidParameter(format!("packet {} not generated", b.n)))?;
        for &lam in &b.lambdas {
            if !ts.contains(lam.as_f64()) {
                return Err(Error::InvalidParameter(format!("{lam} is not in the translation set")));
            }
            check_fits(&node.w, grid, b.level, ts.n(), lam)?;
            jobs.push((node, b.level, lam));
        }
    }
    let elems = jobs
        .par_iter()
        .map(|&(node, j, lam)| dilate_chirp_on(&node.w, grid, j, ts.n(), lam, m))
        .collect::<Result<Vec<_>>>()?;
    let labels = jobs.iter().map(|&(node, j, lam)| (node.index.n(), j, lam)).collect();
    Ok((labels, elems))
}

/// A packet system whose Gram matrix has been checked.
#[derive(Debug, Clone)]
pub struct CertifiedBasis<T> {
    labels: Vec<ElementLabel<T>>,
    elements: Vec<SparseElement<T>>,
    residual: T,
}

impl<T: Scalar> CertifiedBasis<T> {
    /// Builds `W^M_{n,j,λ}` on `grid` for every block and accepts the system
    /// when `max |G − I| ≤ tol`.
    pub fn certify(
        nodes: &[PacketNode<T>],
        blocks: &[BasisBlock<T>],
        ts: &TranslationSet,
        m: &CanonicalMatrix<T>,
        grid: &Grid<T>,
        tol: f64,
    ) -> Result<Self> {
        let (labels, elements) = build_elements(nodes, blocks, ts, m, grid)?;
        let residual = gram(&elements)?.max_off_identity;
        if residual > T::lit(tol) {
            return Err(Error::UncertifiedBasis { residual: residual.as_f64(), tol });
        }
        Ok(Self { labels, elements, residual })
    }

    pub fn labels(&self) -> &[ElementLabel<T>] {
        &self.labels
    }

    pub fn elements(&self) -> &[SparseElement<T>] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn residual(&self) -> T {
        self.residual
    }

    pub fn grid(&self) -> Option<&Grid<T>> {
        self.elements.first().map(|e| e.grid())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow<T> {
    pub n: u64,
    pub j: i32,
    pub lambda: T,
    pub value: Complex<T>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CoefficientTable<T> {
    pub rows: Vec<CoefficientRow<T>>,
}

impl<T: Scalar> CoefficientTable<T> {
    /// `Σ |c|²`.
    pub fn energy(&self) -> T {
        self.rows.iter().map(|r| r.value.norm_sqr()).fold(T::zero(), |a, b| a + b)
    }
}

/// `c_{n,j,λ} = ⟨f, W^M_{n,j,λ}⟩` by quadrature.
pub fn packet_analyze<T: Scalar>(f: &SampledSignal<T>, basis: &CertifiedBasis<T>) -> Result<CoefficientTable<T>> {
    let values = basis
        .elements
        .par_iter()
        .map(|e| e.inner_from(f))
        .collect::<Result<Vec<_>>>()?;
    let rows = basis
        .labels
        .iter()
        .zip(values)
        .map(|(&(n, j, lambda), value)| CoefficientRow { n, j, lambda, value })
        .collect();
    Ok(CoefficientTable { rows })
}

/// `Σ c·W^M_{n,j,λ}`; rows are matched to basis elements by label.
pub fn packet_synthesize<T: Scalar>(table: &CoefficientTable<T>, basis: &CertifiedBasis<T>) -> Result<SampledSignal<T>> {
    let grid = *basis
        .grid()
        .ok_or_else(|| Error::InvalidParameter("empty basis".into()))?;
    if table.rows.len() != basis.len() {
        return Err(Error::InvalidParameter(format!(
            "{} coefficients for a basis of {}",
            table.rows.len(),
            basis.len()
        )));
    }
    let mut out = vec![Complex::default(); grid.count];
    for (row, (label, e)) in table.rows.iter().zip(basis.labels.iter().zip(&basis.elements)) {
        let same = row.n == label.0 && row.j == label.1 && (row.lambda - label.2).abs() <= T::lit(1e-12);
        if !same {
            return Err(Error::InvalidParameter(format!(
                "coefficient ({}, {}, {}) does not match basis element ({}, {}, {})",
                row.n, row.j, row.lambda, label.0, label.1, label.2
            )));
        }
        e.add_scaled_into(row.value, &mut out);
    }
    SampledSignal::new(grid, out)
}

/// Range of `λ ∈ Ω` for which `W^M_{n,j,λ}` meets the support of `f`.
pub fn covering_lambdas<T: Scalar>(
    f: &SampledSignal<T>,
    w: &SampledSignal<T>,
    ts: &TranslationSet,
    j: i32,
) -> Vec<T> {
    match crate::wavelets::required_window(f, w, ts.n(), j) {
        Some(win) => ts.enumerate(win),
        None => Vec::new(),
    }
}

/// Residuals of the periodization identities for `h_n(u) = Σ_j |Ŵ_n(u + Nj)|²`:
/// `max |Σ_p h_n(u + p/2) − 2|` and `max |Σ_p e^{−iπrp/N} h_n(u + p/2)|`
/// over `samples` points of `[0, ½)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartitionResidual {
    pub sum: f64,
    pub twisted: f64,
    /// Size of the Richardson correction applied to the folded sums.
    pub tail_correction: f64,
}

/// Default half-width of the folding range.
pub const FOLD_TERMS: i64 = 64;

/// `h_n(u)` folded over `|j| ≤ terms` and `|j| ≤ 2·terms`, extrapolated with a
/// `C/(J + ½)` tail model. Returns the estimate and the applied correction.
pub fn h_n<T: Scalar>(hat: &ProductHat<T>, u: T, terms: i64) -> (T, T) {
    let big_n = T::from_usize_lossy(hat.dilation() / 2);
    let fold = |lo: i64, hi: i64| {
        (lo..=hi)
            .map(|j| hat.eval(u + big_n * T::from_i64_lossy(j)).norm_sqr())
            .fold(T::zero(), |a, b| a + b)
    };
    let s1 = fold(-terms, terms);
    let outer = fold(-2 * terms, -terms - 1) + fold(terms + 1, 2 * terms);
    let s2 = s1 + outer;
    let half = T::lit(0.5);
    let k1 = T::one() / (T::from_i64_lossy(terms) + half);
    let k2 = T::one() / (T::from_i64_lossy(2 * terms) + half);
    let c = (s2 - s1) / (k1 - k2);
    let corr = c * k2;
    (s2 + corr, corr.abs())
}

pub fn partition_residual<T: Scalar>(
    hat: &ProductHat<T>,
    ts: &TranslationSet,
    samples: usize,
    terms: i64,
) -> PartitionResidual {
    let d = ts.dilation();
    let (big_n, r) = (T::lit(ts.n() as f64), T::lit(ts.r() as f64));
    let half = T::lit(0.5);
    let per_u: Vec<(T, T, T)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let u = half * T::from_usize_lossy(i) / T::from_usize_lossy(samples);
            let mut plain = T::zero();
            let mut twisted = Complex::<T>::default();
            let mut corr = T::zero();
            for p in 0..d {
                let (h, c) = h_n(hat, u + half * T::from_usize_lossy(p), terms);
                plain = plain + h;
                corr = corr.max(c);
                twisted = twisted + cis_turns(-r * T::from_usize_lossy(p) / (T::lit(2.0) * big_n)).scale(h);
            }
            ((plain - T::lit(2.0)).abs(), twisted.norm(), corr)
        })
        .collect();
    let max = |f: fn(&(T, T, T)) -> T| per_u.iter().map(f).fold(T::zero(), T::max).as_f64();
    PartitionResidual { sum: max(|x| x.0), twisted: max(|x| x.1), tail_correction: max(|x| x.2) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::l2_distance;
    use crate::wavelets::{haar_bank, haar_scaling};

    #[test]
    fn digit_examples() {
        assert!(digits(0, 2).unwrap().digits().is_empty());
        assert_eq!(digits(5, 2).unwrap().digits(), &[1, 1]);
        assert_eq!(digits(3, 2).unwrap().digits(), &[3]);
        assert_eq!(digits(5, 2).unwrap().parent(), Some((1, 1)));
    }

    fn haar_nodes(n: u32, n_max: u64) -> (TranslationSet, Vec<PeriodicFilterPair<f64>>, Vec<PacketNode<f64>>) {
        let ts = TranslationSet::new(n, 1).unwrap();
        let bank = haar_bank(&ts, &CanonicalMatrix::fourier(), 4096).unwrap();
        let g = Grid::<f64>::numra(n, 3, 8, -6.0, 6.0).unwrap();
        let src = PacketSource::Refine(haar_scaling(&ts, &g));
        let nodes = packet_generate(&bank, n_max, 40, 1e-8, &g, &src).unwrap();
        (ts, bank, nodes)
    }

    #[test]
    fn n2_packet_supports() {
        let (_, _, nodes) = haar_nodes(2, 4);
        let g = *nodes[0].w.grid();
        let within = |k: usize, lo: f64, hi: f64| {
            let (a, b) = nodes[k].w.support().unwrap();
            g.point(a) >= lo - 1e-12 && g.point(b) < hi
        };
        assert!(within(0, 0.0, 1.5) && within(2, -1.0, 0.5) && within(3, -1.0, 0.5) && within(4, 0.0, 1.5));
    }

    #[test]
    fn recursion_identity_holds_bitwise() {
        let (_, _, nodes) = haar_nodes(2, 16);
        let us: Vec<f64> = (0..50).map(|k| -7.3 + 0.31 * k as f64).collect();
        assert_eq!(recursion_residual(&nodes, &us), 0.0);
    }

    #[test]
    fn synthesis_matches_refinement() {
        let ts = TranslationSet::new(1, 1).unwrap();
        let bank = haar_bank(&ts, &CanonicalMatrix::fourier(), 4096).unwrap();
        let g = Grid::<f64>::numra(1, 2, 64, -2.0, 3.0).unwrap();
        let a = packet_generate(&bank, 3, 40, 1e-8, &g, &PacketSource::Refine(haar_scaling(&ts, &g))).unwrap();
        let b = packet_generate(&bank, 3, 40, 1e-8, &g, &PacketSource::Synthesize { alias_terms: 16 }).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!(l2_distance(&x.w, &y.w).unwrap() < 2e-2, "n = {}", x.index.n());
        }
    }

    #[test]
    fn partition_identity_for_haar() {
        for n in [1, 2] {
            let (ts, _, nodes) = haar_nodes(n, 3);
            for nd in &nodes {
                let res = partition_residual(&nd.hat, &ts, 16, FOLD_TERMS);
                assert!(res.sum < 1e-3 && res.twisted < 1e-3, "N={n} n={}: {res:?}", nd.index.n());
            }
        }
    }

    #[test]
    fn uncertified_basis_is_rejected() {
        let (ts, _, nodes) = haar_nodes(1, 1);
        let g = *nodes[0].w.grid();
        // W_0 and W_0 shifted by zero twice: not orthonormal
        let blocks = vec![
            BasisBlock { n: 0, level: 0, lambdas: vec![0.0] },
            BasisBlock { n: 0, level: 0, lambdas: vec![0.0] },
        ];
        let err = CertifiedBasis::certify(&nodes, &blocks, &ts, &CanonicalMatrix::fourier(), &g, CERTIFY_TOL);
        assert!(matches!(err, Err(Error::UncertifiedBasis { .. })));
    }

    #[test]
    fn translates_off_the_grid_are_rejected() {
        let (ts, _, nodes) = haar_nodes(1, 1);
        let g = *nodes[0].w.grid();
        let far = (g.t_max() + 1.0).ceil();
        let blocks = vec![BasisBlock { n: 0, level: 0, lambdas: vec![far] }];
        let err = CertifiedBasis::certify(&nodes, &blocks, &ts, &CanonicalMatrix::fourier(), &g, CERTIFY_TOL);
        assert!(matches!(err, Err(Error::InvalidParameter(_))));
    }
}
