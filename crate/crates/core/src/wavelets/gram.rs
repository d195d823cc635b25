//! Gram matrices of sampled systems.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::Result;
use crate::sampling::{SampledSignal, SparseElement};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct GramReport<T> {
    pub dim: usize,
    /// Row-major `G[i][k] = ⟨e_i, e_k⟩`.
    pub matrix: Vec<Complex<T>>,
    pub max_off_identity: T,
}

impl<T: Scalar> GramReport<T> {
    pub fn entry(&self, i: usize, k: usize) -> Complex<T> {
        self.matrix[i * self.dim + k]
    }
}

/// Pairwise inner products, evaluated in parallel over the upper triangle.
/// Each entry is a sequential sum, so the result does not depend on the
/// thread count.
pub fn gram<T: Scalar>(system: &[SparseElement<T>]) -> Result<GramReport<T>> {
    let dim = system.len();
    let pairs: Vec<(usize, usize)> = (0..dim).flat_map(|i| (i..dim).map(move |k| (i, k))).collect();
    let vals = pairs
        .par_iter()
        .map(|&(i, k)| system[i].inner(&system[k]))
        .collect::<Result<Vec<_>>>()?;
    let mut matrix = vec![Complex::default(); dim * dim];
    for (&(i, k), v) in pairs.iter().zip(vals) {
        matrix[i * dim + k] = v;
        matrix[k * dim + i] = v.conj();
    }
    let one = Complex::new(T::one(), T::zero());
    let max_off_identity = (0..dim * dim)
        .map(|x| {
            let target = if x / dim == x % dim { one } else { Complex::default() };
            (matrix[x] - target).norm()
        })
        .fold(T::zero(), T::max);
    Ok(GramReport { dim, matrix, max_off_identity })
}

pub fn gram_signals<T: Scalar>(system: &[SampledSignal<T>]) -> Result<GramReport<T>> {
    let sparse: Vec<_> = system.iter().map(SparseElement::from_signal).collect();
    gram(&sparse)
}

/// `max |⟨a_i, b_k⟩|` over all pairs.
pub fn cross_gram_max<T: Scalar>(a: &[SparseElement<T>], b: &[SparseElement<T>]) -> Result<T> {
    let vals = a
        .par_iter()
        .flat_map(|x| b.par_iter().map(move |y| x.inner(y).map(|v| v.norm())))
        .collect::<Result<Vec<_>>>()?;
    Ok(vals.into_iter().fold(T::zero(), T::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::CanonicalMatrix;
    use crate::filters::{Interval, TranslationSet};
    use crate::sampling::Grid;
    use crate::wavelets::{chirped_system, haar_scaling};

    #[test]
    fn single_element() {
        let g = Grid::new(-1.0, 1.0 / 64.0, 192).unwrap();
        let e = SampledSignal::indicator(g, &[(0.0, 1.0)]);
        let r = gram_signals(&[e]).unwrap();
        assert_eq!(r.dim, 1);
        assert!(r.max_off_identity < 1e-14);
    }

    #[test]
    fn chirp_modulus_matches_plain_gram() {
        let ts = TranslationSet::new(2, 1).unwrap();
        let g = Grid::<f64>::numra(2, 1, 64, -3.0, 4.0).unwrap();
        let phi = haar_scaling(&ts, &g);
        let w = Interval::closed(-2.0, 2.0);
        let m = CanonicalMatrix::new(2.0, 1.0, 1.0, 1.0);
        let chirped: Vec<_> = chirped_system(&phi, &ts, &m, 0, w, &g).unwrap().into_iter().map(|x| x.1).collect();
        let plain: Vec<_> = chirped_system(&phi, &ts, &CanonicalMatrix::fourier(), 0, w, &g)
            .unwrap()
            .into_iter()
            .map(|x| x.1)
            .collect();
        let (a, b) = (gram(&chirped).unwrap(), gram(&plain).unwrap());
        for (x, y) in a.matrix.iter().zip(&b.matrix) {
            assert!((x.norm() - y.norm()).abs() < 1e-10);
        }
        assert!(a.max_off_identity < 1e-3);
    }
}
