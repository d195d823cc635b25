//! Pointwise unitary completion of a low-pass filter to a full bank.
//!
//! At a base point `u` the `2N` shifted samples of the low-pass components
//! form `v₀ = (a(p), b(p))_{p<2N} ∈ ℂ^{4N}`. The bank conditions ask for
//! orthonormal `v₀, …, v_{2N−1}` that are also orthogonal under the twist
//! `D = diag(e^{−iπrp/N})`. Pairing coordinate blocks `p = q` and `p = q + N`
//! (on which `D` differs by a sign) through a unitary `W_q` that maps the
//! first block of `v₀` onto the second gives a `2N`-dimensional subspace `V`
//! with `V ⊥ DV` that contains `v₀`. Any orthonormal basis of `V` then
//! satisfies both conditions; it is obtained by Gram-Schmidt on unit seeds.

use num_complex::Complex;

use super::{check_m0_period, check_scaling_conditions, PeriodicFilterPair};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Precondition tolerance on the scaling and period residuals.
const PRECONDITION_TOL: f64 = 1e-8;

type C<T> = Complex<T>;
type Mat2<T> = [[C<T>; 2]; 2];

fn unit_pair<T: Scalar>(x: [C<T>; 2]) -> Option<[C<T>; 2]> {
    let nrm = (x[0].norm_sqr() + x[1].norm_sqr()).sqrt();
    (nrm > T::lit(1e-10)).then(|| [x[0].unscale(nrm), x[1].unscale(nrm)])
}

fn perp<T: Scalar>(x: [C<T>; 2]) -> [C<T>; 2] {
    [-x[1].conj(), x[0].conj()]
}

/// Unitary `W` with `W x̂ = ŷ`; the identity when `x` vanishes.
fn block_unitary<T: Scalar>(x: [C<T>; 2], y: [C<T>; 2]) -> Mat2<T> {
    let one = C::new(T::one(), T::zero());
    let zero = C::default();
    let (Some(xh), Some(yh)) = (unit_pair(x), unit_pair(y)) else {
        return [[one, zero], [zero, one]];
    };
    let (xp, yp) = (perp(xh), perp(yh));
    let mut w = [[zero; 2]; 2];
    for (i, row) in w.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            *e = yh[i] * xh[j].conj() + yp[i] * xp[j].conj();
        }
    }
    w
}

fn dot<T: Scalar>(x: &[C<T>], y: &[C<T>]) -> C<T> {
    x.iter().zip(y).fold(C::default(), |acc, (a, b)| acc + a * b.conj())
}

/// Orthonormal completion of unit `c0` by modified Gram-Schmidt (two passes)
/// on the standard seeds, skipping the seed most parallel to `c0`.
fn complete_basis<T: Scalar>(c0: &[C<T>]) -> Vec<Vec<C<T>>> {
    let dim = c0.len();
    let pivot = (0..dim).fold(0, |best, i| if c0[i].norm() > c0[best].norm() { i } else { best });
    let mut basis = vec![c0.to_vec()];
    for s in (0..dim).filter(|&s| s != pivot) {
        let mut v = vec![C::default(); dim];
        v[s] = C::new(T::one(), T::zero());
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&v, b);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi = *vi - c * bi;
                }
            }
        }
        let nrm = dot(&v, &v).re.sqrt();
        for vi in v.iter_mut() {
            *vi = vi.unscale(nrm);
        }
        basis.push(v);
    }
    basis
}

/// Builds the `2N − 1` high-pass filters completing `p0`.
pub fn complete_filters<T: Scalar>(p0: &PeriodicFilterPair<T>) -> Result<Vec<PeriodicFilterPair<T>>> {
    let tol = T::lit(PRECONDITION_TOL);
    let (s, t) = check_scaling_conditions(p0)?;
    for (name, res) in [("3.4 (sum)", s), ("3.4 (twisted sum)", t), ("2.33", check_m0_period(p0)?)] {
        if !(res <= tol) {
            return Err(Error::ConditionViolated {
                condition: name.into(),
                residual: res.as_f64(),
                tol: PRECONDITION_TOL,
            });
        }
    }

    let ts = *p0.ts();
    let n = ts.n() as usize;
    let d = 2 * n;
    let len = p0.len();
    let stride = len / d;
    let inv_sqrt2 = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    let mut out1 = vec![vec![C::default(); len]; d];
    let mut out2 = vec![vec![C::default(); len]; d];

    for base in 0..stride {
        let idx: Vec<usize> = (0..d).map(|p| base + p * stride).collect();
        let a: Vec<C<T>> = idx.iter().map(|&i| p0.lambda1()[i]).collect();
        let b: Vec<C<T>> = idx.iter().map(|&i| p0.lambda2()[i]).collect();
        let ws: Vec<Mat2<T>> =
            (0..n).map(|q| block_unitary([a[q], b[q]], [a[q + n], b[q + n]])).collect();

        // coordinates of v₀ in the basis f_{q,i} = (e_i, W_q e_i)/√2
        let mut c0 = vec![C::default(); d];
        for q in 0..n {
            let x = [a[q], b[q]];
            let y = [a[q + n], b[q + n]];
            for i in 0..2 {
                let wy = ws[q][0][i].conj() * y[0] + ws[q][1][i].conj() * y[1];
                c0[2 * q + i] = (x[i] + wy).scale(inv_sqrt2);
            }
        }
        let nrm = dot(&c0, &c0).re.sqrt();
        if !(nrm > T::lit(0.5)) {
            return Err(Error::ConditionViolated {
                condition: "3.4 (sum)".into(),
                residual: (T::one() - nrm).abs().as_f64(),
                tol: PRECONDITION_TOL,
            });
        }
        for c in c0.iter_mut() {
            *c = c.unscale(nrm);
        }

        for (k, c) in complete_basis(&c0).into_iter().enumerate().skip(1) {
            for q in 0..n {
                let lo = [c[2 * q].scale(inv_sqrt2), c[2 * q + 1].scale(inv_sqrt2)];
                let hi = [
                    ws[q][0][0] * lo[0] + ws[q][0][1] * lo[1],
                    ws[q][1][0] * lo[0] + ws[q][1][1] * lo[1],
                ];
                out1[k][idx[q]] = lo[0];
                out2[k][idx[q]] = lo[1];
                out1[k][idx[q + n]] = hi[0];
                out2[k][idx[q + n]] = hi[1];
            }
        }
    }

    out1.into_iter()
        .zip(out2)
        .skip(1)
        .map(|(l1, l2)| PeriodicFilterPair::from_samples(ts, l1, l2))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::{check_orthonormality, TranslationSet};

    #[test]
    fn haar_one_high_pass_is_classical() {
        let ts = TranslationSet::new(1, 1).unwrap();
        let h = C::new(0.5, 0.0);
        let p0 = PeriodicFilterPair::<f64>::from_fn(ts, 64, |_| (h, h)).unwrap();
        let hp = complete_filters(&p0).unwrap();
        assert_eq!(hp.len(), 1);
        for j in 0..64 {
            assert!((hp[0].lambda1()[j] - C::new(-0.5, 0.0)).norm() < 1e-15);
            assert!((hp[0].lambda2()[j] - C::new(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn block_unitary_maps_direction() {
        let x = [C::new(0.3, -0.1), C::new(0.2, 0.7)];
        let y = [C::new(-0.5, 0.4), C::new(0.1, 0.2)];
        let w = block_unitary::<f64>(x, y);
        let xh = unit_pair(x).unwrap();
        let yh = unit_pair(y).unwrap();
        for i in 0..2 {
            let img = w[i][0] * xh[0] + w[i][1] * xh[1];
            assert!((img - yh[i]).norm() < 1e-14);
        }
    }

    #[test]
    fn rejects_non_periodic_m0() {
        let ts = TranslationSet::new(1, 1).unwrap();
        let p = PeriodicFilterPair::<f64>::from_fn(ts, 64, |u| (C::new(u, 0.0), C::default())).unwrap();
        assert!(matches!(complete_filters(&p), Err(Error::ConditionViolated { .. })));
    }

    #[test]
    fn random_unitary_low_pass_completes() {
        // 𝕄₀ = 1/(2N) everywhere, with u-dependent split and phases
        let ts = TranslationSet::new(2, 3).unwrap();
        let p0 = PeriodicFilterPair::<f64>::from_fn(ts, 256, |u| {
            let w = 4.0 * std::f64::consts::PI * u;
            let th = 0.7 + 0.3 * w.sin();
            (C::from_polar(0.5 * th.cos(), w.cos()), C::from_polar(0.5 * th.sin(), 2.0 * (2.0 * w).sin()))
        })
        .unwrap();
        let (s, _) = check_scaling_conditions(&p0).unwrap();
        assert!(s < 1e-12, "fixture must satisfy the sum condition ({s})");
        let mut bank = vec![p0];
        bank.extend(complete_filters(&bank[0]).unwrap());
        for l in 0..4 {
            for k in l..4 {
                let (a, b) = check_orthonormality(&bank[l], &bank[k], l == k).unwrap();
                assert!(a <= 1e-12 && b <= 1e-12, "({l},{k}): {a:e} {b:e}");
            }
        }
    }
}
