use std::f64::consts::PI;
use std::sync::Arc;

use lct_numra::filters::{check_bank, default_resolution};
use lct_numra::lct::{lct_fast, parseval_residual};
use lct_numra::packets::{digits, reconstruct, PacketIndex};
use lct_numra::sampling::{inner_product, translate_chirp};
use lct_numra::wavelets::{haar_bank, ProductHat};
use lct_numra::{CanonicalMatrix, Complex, Grid, SampledSignal, TranslationSet};
use proptest::prelude::*;

fn unimodular() -> impl Strategy<Value = CanonicalMatrix<f64>> {
    (0.3f64..3.0, prop::bool::ANY, 0.2f64..3.0, prop::bool::ANY, -2.0f64..2.0).prop_map(|(a, sa, b, sb, c)| {
        let a = if sa { a } else { -a };
        let b = if sb { b } else { -b };
        CanonicalMatrix::new(a, b, c, (1.0 + b * c) / a)
    })
}

fn entries(m: &CanonicalMatrix<f64>) -> [f64; 4] {
    [m.a, m.b, m.c, m.d]
}

fn grid() -> Grid<f64> {
    Grid::new(-8.0, 1.0 / 64.0, 1024).unwrap()
}

fn bump(g: Grid<f64>, center: f64, width: f64, freq: f64) -> SampledSignal<f64> {
    SampledSignal::from_fn(g, |t| {
        let x = (t - center) / width;
        Complex::from_polar((-PI * x * x).exp(), freq * t)
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn composition_is_associative(x in unimodular(), y in unimodular(), z in unimodular()) {
        let l = x.compose(&y).unwrap().compose(&z).unwrap();
        let r = x.compose(&y.compose(&z).unwrap()).unwrap();
        for (p, q) in entries(&l).iter().zip(entries(&r)) {
            prop_assert!((p - q).abs() <= 1e-9 * (1.0 + q.abs()));
        }
    }

    #[test]
    fn determinant_is_multiplicative(x in unimodular(), y in unimodular()) {
        let p = x.compose(&y).unwrap();
        prop_assert!((p.det() - x.det() * y.det()).abs() < 1e-9);
        prop_assert!((p.det() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn kernel_modulus_depends_only_on_b(m in unimodular(), t in -10.0f64..10.0, w in -10.0f64..10.0) {
        let k = m.kernel(t, w).unwrap();
        prop_assert!((k.norm() - 1.0 / (2.0 * PI * m.b.abs()).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn lct_is_linear(m in unimodular(), c in -3.0f64..3.0, s in -1.0f64..1.0, f in -5.0f64..5.0) {
        let g = grid();
        let (x, y) = (bump(g, s, 1.0, f), bump(g, -s, 0.7, -f));
        let alpha = Complex::new(c, 0.5);
        let lhs = lct_fast(&x.axpy(alpha, &y).unwrap(), &m).unwrap();
        let (fx, fy) = (lct_fast(&x, &m).unwrap(), lct_fast(&y, &m).unwrap());
        let scale: f64 = lhs.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for ((l, a), b) in lhs.values.iter().zip(&fx.values).zip(&fy.values) {
            prop_assert!((l - (a + alpha * b)).norm() <= 1e-10 * scale);
        }
    }

    #[test]
    fn parseval_holds_for_smooth_signals(m in unimodular(), s in -2.0f64..2.0, f in -4.0f64..4.0) {
        let x = bump(grid(), s, 1.0, f);
        prop_assert!(parseval_residual(&x, &x, &m).unwrap() < 1e-8);
    }

    #[test]
    fn chirped_translation_preserves_inner_products(m in unimodular(), k in -64i32..64, s in -1.0f64..1.0) {
        let g = grid();
        let lambda = f64::from(k) / 32.0;
        let (x, y) = (bump(g, s, 0.8, 1.0), bump(g, 0.3, 1.0, -2.0));
        let before = inner_product(&x, &y).unwrap();
        let after = inner_product(
            &translate_chirp(&x, lambda, &m).unwrap(),
            &translate_chirp(&y, lambda, &m).unwrap(),
        )
        .unwrap();
        prop_assert!((before - after).norm() < 1e-10);
    }

    #[test]
    fn digits_round_trip(n in 0u64..u64::MAX / 16, big_n in 1u32..8) {
        let idx = digits(n, big_n).unwrap();
        let base = 2 * u64::from(big_n);
        prop_assert_eq!(reconstruct(idx.digits(), base), n);
        prop_assert!(idx.digits().iter().all(|&d| (d as u64) < base));
        if let Some((parent, last)) = idx.parent() {
            prop_assert_eq!(parent * base + last as u64, n);
        }
    }

    #[test]
    fn chirped_haar_banks_certify(b in prop::sample::select(vec![0.5f64, 1.0, 2.0, -1.0]), a in 0.25f64..3.0, neg in prop::bool::ANY) {
        let a = if neg { -a } else { a };
        for (n, r) in [(1u32, 1u32), (2, 1), (2, 3)] {
            let ts = TranslationSet::new(n, r).unwrap();
            let m = CanonicalMatrix::new(a, b, 0.0, 1.0 / a);
            let rep = check_bank(&haar_bank(&ts, &m, default_resolution(n)).unwrap()).unwrap();
            prop_assert!(rep.max_pair() < 1e-10, "N={} r={}: {:e}", n, r, rep.max_pair());
        }
    }

    #[test]
    fn packet_hats_obey_the_recursion(n in 0u64..64, k in 0usize..4, u in -20.0f64..20.0) {
        let ts = TranslationSet::new(2, 1).unwrap();
        let m = CanonicalMatrix::new(2.0, 1.0, 1.0, 1.0);
        let bank: Arc<[_]> = Arc::from(haar_bank(&ts, &m, default_resolution(2)).unwrap());
        let parent = ProductHat::new(bank.clone(), PacketIndex::new(n, 2).unwrap().digits().to_vec(), 40).unwrap();
        let child = ProductHat::new(bank.clone(), PacketIndex::new(4 * n + k as u64, 2).unwrap().digits().to_vec(), 40)
            .unwrap();
        let rhs = bank[k].eval(u / 4.0) * parent.eval(u / 4.0);
        prop_assert!((child.eval(u) - rhs).norm() < 1e-12);
    }
}

#[test]
fn single_precision_tracks_double() {
    let m = CanonicalMatrix::new(2.0, 1.0, 1.0, 1.0);
    let x = bump(grid(), 0.2, 1.0, 1.5);
    let x32 = SampledSignal::<f32>::from_fn(Grid::new(-8.0f32, 1.0 / 64.0, 1024).unwrap(), |t| {
        let v = x.value_at(f64::from(t));
        Complex::new(v.re as f32, v.im as f32)
    })
    .unwrap();
    let (a, b) = (lct_fast(&x, &m).unwrap(), lct_fast(&x32, &m.cast::<f32>()).unwrap());
    let err = a.values.iter().zip(&b.values).map(|(p, q)| (p - Complex::new(f64::from(q.re), f64::from(q.im))).norm());
    let scale = a.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    assert!(err.fold(0.0, f64::max) < 1e-4 * scale);
}
