mod common;

use std::f64::consts::PI;

use common::{conv3_oracle, eval_at, random_field};
use mkdv_core::torus::*;
use mkdv_core::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn grid(l: f64, n: usize) -> TorusGrid {
    TorusGrid::new(l, n).unwrap()
}

#[test]
fn constant_and_cosine_coefficients() {
    let g = grid(1.0, 16);
    let one = SpectralField::from_fn(g, |_| 1.0).unwrap();
    assert!((one.coeff(0).re - 1.0).abs() < 1e-15);
    let c = SpectralField::from_fn(g, |x| (2.0 * PI * x).cos()).unwrap();
    assert!((c.coeff(1) - Complex64::new(0.5, 0.0)).norm() < 1e-15);
    assert!((c.coeff(-1) - Complex64::new(0.5, 0.0)).norm() < 1e-15);
    assert!(c.coeff(2).norm() < 1e-15);
}

#[test]
fn grid_validation() {
    assert!(matches!(TorusGrid::new(1.0, 7), Err(Error::Config { .. })));
    assert!(matches!(TorusGrid::new(-1.0, 8), Err(Error::Config { .. })));
    assert!(matches!(TorusGrid::new(f64::NAN, 8), Err(Error::Config { .. })));
    let g = grid(2.0, 8);
    assert_eq!(g.max_index(), 3);
    assert_eq!(g.slot_of_index(-3), Some(5));
    assert_eq!(g.slot_of_index(4), None);
    assert_eq!(g.index_of_slot(7), -1);
}

#[test]
fn mismatched_lengths_are_dimension_errors() {
    let g = grid(1.0, 8);
    assert!(matches!(forward_transform(&g, &[0.0; 6]), Err(Error::Dimension(_))));
    let a = SpectralField::zeros(g);
    let b = SpectralField::zeros(grid(1.0, 16));
    assert!(matches!(pointwise_cubic(&a, &a, &b), Err(Error::Dimension(_))));
}

#[test]
fn non_hermitian_coefficients_rejected() {
    let g = grid(1.0, 8);
    let mut c = vec![Complex64::new(0.0, 0.0); 8];
    c[1] = Complex64::new(1.0, 0.0);
    assert!(matches!(SpectralField::from_coeffs(g, c), Err(Error::Invariant(_))));
}

#[test]
fn homogeneous_norm_requires_zero_mean() {
    let g = grid(1.0, 8);
    let f = SpectralField::from_fn(g, |x| 1.0 + (2.0 * PI * x).sin()).unwrap();
    assert!(matches!(norm(&f, NormKind::HsDot(0.5)), Err(Error::Invariant(_))));
    assert!(norm(&f.without_mean(), NormKind::HsDot(0.5)).is_ok());
}

#[test]
fn cosine_norms_closed_form() {
    // u = a cos(x) on L = 2 pi: ||u||^2 = pi a^2, ||u_x||^2 = pi a^2, ||u||_4^4 = 3 pi a^4 / 4.
    let l = 2.0 * PI;
    let g = grid(l, 32);
    let a = 0.7;
    let u = SpectralField::from_fn(g, |x| a * x.cos()).unwrap();
    let l2 = norm(&u, NormKind::L2).unwrap();
    assert!((l2 * l2 - PI * a * a).abs() < 1e-13);
    let l4 = norm(&u, NormKind::L4).unwrap();
    assert!((l4.powi(4) - 0.75 * PI * a.powi(4)).abs() < 1e-13);
    let k = 1.0 / l;
    let hs = norm(&u, NormKind::Hs(0.5)).unwrap();
    assert!((hs * hs - PI * a * a * (1.0 + k)).abs() < 1e-13);
    let hd = norm(&u, NormKind::HsDot(1.0)).unwrap();
    assert!((hd * hd - PI * a * a * k * k).abs() < 1e-13);
}

#[test]
fn cubic_matches_convolution_oracle() {
    let g = grid(3.0, 16);
    let a = random_field(g, 1, 0.5);
    let b = random_field(g, 2, 0.5);
    let c = random_field(g, 3, 0.5);
    let p = pointwise_cubic(&a, &b, &c).unwrap();
    for j in -g.max_index()..=g.max_index() {
        assert!((p.coeff(j) - conv3_oracle(&a, &b, &c, j)).norm() < 1e-13, "j={j}");
    }
    assert_eq!(p.nyquist(), 0.0);
}

#[test]
fn derivative_of_sine() {
    let l = 3.0;
    let g = grid(l, 32);
    let u = SpectralField::from_fn(g, |x| (2.0 * PI * 2.0 * x / l).sin()).unwrap();
    let d = derivative(&u, 1);
    let w = 2.0 * PI * 2.0 / l;
    let want = SpectralField::from_fn(g, |x| w * (w * x).cos()).unwrap();
    assert!(d.max_diff(&want).unwrap() < 1e-13);
}

#[test]
fn l4_matches_pointwise_quadrature() {
    let g = grid(2.5, 16);
    let u = random_field(g, 9, 0.3);
    let m = 200;
    let h = g.period() / m as f64;
    let q: f64 = (0..m).map(|i| eval_at(&u, i as f64 * h).powi(4)).sum::<f64>() * h;
    let l4 = norm(&u, NormKind::L4).unwrap();
    assert!((l4.powi(4) - q).abs() < 1e-12 * q.max(1.0));
}

fn arb_samples() -> impl Strategy<Value = (usize, Vec<f64>)> {
    prop::sample::select(vec![4usize, 8, 16, 32, 64]).prop_flat_map(|n| (Just(n), prop::collection::vec(-10.0..10.0f64, n)))
}

proptest! {
    #[test]
    fn transform_round_trip((n, samples) in arb_samples(), l in 0.1..50.0f64) {
        let g = grid(l, n);
        let f = forward_transform(&g, &samples).unwrap();
        let back = inverse_transform(&f).unwrap();
        for (a, b) in samples.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-12 * 10.0);
        }
    }

    #[test]
    fn parseval_on_resolved_fields(seed in 0u64..1000, l in 0.1..20.0f64, decay in 0.0..2.0f64) {
        let g = grid(l, 32);
        let u = random_field(g, seed, decay);
        let s = inverse_transform(&u).unwrap();
        let quad: f64 = s.iter().map(|x| x * x).sum::<f64>() * l / 32.0;
        let l2 = norm(&u, NormKind::L2).unwrap();
        prop_assert!((quad - l2 * l2).abs() < 1e-12 * quad.max(1e-300) + 1e-300);
    }

    #[test]
    fn sobolev_norms_monotone_in_s(seed in 0u64..500, s1 in -1.0..2.0f64, ds in 0.0..1.0f64) {
        let g = grid(5.0, 32);
        let u = random_field(g, seed, 1.0);
        let a = norm(&u, NormKind::Hs(s1)).unwrap();
        let b = norm(&u, NormKind::Hs(s1 + ds)).unwrap();
        prop_assert!(b >= a * (1.0 - 1e-14));
        if s1 + ds >= 0.0 {
            let hd = norm(&u, NormKind::HsDot(s1 + ds)).unwrap();
            prop_assert!(hd <= b * (1.0 + 1e-14));
        }
    }

    #[test]
    fn cubic_is_symmetric(seed in 0u64..500) {
        let g = grid(1.0, 16);
        let a = random_field(g, seed, 0.5);
        let b = random_field(g, seed + 1, 0.5);
        let c = random_field(g, seed + 2, 0.5);
        let p = pointwise_cubic(&a, &b, &c).unwrap();
        let q = pointwise_cubic(&c, &a, &b).unwrap();
        prop_assert!(p.max_diff(&q).unwrap() < 1e-14);
    }
}
