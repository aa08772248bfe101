#![allow(dead_code)]

use mkdv_core::torus::{SpectralField, TorusGrid};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Mean-zero random field with coefficient size decaying like `(1+|j|)^-decay`.
pub fn random_field(grid: TorusGrid, seed: u64, decay: f64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SpectralField::from_index_fn(grid, |j| {
        if j == 0 {
            return Complex64::new(0.0, 0.0);
        }
        let a = (1.0 + j as f64).powf(-decay);
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * a
    })
}

/// Direct trigonometric sum at a point, Nyquist excluded.
pub fn eval_at(u: &SpectralField, x: f64) -> f64 {
    let g = u.grid();
    let jmax = g.max_index();
    let mut acc = Complex64::new(0.0, 0.0);
    for j in -jmax..=jmax {
        acc += u.coeff(j) * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 * x / g.period());
    }
    acc.re
}

/// Brute-force truncated triple convolution of coefficients.
pub fn conv3_oracle(a: &SpectralField, b: &SpectralField, c: &SpectralField, j: i64) -> Complex64 {
    let m = a.grid().max_index();
    let mut acc = Complex64::new(0.0, 0.0);
    for j1 in -m..=m {
        for j2 in -m..=m {
            let j3 = j - j1 - j2;
            if j3.abs() <= m {
                acc += a.coeff(j1) * b.coeff(j2) * c.coeff(j3);
            }
        }
    }
    acc
}
