//! Initial data and forcing profiles.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::torus::{norm, NormKind, SpectralField, TorusGrid};

/// Mean-zero field with random phases and magnitudes
/// `(1 + |k|)^-decay * exp(-|k| / rolloff)`.
pub fn random_field(grid: TorusGrid, seed: u64, decay: f64, rolloff: f64) -> Result<SpectralField> {
    if !(rolloff > 0.0) {
        return Err(Error::config("rolloff", format!("must be positive, got {rolloff}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = SpectralField::from_index_fn(grid, |j| {
        if j == 0 {
            return Complex64::new(0.0, 0.0);
        }
        let k = j as f64 / grid.period();
        let mag = (1.0 + k).powf(-decay) * (-k / rolloff).exp();
        Complex64::from_polar(mag, 2.0 * PI * rng.random::<f64>())
    });
    Ok(f)
}

/// `u` rescaled so that `||u||_{H^s} = size`.
pub fn normalized(u: &SpectralField, s: f64, size: f64) -> Result<SpectralField> {
    let n = norm(u, NormKind::Hs(s))?;
    if !(n > 0.0) {
        return Err(Error::ZeroDenominator("profile normalization"));
    }
    Ok(u.scaled(size / n))
}

/// Sum of translates of `a sech(a (x - x0))` over `2 images + 1` periods,
/// with the mean removed.
pub fn periodized_soliton(grid: TorusGrid, a: f64, x0: f64, images: i64) -> Result<SpectralField> {
    let l = grid.period();
    let u = SpectralField::from_fn(grid, |x| {
        (-images..=images)
            .map(|m| a / (a * (x - x0 - m as f64 * l)).cosh())
            .sum()
    })?;
    Ok(u.without_mean().resolved())
}

/// `cos(2 pi k1 x) + sin(2 pi k2 x)` at indices `j1, j2`, scaled to unit
/// homogeneous `H^1` norm.
pub fn two_mode_forcing(grid: TorusGrid, j1: i64, j2: i64) -> Result<SpectralField> {
    if j1 <= 0 || j2 <= 0 || j1 == j2 {
        return Err(Error::config("forcing", "mode indices must be distinct and positive"));
    }
    let f = SpectralField::from_modes(
        grid,
        &[(j1, Complex64::new(0.5, 0.0)), (j2, Complex64::new(0.0, -0.5))],
    )?;
    let h1 = norm(&f, NormKind::HsDot(1.0))?;
    Ok(f.scaled(1.0 / h1))
}
