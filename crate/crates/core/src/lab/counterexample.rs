//! Counterexample showing the homogeneous trilinear estimate fails.
//!
//! Three fields with single-frequency support at `1/lambda`, `-2/lambda` and
//! `sqrt(lambda)`, each occupying the cells with `|tau - 4 pi^2 k^3| <= 1`.

use num_complex::Complex64;
use serde::Serialize;

use super::spacetime::{characteristic, xsb_norm, SpaceTimeField, SpaceTimeLattice, XsbNormSpec};
use super::trilinear::{spacetime_j_with, TrilinearPath};
use crate::diagnostics::fit_slope;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleRow {
    pub lambda: f64,
    /// `3 (k1 + k2)(k2 + k3)(k3 + k1)`.
    pub m_value: f64,
    pub j_norm: f64,
    pub v1_norm: f64,
    pub v2_norm: f64,
    pub v3_norm: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub s: f64,
    pub homogeneous: bool,
    pub rows: Vec<CounterexampleRow>,
    /// Least-squares slope of `log ratio` against `log lambda`.
    pub slope: f64,
}

fn sqrt_index(lambda: f64) -> Result<i64> {
    let r = lambda.sqrt().round();
    if !(lambda.is_finite() && lambda >= 1.0) || (r * r - lambda).abs() > 1e-9 {
        return Err(Error::config(
            "lambda",
            format!("must be a perfect square >= 1, got {lambda}"),
        ));
    }
    Ok(r as i64)
}

/// Row `j` with unit values on the cells `|sigma| <= 1`.
pub fn unit_window(lat: &SpaceTimeLattice, j: i64) -> Result<SpaceTimeField> {
    let tau0 = characteristic(lat.k(j));
    let lo = ((tau0 - 1.0) / lat.dtau()).ceil() as i64;
    let hi = ((tau0 + 1.0) / lat.dtau()).floor() as i64;
    let mut f = SpaceTimeField::zeros(*lat);
    f.set_row(j, lo, vec![Complex64::new(1.0, 0.0); (hi - lo + 1) as usize])?;
    Ok(f)
}

/// The three counterexample fields on their lattice.
pub fn counterexample_fields(lambda: f64, dtau: f64) -> Result<(SpaceTimeField, SpaceTimeField, SpaceTimeField)> {
    let r = sqrt_index(lambda)?;
    let lat = SpaceTimeLattice::new(lambda, r as f64, dtau)?;
    let j3 = r * r * r;
    Ok((unit_window(&lat, 1)?, unit_window(&lat, -2)?, unit_window(&lat, j3)?))
}

/// Evaluates the counterexample ratio at one `lambda`.
pub fn counterexample_row(lambda: f64, s: f64, homogeneous: bool, dtau: f64) -> Result<CounterexampleRow> {
    let (v1, v2, v3) = counterexample_fields(lambda, dtau)?;
    let (k1, k2, k3) = (1.0 / lambda, -2.0 / lambda, lambda.sqrt());
    let m_value = 3.0 * (k1 + k2) * (k2 + k3) * (k3 + k1);
    let j = spacetime_j_with(&v1, &v2, &v3, TrilinearPath::Sparse)?;
    let mut spec = XsbNormSpec::xsb(s, 0.5);
    spec.homogeneous = homogeneous;
    let j_norm = xsb_norm(&j, &spec)?;
    let v1_norm = xsb_norm(&v1, &spec)?;
    let v2_norm = xsb_norm(&v2, &spec)?;
    let v3_norm = xsb_norm(&v3, &spec)?;
    let den = v1_norm * v2_norm * v3_norm;
    if !(den > 0.0) {
        return Err(Error::ZeroDenominator("counterexample ratio"));
    }
    Ok(CounterexampleRow {
        lambda,
        m_value,
        j_norm,
        v1_norm,
        v2_norm,
        v3_norm,
        ratio: j_norm / den,
    })
}

/// Sweeps `lambdas` and fits the growth exponent of the ratio.
pub fn three_wave_counterexample(lambdas: &[f64], s: f64, homogeneous: bool, dtau: f64) -> Result<CounterexampleReport> {
    use rayon::prelude::*;
    if lambdas.len() < 2 {
        return Err(Error::config("lambdas", "need at least two values"));
    }
    let rows = lambdas
        .par_iter()
        .map(|&l| counterexample_row(l, s, homogeneous, dtau))
        .collect::<Result<Vec<_>>>()?;
    let x: Vec<f64> = rows.iter().map(|r| r.lambda.ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.ratio.ln()).collect();
    Ok(CounterexampleReport {
        s,
        homogeneous,
        slope: fit_slope(&x, &y),
        rows,
    })
}
