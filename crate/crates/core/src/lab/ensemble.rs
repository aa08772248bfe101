//! Seeded random ensembles for the ratio experiments.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::ratios::{strichartz_ratio, trilinear_ratio, BandPreset};
use super::spacetime::{bracket, xsb_norm, SpaceTimeField, SpaceTimeLattice, XsbNormSpec};
use crate::error::{Error, Result};

/// Shape of the random fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    /// `<k>^{-s-1} <sigma>^{-1}` over the whole `tau` window.
    Spread,
    /// Unit magnitude on `|sigma| <= width`, zero elsewhere.
    Concentrated { width: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSpec {
    pub lattice: SpaceTimeLattice,
    pub s: f64,
    pub size: usize,
    pub seed: u64,
    pub profile: Profile,
    /// Largest time shift of the per-row modulation `e^{2 pi i theta sigma}`.
    pub max_shift: f64,
}

impl EnsembleSpec {
    pub fn new(lattice: SpaceTimeLattice, s: f64, size: usize, seed: u64) -> Self {
        Self {
            lattice,
            s,
            size,
            seed,
            profile: Profile::Spread,
            max_shift: 1.0,
        }
    }

    pub fn with_lattice(mut self, lattice: SpaceTimeLattice) -> Self {
        self.lattice = lattice;
        self
    }
}

/// Mean-zero random field normalized to unit `X^{s,1/2}` norm.
///
/// Each row draws one complex Gaussian and one shift, so the same seed gives
/// samples of the same continuum function on refined lattices.
pub fn random_field(lat: &SpaceTimeLattice, s: f64, profile: Profile, max_shift: f64, seed: u64) -> Result<SpaceTimeField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpaceTimeField::zeros(*lat);
    let dt = lat.dtau();
    for j in -lat.j_max()..=lat.j_max() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let theta = max_shift * (2.0 * rng.random::<f64>() - 1.0);
        if j == 0 {
            continue;
        }
        let g = Complex64::new(re, im);
        let k = lat.k(j);
        let tau0 = super::spacetime::characteristic(k);
        let (lo, hi, amp) = match profile {
            Profile::Spread => (-lat.i_max(), lat.i_max(), bracket(k).powf(-s - 1.0)),
            Profile::Concentrated { width } => (
                (((tau0 - width) / dt).ceil() as i64).max(-lat.i_max()),
                (((tau0 + width) / dt).floor() as i64).min(lat.i_max()),
                1.0,
            ),
        };
        if lo > hi {
            continue;
        }
        let vals = (lo..=hi)
            .map(|i| {
                let sig = lat.sigma(j, i);
                let mag = match profile {
                    Profile::Spread => amp / bracket(sig),
                    Profile::Concentrated { .. } => amp,
                };
                g * Complex64::from_polar(mag, 2.0 * PI * theta * sig)
            })
            .collect();
        f.set_row(j, lo, vals)?;
    }
    let n = xsb_norm(&f, &XsbNormSpec::xsb(s, 0.5))?;
    if !(n > 0.0) {
        return Err(Error::ZeroDenominator("random field normalization"));
    }
    Ok(f.scaled(1.0 / n))
}

/// Per-sample ratios and their maximum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleResult {
    pub ratios: Vec<f64>,
    pub max: f64,
    pub mean: f64,
    /// Seed of the maximizing sample.
    pub argmax_seed: u64,
}

/// Seed of the first field of sample `n`; the other fields use `slot` 1 and 2.
pub fn sample_seed(base: u64, n: usize, slot: u64) -> u64 {
    base.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((n as u64) << 2)
        .wrapping_add(slot)
}

fn reduce(spec: &EnsembleSpec, ratios: Vec<f64>) -> EnsembleResult {
    let (mut best, mut arg) = (f64::NEG_INFINITY, 0);
    for (n, &r) in ratios.iter().enumerate() {
        if r > best {
            best = r;
            arg = n;
        }
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len().max(1) as f64;
    EnsembleResult {
        max: best,
        mean,
        argmax_seed: sample_seed(spec.seed, arg, 0),
        ratios,
    }
}

fn field(spec: &EnsembleSpec, n: usize, slot: u64) -> Result<SpaceTimeField> {
    random_field(&spec.lattice, spec.s, spec.profile, spec.max_shift, sample_seed(spec.seed, n, slot))
}

/// Trilinear ratios over independent triples.
pub fn trilinear_ensemble(spec: &EnsembleSpec, bands: BandPreset) -> Result<EnsembleResult> {
    if spec.size == 0 {
        return Err(Error::config("size", "ensemble must be nonempty"));
    }
    let ratios = (0..spec.size)
        .into_par_iter()
        .map(|n| {
            let (u, v, w) = (field(spec, n, 0)?, field(spec, n, 1)?, field(spec, n, 2)?);
            trilinear_ratio(&u, &v, &w, spec.s, bands)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(reduce(spec, ratios))
}

/// Strichartz ratios `||u||_{L^4} / ||u||_{X^{0,b}}`.
pub fn strichartz_ensemble(spec: &EnsembleSpec, b: f64) -> Result<EnsembleResult> {
    if spec.size == 0 {
        return Err(Error::config("size", "ensemble must be nonempty"));
    }
    let ratios = (0..spec.size)
        .into_par_iter()
        .map(|n| strichartz_ratio(&field(spec, n, 0)?, b))
        .collect::<Result<Vec<_>>>()?;
    Ok(reduce(spec, ratios))
}

/// One line of a lab report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabRecord {
    pub experiment: String,
    pub lambda: f64,
    pub s: f64,
    pub b: f64,
    pub preset: String,
    pub ratio: f64,
    pub ensemble_size: usize,
    pub seed: u64,
}

pub fn preset_name(p: &BandPreset) -> String {
    match p {
        BandPreset::Unfiltered => "unfiltered".into(),
        BandPreset::LowLowHigh { cutoff } => format!("low_low_high({cutoff})"),
        BandPreset::LowHighHigh { cutoff } => format!("low_high_high({cutoff})"),
        BandPreset::HighHighHigh { cutoff } => format!("high_high_high({cutoff})"),
    }
}

pub fn write_lab_csv<W: Write>(records: &[LabRecord], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in records {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}
