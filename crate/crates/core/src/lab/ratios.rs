//! Ratio experiments: Strichartz, trilinear and Leibniz-rule probes.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::spacetime::{bracket, l2k_l1tau, xsb_norm, SpaceTimeField, SpaceTimeLattice, XsbNormSpec};
use super::trilinear::{convolve, spacetime_j, spacetime_nonresonant};
use crate::error::{Error, Result};
use crate::torus::fft_inverse;

type C = Complex64;

fn ratio(num: f64, den: f64, what: &'static str) -> Result<f64> {
    if !(den > 0.0) || !den.is_finite() {
        return Err(Error::ZeroDenominator(what));
    }
    Ok(num / den)
}

/// `int int |u|^4 dx dt` over one spatial period `[0, lambda)` and one time
/// period `[0, 1 / dtau)` of the lattice, integrated exactly.
pub fn l4_spacetime_integral(field: &SpaceTimeField) -> f64 {
    let lat = *field.lattice();
    let rows: Vec<_> = field.rows().filter(|(_, r)| !r.values.is_empty()).collect();
    if rows.is_empty() {
        return 0.0;
    }
    let j0 = rows.iter().map(|(j, _)| *j).min().unwrap();
    let j1 = rows.iter().map(|(j, _)| *j).max().unwrap();
    let i0 = rows.iter().map(|(_, r)| r.start).min().unwrap();
    let i1 = rows.iter().map(|(_, r)| r.end() - 1).max().unwrap();
    // |u|^4 has index spread at most twice the support spread in each direction.
    let mx = (2 * (j1 - j0) + 1) as usize;
    let mt = (2 * (i1 - i0) + 1) as usize;
    let mx = mx.next_power_of_two();
    let mt = mt.next_power_of_two();
    let w = lat.cell_weight();
    let mut grid = vec![C::new(0.0, 0.0); mx * mt];
    for (j, r) in &rows {
        let jx = (j - j0) as usize;
        for (n, v) in r.values.iter().enumerate() {
            let it = (r.start - i0) as usize + n;
            grid[jx * mt + it] = v * w;
        }
    }
    // 2D inverse DFT: along t for each x-row, then along x for each t-column.
    let it = fft_inverse(mt);
    for row in grid.chunks_mut(mt) {
        it.process(row);
    }
    let ix = fft_inverse(mx);
    let mut col = vec![C::new(0.0, 0.0); mx];
    let mut acc = 0.0;
    for t in 0..mt {
        for x in 0..mx {
            col[x] = grid[x * mt + t];
        }
        ix.process(&mut col);
        acc += col.iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>();
    }
    acc * (lat.lambda() / mx as f64) * (1.0 / (lat.dtau() * mt as f64))
}

/// `||u||_{L^4} / ||u||_{X^{0,b}}`.
pub fn strichartz_ratio(field: &SpaceTimeField, b: f64) -> Result<f64> {
    if !(b > 1.0 / 3.0) {
        return Err(Error::config("b", format!("must exceed 1/3, got {b}")));
    }
    let den = xsb_norm(field, &XsbNormSpec::xsb(0.0, b))?;
    let num = l4_spacetime_integral(field).powf(0.25);
    ratio(num, den, "strichartz ratio")
}

/// Band-filter preset for [`trilinear_ratio`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandPreset {
    /// `||J||_{X^{s,-1/2}} / prod ||.||_{X^{s,1/2}}` on unfiltered input.
    Unfiltered,
    /// `u, v` below the cutoff, `w` above.
    LowLowHigh { cutoff: f64 },
    /// `u` below the cutoff, `v, w` above.
    LowHighHigh { cutoff: f64 },
    /// All three above the cutoff.
    HighHighHigh { cutoff: f64 },
}

/// Small parameter used by the band presets.
pub const PRESET_EPS: f64 = 0.01;

fn xn(f: &SpaceTimeField, s: f64, b: f64) -> Result<f64> {
    xsb_norm(f, &XsbNormSpec::xsb(s, b))
}

pub fn trilinear_ratio(
    u: &SpaceTimeField,
    v: &SpaceTimeField,
    w: &SpaceTimeField,
    s: f64,
    bands: BandPreset,
) -> Result<f64> {
    let e = PRESET_EPS;
    let inf = f64::INFINITY;
    match bands {
        BandPreset::Unfiltered => {
            let j = spacetime_j(u, v, w)?;
            let num = xn(&j, s, -0.5)?;
            let den = xn(u, s, 0.5)? * xn(v, s, 0.5)? * xn(w, s, 0.5)?;
            ratio(num, den, "trilinear ratio")
        }
        BandPreset::LowLowHigh { cutoff } | BandPreset::LowHighHigh { cutoff } => {
            let ul = u.band_filtered(0.0, cutoff);
            let (vv, ww) = match bands {
                BandPreset::LowLowHigh { .. } => (v.band_filtered(0.0, cutoff), w.band_filtered(cutoff, inf)),
                _ => (v.band_filtered(cutoff, inf), w.band_filtered(cutoff, inf)),
            };
            let out = spacetime_nonresonant(&ul, &vv, &ww)?;
            let num = xn(&out, 1.0 - 2.0 * e, -0.5 + e)?;
            let pair = (xn(&ul, 0.5 + e, 0.5 - e)? * xn(&vv, 0.0, 0.5 - e)?)
                .min(xn(&vv, 0.5 + e, 0.5 - e)? * xn(&ul, 0.0, 0.5 - e)?);
            let den = pair * xn(&ww, 0.0, 0.5 - e / 2.0)?;
            ratio(num, den, "trilinear ratio")
        }
        BandPreset::HighHighHigh { cutoff } => {
            let (uh, vh, wh) = (
                u.band_filtered(cutoff, inf),
                v.band_filtered(cutoff, inf),
                w.band_filtered(cutoff, inf),
            );
            let out = spacetime_nonresonant(&uh, &vh, &wh)?;
            let num = xn(&out, -2.0 * e, -0.5 + e)?;
            let b = 7.0 / 18.0 + e;
            let den = xn(&uh, 0.0, b)? * xn(&vh, 0.0, b)? * xn(&wh, 0.0, b)?;
            ratio(num, den, "trilinear ratio")
        }
    }
}

/// Time-only function given by its transform on a `tau` lattice:
/// values `f^(i dtau)` for `i = start, start + 1, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSpectrum {
    pub dtau: f64,
    pub start: i64,
    pub values: Vec<C>,
}

/// Smooth cutoff equal to 1 on `|t| <= 1` and 0 for `|t| >= 2`.
pub fn eta(t: f64) -> f64 {
    let a = t.abs();
    if a <= 1.0 {
        return 1.0;
    }
    if a >= 2.0 {
        return 0.0;
    }
    let g = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    let x = 2.0 - a;
    g(x) / (g(x) + g(1.0 - x))
}

impl TimeSpectrum {
    /// The constant function 1: a discrete delta of mass 1 at `tau = 0`.
    pub fn constant_one(dtau: f64) -> Self {
        Self {
            dtau,
            start: 0,
            values: vec![C::new(1.0 / dtau, 0.0)],
        }
    }

    /// Single `tau` mode `e^{2 pi i tau t}` with unit mass.
    pub fn single_mode(dtau: f64, i: i64) -> Self {
        Self {
            dtau,
            start: i,
            values: vec![C::new(1.0 / dtau, 0.0)],
        }
    }

    /// `f^(tau) = int f(t) e^{-2 pi i tau t} dt` for `f` supported in
    /// `[-support, support]`, sampled for `|i| <= i_max`.
    pub fn from_time_fn(f: impl Fn(f64) -> f64, support: f64, dtau: f64, i_max: i64) -> Self {
        let m = 4096;
        let h = 2.0 * support / m as f64;
        let samples: Vec<(f64, f64)> = (0..=m)
            .map(|q| {
                let t = -support + q as f64 * h;
                (t, f(t))
            })
            .collect();
        let values = (-i_max..=i_max)
            .map(|i| {
                let tau = i as f64 * dtau;
                let mut acc = C::new(0.0, 0.0);
                for (q, (t, y)) in samples.iter().enumerate() {
                    let wq = if q == 0 || q == m { 0.5 } else { 1.0 };
                    acc += C::from_polar(wq * y, -2.0 * PI * tau * t);
                }
                acc * h
            })
            .collect();
        Self {
            dtau,
            start: -i_max,
            values,
        }
    }

    /// `e^{gamma t} eta(t)`.
    pub fn windowed_exponential(gamma: f64, dtau: f64, i_max: i64) -> Self {
        Self::from_time_fn(|t| (gamma * t).exp() * eta(t), 2.0, dtau, i_max)
    }

    pub fn l1(&self) -> f64 {
        self.dtau * self.values.iter().map(|v| v.norm()).sum::<f64>()
    }

    /// `||<tau>^b f^||_{L^2}`.
    pub fn hb_norm(&self, b: f64) -> f64 {
        let acc: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(n, v)| bracket((self.start + n as i64) as f64 * self.dtau).powf(2.0 * b) * v.norm_sqr())
            .sum();
        (self.dtau * acc).sqrt()
    }
}

/// Space-time transform of the product `f(t) g(x, t)`: a `tau` convolution in every row.
pub fn multiply_by_time_fn(f: &TimeSpectrum, g: &SpaceTimeField) -> Result<SpaceTimeField> {
    let lat = *g.lattice();
    if (f.dtau - lat.dtau()).abs() > 1e-12 * lat.dtau() {
        return Err(Error::Dimension("time spectrum and field use different dtau".into()));
    }
    let mut out = SpaceTimeField::zeros(lat);
    for (j, r) in g.rows() {
        let c = convolve(&f.values, &r.values);
        let start = f.start + r.start;
        // Keep the part that lies on the lattice window.
        let lo = start.max(-lat.i_max());
        let hi = (start + c.len() as i64 - 1).min(lat.i_max());
        if lo > hi {
            continue;
        }
        let vals = (lo..=hi)
            .map(|i| c[(i - start) as usize] * lat.dtau())
            .collect();
        out.set_row(j, lo, vals)?;
    }
    Ok(out)
}

/// `||f g||_{X^{s,b}} / (||f^||_{L^1} ||g||_{X^{s,b}} + ||f||_{H^b} ||<k>^s g~||_{L^2 L^1})`.
pub fn leibniz_ratio(f: &TimeSpectrum, g: &SpaceTimeField, s: f64, b: f64) -> Result<f64> {
    let lat = *g.lattice();
    // Room for the whole convolution, so nothing is truncated.
    let span = f.start.abs().max((f.start + f.values.len() as i64).abs());
    let wide = SpaceTimeLattice::with_bounds(lat.lambda(), lat.j_max(), lat.dtau(), lat.i_max() + span)?;
    let gl = g.embedded(wide)?;
    let fg = multiply_by_time_fn(f, &gl)?;
    let spec = XsbNormSpec::xsb(s, b);
    let num = xsb_norm(&fg, &spec)?;
    let den = f.l1() * xsb_norm(g, &spec)? + f.hb_norm(b) * l2k_l1tau(g, s);
    ratio(num, den, "leibniz ratio")
}
