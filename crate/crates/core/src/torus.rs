//! Periodic lattice, band-limited real fields and their transforms.
//!
//! Fields on the torus of period `L` are stored as amplitude coefficients in
//! FFT order: `u(x) = sum_j c_j exp(2 pi i j x / L)`, frequency `k = j / L`.
//! Norms use the measure `L * sum_j`, which matches physical integrals.
//!
//! The Nyquist slot is carried by the transforms so that a round trip is
//! exact, but every analytic operation (norms, multipliers, products) treats
//! it as zero.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-10;
const IMAG_RESIDUE_TOL: f64 = 1e-12;
const MEAN_ZERO_TOL: f64 = 1e-13;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn fft_forward(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(len))
}

pub(crate) fn fft_inverse(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(len))
}

/// Periodic spatial lattice: `n_modes` samples on a circle of length `period`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusGrid {
    period: f64,
    n_modes: usize,
}

impl TorusGrid {
    pub fn new(period: f64, n_modes: usize) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::config("period", format!("must be positive and finite, got {period}")));
        }
        if n_modes < 4 || !n_modes.is_multiple_of(2) {
            return Err(Error::config("n_modes", format!("must be even and >= 4, got {n_modes}")));
        }
        Ok(Self { period, n_modes })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Frequency spacing `1 / L`.
    pub fn frequency_step(&self) -> f64 {
        1.0 / self.period
    }

    /// Largest index with a resolved (non-Nyquist) mode.
    pub fn max_index(&self) -> i64 {
        (self.n_modes / 2) as i64 - 1
    }

    pub fn max_frequency(&self) -> f64 {
        self.max_index() as f64 / self.period
    }

    /// Signed index of an FFT slot. The Nyquist slot maps to `+n/2`.
    pub fn index_of_slot(&self, slot: usize) -> i64 {
        let n = self.n_modes;
        if slot <= n / 2 {
            slot as i64
        } else {
            slot as i64 - n as i64
        }
    }

    /// FFT slot of a resolved index, or `None` if `|j| > n/2 - 1`.
    pub fn slot_of_index(&self, index: i64) -> Option<usize> {
        if index.abs() > self.max_index() {
            return None;
        }
        Some(if index >= 0 {
            index as usize
        } else {
            (self.n_modes as i64 + index) as usize
        })
    }

    pub fn nyquist_slot(&self) -> usize {
        self.n_modes / 2
    }

    pub fn is_nyquist(&self, slot: usize) -> bool {
        slot == self.n_modes / 2
    }

    /// Frequency `k = j / L` of a slot (zero for the Nyquist slot).
    pub fn frequency(&self, slot: usize) -> f64 {
        if self.is_nyquist(slot) {
            0.0
        } else {
            self.index_of_slot(slot) as f64 / self.period
        }
    }

    /// Physical sample points `x_m = m L / n`.
    pub fn points(&self) -> Vec<f64> {
        let h = self.period / self.n_modes as f64;
        (0..self.n_modes).map(|m| m as f64 * h).collect()
    }

    /// Same period with a different number of modes.
    pub fn with_modes(&self, n_modes: usize) -> Result<Self> {
        Self::new(self.period, n_modes)
    }

    pub(crate) fn same_lattice(&self, other: &TorusGrid) -> bool {
        self.n_modes == other.n_modes && (self.period - other.period).abs() <= 1e-12 * self.period
    }

    pub(crate) fn check_same(&self, other: &TorusGrid, what: &str) -> Result<()> {
        if self.same_lattice(other) {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "{what}: lattice (L={}, n={}) vs (L={}, n={})",
                self.period, self.n_modes, other.period, other.n_modes
            )))
        }
    }
}

/// Real band-limited field stored by its Hermitian-symmetric coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
}

fn hermitian_scale(coeffs: &[Complex64]) -> f64 {
    coeffs.iter().fold(0.0_f64, |m, c| m.max(c.norm()))
}

fn hermitian_residual(grid: &TorusGrid, coeffs: &[Complex64]) -> f64 {
    let n = grid.n_modes;
    let mut worst = coeffs[0].im.abs().max(coeffs[n / 2].im.abs());
    for slot in 1..n / 2 {
        worst = worst.max((coeffs[slot] - coeffs[n - slot].conj()).norm());
    }
    worst
}

fn symmetrize(grid: &TorusGrid, coeffs: &mut [Complex64]) {
    let n = grid.n_modes;
    coeffs[0].im = 0.0;
    coeffs[n / 2].im = 0.0;
    for slot in 1..n / 2 {
        let avg = (coeffs[slot] + coeffs[n - slot].conj()) * 0.5;
        coeffs[slot] = avg;
        coeffs[n - slot] = avg.conj();
    }
}

impl SpectralField {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.n_modes],
        }
    }

    /// Field from coefficients in FFT order. Fails if they are not Hermitian.
    pub fn from_coeffs(grid: TorusGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.n_modes {
            return Err(Error::Dimension(format!(
                "expected {} coefficients, got {}",
                grid.n_modes,
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Invariant("non-finite coefficient".into()));
        }
        let scale = hermitian_scale(&coeffs);
        let resid = hermitian_residual(&grid, &coeffs);
        if resid > HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE) && resid > 0.0 {
            return Err(Error::Invariant(format!(
                "coefficients are not Hermitian (residual {resid:e})"
            )));
        }
        let mut coeffs = coeffs;
        symmetrize(&grid, &mut coeffs);
        Ok(Self { grid, coeffs })
    }

    /// Field from a list of `(index, coefficient)` pairs for `index >= 0`;
    /// the conjugate is placed at `-index`.
    pub fn from_modes(grid: TorusGrid, modes: &[(i64, Complex64)]) -> Result<Self> {
        let mut f = Self::zeros(grid);
        for &(j, c) in modes {
            if j < 0 {
                return Err(Error::config("modes", format!("index must be >= 0, got {j}")));
            }
            let slot = grid
                .slot_of_index(j)
                .ok_or_else(|| Error::Dimension(format!("index {j} is not resolved on n={}", grid.n_modes)))?;
            if j == 0 {
                f.coeffs[0] += Complex64::new(c.re, 0.0);
            } else {
                f.coeffs[slot] += c;
                let neg = grid.slot_of_index(-j).unwrap();
                f.coeffs[neg] += c.conj();
            }
        }
        Ok(f)
    }

    /// Samples a real function on the grid and transforms it.
    pub fn from_fn(grid: TorusGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let samples: Vec<f64> = grid.points().into_iter().map(f).collect();
        forward_transform(&grid, &samples)
    }

    /// Builds a field coefficient-wise from a Hermitian-consistent rule on the
    /// resolved band. `f(j)` is used for `j > 0`, its conjugate for `-j`.
    pub fn from_index_fn(grid: TorusGrid, mut f: impl FnMut(i64) -> Complex64) -> Self {
        let mut out = Self::zeros(grid);
        out.coeffs[0] = Complex64::new(f(0).re, 0.0);
        for j in 1..=grid.max_index() {
            let c = f(j);
            out.coeffs[j as usize] = c;
            out.coeffs[grid.n_modes - j as usize] = c.conj();
        }
        out
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient at a signed index; zero outside the resolved band.
    pub fn coeff(&self, index: i64) -> Complex64 {
        match self.grid.slot_of_index(index) {
            Some(slot) => self.coeffs[slot],
            None => Complex64::new(0.0, 0.0),
        }
    }

    pub fn nyquist(&self) -> f64 {
        self.coeffs[self.grid.nyquist_slot()].re
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn max_abs_coeff(&self) -> f64 {
        hermitian_scale(&self.coeffs)
    }

    /// True when the mean coefficient vanishes up to roundoff.
    pub fn is_mean_zero(&self) -> bool {
        self.coeffs[0].norm() <= MEAN_ZERO_TOL * self.max_abs_coeff()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Copy with the mean removed.
    pub fn without_mean(&self) -> Self {
        let mut out = self.clone();
        out.coeffs[0] = Complex64::new(0.0, 0.0);
        out
    }

    /// Copy with the Nyquist slot cleared.
    pub fn resolved(&self) -> Self {
        let mut out = self.clone();
        out.coeffs[self.grid.nyquist_slot()] = Complex64::new(0.0, 0.0);
        out
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub(crate) fn from_raw(grid: TorusGrid, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.n_modes);
        Self { grid, coeffs }
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid, "add")?;
        Ok(self.add_unchecked(other, 1.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid, "sub")?;
        Ok(self.add_unchecked(other, -1.0))
    }

    /// `self + a * other` without a lattice check.
    pub(crate) fn add_unchecked(&self, other: &Self, a: f64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| x + y * a)
                .collect(),
        }
    }

    /// Maximum coefficient-wise distance to another field on the same lattice.
    pub fn max_diff(&self, other: &Self) -> Result<f64> {
        self.grid.check_same(&other.grid, "max_diff")?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).norm())))
    }

    /// Zero-pads or truncates to a lattice with `n_modes` on the same period.
    /// The Nyquist slot is dropped.
    pub fn with_modes(&self, n_modes: usize) -> Result<Self> {
        let grid = self.grid.with_modes(n_modes)?;
        let mut out = Self::zeros(grid);
        let jmax = grid.max_index().min(self.grid.max_index());
        for j in -jmax..=jmax {
            let s = grid.slot_of_index(j).unwrap();
            out.coeffs[s] = self.coeff(j);
        }
        Ok(out)
    }

    /// Physical samples on a lattice of `m` points (Nyquist dropped).
    /// The resolved band must fit: `m >= n`.
    pub fn sample_on(&self, m: usize) -> Vec<f64> {
        debug_assert!(m >= self.grid.n_modes);
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        let jmax = self.grid.max_index();
        for j in -jmax..=jmax {
            let src = self.grid.slot_of_index(j).unwrap();
            let dst = if j >= 0 { j as usize } else { (m as i64 + j) as usize };
            buf[dst] = self.coeffs[src];
        }
        fft_inverse(m).process(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Truncation of `m` physical samples back onto this field's band.
    pub(crate) fn from_samples_truncated(grid: TorusGrid, samples: &[f64]) -> Self {
        let m = samples.len();
        let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        fft_forward(m).process(&mut buf);
        let inv = 1.0 / m as f64;
        let mut out = Self::zeros(grid);
        let jmax = grid.max_index().min(m as i64 / 2 - 1);
        for j in -jmax..=jmax {
            let src = if j >= 0 { j as usize } else { (m as i64 + j) as usize };
            out.coeffs[grid.slot_of_index(j).unwrap()] = buf[src] * inv;
        }
        symmetrize(&grid, &mut out.coeffs);
        out
    }
}

/// Complex field on a torus lattice, used for the Miura variable.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
}

impl ComplexField {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.n_modes],
        }
    }

    pub fn from_coeffs(grid: TorusGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.n_modes {
            return Err(Error::Dimension(format!(
                "expected {} coefficients, got {}",
                grid.n_modes,
                coeffs.len()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    /// `re + i * im` for two real fields on the same lattice.
    pub fn from_parts(re: &SpectralField, im: &SpectralField) -> Result<Self> {
        re.grid.check_same(&im.grid, "complex field parts")?;
        let i = Complex64::new(0.0, 1.0);
        Ok(Self {
            grid: re.grid,
            coeffs: re.coeffs.iter().zip(&im.coeffs).map(|(a, b)| a + i * b).collect(),
        })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, index: i64) -> Complex64 {
        match self.grid.slot_of_index(index) {
            Some(slot) => self.coeffs[slot],
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Real and imaginary parts as real fields.
    pub fn parts(&self) -> (SpectralField, SpectralField) {
        let n = self.grid.n_modes;
        let mut re = vec![Complex64::new(0.0, 0.0); n];
        let mut im = vec![Complex64::new(0.0, 0.0); n];
        for slot in 0..n {
            let mirror = (n - slot) % n;
            let a = self.coeffs[slot];
            let b = self.coeffs[mirror].conj();
            re[slot] = (a + b) * 0.5;
            im[slot] = (a - b) * Complex64::new(0.0, -0.5);
        }
        (SpectralField::from_raw(self.grid, re), SpectralField::from_raw(self.grid, im))
    }

    pub fn max_abs_coeff(&self) -> f64 {
        hermitian_scale(&self.coeffs)
    }

    pub fn max_diff(&self, other: &Self) -> Result<f64> {
        self.grid.check_same(&other.grid, "max_diff")?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).norm())))
    }

    pub(crate) fn from_raw(grid: TorusGrid, coeffs: Vec<Complex64>) -> Self {
        Self { grid, coeffs }
    }

    pub(crate) fn map_coeffs(&self, f: impl Fn(usize, Complex64) -> Complex64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().enumerate().map(|(s, &c)| f(s, c)).collect(),
        }
    }

    pub(crate) fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// Complex physical samples on the native lattice.
    pub fn samples(&self) -> Vec<Complex64> {
        let mut buf = self.coeffs.clone();
        buf[self.grid.nyquist_slot()] = Complex64::new(0.0, 0.0);
        fft_inverse(buf.len()).process(&mut buf);
        buf
    }

    /// Transform of complex samples; the Nyquist slot is cleared.
    pub fn from_samples(grid: TorusGrid, samples: &[Complex64]) -> Result<Self> {
        if samples.len() != grid.n_modes {
            return Err(Error::Dimension("sample count".into()));
        }
        let mut buf = samples.to_vec();
        fft_forward(buf.len()).process(&mut buf);
        let inv = 1.0 / buf.len() as f64;
        for c in buf.iter_mut() {
            *c *= inv;
        }
        buf[grid.nyquist_slot()] = Complex64::new(0.0, 0.0);
        Ok(Self { grid, coeffs: buf })
    }

    /// Pointwise product on the native lattice. Exact when the sum of the
    /// factors' bands stays below `n/2`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid, "complex product")?;
        let a = self.samples();
        let b = other.samples();
        let prod: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        Self::from_samples(self.grid, &prod)
    }

    /// `d/dx` with symbol `2 pi i k`.
    pub fn derivative(&self) -> Self {
        let g = self.grid;
        self.map_coeffs(|s, c| c * Complex64::new(0.0, 2.0 * PI * g.frequency(s)))
    }
}

/// Coefficients `c_j = (1/n) sum_m u(x_m) exp(-2 pi i j m / n)` of real samples.
pub fn forward_transform(grid: &TorusGrid, samples: &[f64]) -> Result<SpectralField> {
    if samples.len() != grid.n_modes {
        return Err(Error::Dimension(format!(
            "expected {} samples, got {}",
            grid.n_modes,
            samples.len()
        )));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::Invariant("non-finite sample".into()));
    }
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft_forward(grid.n_modes).process(&mut buf);
    let inv = 1.0 / grid.n_modes as f64;
    for c in buf.iter_mut() {
        *c *= inv;
    }
    symmetrize(grid, &mut buf);
    Ok(SpectralField::from_raw(*grid, buf))
}

/// Physical samples of a field, including its Nyquist coefficient.
pub fn inverse_transform(field: &SpectralField) -> Result<Vec<f64>> {
    let scale = field.max_abs_coeff();
    let resid = hermitian_residual(&field.grid, &field.coeffs);
    if resid > HERMITIAN_TOL * scale && resid > 0.0 {
        return Err(Error::Invariant(format!("field is not Hermitian (residual {resid:e})")));
    }
    let mut buf = field.coeffs.clone();
    fft_inverse(buf.len()).process(&mut buf);
    let worst_im = buf.iter().fold(0.0_f64, |m, c| m.max(c.im.abs()));
    let bound = IMAG_RESIDUE_TOL * (scale * field.grid.n_modes as f64).max(f64::MIN_POSITIVE);
    if worst_im > bound {
        return Err(Error::Invariant(format!("imaginary residue {worst_im:e} after inverse transform")));
    }
    Ok(buf.into_iter().map(|c| c.re).collect())
}

/// Norm selector for [`norm`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    L2,
    L4,
    /// Inhomogeneous Sobolev norm with weight `(1 + |k|)^s`.
    Hs(f64),
    /// Homogeneous Sobolev norm with weight `|k|^s`; requires zero mean.
    HsDot(f64),
}

fn weighted_sum(field: &SpectralField, w: impl Fn(f64) -> f64) -> f64 {
    let g = field.grid;
    let mut acc = 0.0;
    for (slot, c) in field.coeffs.iter().enumerate() {
        if g.is_nyquist(slot) {
            continue;
        }
        acc += w(g.frequency(slot)) * c.norm_sqr();
    }
    acc * g.period
}

pub fn norm(field: &SpectralField, kind: NormKind) -> Result<f64> {
    match kind {
        NormKind::L2 => Ok(weighted_sum(field, |_| 1.0).sqrt()),
        NormKind::Hs(s) => {
            if !s.is_finite() {
                return Err(Error::config("s", "must be finite"));
            }
            Ok(weighted_sum(field, |k| (1.0 + k.abs()).powf(2.0 * s)).sqrt())
        }
        NormKind::HsDot(s) => {
            if !s.is_finite() {
                return Err(Error::config("s", "must be finite"));
            }
            if !field.is_mean_zero() {
                return Err(Error::Invariant("homogeneous norm of a field with nonzero mean".into()));
            }
            Ok(weighted_sum(field, |k| if k == 0.0 { 0.0 } else { k.abs().powf(2.0 * s) }).sqrt())
        }
        NormKind::L4 => {
            let m = 2 * field.grid.n_modes;
            let u = field.sample_on(m);
            let h = field.grid.period / m as f64;
            Ok((h * u.iter().map(|x| x.powi(4)).sum::<f64>()).powf(0.25))
        }
    }
}

/// Real inner product `int u v dx` over the resolved band.
pub fn inner(a: &SpectralField, b: &SpectralField) -> Result<f64> {
    a.grid.check_same(&b.grid, "inner product")?;
    Ok(inner_unchecked(a, b))
}

pub(crate) fn inner_unchecked(a: &SpectralField, b: &SpectralField) -> f64 {
    let g = a.grid;
    let mut acc = 0.0;
    for slot in 0..g.n_modes {
        if g.is_nyquist(slot) {
            continue;
        }
        acc += (a.coeffs[slot].conj() * b.coeffs[slot]).re;
    }
    acc * g.period
}

/// Dealiased product `P(a b c)`: physical multiplication on a `2n` lattice
/// followed by truncation to the resolved band. Exact for band-limited input.
pub fn pointwise_cubic(a: &SpectralField, b: &SpectralField, c: &SpectralField) -> Result<SpectralField> {
    a.grid.check_same(&b.grid, "cubic product")?;
    a.grid.check_same(&c.grid, "cubic product")?;
    let m = 2 * a.grid.n_modes;
    let ua = a.sample_on(m);
    let ub = if b == a { ua.clone() } else { b.sample_on(m) };
    let uc = if c == a {
        ua.clone()
    } else if c == b {
        ub.clone()
    } else {
        c.sample_on(m)
    };
    let prod: Vec<f64> = (0..m).map(|i| ua[i] * ub[i] * uc[i]).collect();
    Ok(SpectralField::from_samples_truncated(a.grid, &prod))
}

/// `P(u^3)` for a single field, reusing one set of samples.
pub fn cube(u: &SpectralField) -> SpectralField {
    let m = 2 * u.grid.n_modes;
    let s = u.sample_on(m);
    let prod: Vec<f64> = s.iter().map(|x| x * x * x).collect();
    SpectralField::from_samples_truncated(u.grid, &prod)
}

/// `P(a^2 b)`.
pub(crate) fn square_times(a: &SpectralField, b: &SpectralField) -> SpectralField {
    let m = 2 * a.grid.n_modes;
    let sa = a.sample_on(m);
    let sb = b.sample_on(m);
    let prod: Vec<f64> = sa.iter().zip(&sb).map(|(x, y)| x * x * y).collect();
    SpectralField::from_samples_truncated(a.grid, &prod)
}

/// `d^order/dx^order` with symbol `(2 pi i k)^order`; the Nyquist slot is cleared.
pub fn derivative(field: &SpectralField, order: u32) -> SpectralField {
    let g = field.grid;
    let mut out = field.clone();
    for (slot, c) in out.coeffs.iter_mut().enumerate() {
        if g.is_nyquist(slot) {
            *c = Complex64::new(0.0, 0.0);
            continue;
        }
        *c *= Complex64::new(0.0, 2.0 * PI * g.frequency(slot)).powu(order);
    }
    out
}
