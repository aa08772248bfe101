//! Fields on a finite `(k, tau)` lattice and the Bourgain-type norms.
//!
//! Frequencies are `k = j / lambda` and `tau = i * dtau`. Each cell carries the
//! measure `dtau / lambda`. Storage is sparse in `k`: every row holds one
//! contiguous window of `tau` cells.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Free (Airy) characteristic `tau = 4 pi^2 k^3`.
pub fn characteristic(k: f64) -> f64 {
    4.0 * PI * PI * k * k * k
}

/// `<x> = 1 + |x|`.
pub fn bracket(x: f64) -> f64 {
    1.0 + x.abs()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceTimeLattice {
    lambda: f64,
    j_max: i64,
    dtau: f64,
    i_max: i64,
}

impl SpaceTimeLattice {
    /// Lattice with `|k| <= k_max` and `|tau| <= 4 pi^2 k_max^3 + 8`, so every
    /// characteristic point of a retained frequency lies inside the window.
    pub fn new(lambda: f64, k_max: f64, dtau: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::config("lambda", format!("must be positive, got {lambda}")));
        }
        if !(k_max.is_finite() && k_max > 0.0) {
            return Err(Error::config("k_max", format!("must be positive, got {k_max}")));
        }
        let j_max = (k_max * lambda + 1e-9).floor() as i64;
        if j_max < 1 {
            return Err(Error::config("k_max", "smaller than one frequency step"));
        }
        let t_max = characteristic(k_max) + 8.0;
        Self::with_bounds(lambda, j_max, dtau, (t_max / dtau).ceil() as i64)
    }

    /// Explicit index bounds `|j| <= j_max`, `|i| <= i_max`.
    pub fn with_bounds(lambda: f64, j_max: i64, dtau: f64, i_max: i64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::config("lambda", format!("must be positive, got {lambda}")));
        }
        if !(dtau.is_finite() && dtau > 0.0) {
            return Err(Error::config("dtau", format!("must be positive, got {dtau}")));
        }
        if j_max < 0 || i_max < 0 {
            return Err(Error::config("lattice", "negative index bound"));
        }
        Ok(Self {
            lambda,
            j_max,
            dtau,
            i_max,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn j_max(&self) -> i64 {
        self.j_max
    }
    pub fn i_max(&self) -> i64 {
        self.i_max
    }
    pub fn dtau(&self) -> f64 {
        self.dtau
    }
    pub fn k(&self, j: i64) -> f64 {
        j as f64 / self.lambda
    }
    pub fn tau(&self, i: i64) -> f64 {
        i as f64 * self.dtau
    }
    pub fn sigma(&self, j: i64, i: i64) -> f64 {
        self.tau(i) - characteristic(self.k(j))
    }
    pub fn cell_weight(&self) -> f64 {
        self.dtau / self.lambda
    }
    /// Nearest `tau` index to a value.
    pub fn tau_index(&self, tau: f64) -> i64 {
        (tau / self.dtau).round() as i64
    }

    /// Lattice large enough to hold a trilinear product of fields on `self`.
    pub fn tripled(&self) -> Self {
        Self {
            j_max: 3 * self.j_max,
            i_max: 3 * self.i_max,
            ..*self
        }
    }

    /// Same spacing with `dtau` halved and the index range doubled.
    pub fn refined(&self) -> Self {
        Self {
            dtau: self.dtau * 0.5,
            i_max: 2 * self.i_max,
            ..*self
        }
    }

    pub(crate) fn check_same(&self, other: &Self, what: &str) -> Result<()> {
        let same = self.j_max == other.j_max
            && self.i_max == other.i_max
            && (self.lambda - other.lambda).abs() <= 1e-12 * self.lambda
            && (self.dtau - other.dtau).abs() <= 1e-12 * self.dtau;
        if same {
            Ok(())
        } else {
            Err(Error::Dimension(format!("{what}: lattices differ ({self:?} vs {other:?})")))
        }
    }
}

/// One `k` row: values at `tau` indices `start, start + 1, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct TauRow {
    pub start: i64,
    pub values: Vec<Complex64>,
}

impl TauRow {
    pub fn end(&self) -> i64 {
        self.start + self.values.len() as i64
    }
    pub fn get(&self, i: i64) -> Complex64 {
        if i < self.start || i >= self.end() {
            Complex64::new(0.0, 0.0)
        } else {
            self.values[(i - self.start) as usize]
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    lattice: SpaceTimeLattice,
    rows: BTreeMap<i64, TauRow>,
}

impl SpaceTimeField {
    pub fn zeros(lattice: SpaceTimeLattice) -> Self {
        Self {
            lattice,
            rows: BTreeMap::new(),
        }
    }

    /// Dense field `f(k, tau)` over the whole lattice.
    pub fn from_fn(lattice: SpaceTimeLattice, mut f: impl FnMut(f64, f64) -> Complex64) -> Self {
        let mut out = Self::zeros(lattice);
        for j in -lattice.j_max..=lattice.j_max {
            let values = (-lattice.i_max..=lattice.i_max)
                .map(|i| f(lattice.k(j), lattice.tau(i)))
                .collect();
            out.rows.insert(
                j,
                TauRow {
                    start: -lattice.i_max,
                    values,
                },
            );
        }
        out
    }

    pub fn lattice(&self) -> &SpaceTimeLattice {
        &self.lattice
    }

    pub fn rows(&self) -> impl Iterator<Item = (i64, &TauRow)> {
        self.rows.iter().map(|(j, r)| (*j, r))
    }

    pub fn row(&self, j: i64) -> Option<&TauRow> {
        self.rows.get(&j)
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    /// Replaces row `j`. An empty `values` removes the row.
    pub fn set_row(&mut self, j: i64, start: i64, values: Vec<Complex64>) -> Result<()> {
        let lat = self.lattice;
        if j.abs() > lat.j_max {
            return Err(Error::Dimension(format!("row j = {j} outside |j| <= {}", lat.j_max)));
        }
        if values.is_empty() {
            self.rows.remove(&j);
            return Ok(());
        }
        let end = start + values.len() as i64 - 1;
        if start < -lat.i_max || end > lat.i_max {
            return Err(Error::Dimension(format!(
                "tau window [{start}, {end}] outside |i| <= {}",
                lat.i_max
            )));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Invariant("non-finite space-time value".into()));
        }
        self.rows.insert(j, TauRow { start, values });
        Ok(())
    }

    /// Adds `value` to one cell, growing the row window as needed.
    pub fn add_cell(&mut self, j: i64, i: i64, value: Complex64) -> Result<()> {
        let lat = self.lattice;
        if j.abs() > lat.j_max || i.abs() > lat.i_max {
            return Err(Error::Dimension(format!("cell ({j}, {i}) outside lattice")));
        }
        let row = self.rows.entry(j).or_insert_with(|| TauRow {
            start: i,
            values: Vec::new(),
        });
        if row.values.is_empty() {
            row.start = i;
            row.values.push(value);
            return Ok(());
        }
        if i < row.start {
            let pad = (row.start - i) as usize;
            let mut v = vec![Complex64::new(0.0, 0.0); pad];
            v.extend_from_slice(&row.values);
            row.values = v;
            row.start = i;
        } else if i >= row.end() {
            let new_len = (i - row.start + 1) as usize;
            row.values.resize(new_len, Complex64::new(0.0, 0.0));
        }
        row.values[(i - row.start) as usize] += value;
        Ok(())
    }

    pub fn get(&self, j: i64, i: i64) -> Complex64 {
        self.rows.get(&j).map_or(Complex64::new(0.0, 0.0), |r| r.get(i))
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        for r in out.rows.values_mut() {
            for v in r.values.iter_mut() {
                *v *= c;
            }
        }
        out
    }

    /// Rows with `lo <= |k| < hi`.
    pub fn band_filtered(&self, lo: f64, hi: f64) -> Self {
        let lat = self.lattice;
        let rows = self
            .rows
            .iter()
            .filter(|(j, _)| {
                let k = lat.k(**j).abs();
                k >= lo && k < hi
            })
            .map(|(j, r)| (*j, r.clone()))
            .collect();
        Self { lattice: lat, rows }
    }

    /// Rows with `j != 0`.
    pub fn without_zero_mode(&self) -> Self {
        let mut out = self.clone();
        out.rows.remove(&0);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.rows.values().all(|r| r.values.iter().all(|v| v.norm() == 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.rows
            .values()
            .flat_map(|r| r.values.iter())
            .fold(0.0_f64, |m, v| m.max(v.norm()))
    }

    /// Largest cell-wise deviation between two fields on the same lattice.
    pub fn max_diff(&self, other: &Self) -> Result<f64> {
        self.lattice.check_same(&other.lattice, "max_diff")?;
        let mut worst = 0.0_f64;
        for (j, r) in &self.rows {
            for i in r.start..r.end() {
                worst = worst.max((r.get(i) - other.get(*j, i)).norm());
            }
        }
        for (j, r) in &other.rows {
            for i in r.start..r.end() {
                worst = worst.max((r.get(i) - self.get(*j, i)).norm());
            }
        }
        Ok(worst)
    }

    /// Same field viewed on a larger lattice with identical spacing.
    pub fn embedded(&self, lattice: SpaceTimeLattice) -> Result<Self> {
        let same_spacing = (lattice.lambda - self.lattice.lambda).abs() <= 1e-12 * lattice.lambda
            && (lattice.dtau - self.lattice.dtau).abs() <= 1e-12 * lattice.dtau;
        if !same_spacing || lattice.j_max < self.lattice.j_max || lattice.i_max < self.lattice.i_max {
            return Err(Error::Dimension("cannot embed into a smaller or differently spaced lattice".into()));
        }
        Ok(Self {
            lattice,
            rows: self.rows.clone(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormFlavor {
    Xsb,
    Ys,
    Zs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XsbNormSpec {
    pub s: f64,
    /// Modulation exponent; ignored for `Ys` (`b = 1/2`) and `Zs` (`b = -1/2`).
    pub b: f64,
    pub homogeneous: bool,
    pub flavor: NormFlavor,
}

impl XsbNormSpec {
    pub fn xsb(s: f64, b: f64) -> Self {
        Self {
            s,
            b,
            homogeneous: false,
            flavor: NormFlavor::Xsb,
        }
    }

    pub fn homogeneous(mut self) -> Self {
        self.homogeneous = true;
        self
    }

    pub fn ys(s: f64) -> Self {
        Self {
            s,
            b: 0.5,
            homogeneous: false,
            flavor: NormFlavor::Ys,
        }
    }

    pub fn zs(s: f64) -> Self {
        Self {
            s,
            b: -0.5,
            homogeneous: false,
            flavor: NormFlavor::Zs,
        }
    }
}

fn k_weight(field: &SpaceTimeField, j: i64, spec: &XsbNormSpec, row: &TauRow) -> Result<f64> {
    let k = field.lattice.k(j);
    if spec.homogeneous {
        if j == 0 {
            if row.values.iter().any(|v| v.norm() > 0.0) {
                return Err(Error::Invariant("homogeneous norm of a field with k = 0 mass".into()));
            }
            return Ok(0.0);
        }
        Ok(k.abs().powf(spec.s))
    } else {
        Ok(bracket(k).powf(spec.s))
    }
}

/// `||<k>^s <sigma>^b u||_{L^2}` with the lattice measure, plus the
/// `L^2_k L^1_tau` part for the `Ys` and `Zs` flavors.
pub fn xsb_norm(field: &SpaceTimeField, spec: &XsbNormSpec) -> Result<f64> {
    if !(spec.s.is_finite() && spec.b.is_finite()) {
        return Err(Error::config("norm spec", "s and b must be finite"));
    }
    let lat = field.lattice;
    let b = match spec.flavor {
        NormFlavor::Xsb => spec.b,
        NormFlavor::Ys => 0.5,
        NormFlavor::Zs => -0.5,
    };
    let w = lat.cell_weight();
    let mut l2 = 0.0;
    let mut l1 = 0.0;
    for (&j, row) in &field.rows {
        let wk = k_weight(field, j, spec, row)?;
        if wk == 0.0 {
            continue;
        }
        let mut acc2 = 0.0;
        let mut acc1 = 0.0;
        for (n, v) in row.values.iter().enumerate() {
            let i = row.start + n as i64;
            let sig = bracket(lat.sigma(j, i));
            acc2 += sig.powf(2.0 * b) * v.norm_sqr();
            acc1 += match spec.flavor {
                NormFlavor::Zs => v.norm() / sig,
                _ => v.norm(),
            };
        }
        l2 += w * wk * wk * acc2;
        let row_l1 = lat.dtau * acc1;
        l1 += wk * wk * row_l1 * row_l1 / lat.lambda;
    }
    Ok(match spec.flavor {
        NormFlavor::Xsb => l2.sqrt(),
        _ => l2.sqrt() + l1.sqrt(),
    })
}

/// `|| <k>^s u ||_{L^2_k L^1_tau}`.
pub fn l2k_l1tau(field: &SpaceTimeField, s: f64) -> f64 {
    let lat = field.lattice;
    let mut acc = 0.0;
    for (&j, row) in &field.rows {
        let wk = bracket(lat.k(j)).powf(s);
        let l1: f64 = lat.dtau * row.values.iter().map(|v| v.norm()).sum::<f64>();
        acc += wk * wk * l1 * l1 / lat.lambda;
    }
    acc.sqrt()
}
