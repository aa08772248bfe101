//! Fourier multipliers, the smooth I-operator, rescaling and the Miura map.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::torus::{derivative, ComplexField, SpectralField, TorusGrid};

/// What a multiplier represents; kept for reporting and composition checks.
#[derive(Debug, Clone, PartialEq)]
pub enum MultiplierKind {
    IOperator { n_cut: f64, s: f64 },
    Derivative { order: u32 },
    Band { lo: f64, hi: f64 },
    Custom,
    Composite,
}

/// Diagonal multiplier `m(k) = values(k) * (i sgn k)^phase_order`.
///
/// Even real values with a phase power keep the symbol Hermitian, so applying
/// it to a real field returns a real field.
#[derive(Debug, Clone, PartialEq)]
pub struct Multiplier {
    grid: TorusGrid,
    values: Vec<f64>,
    phase_order: u32,
    kind: MultiplierKind,
}

/// Value of the I-operator symbol at frequency `k`.
///
/// Equal to 1 for `|k| < N`, to `(|k|/N)^(s-1)` for `|k| > 2N`; in between the
/// log of the symbol is a cubic Hermite blend in `log2(|k|/N)`, which is
/// monotone and `C^1`.
pub fn i_symbol(k: f64, n_cut: f64, s: f64) -> f64 {
    let a = k.abs();
    if a <= n_cut {
        return 1.0;
    }
    let r = a / n_cut;
    if r >= 2.0 {
        return r.powf(s - 1.0);
    }
    let t = r.log2();
    ((s - 1.0) * LN_2 * (2.0 * t * t - t * t * t)).exp()
}

fn check_i_params(n_cut: f64, s: f64) -> Result<()> {
    if !(n_cut.is_finite() && n_cut > 0.0) {
        return Err(Error::config("n_cut", format!("must be positive and finite, got {n_cut}")));
    }
    if !(s.is_finite() && s <= 1.0) {
        return Err(Error::config("s", format!("must be finite and <= 1, got {s}")));
    }
    Ok(())
}

impl Multiplier {
    /// Real even symbol `f(|k|)` evaluated on the lattice.
    pub fn from_fn(grid: TorusGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values: Vec<f64> = (0..grid.n_modes()).map(|s| f(grid.frequency(s).abs())).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("multiplier", "symbol is not finite on the lattice"));
        }
        Ok(Self {
            grid,
            values,
            phase_order: 0,
            kind: MultiplierKind::Custom,
        })
    }

    pub fn i_operator(grid: TorusGrid, n_cut: f64, s: f64) -> Result<Self> {
        check_i_params(n_cut, s)?;
        let mut m = Self::from_fn(grid, |k| i_symbol(k, n_cut, s))?;
        m.kind = MultiplierKind::IOperator { n_cut, s };
        Ok(m)
    }

    pub fn derivative(grid: TorusGrid, order: u32) -> Self {
        let values = (0..grid.n_modes())
            .map(|s| (2.0 * PI * grid.frequency(s).abs()).powi(order as i32))
            .collect();
        Self {
            grid,
            values,
            phase_order: order,
            kind: MultiplierKind::Derivative { order },
        }
    }

    /// Indicator of `lo <= |k| < hi`.
    pub fn band(grid: TorusGrid, lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::config("band", format!("invalid band [{lo}, {hi})")));
        }
        let mut m = Self::from_fn(grid, |k| if k >= lo && k < hi { 1.0 } else { 0.0 })?;
        m.kind = MultiplierKind::Band { lo, hi };
        Ok(m)
    }

    /// Per-slot real values in FFT order. The values must be even in `k`.
    pub fn custom(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_modes() {
            return Err(Error::Dimension("multiplier length".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("multiplier", "non-finite value"));
        }
        let n = grid.n_modes();
        for s in 1..n / 2 {
            if values[s] != values[n - s] {
                return Err(Error::Invariant("custom multiplier is not even in k".into()));
            }
        }
        Ok(Self {
            grid,
            values,
            phase_order: 0,
            kind: MultiplierKind::Custom,
        })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn kind(&self) -> &MultiplierKind {
        &self.kind
    }

    /// Symbol value at an FFT slot.
    pub fn symbol(&self, slot: usize) -> Complex64 {
        let v = self.values[slot];
        if self.phase_order == 0 {
            return Complex64::new(v, 0.0);
        }
        let k = self.grid.index_of_slot(slot);
        if k == 0 || self.grid.is_nyquist(slot) {
            return Complex64::new(0.0, 0.0);
        }
        let sgn = if k > 0 { 1.0 } else { -1.0 };
        Complex64::new(0.0, sgn).powu(self.phase_order) * v
    }

    pub fn compose(&self, other: &Multiplier) -> Result<Multiplier> {
        self.grid.check_same(&other.grid, "multiplier composition")?;
        Ok(Multiplier {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
            phase_order: self.phase_order + other.phase_order,
            kind: MultiplierKind::Composite,
        })
    }
}

/// Applies a multiplier. The Nyquist slot of the result is cleared.
pub fn apply(mult: &Multiplier, field: &SpectralField) -> Result<SpectralField> {
    mult.grid.check_same(field.grid(), "multiplier application")?;
    let mut out = field.clone();
    let ny = mult.grid.nyquist_slot();
    for (slot, c) in out.coeffs_mut().iter_mut().enumerate() {
        *c = if slot == ny { Complex64::new(0.0, 0.0) } else { *c * mult.symbol(slot) };
    }
    Ok(out)
}

/// `(P_{|k| < cutoff} u, P_{|k| >= cutoff} u)`.
pub fn split_low_high(field: &SpectralField, cutoff: f64) -> Result<(SpectralField, SpectralField)> {
    if cutoff.is_nan() {
        return Err(Error::config("cutoff", "NaN"));
    }
    let g = *field.grid();
    let mut low = SpectralField::zeros(g);
    let mut high = SpectralField::zeros(g);
    for slot in 0..g.n_modes() {
        if g.is_nyquist(slot) {
            continue;
        }
        let c = field.coeffs()[slot];
        if g.frequency(slot).abs() < cutoff {
            low.coeffs_mut()[slot] = c;
        } else {
            high.coeffs_mut()[slot] = c;
        }
    }
    Ok((low, high))
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda >= 1.0) {
        return Err(Error::config("lambda", format!("must be finite and >= 1, got {lambda}")));
    }
    Ok(())
}

/// Scaling `u_lambda(x) = u(x / lambda) / lambda` onto the torus of period
/// `lambda L`. Coefficients keep their index; frequencies shrink by `lambda`.
pub fn rescale(field: &SpectralField, lambda: f64) -> Result<SpectralField> {
    check_lambda(lambda)?;
    let g = field.grid();
    let target = TorusGrid::new(g.period() * lambda, g.n_modes())?;
    rescale_onto(field, lambda, &target)
}

/// Like [`rescale`] but onto a given lattice, which must have period
/// `lambda L` and at least as many modes.
pub fn rescale_onto(field: &SpectralField, lambda: f64, target: &TorusGrid) -> Result<SpectralField> {
    check_lambda(lambda)?;
    let g = field.grid();
    let want = g.period() * lambda;
    if (target.period() - want).abs() > 1e-12 * want || target.n_modes() < g.n_modes() {
        return Err(Error::Dimension(format!(
            "cannot rescale (L={}, n={}) by {lambda} onto (L={}, n={})",
            g.period(),
            g.n_modes(),
            target.period(),
            target.n_modes()
        )));
    }
    let jmax = g.max_index();
    let inv = 1.0 / lambda;
    let mut out = SpectralField::zeros(*target);
    for j in -jmax..=jmax {
        let slot = target.slot_of_index(j).unwrap();
        out.coeffs_mut()[slot] = field.coeff(j) * inv;
    }
    Ok(out)
}

/// I-operator with knee `N / lambda`, for use on the rescaled torus.
pub fn rescaled_multiplier(grid: &TorusGrid, n_cut: f64, s: f64, lambda: f64) -> Result<Multiplier> {
    check_lambda(lambda)?;
    check_i_params(n_cut, s)?;
    let knee = n_cut / lambda;
    if knee < grid.frequency_step() * (1.0 - 1e-12) {
        return Err(Error::config(
            "n_cut",
            format!("knee N/lambda = {knee} is below the frequency step {}", grid.frequency_step()),
        ));
    }
    Multiplier::i_operator(*grid, knee, s)
}

/// Miura variable `p = u_x + i u^2`, held on a lattice with twice the modes so
/// that `u^2` is represented exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct MiuraPair {
    pub p_real: SpectralField,
    pub p_imag: SpectralField,
}

impl MiuraPair {
    pub fn from_field(u: &SpectralField) -> Result<Self> {
        let n2 = 2 * u.grid().n_modes();
        let ue = u.resolved().with_modes(n2)?;
        let p_real = derivative(&ue, 1);
        let s = ue.sample_on(n2);
        let sq: Vec<f64> = s.iter().map(|x| x * x).collect();
        let p_imag = SpectralField::from_samples_truncated(*ue.grid(), &sq);
        Ok(Self { p_real, p_imag })
    }

    pub fn as_complex(&self) -> Result<ComplexField> {
        ComplexField::from_parts(&self.p_real, &self.p_imag)
    }
}

fn promote(u: &SpectralField) -> ComplexField {
    ComplexField::from_raw(*u.grid(), u.resolved().coeffs().to_vec())
}

/// Residual `p_t + p_xxx - 6 i p p_x + gamma p` of the Miura variable along
/// the focusing flow `u_t = -u_xxx - 2 (u^3)_x - gamma u + f`.
///
/// Evaluated on a lattice with four times the modes, where every product of
/// up to four factors is exact.
pub fn miura_defect(u: &SpectralField, f: &SpectralField, gamma: f64) -> Result<ComplexField> {
    u.grid().check_same(f.grid(), "miura defect")?;
    let n4 = 4 * u.grid().n_modes();
    let ue = promote(&u.resolved().with_modes(n4)?);
    let fe = promote(&f.resolved().with_modes(n4)?);
    let i = Complex64::new(0.0, 1.0);

    let ux = ue.derivative();
    let uxxx = ux.derivative().derivative();
    let u2 = ue.mul(&ue)?;
    let u3x = u2.mul(&ue)?.derivative();
    let ut = uxxx.zip_with(&u3x, |a, b| -a - 2.0 * b);
    let ut = ut.zip_with(&ue, |a, b| a - gamma * b);
    let ut = ut.zip_with(&fe, |a, b| a + b);

    let p = ux.zip_with(&u2, |a, b| a + i * b);
    let uut = ue.mul(&ut)?;
    let pt = ut.derivative().zip_with(&uut, |a, b| a + 2.0 * i * b);
    let px = p.derivative();
    let pxxx = px.derivative().derivative();
    let ppx = p.mul(&px)?;

    let r = pt.zip_with(&pxxx, |a, b| a + b);
    let r = r.zip_with(&ppx, |a, b| a - 6.0 * i * b);
    Ok(r.zip_with(&p, |a, b| a + gamma * b))
}

/// Closed form `(2 i u + d/dx) f - i gamma u^2` of [`miura_defect`].
pub fn miura_defect_closed_form(u: &SpectralField, f: &SpectralField, gamma: f64) -> Result<ComplexField> {
    u.grid().check_same(f.grid(), "miura defect")?;
    let n4 = 4 * u.grid().n_modes();
    let ue = promote(&u.resolved().with_modes(n4)?);
    let fe = promote(&f.resolved().with_modes(n4)?);
    let i = Complex64::new(0.0, 1.0);
    let uf = ue.mul(&fe)?;
    let u2 = ue.mul(&ue)?;
    let r = uf.zip_with(&fe.derivative(), |a, b| 2.0 * i * a + b);
    Ok(r.zip_with(&u2, |a, b| a - i * gamma * b))
}

fn band_pairing(a: &SpectralField, b: &SpectralField) -> Complex64 {
    let jmax = a.grid().max_index();
    (-jmax..=jmax).map(|j| a.coeff(j) * b.coeff(-j)).sum()
}

/// Symmetrised nonresonant trilinear operator.
///
/// In coefficients, `J(k) = (2 pi i k / 3) * sum' a(k1) b(k2) c(k3)
/// - 2 pi i k a(k) b(k) c(-k)`, where the primed sum runs over
/// `k1 + k2 + k3 = k` with `(k1 + k2)(k2 + k3)(k3 + k1) != 0`.
/// For a single field, `J[u, u, u] = (u^2 - mean(u^2)) u_x`.
pub fn trilinear_j(a: &SpectralField, b: &SpectralField, c: &SpectralField) -> Result<SpectralField> {
    a.grid().check_same(b.grid(), "trilinear J")?;
    a.grid().check_same(c.grid(), "trilinear J")?;
    for (name, f) in [("first", a), ("second", b), ("third", c)] {
        let tol = 1e-12 * (1.0 + f.max_abs_coeff());
        if f.coeff(0).norm() > tol {
            return Err(Error::Invariant(format!("{name} argument of J has nonzero mean")));
        }
    }
    let (a, b, c) = (a.without_mean().resolved(), b.without_mean().resolved(), c.without_mean().resolved());
    let full = crate::torus::pointwise_cubic(&a, &b, &c)?;
    let s12 = band_pairing(&a, &b);
    let s23 = band_pairing(&b, &c);
    let s31 = band_pairing(&a, &c);
    let g = *a.grid();
    let jmax = g.max_index();
    let mut out = SpectralField::zeros(g);
    for j in -jmax..=jmax {
        let (ak, bk, ck) = (a.coeff(j), b.coeff(j), c.coeff(j));
        let (am, bm, cm) = (a.coeff(-j), b.coeff(-j), c.coeff(-j));
        let planes = ck * s12 + ak * s23 + bk * s31;
        let pairs = ak * bm * ck + am * bk * ck + ak * bk * cm;
        let nonres = full.coeff(j) - planes + pairs;
        let k = j as f64 / g.period();
        let ik = Complex64::new(0.0, 2.0 * PI * k);
        let v = ik / 3.0 * nonres - ik * ak * bk * cm;
        out.coeffs_mut()[g.slot_of_index(j).unwrap()] = v;
    }
    Ok(out)
}
