//! Integrating-factor RK4 time stepping for the damped, forced mKdV flow.
//!
//! The evolved equation is
//! `u_t + u_xxx + sign * 6 u^2 u_x + gamma u = f` (plain form) or its
//! renormalized version, in which `u^2` is replaced by `u^2 - mean(u^2)` and
//! the forcing is translated by `sign * 6 Phi(t) / L` with
//! `Phi(t) = int_0^t ||u||_{L^2}^2`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbols::rescale;
use crate::torus::{cube, derivative, norm, square_times, NormKind, SpectralField};

const BLOWUP_THRESHOLD: f64 = 1e150;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Focusing,
    Defocusing,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Focusing => 1.0,
            Sign::Defocusing => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub gamma: f64,
    pub sign: Sign,
    pub renormalized: bool,
    /// Scaling parameter; `1` runs the equation on the original torus.
    pub lambda: f64,
}

impl ModelParams {
    pub fn new(gamma: f64, sign: Sign, renormalized: bool) -> Self {
        Self {
            gamma,
            sign,
            renormalized,
            lambda: 1.0,
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    /// Damping seen by the rescaled field, `lambda^-3 gamma`.
    pub fn effective_gamma(&self) -> f64 {
        self.gamma / self.lambda.powi(3)
    }

    fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::config("gamma", format!("must be finite and >= 0, got {}", self.gamma)));
        }
        if !(self.lambda.is_finite() && self.lambda >= 1.0) {
            return Err(Error::config("lambda", format!("must be finite and >= 1, got {}", self.lambda)));
        }
        Ok(())
    }
}

/// Solution state. With `lambda > 1` the field and forcing live on the
/// rescaled torus and `t` is the rescaled time `lambda^3 t_original`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub field: SpectralField,
    pub t: f64,
    /// Accumulated `int ||u||^2 dt` driving the forcing translation.
    pub phase: f64,
    pub params: ModelParams,
    /// Forcing as seen by the evolved field, already scaled by `lambda^-3`.
    pub forcing: SpectralField,
}

fn check_mean_zero(f: &SpectralField, what: &str) -> Result<()> {
    if f.is_mean_zero() {
        Ok(())
    } else {
        Err(Error::Invariant(format!("{what} must have zero mean (mean = {:e})", f.mean())))
    }
}

impl SimState {
    /// Initial state at `t = 0` from data on the original torus.
    pub fn new(u0: &SpectralField, forcing: &SpectralField, params: ModelParams) -> Result<Self> {
        params.validate()?;
        u0.grid().check_same(forcing.grid(), "initial data vs forcing")?;
        check_mean_zero(u0, "initial data")?;
        check_mean_zero(forcing, "forcing")?;
        if !u0.is_finite() || !forcing.is_finite() {
            return Err(Error::Invariant("non-finite initial data or forcing".into()));
        }
        let (field, forcing) = if params.lambda == 1.0 {
            (u0.without_mean().resolved(), forcing.without_mean().resolved())
        } else {
            let l = params.lambda;
            (
                rescale(&u0.without_mean().resolved(), l)?,
                rescale(&forcing.without_mean().resolved(), l)?.scaled(l.powi(-3)),
            )
        };
        Ok(Self {
            field,
            t: 0.0,
            phase: 0.0,
            params,
            forcing,
        })
    }

    /// Forcing at the current phase: a pure translation in renormalized runs.
    pub fn current_forcing(&self) -> SpectralField {
        forcing_at(&self.forcing, &self.params, self.phase)
    }

    /// Full right-hand side `u_t` at the current state.
    pub fn rhs(&self) -> SpectralField {
        let mut out = nonlinear_part(&self.field, &self.params, &self.forcing, self.phase, true);
        let g = *self.field.grid();
        for (slot, c) in out.coeffs_mut().iter_mut().enumerate() {
            let k = g.frequency(slot);
            *c += self.field.coeffs()[slot] * Complex64::new(0.0, 8.0 * PI.powi(3) * k.powi(3));
            if g.is_nyquist(slot) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        out
    }
}

fn forcing_at(forcing: &SpectralField, params: &ModelParams, phase: f64) -> SpectralField {
    if !params.renormalized || phase == 0.0 {
        return forcing.clone();
    }
    let g = *forcing.grid();
    let shift = params.sign.value() * 6.0 * phase / g.period();
    let mut out = forcing.clone();
    for (slot, c) in out.coeffs_mut().iter_mut().enumerate() {
        let k = g.frequency(slot);
        *c *= Complex64::from_polar(1.0, 2.0 * PI * k * shift);
    }
    out
}

/// Everything except the dispersive term: nonlinearity, forcing, and the
/// damping when `include_damping` is set.
fn nonlinear_part(
    u: &SpectralField,
    params: &ModelParams,
    forcing: &SpectralField,
    phase: f64,
    include_damping: bool,
) -> SpectralField {
    let sign = params.sign.value();
    let g = *u.grid();
    let mut out = if params.renormalized {
        let ux = derivative(u, 1);
        let mean_sq = u.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>()
            - u.coeffs()[g.nyquist_slot()].norm_sqr();
        let prod = square_times(u, &ux);
        prod.add_unchecked(&ux, -mean_sq).scaled(-6.0 * sign)
    } else {
        derivative(&cube(u), 1).scaled(-2.0 * sign)
    };
    let f = forcing_at(forcing, params, phase);
    let gamma = params.effective_gamma();
    for (slot, c) in out.coeffs_mut().iter_mut().enumerate() {
        *c += f.coeffs()[slot];
        if include_damping {
            *c -= u.coeffs()[slot] * gamma;
        }
    }
    out.coeffs_mut()[g.nyquist_slot()] = Complex64::new(0.0, 0.0);
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    pub dt: f64,
    /// Advance the forcing phase with the RK4 stages instead of the left endpoint.
    pub substep_phase: bool,
    /// Set to `false` to evolve the linear damped Airy flow only.
    pub nonlinear: bool,
    /// Fold the damping into the integrating factor.
    pub damping_in_exponent: bool,
}

impl StepperConfig {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            substep_phase: true,
            nonlinear: true,
            damping_in_exponent: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::config("dt", format!("must be positive and finite, got {}", self.dt)));
        }
        Ok(())
    }
}

struct LinearFactors {
    full: Vec<Complex64>,
    half: Vec<Complex64>,
}

impl LinearFactors {
    fn new(state: &SimState, cfg: &StepperConfig, h: f64) -> Self {
        let g = *state.field.grid();
        let damp = if cfg.damping_in_exponent { state.params.effective_gamma() } else { 0.0 };
        let mut full = Vec::with_capacity(g.n_modes());
        let mut half = Vec::with_capacity(g.n_modes());
        for slot in 0..g.n_modes() {
            let k = g.frequency(slot);
            let lam = Complex64::new(-damp, 8.0 * PI.powi(3) * k.powi(3));
            full.push((lam * h).exp());
            half.push((lam * (0.5 * h)).exp());
        }
        Self { full, half }
    }
}

fn mul_diag(f: &SpectralField, d: &[Complex64]) -> SpectralField {
    let mut out = f.clone();
    for (c, e) in out.coeffs_mut().iter_mut().zip(d) {
        *c *= e;
    }
    out
}

fn l2_sq(u: &SpectralField) -> f64 {
    let n = norm(u, NormKind::L2).unwrap_or(f64::NAN);
    n * n
}

fn stage(u: &SpectralField, state: &SimState, cfg: &StepperConfig, phase: f64) -> SpectralField {
    if !cfg.nonlinear {
        let f = forcing_at(&state.forcing, &state.params, phase);
        return if cfg.damping_in_exponent {
            f
        } else {
            f.add_unchecked(u, -state.params.effective_gamma())
        };
    }
    nonlinear_part(u, &state.params, &state.forcing, phase, !cfg.damping_in_exponent)
}

fn check_finite(u: &SpectralField, last_good: f64) -> Result<()> {
    let bad = u
        .coeffs()
        .iter()
        .any(|c| !(c.re.is_finite() && c.im.is_finite()) || c.norm() > BLOWUP_THRESHOLD);
    if bad {
        Err(Error::Blowup { last_good_time: last_good })
    } else {
        Ok(())
    }
}

fn rk4_step(state: &SimState, cfg: &StepperConfig, lin: &LinearFactors, h: f64) -> Result<SimState> {
    let u = &state.field;
    let phi = state.phase;
    let (e, e2) = (&lin.full, &lin.half);

    let a = stage(u, state, cfg, phi);
    let ga = l2_sq(u);
    let ua = mul_diag(&u.add_unchecked(&a, 0.5 * h), e2);
    let phi_a = if cfg.substep_phase { phi + 0.5 * h * ga } else { phi };

    let b = stage(&ua, state, cfg, phi_a);
    let gb = l2_sq(&ua);
    let eu2 = mul_diag(u, e2);
    let ub = eu2.add_unchecked(&b, 0.5 * h);
    let phi_b = if cfg.substep_phase { phi + 0.5 * h * gb } else { phi };

    let c = stage(&ub, state, cfg, phi_b);
    let gc = l2_sq(&ub);
    let eu = mul_diag(u, e);
    let uc = eu.add_unchecked(&mul_diag(&c, e2), h);
    let phi_c = if cfg.substep_phase { phi + h * gc } else { phi };

    let d = stage(&uc, state, cfg, phi_c);
    let gd = l2_sq(&uc);

    let mut next = eu;
    let bc = b.add_unchecked(&c, 1.0);
    let ea = mul_diag(&a, e);
    let ebc = mul_diag(&bc, e2);
    for (slot, out) in next.coeffs_mut().iter_mut().enumerate() {
        *out += (ea.coeffs()[slot] + ebc.coeffs()[slot] * 2.0 + d.coeffs()[slot]) * (h / 6.0);
    }
    let ny = next.grid().nyquist_slot();
    next.coeffs_mut()[ny] = Complex64::new(0.0, 0.0);
    next.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
    check_finite(&next, state.t)?;

    let phase = if cfg.substep_phase {
        phi + h / 6.0 * (ga + 2.0 * gb + 2.0 * gc + gd)
    } else {
        phi + h * ga
    };
    if !phase.is_finite() {
        return Err(Error::Blowup { last_good_time: state.t });
    }
    Ok(SimState {
        field: next,
        t: state.t + h,
        phase,
        params: state.params,
        forcing: state.forcing.clone(),
    })
}

/// Advisory upper bound on `dt` from the size of the current field.
pub fn advisory_dt_bound(state: &SimState) -> f64 {
    let kmax = 2.0 * PI * state.field.grid().max_frequency();
    let umax = state
        .field
        .sample_on(state.field.grid().n_modes())
        .iter()
        .fold(0.0_f64, |m, x| m.max(x.abs()));
    if umax == 0.0 {
        f64::INFINITY
    } else {
        0.5 / (kmax * umax).powi(2)
    }
}

/// One step of size `cfg.dt`.
pub fn step(state: &SimState, cfg: &StepperConfig) -> Result<SimState> {
    cfg.validate()?;
    let lin = LinearFactors::new(state, cfg, cfg.dt);
    rk4_step(state, cfg, &lin, cfg.dt)
}

/// Receives states during [`evolve`].
pub trait Observer {
    /// Observe every `stride` steps (plus the first and last state).
    fn stride(&self) -> u64 {
        1
    }
    fn observe(&mut self, state: &SimState, step: u64) -> Result<()>;
}

/// Advances `state` to `t_end`, taking full steps of `cfg.dt` and one
/// shortened final step if needed.
pub fn evolve(
    state: SimState,
    t_end: f64,
    cfg: &StepperConfig,
    observers: &mut [&mut dyn Observer],
) -> Result<SimState> {
    cfg.validate()?;
    if !(t_end.is_finite() && t_end >= state.t) {
        return Err(Error::config("t_end", format!("must be finite and >= t = {}", state.t)));
    }
    let advisory = advisory_dt_bound(&state);
    if cfg.dt > advisory {
        log::warn!("dt = {} exceeds the advisory bound {advisory:.3e}", cfg.dt);
    }
    let lin = LinearFactors::new(&state, cfg, cfg.dt);
    let mut state = state;
    let mut n: u64 = 0;
    for obs in observers.iter_mut() {
        obs.observe(&state, 0)?;
    }
    let mut last_seen = vec![0u64; observers.len()];
    loop {
        let remaining = t_end - state.t;
        if remaining <= cfg.dt * 1e-10 {
            break;
        }
        state = if remaining > cfg.dt * (1.0 + 1e-10) {
            rk4_step(&state, cfg, &lin, cfg.dt)?
        } else {
            let h = remaining;
            let short = LinearFactors::new(&state, cfg, h);
            let mut s = rk4_step(&state, cfg, &short, h)?;
            s.t = t_end;
            s
        };
        n += 1;
        for (i, obs) in observers.iter_mut().enumerate() {
            let stride = obs.stride().max(1);
            if n.is_multiple_of(stride) {
                obs.observe(&state, n)?;
                last_seen[i] = n;
            }
        }
    }
    for (i, obs) in observers.iter_mut().enumerate() {
        if last_seen[i] != n {
            obs.observe(&state, n)?;
        }
    }
    Ok(state)
}

/// Number of steps [`evolve`] takes from `t0` to `t_end`.
pub fn step_count(t0: f64, t_end: f64, dt: f64) -> u64 {
    let mut t = t0;
    let mut n = 0;
    while t_end - t > dt * 1e-10 {
        t = if t_end - t > dt * (1.0 + 1e-10) { t + dt } else { t_end };
        n += 1;
    }
    n
}
