//! Energy, modified energy and the almost-conservation increment.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{evolve, ModelParams, Observer, Sign, SimState, StepperConfig};
use crate::symbols::{apply, Multiplier};
use crate::torus::{cube, derivative, inner_unchecked, norm, NormKind, SpectralField};

/// `E(u) = int u_x^2 - u^4 dx`.
pub fn energy(u: &SpectralField) -> f64 {
    let ux = norm(&derivative(u, 1), NormKind::L2).unwrap_or(f64::NAN);
    let l4 = norm(u, NormKind::L4).unwrap_or(f64::NAN);
    ux * ux - l4.powi(4)
}

/// `E(I u)`.
pub fn modified_energy(u: &SpectralField, mult: &Multiplier) -> Result<f64> {
    Ok(energy(&apply(mult, u)?))
}

/// Quartic and sextic parts of the increment `d/dt E(I u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IncrementTerms {
    pub quartic: f64,
    pub sextic: f64,
}

impl IncrementTerms {
    pub fn total(&self) -> f64 {
        self.quartic + self.sextic
    }
}

/// Increment terms for the undamped, unforced Galerkin flow.
///
/// With `w = I u`, `D = P(w^3) - I P(u^3)`:
/// quartic `= 4 <w_xxx, D>`, sextic `= 8 <(P w^3)_x, D>`; their sum is the
/// exact time derivative of `E(I u)` along the focusing flow.
pub fn increment_terms(u: &SpectralField, mult: &Multiplier) -> Result<IncrementTerms> {
    let w = apply(mult, u)?;
    let w3 = cube(&w);
    let iu3 = apply(mult, &cube(u))?;
    let diff = w3.add_unchecked(&iu3, -1.0);
    let quartic = 4.0 * inner_unchecked(&derivative(&w, 3), &diff);
    let sextic = 8.0 * inner_unchecked(&derivative(&w3, 1), &diff);
    Ok(IncrementTerms { quartic, sextic })
}

/// `weight * (quartic + sextic)`.
pub fn increment_m(u: &SpectralField, mult: &Multiplier, weight: f64) -> Result<f64> {
    Ok(weight * increment_terms(u, mult)?.total())
}

/// One diagnostic sample; serialized with the column names
/// `t, l2, hs, h1_of_Iu, E_u, E_Iu, M_quartic, M_sextic`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub t: f64,
    pub l2: f64,
    pub hs: f64,
    #[serde(rename = "h1_of_Iu")]
    pub h1_of_iu: f64,
    #[serde(rename = "E_u")]
    pub energy: f64,
    #[serde(rename = "E_Iu")]
    pub modified_energy: f64,
    #[serde(rename = "M_quartic")]
    pub m_quartic: f64,
    #[serde(rename = "M_sextic")]
    pub m_sextic: f64,
}

/// Observer collecting [`EnergyRecord`]s for one multiplier.
pub struct DiagnosticsRecorder {
    pub mult: Multiplier,
    pub s: f64,
    pub stride: u64,
    pub records: Vec<EnergyRecord>,
}

impl DiagnosticsRecorder {
    pub fn new(mult: Multiplier, s: f64, stride: u64) -> Self {
        Self {
            mult,
            s,
            stride,
            records: Vec::new(),
        }
    }

    pub fn record(&self, state: &SimState) -> Result<EnergyRecord> {
        let u = &state.field;
        let iu = apply(&self.mult, u)?;
        let terms = increment_terms(u, &self.mult)?;
        Ok(EnergyRecord {
            t: state.t,
            l2: norm(u, NormKind::L2)?,
            hs: norm(u, NormKind::Hs(self.s))?,
            h1_of_iu: norm(&iu, NormKind::Hs(1.0))?,
            energy: energy(u),
            modified_energy: energy(&iu),
            m_quartic: terms.quartic,
            m_sextic: terms.sextic,
        })
    }
}

impl Observer for DiagnosticsRecorder {
    fn stride(&self) -> u64 {
        self.stride
    }

    fn observe(&mut self, state: &SimState, _step: u64) -> Result<()> {
        let rec = self.record(state)?;
        if let Some(last) = self.records.last() {
            if rec.t <= last.t {
                return Err(Error::Invariant("diagnostic samples must have increasing t".into()));
            }
        }
        self.records.push(rec);
        Ok(())
    }
}

/// Reads records written by [`write_records_csv`].
pub fn read_records_csv<R: std::io::Read>(r: R) -> Result<Vec<EnergyRecord>> {
    let mut rd = csv::Reader::from_reader(r);
    Ok(rd.deserialize().collect::<std::result::Result<Vec<EnergyRecord>, _>>()?)
}

/// Writes records as CSV with a header row.
pub fn write_records_csv<W: Write>(records: &[EnergyRecord], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in records {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

/// `int y dt` over samples with nondecreasing `t`: Simpson on consecutive
/// pairs of intervals (unequal widths allowed), trapezoid on a leftover one.
pub fn integrate_samples(t: &[f64], y: &[f64]) -> f64 {
    assert_eq!(t.len(), y.len());
    let n = t.len();
    if n < 2 {
        return 0.0;
    }
    let mut acc = 0.0;
    let mut i = 0;
    while i + 2 < n {
        let h0 = t[i + 1] - t[i];
        let h1 = t[i + 2] - t[i + 1];
        if h0 <= 0.0 || h1 <= 0.0 {
            acc += 0.5 * h0 * (y[i] + y[i + 1]) + 0.5 * h1 * (y[i + 1] + y[i + 2]);
        } else {
            let hs = h0 + h1;
            acc += hs / 6.0
                * (y[i] * (2.0 - h1 / h0) + y[i + 1] * hs * hs / (h0 * h1) + y[i + 2] * (2.0 - h0 / h1));
        }
        i += 2;
    }
    if i + 1 < n {
        acc += 0.5 * (t[i + 1] - t[i]) * (y[i] + y[i + 1]);
    }
    acc
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Result of [`almost_conservation_slope`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeReport {
    pub n_cuts: Vec<f64>,
    /// `|E(I u)(T) - E(I u)(0)|` per cutoff.
    pub increments: Vec<f64>,
    pub quartic_integrals: Vec<f64>,
    pub sextic_integrals: Vec<f64>,
    /// Slope of `log |increment|` against `log N`.
    pub slope: f64,
    pub slope_quartic: f64,
    pub slope_sextic: f64,
    /// Largest relative drift `|E(u)(t) - E(u)(0)| / |E(u)(0)|`.
    pub energy_drift: f64,
    /// Set when some increment is below the noise level set by the drift of
    /// `E(u)`, so no slope can be fitted.
    pub degenerate: bool,
}

struct SweepObserver {
    mults: Vec<Multiplier>,
    stride: u64,
    t: Vec<f64>,
    e_iu: Vec<Vec<f64>>,
    quartic: Vec<Vec<f64>>,
    sextic: Vec<Vec<f64>>,
    energy: Vec<f64>,
}

impl Observer for SweepObserver {
    fn stride(&self) -> u64 {
        self.stride
    }

    fn observe(&mut self, state: &SimState, _step: u64) -> Result<()> {
        use rayon::prelude::*;
        let u = &state.field;
        let rows: Vec<Result<(f64, IncrementTerms)>> = self
            .mults
            .par_iter()
            .map(|m| Ok((modified_energy(u, m)?, increment_terms(u, m)?)))
            .collect();
        self.t.push(state.t);
        self.energy.push(energy(u));
        for (i, r) in rows.into_iter().enumerate() {
            let (e, terms) = r?;
            self.e_iu[i].push(e);
            self.quartic[i].push(terms.quartic);
            self.sextic[i].push(terms.sextic);
        }
        Ok(())
    }
}

/// Runs the undamped, unforced focusing flow once and measures how `E(I u)` moves
/// for each cutoff. The dynamics do not depend on `N`, so all cutoffs share
/// one trajectory.
pub fn almost_conservation_slope(
    u0: &SpectralField,
    n_cuts: &[f64],
    t_end: f64,
    s: f64,
    cfg: &StepperConfig,
    sample_stride: u64,
) -> Result<SlopeReport> {
    if n_cuts.len() < 2 {
        return Err(Error::config("n_cuts", "need at least two cutoffs"));
    }
    let grid = *u0.grid();
    let params = ModelParams::new(0.0, Sign::Focusing, false);
    let initial = SimState::new(u0, &SpectralField::zeros(grid), params)?;
    let mults = n_cuts
        .iter()
        .map(|&n| Multiplier::i_operator(grid, n, s))
        .collect::<Result<Vec<_>>>()?;
    let k = mults.len();
    let mut obs = SweepObserver {
        mults,
        stride: sample_stride.max(1),
        t: Vec::new(),
        e_iu: vec![Vec::new(); k],
        quartic: vec![Vec::new(); k],
        sextic: vec![Vec::new(); k],
        energy: Vec::new(),
    };
    evolve(initial, t_end, cfg, &mut [&mut obs])?;

    let e0 = obs.energy[0];
    let energy_drift = obs
        .energy
        .iter()
        .fold(0.0_f64, |m, e| m.max((e - e0).abs()))
        / e0.abs().max(f64::MIN_POSITIVE);
    let increments: Vec<f64> = obs
        .e_iu
        .iter()
        .map(|v| (v.last().unwrap() - v[0]).abs())
        .collect();
    let quartic_integrals: Vec<f64> = obs.quartic.iter().map(|q| integrate_samples(&obs.t, q)).collect();
    let sextic_integrals: Vec<f64> = obs.sextic.iter().map(|q| integrate_samples(&obs.t, q)).collect();

    let logn: Vec<f64> = n_cuts.iter().map(|n| n.ln()).collect();
    // E(u) is conserved exactly by the flow, so its drift is the noise level.
    let floor = 10.0 * energy_drift * e0.abs() + 1e-14 * e0.abs().max(1.0);
    let degenerate = increments.iter().any(|&d| !(d > floor));
    let log_fit = |v: &[f64]| -> f64 {
        if v.iter().any(|&d| !(d.abs() > 0.0)) {
            f64::NAN
        } else {
            fit_slope(&logn, &v.iter().map(|d| d.abs().ln()).collect::<Vec<_>>())
        }
    };
    let slope = if degenerate { f64::NAN } else { log_fit(&increments) };
    Ok(SlopeReport {
        n_cuts: n_cuts.to_vec(),
        slope_quartic: log_fit(&quartic_integrals),
        slope_sextic: log_fit(&sextic_integrals),
        increments,
        quartic_integrals,
        sextic_integrals,
        slope,
        energy_drift,
        degenerate,
    })
}
