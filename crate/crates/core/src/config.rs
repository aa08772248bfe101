//! Experiment configuration read from TOML. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{ModelParams, Sign, SimState, StepperConfig};
use crate::profiles;
use crate::torus::{SpectralField, TorusGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Directory receiving all outputs.
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub forcing: Option<ForcingSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run: Option<RunSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<DiagnosticsSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope: Option<SlopeSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub splitting: Option<SplittingSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attractor: Option<AttractorSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lab: Option<LabSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<CounterexampleSpec>,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub period: f64,
    pub n_modes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default)]
    pub gamma: f64,
    #[serde(default = "focusing")]
    pub sign: Sign,
    #[serde(default = "yes")]
    pub renormalized: bool,
    #[serde(default = "one")]
    pub lambda: f64,
}

fn focusing() -> Sign {
    Sign::Focusing
}
fn yes() -> bool {
    true
}
fn one() -> f64 {
    1.0
}

/// `(index, re, im)` coefficient of `exp(2 pi i k x)` for `index > 0`; the
/// conjugate mode is implied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub index: i64,
    #[serde(default)]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForcingSpec {
    Zero,
    /// `amplitude * (cos(2 pi k1 x) + sin(2 pi k2 x)) / ||.||_{H^1 dot}`.
    TwoMode { j1: i64, j2: i64, amplitude: f64 },
    Modes { modes: Vec<ModeSpec> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    Zero,
    /// Random phases, rescaled to `||u0||_{H^s} = size`.
    Random {
        seed: u64,
        #[serde(default = "one")]
        decay: f64,
        #[serde(default = "default_rolloff")]
        rolloff: f64,
        s: f64,
        size: f64,
    },
    Soliton {
        amplitude: f64,
        #[serde(default)]
        center: f64,
        #[serde(default = "default_images")]
        images: i64,
    },
    Modes { modes: Vec<ModeSpec> },
}

fn default_rolloff() -> f64 {
    2.0
}
fn default_images() -> i64 {
    6
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub t_end: f64,
    pub dt: f64,
    /// Steps between diagnostic samples.
    #[serde(default = "one_u64")]
    pub stride: u64,
    /// Steps between checkpoints; `0` writes none besides the final state.
    #[serde(default)]
    pub checkpoint_stride: u64,
}

fn one_u64() -> u64 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSpec {
    pub n_cut: f64,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlopeSpec {
    pub n_cuts: Vec<f64>,
    pub t_end: f64,
    pub dt: f64,
    pub s: f64,
    #[serde(default = "one_u64")]
    pub sample_stride: u64,
}

/// Growth law of the moving cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NtLaw {
    /// `N_t = (K2 exp(gamma (t - T1)))^{-1/(2(1-s))}`, decreasing in `t`.
    #[default]
    Verbatim,
    /// `N_t = (K2 exp(-gamma (t - T1)))^{-1/(2(1-s))}`, increasing in `t`.
    Growing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplittingSpec {
    /// Defaults to the measured `sup ||I u||_{H^1}^2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k2: Option<f64>,
    /// Defaults to the empirical absorption time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1: Option<f64>,
    pub s: f64,
    #[serde(default)]
    pub law: NtLaw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttractorSpec {
    /// One run per seed and scale; replaces the seed of a random `[initial]`.
    pub seeds: Vec<u64>,
    #[serde(default = "unit_scales")]
    pub scales: Vec<f64>,
    /// Relative margin added to the radius `||f||_{L^2} / gamma`.
    #[serde(default = "default_margin")]
    pub margin: f64,
    /// Largest allowed spread of per-run sups, relative to their mean.
    #[serde(default = "default_spread")]
    pub max_spread: f64,
}

fn unit_scales() -> Vec<f64> {
    vec![1.0]
}
fn default_margin() -> f64 {
    0.1
}
fn default_spread() -> f64 {
    0.25
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PresetSpec {
    Unfiltered,
    LowLowHigh { cutoff: f64 },
    LowHighHigh { cutoff: f64 },
    HighHighHigh { cutoff: f64 },
}

impl From<PresetSpec> for crate::lab::BandPreset {
    fn from(p: PresetSpec) -> Self {
        use crate::lab::BandPreset as B;
        match p {
            PresetSpec::Unfiltered => B::Unfiltered,
            PresetSpec::LowLowHigh { cutoff } => B::LowLowHigh { cutoff },
            PresetSpec::LowHighHigh { cutoff } => B::LowHighHigh { cutoff },
            PresetSpec::HighHighHigh { cutoff } => B::HighHighHigh { cutoff },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabSpec {
    pub lambdas: Vec<f64>,
    pub k_max: f64,
    pub dtau: f64,
    #[serde(default = "half")]
    pub s: f64,
    /// Modulation exponent for the Strichartz ratio.
    #[serde(default = "default_b")]
    pub b: f64,
    pub size: usize,
    pub seed: u64,
    #[serde(default = "unfiltered")]
    pub preset: PresetSpec,
    /// Also evaluate on the lattice with `dtau` halved.
    #[serde(default)]
    pub refine: bool,
}

fn half() -> f64 {
    0.5
}
fn default_b() -> f64 {
    0.4
}
fn unfiltered() -> PresetSpec {
    PresetSpec::Unfiltered
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleSpec {
    pub lambdas: Vec<f64>,
    pub s: f64,
    #[serde(default = "yes")]
    pub homogeneous: bool,
    #[serde(default = "default_dtau")]
    pub dtau: f64,
}

fn default_dtau() -> f64 {
    1.0 / 16.0
}

fn section<'a, T>(v: &'a Option<T>, name: &str) -> Result<&'a T> {
    v.as_ref().ok_or_else(|| Error::config(name, "section is required"))
}

fn modes_field(grid: TorusGrid, modes: &[ModeSpec], what: &str) -> Result<SpectralField> {
    if modes.iter().any(|m| m.index <= 0) {
        return Err(Error::config(what, "mode indices must be positive"));
    }
    let pairs: Vec<(i64, Complex64)> = modes.iter().map(|m| (m.index, Complex64::new(m.re, m.im))).collect();
    SpectralField::from_modes(grid, &pairs).map_err(|e| Error::config(what, e.to_string()))
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config("config", e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn grid(&self) -> Result<TorusGrid> {
        let g = section(&self.grid, "grid")?;
        TorusGrid::new(g.period, g.n_modes).map_err(|e| Error::config("grid", e.to_string()))
    }

    pub fn model_params(&self) -> Result<ModelParams> {
        let m = self.model.unwrap_or(ModelSpec {
            gamma: 0.0,
            sign: Sign::Focusing,
            renormalized: true,
            lambda: 1.0,
        });
        if !(m.gamma.is_finite() && m.gamma >= 0.0) {
            return Err(Error::config("model.gamma", format!("must be >= 0, got {}", m.gamma)));
        }
        if !(m.lambda.is_finite() && m.lambda >= 1.0) {
            return Err(Error::config("model.lambda", format!("must be >= 1, got {}", m.lambda)));
        }
        Ok(ModelParams::new(m.gamma, m.sign, m.renormalized).with_lambda(m.lambda))
    }

    pub fn forcing_field(&self) -> Result<SpectralField> {
        let grid = self.grid()?;
        match self.forcing.as_ref().unwrap_or(&ForcingSpec::Zero) {
            ForcingSpec::Zero => Ok(SpectralField::zeros(grid)),
            ForcingSpec::TwoMode { j1, j2, amplitude } => Ok(profiles::two_mode_forcing(grid, *j1, *j2)
                .map_err(|e| Error::config("forcing", e.to_string()))?
                .scaled(*amplitude)),
            ForcingSpec::Modes { modes } => modes_field(grid, modes, "forcing.modes"),
        }
    }

    /// Initial data, with `seed` replacing the configured one for random data.
    pub fn initial_field_with_seed(&self, seed: Option<u64>) -> Result<SpectralField> {
        let grid = self.grid()?;
        match section(&self.initial, "initial")? {
            InitialSpec::Zero => Ok(SpectralField::zeros(grid)),
            InitialSpec::Random {
                seed: s0,
                decay,
                rolloff,
                s,
                size,
            } => {
                let u = profiles::random_field(grid, seed.unwrap_or(*s0), *decay, *rolloff)
                    .map_err(|e| Error::config("initial", e.to_string()))?;
                profiles::normalized(&u, *s, *size)
            }
            InitialSpec::Soliton {
                amplitude,
                center,
                images,
            } => profiles::periodized_soliton(grid, *amplitude, *center, *images),
            InitialSpec::Modes { modes } => modes_field(grid, modes, "initial.modes"),
        }
    }

    pub fn initial_field(&self) -> Result<SpectralField> {
        self.initial_field_with_seed(None)
    }

    pub fn run_spec(&self) -> Result<RunSpec> {
        let r = *section(&self.run, "run")?;
        if !(r.t_end.is_finite() && r.t_end >= 0.0) {
            return Err(Error::config("run.t_end", "must be finite and >= 0"));
        }
        if !(r.dt.is_finite() && r.dt > 0.0) {
            return Err(Error::config("run.dt", "must be positive"));
        }
        if r.stride == 0 {
            return Err(Error::config("run.stride", "must be >= 1"));
        }
        if r.checkpoint_stride % r.stride != 0 {
            return Err(Error::config("run.checkpoint_stride", "must be a multiple of run.stride"));
        }
        Ok(r)
    }

    pub fn stepper(&self) -> Result<StepperConfig> {
        Ok(StepperConfig::new(self.run_spec()?.dt))
    }

    pub fn initial_state_with_seed(&self, seed: Option<u64>) -> Result<SimState> {
        let u0 = self.initial_field_with_seed(seed)?;
        let f = self.forcing_field()?;
        SimState::new(&u0, &f, self.model_params()?)
    }

    /// Checks every section needed for a run.
    pub fn validate_run(&self) -> Result<()> {
        self.run_spec()?;
        self.initial_state_with_seed(None)?;
        if let Some(sp) = &self.splitting {
            if !(sp.s > 11.0 / 12.0 && sp.s < 1.0) {
                return Err(Error::config("splitting.s", format!("must lie in (11/12, 1), got {}", sp.s)));
            }
            if self.model_params()?.gamma <= 0.0 {
                return Err(Error::config("model.gamma", "splitting requires gamma > 0"));
            }
            if let Some(k2) = sp.k2 {
                if !(k2 > 0.0) {
                    return Err(Error::config("splitting.k2", "must be positive"));
                }
            }
        }
        if let Some(d) = &self.diagnostics {
            if !(d.n_cut > 0.0 && d.s <= 1.0) {
                return Err(Error::config("diagnostics", "need n_cut > 0 and s <= 1"));
            }
        }
        Ok(())
    }
}
