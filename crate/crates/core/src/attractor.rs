//! Long forced-damped runs, the moving-cutoff splitting and absorbing-set
//! statistics, with all run artifacts on disk.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checkpoint::Checkpoint;
use crate::config::{ExperimentConfig, InitialSpec, NtLaw};
use crate::diagnostics::{fit_slope, write_records_csv, DiagnosticsRecorder, EnergyRecord};
use crate::error::{Error, Result};
use crate::integrator::{evolve, Observer, SimState};
use crate::symbols::{rescaled_multiplier, split_low_high, Multiplier};
use crate::torus::{norm, NormKind, SpectralField};

pub const DIAGNOSTICS_CSV: &str = "diagnostics.csv";
pub const MANIFEST: &str = "manifest.toml";
pub const FAILURE_MARKER: &str = "FAILED";
pub const CHECKPOINT_DIR: &str = "checkpoints";

/// Echo of everything needed to regenerate a run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub config: ExperimentConfig,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Format(format!("manifest: {}", e.message())))
    }
}

pub(crate) fn write_manifest(dir: &Path, cfg: &ExperimentConfig, status: &str) -> Result<()> {
    let seed = match &cfg.initial {
        Some(InitialSpec::Random { seed, .. }) => Some(*seed),
        _ => None,
    };
    let m = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        status: status.to_string(),
        seed,
        config: cfg.clone(),
    };
    let text = toml::to_string(&m).map_err(|e| Error::Format(e.to_string()))?;
    fs::write(dir.join(MANIFEST), text)?;
    Ok(())
}

/// Field sampled during a run, in the coordinates of the evolved state.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub field: SpectralField,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub records: Vec<EnergyRecord>,
    pub samples: Vec<Sample>,
    pub final_state: SimState,
}

struct RunObserver {
    recorder: DiagnosticsRecorder,
    samples: Vec<Sample>,
    checkpoint_stride: u64,
    offset: u64,
    ckpt_dir: PathBuf,
}

impl Observer for RunObserver {
    fn stride(&self) -> u64 {
        self.recorder.stride
    }

    fn observe(&mut self, state: &SimState, step: u64) -> Result<()> {
        let abs = self.offset + step;
        // A resumed run sees its starting state again; it is already recorded.
        if step == 0 && self.offset > 0 {
            return Ok(());
        }
        self.recorder.observe(state, step)?;
        self.samples.push(Sample {
            t: state.t,
            field: state.field.clone(),
        });
        if self.checkpoint_stride > 0 && abs.is_multiple_of(self.checkpoint_stride) {
            let ck = Checkpoint {
                field: state.field.clone(),
                t: state.t,
                phase: state.phase,
            };
            ck.write(&self.ckpt_dir.join(checkpoint_name(abs)))?;
        }
        Ok(())
    }
}

pub fn checkpoint_name(step: u64) -> String {
    format!("step_{step:010}.bin")
}

fn diagnostics_multiplier(cfg: &ExperimentConfig, state: &SimState) -> Result<(Multiplier, f64)> {
    let grid = *state.field.grid();
    let lambda = state.params.lambda;
    match &cfg.diagnostics {
        Some(d) => Ok((rescaled_multiplier(&grid, d.n_cut, d.s, lambda)?, d.s)),
        None => {
            let s = cfg.splitting.map_or(1.0, |sp| sp.s);
            // Knee above the band: I is the identity.
            Ok((Multiplier::i_operator(grid, 2.0 * grid.max_frequency() + 1.0, s)?, s))
        }
    }
}

fn execute(cfg: &ExperimentConfig, dir: &Path, state: SimState, offset: u64, prior: Vec<EnergyRecord>) -> Result<RunOutput> {
    let run = cfg.run_spec()?;
    let stepper = cfg.stepper()?;
    let ckpt_dir = dir.join(CHECKPOINT_DIR);
    fs::create_dir_all(&ckpt_dir)?;
    let _ = fs::remove_file(dir.join(FAILURE_MARKER));
    write_manifest(dir, cfg, "running")?;
    let (mult, s) = diagnostics_multiplier(cfg, &state)?;
    let mut recorder = DiagnosticsRecorder::new(mult, s, run.stride);
    recorder.records = prior;
    let mut obs = RunObserver {
        recorder,
        samples: Vec::new(),
        checkpoint_stride: run.checkpoint_stride,
        offset,
        ckpt_dir: ckpt_dir.clone(),
    };
    let t_end = run.t_end * state.params.lambda.powi(3);
    let result = evolve(state, t_end, &stepper, &mut [&mut obs]);
    let csv = fs::File::create(dir.join(DIAGNOSTICS_CSV))?;
    write_records_csv(&obs.recorder.records, std::io::BufWriter::new(csv))?;
    match result {
        Ok(final_state) => {
            Checkpoint {
                field: final_state.field.clone(),
                t: final_state.t,
                phase: final_state.phase,
            }
            .write(&ckpt_dir.join("final.bin"))?;
            write_manifest(dir, cfg, "ok")?;
            Ok(RunOutput {
                dir: dir.to_path_buf(),
                records: obs.recorder.records,
                samples: obs.samples,
                final_state,
            })
        }
        Err(e) => {
            fs::write(dir.join(FAILURE_MARKER), format!("{e}\n"))?;
            write_manifest(dir, cfg, "failed")?;
            Err(e)
        }
    }
}

/// Runs `cfg` from its initial data and writes the run directory `dir`:
/// diagnostics CSV, checkpoints and a manifest. On blowup the partial CSV and
/// a failure marker are left behind and the error is returned.
pub fn run_experiment(cfg: &ExperimentConfig, dir: &Path) -> Result<RunOutput> {
    cfg.validate_run()?;
    fs::create_dir_all(dir)?;
    let state = cfg.initial_state_with_seed(None)?;
    execute(cfg, dir, state, 0, Vec::new())
}

/// Continues `cfg` from a checkpoint of an earlier run, writing into `dir`.
/// Records of the earlier run up to the checkpoint time are carried over from
/// `prior` so that the CSV covers the whole horizon.
pub fn resume(cfg: &ExperimentConfig, checkpoint: &Path, dir: &Path, prior: &[EnergyRecord]) -> Result<RunOutput> {
    cfg.validate_run()?;
    fs::create_dir_all(dir)?;
    let ck = Checkpoint::read(checkpoint)?;
    let mut state = cfg.initial_state_with_seed(None)?;
    state.field.grid().check_same(ck.field.grid(), "checkpoint vs config")?;
    state.field = ck.field;
    state.t = ck.t;
    state.phase = ck.phase;
    let dt = cfg.run_spec()?.dt;
    let offset = (ck.t / dt).round() as u64;
    let kept: Vec<EnergyRecord> = prior.iter().filter(|r| r.t <= ck.t).cloned().collect();
    execute(cfg, dir, state, offset, kept)
}

/// Rebuilds the samples of a finished run from its checkpoints.
pub fn load_checkpoints(dir: &Path) -> Result<Vec<Sample>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir.join(CHECKPOINT_DIR))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with("step_")))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let ck = Checkpoint::read(p)?;
            Ok(Sample { t: ck.t, field: ck.field })
        })
        .collect()
}

/// The moving cutoff `N_t`.
pub fn cutoff_at(t: f64, gamma: f64, k2: f64, t1: f64, s: f64, law: NtLaw) -> f64 {
    let e = match law {
        NtLaw::Verbatim => gamma * (t - t1),
        NtLaw::Growing => -gamma * (t - t1),
    };
    (k2 * e.exp()).powf(-1.0 / (2.0 * (1.0 - s)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitRecord {
    pub t: f64,
    pub n_t: f64,
    pub h1_of_l1: f64,
    pub hs_of_l2: f64,
}

/// Splits every sample with `t > t1` at `N_t` into a low part `L1` and a
/// high part `L2`.
pub fn split_series(samples: &[Sample], gamma: f64, k2: f64, t1: f64, s: f64, law: NtLaw) -> Result<Vec<SplitRecord>> {
    let out: Vec<SplitRecord> = samples
        .iter()
        .filter(|x| x.t > t1)
        .map(|x| {
            let n_t = cutoff_at(x.t, gamma, k2, t1, s, law);
            let (lo, hi) = split_low_high(&x.field, n_t)?;
            Ok(SplitRecord {
                t: x.t,
                n_t,
                h1_of_l1: norm(&lo, NormKind::Hs(1.0))?,
                hs_of_l2: norm(&hi, NormKind::Hs(s))?,
            })
        })
        .collect::<Result<_>>()?;
    if out.is_empty() {
        return Err(Error::Inconclusive(format!("no samples after T1 = {t1}")));
    }
    Ok(out)
}

/// Exponential rate `-d/dt log y` fitted over the points with
/// `y > floor * max y`. Needs three such points.
pub fn decay_rate(t: &[f64], y: &[f64], floor: f64) -> Result<f64> {
    let top = y.iter().cloned().fold(0.0, f64::max);
    let (ts, ls): (Vec<f64>, Vec<f64>) = t
        .iter()
        .zip(y)
        .filter(|(_, &v)| v > floor * top && v > 0.0)
        .map(|(&a, &v)| (a, v.ln()))
        .unzip();
    if ts.len() < 3 {
        return Err(Error::Inconclusive(format!("only {} usable points for a decay fit", ts.len())));
    }
    Ok(-fit_slope(&ts, &ls))
}

/// Rate of `||L2||_{H^s}` decay over a split series.
pub fn split_decay_rate(splits: &[SplitRecord]) -> Result<f64> {
    let t: Vec<f64> = splits.iter().map(|r| r.t).collect();
    let y: Vec<f64> = splits.iter().map(|r| r.hs_of_l2).collect();
    decay_rate(&t, &y, 1e-13)
}

/// First sample time after which `||u||_{L^2}` stays within `radius`.
pub fn entry_time(records: &[EnergyRecord], radius: f64) -> Option<f64> {
    let last_out = records.iter().rposition(|r| r.l2 > radius);
    match last_out {
        None => records.first().map(|r| r.t),
        Some(i) if i + 1 < records.len() => Some(records[i + 1].t),
        Some(_) => None,
    }
}

/// Per-run inputs to [`absorbing_set_report`].
#[derive(Debug, Clone)]
pub struct RunSeries {
    pub records: Vec<EnergyRecord>,
    pub splits: Vec<SplitRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbsorbingReport {
    pub radius: f64,
    pub per_run_sup: Vec<f64>,
    pub per_run_entry: Vec<Option<f64>>,
    pub sup: f64,
    pub mean_sup: f64,
    /// `(max - min) / mean` of the per-run sups.
    pub spread: f64,
    pub independent: bool,
    /// Latest entry time into the `L^2` ball over the runs.
    pub t1_empirical: Option<f64>,
    pub inconclusive: bool,
    pub reason: Option<String>,
}

/// Sup of `||L1||_{H^1}` per run and over runs, with the spread across runs.
pub fn absorbing_set_report(runs: &[RunSeries], radius: f64, max_spread: f64) -> Result<AbsorbingReport> {
    if runs.len() < 2 {
        return Err(Error::config("runs", "need at least two runs"));
    }
    let per_run_sup: Vec<f64> = runs
        .iter()
        .map(|r| r.splits.iter().map(|x| x.h1_of_l1).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let per_run_entry: Vec<Option<f64>> = runs.iter().map(|r| entry_time(&r.records, radius)).collect();
    let sup = per_run_sup.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = per_run_sup.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean_sup = per_run_sup.iter().sum::<f64>() / runs.len() as f64;
    let spread = if mean_sup > 0.0 { (sup - lo) / mean_sup } else { 0.0 };
    let mut reason = None;
    if per_run_entry.iter().any(|e| e.is_none()) {
        reason = Some("a run never settles inside the L2 ball".to_string());
    } else if runs.iter().any(|r| r.splits.is_empty()) {
        reason = Some("a run has no samples after T1".to_string());
    }
    let t1_empirical = if reason.is_none() {
        per_run_entry.iter().flatten().cloned().reduce(f64::max)
    } else {
        None
    };
    Ok(AbsorbingReport {
        radius,
        independent: spread <= max_spread,
        per_run_sup,
        per_run_entry,
        sup,
        mean_sup,
        spread,
        t1_empirical,
        inconclusive: reason.is_some(),
        reason,
    })
}

/// Copy of `cfg` with the random seed and the data size replaced.
pub fn member_config(cfg: &ExperimentConfig, seed: u64, scale: f64, output: PathBuf) -> Result<ExperimentConfig> {
    let mut c = cfg.clone();
    c.output = output;
    match c.initial.as_mut() {
        Some(InitialSpec::Random { seed: s0, size, .. }) => {
            *s0 = seed;
            *size *= scale;
        }
        _ => return Err(Error::config("initial", "attractor ensembles need random initial data")),
    }
    Ok(c)
}

#[derive(Debug, Clone, Serialize)]
pub struct AttractorSummary {
    pub gamma: f64,
    pub k2: f64,
    pub t1: f64,
    pub law: NtLaw,
    pub forcing_l2: f64,
    pub report: AbsorbingReport,
    pub decay_rates: Vec<Option<f64>>,
    pub min_decay_rate: Option<f64>,
    pub inconclusive: bool,
}

/// Runs the seed-by-scale ensemble in parallel, splits every run and
/// summarizes. Writes one run directory per member below `cfg.output`.
pub fn attractor_experiment(cfg: &ExperimentConfig) -> Result<(AttractorSummary, Vec<RunOutput>)> {
    let spec = cfg
        .attractor
        .as_ref()
        .ok_or_else(|| Error::config("attractor", "section is required"))?;
    let split = cfg
        .splitting
        .ok_or_else(|| Error::config("splitting", "section is required"))?;
    let params = cfg.model_params()?;
    if params.gamma <= 0.0 {
        return Err(Error::config("model.gamma", "attractor runs need gamma > 0"));
    }
    if params.lambda != 1.0 {
        return Err(Error::config("model.lambda", "attractor runs use lambda = 1"));
    }
    let mut members = Vec::new();
    for &seed in &spec.seeds {
        for &scale in &spec.scales {
            let dir = cfg.output.join(format!("run_seed{seed}_x{scale}"));
            members.push(member_config(cfg, seed, scale, dir)?);
        }
    }
    if members.len() < 2 {
        return Err(Error::config("attractor.seeds", "need at least two runs"));
    }
    let runs: Vec<RunOutput> = members
        .par_iter()
        .map(|m| run_experiment(m, &m.output))
        .collect::<Result<_>>()?;

    let f = cfg.forcing_field()?;
    let forcing_l2 = norm(&f, NormKind::L2)?;
    let radius = (1.0 + spec.margin) * forcing_l2 / params.gamma;
    let entries: Vec<Option<f64>> = runs.iter().map(|r| entry_time(&r.records, radius)).collect();
    let t1 = match split.t1 {
        Some(t1) => t1,
        None => match entries.iter().cloned().collect::<Option<Vec<f64>>>() {
            Some(v) => v.into_iter().fold(0.0, f64::max),
            None => cfg.run_spec()?.t_end,
        },
    };
    let k2 = match split.k2 {
        Some(k) => k,
        None => runs
            .iter()
            .flat_map(|r| r.records.iter().filter(|x| x.t > t1).map(|x| x.h1_of_iu.powi(2)))
            .fold(f64::MIN_POSITIVE, f64::max),
    };
    let series: Vec<RunSeries> = runs
        .iter()
        .map(|r| {
            let splits = split_series(&r.samples, params.gamma, k2, t1, split.s, split.law).unwrap_or_default();
            RunSeries {
                records: r.records.clone(),
                splits,
            }
        })
        .collect();
    for (r, sr) in runs.iter().zip(&series) {
        let mut wr = csv::Writer::from_path(r.dir.join("splits.csv"))?;
        for x in &sr.splits {
            wr.serialize(x)?;
        }
        wr.flush()?;
    }
    let report = absorbing_set_report(&series, radius, spec.max_spread)?;
    let decay_rates: Vec<Option<f64>> = series.iter().map(|s| split_decay_rate(&s.splits).ok()).collect();
    let min_decay_rate = decay_rates
        .iter()
        .cloned()
        .collect::<Option<Vec<f64>>>()
        .map(|v| v.into_iter().fold(f64::INFINITY, f64::min));
    let inconclusive = report.inconclusive || min_decay_rate.is_none();
    Ok((
        AttractorSummary {
            gamma: params.gamma,
            k2,
            t1,
            law: split.law,
            forcing_l2,
            report,
            decay_rates,
            min_decay_rate,
            inconclusive,
        },
        runs,
    ))
}
