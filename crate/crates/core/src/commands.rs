//! One function per experiment kind. Each writes its artifacts below
//! `cfg.output`: a manifest echoing the config, data CSVs and `summary.toml`.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::attractor::{attractor_experiment, run_experiment, write_manifest, RunOutput};
use crate::config::{ExperimentConfig, LabSpec, NtLaw};
use crate::diagnostics::{almost_conservation_slope, fit_slope, SlopeReport};
use crate::error::{Error, Result};
use crate::integrator::StepperConfig;
use crate::lab::ensemble::{
    preset_name, sample_seed, strichartz_ensemble, trilinear_ensemble, write_lab_csv, EnsembleResult, EnsembleSpec, LabRecord,
};
use crate::lab::{three_wave_counterexample, BandPreset, SpaceTimeLattice};

pub const SUMMARY: &str = "summary.toml";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Diagnose,
    Slope,
    Trilinear,
    Strichartz,
    Counterexample,
    Attractor,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Diagnose => "diagnose",
            Command::Slope => "slope",
            Command::Trilinear => "trilinear",
            Command::Strichartz => "strichartz",
            Command::Counterexample => "counterexample",
            Command::Attractor => "attractor",
        }
    }
}

fn csv_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut wr = csv::Writer::from_path(path)?;
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

/// Runs `cmd` and returns the text of the summary it wrote.
pub fn run_command(cmd: Command, cfg: &ExperimentConfig) -> Result<String> {
    match cmd {
        Command::Simulate => simulate(cfg),
        Command::Diagnose => diagnose(cfg),
        Command::Slope => slope(cfg).map(|(s, _)| s),
        Command::Trilinear => lab(cfg, LabKind::Trilinear).map(|(s, _)| s),
        Command::Strichartz => lab(cfg, LabKind::Strichartz).map(|(s, _)| s),
        Command::Counterexample => counterexample(cfg),
        Command::Attractor => attractor(cfg),
    }
}

#[derive(Serialize)]
struct RunSummary {
    command: &'static str,
    final_t: f64,
    samples: usize,
    l2_start: f64,
    l2_end: f64,
    /// `max |l2(t) - l2(0)| / l2(0)`.
    l2_drift: f64,
    /// `max |E(u)(t) - E(u)(0)| / |E(u)(0)|`.
    energy_drift: f64,
    /// `E(I u)(T) - E(I u)(0)`.
    modified_energy_change: f64,
}

fn run_summary(command: &'static str, out: &RunOutput) -> RunSummary {
    let r = &out.records;
    let (first, last) = (&r[0], &r[r.len() - 1]);
    let rel = |v: f64, v0: f64| if v0 != 0.0 { (v - v0).abs() / v0.abs() } else { (v - v0).abs() };
    RunSummary {
        command,
        final_t: out.final_state.t,
        samples: r.len(),
        l2_start: first.l2,
        l2_end: last.l2,
        l2_drift: r.iter().map(|x| rel(x.l2, first.l2)).fold(0.0, f64::max),
        energy_drift: r.iter().map(|x| rel(x.energy, first.energy)).fold(0.0, f64::max),
        modified_energy_change: last.modified_energy - first.modified_energy,
    }
}

fn finish<T: Serialize>(cfg: &ExperimentConfig, summary: &T) -> Result<String> {
    let text = toml::to_string(summary).map_err(|e| Error::Format(e.to_string()))?;
    fs::write(cfg.output.join(SUMMARY), &text)?;
    Ok(text)
}

/// A single run with the diagnostics CSV, checkpoints and manifest.
pub fn simulate(cfg: &ExperimentConfig) -> Result<String> {
    let out = run_experiment(cfg, &cfg.output)?;
    finish(cfg, &run_summary("simulate", &out))
}

/// Like [`simulate`], but the `[diagnostics]` section is required so that
/// the increment columns refer to a real I-operator.
pub fn diagnose(cfg: &ExperimentConfig) -> Result<String> {
    if cfg.diagnostics.is_none() {
        return Err(Error::config("diagnostics", "section is required"));
    }
    let out = run_experiment(cfg, &cfg.output)?;
    finish(cfg, &run_summary("diagnose", &out))
}

#[derive(Serialize)]
struct SlopeRow {
    n_cut: f64,
    increment: f64,
    quartic_integral: f64,
    sextic_integral: f64,
}

/// Almost-conservation sweep over `[slope].n_cuts`. A degenerate sweep
/// writes its outputs and then fails as inconclusive.
pub fn slope(cfg: &ExperimentConfig) -> Result<(String, SlopeReport)> {
    let spec = cfg.slope.as_ref().ok_or_else(|| Error::config("slope", "section is required"))?;
    if !(spec.dt > 0.0 && spec.t_end > 0.0) {
        return Err(Error::config("slope", "t_end and dt must be positive"));
    }
    if spec.n_cuts.iter().any(|&n| !(n > 0.0)) {
        return Err(Error::config("slope.n_cuts", "cutoffs must be positive"));
    }
    let u0 = cfg.initial_field()?;
    fs::create_dir_all(&cfg.output)?;
    write_manifest(&cfg.output, cfg, "running")?;
    let r = almost_conservation_slope(&u0, &spec.n_cuts, spec.t_end, spec.s, &StepperConfig::new(spec.dt), spec.sample_stride)?;
    let rows: Vec<SlopeRow> = (0..r.n_cuts.len())
        .map(|i| SlopeRow {
            n_cut: r.n_cuts[i],
            increment: r.increments[i],
            quartic_integral: r.quartic_integrals[i],
            sextic_integral: r.sextic_integrals[i],
        })
        .collect();
    csv_rows(&cfg.output.join("slope.csv"), &rows)?;
    #[derive(Serialize)]
    struct S {
        slope: f64,
        slope_quartic: f64,
        slope_sextic: f64,
        energy_drift: f64,
        degenerate: bool,
    }
    let text = finish(
        cfg,
        &S {
            slope: r.slope,
            slope_quartic: r.slope_quartic,
            slope_sextic: r.slope_sextic,
            energy_drift: r.energy_drift,
            degenerate: r.degenerate,
        },
    )?;
    if r.degenerate {
        write_manifest(&cfg.output, cfg, "inconclusive")?;
        return Err(Error::Inconclusive("an increment is below the noise floor".into()));
    }
    write_manifest(&cfg.output, cfg, "ok")?;
    Ok((text, r))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabKind {
    Trilinear,
    Strichartz,
}

/// Ensemble maxima per `lambda`, with the refined lattice when requested.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabSummary {
    pub experiment: String,
    pub lambdas: Vec<f64>,
    pub max_ratio: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub refined_max_ratio: Vec<f64>,
    /// Largest `|refined - coarse| / coarse` over `lambda`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refinement_change: Option<f64>,
    /// Slope of `log max_ratio` against `log lambda`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_slope: Option<f64>,
}

fn lab_spec(cfg: &ExperimentConfig) -> Result<&LabSpec> {
    let spec = cfg.lab.as_ref().ok_or_else(|| Error::config("lab", "section is required"))?;
    if spec.lambdas.is_empty() {
        return Err(Error::config("lab.lambdas", "need at least one value"));
    }
    Ok(spec)
}

/// Trilinear or Strichartz ensembles over `[lab].lambdas`.
pub fn lab(cfg: &ExperimentConfig, kind: LabKind) -> Result<(String, LabSummary)> {
    let spec = lab_spec(cfg)?;
    fs::create_dir_all(&cfg.output)?;
    write_manifest(&cfg.output, cfg, "running")?;
    let preset: BandPreset = spec.preset.into();
    let (name, b) = match kind {
        LabKind::Trilinear => ("trilinear", -0.5),
        LabKind::Strichartz => ("strichartz", spec.b),
    };
    let eval = |lat: SpaceTimeLattice| -> Result<EnsembleResult> {
        let es = EnsembleSpec::new(lat, spec.s, spec.size, spec.seed);
        match kind {
            LabKind::Trilinear => trilinear_ensemble(&es, preset),
            LabKind::Strichartz => strichartz_ensemble(&es, spec.b),
        }
    };
    let mut records = Vec::new();
    let mut max_ratio = Vec::new();
    let mut refined_max_ratio = Vec::new();
    for &lambda in &spec.lambdas {
        let lat = SpaceTimeLattice::new(lambda, spec.k_max, spec.dtau)?;
        let mut lattices = vec![("", lat)];
        if spec.refine {
            lattices.push(("refined", lat.refined()));
        }
        for (tag, l) in lattices {
            let res = eval(l)?;
            for (n, &ratio) in res.ratios.iter().enumerate() {
                records.push(LabRecord {
                    experiment: if tag.is_empty() { name.to_string() } else { format!("{name}_{tag}") },
                    lambda,
                    s: spec.s,
                    b,
                    preset: preset_name(&preset),
                    ratio,
                    ensemble_size: spec.size,
                    seed: sample_seed(spec.seed, n, 0),
                });
            }
            if tag.is_empty() {
                max_ratio.push(res.max);
            } else {
                refined_max_ratio.push(res.max);
            }
        }
    }
    write_lab_csv(&records, fs::File::create(cfg.output.join(format!("{name}.csv")))?)?;
    let refinement_change = (!refined_max_ratio.is_empty()).then(|| {
        max_ratio
            .iter()
            .zip(&refined_max_ratio)
            .map(|(a, b)| (b - a).abs() / a.abs())
            .fold(0.0, f64::max)
    });
    let lambda_slope = (spec.lambdas.len() >= 2).then(|| {
        let x: Vec<f64> = spec.lambdas.iter().map(|l| l.ln()).collect();
        let y: Vec<f64> = max_ratio.iter().map(|m| m.ln()).collect();
        fit_slope(&x, &y)
    });
    let summary = LabSummary {
        experiment: name.to_string(),
        lambdas: spec.lambdas.clone(),
        max_ratio,
        refined_max_ratio,
        refinement_change,
        lambda_slope,
    };
    let text = finish(cfg, &summary)?;
    write_manifest(&cfg.output, cfg, "ok")?;
    Ok((text, summary))
}

/// Explicit three-wave counterexample over `[counterexample].lambdas`.
pub fn counterexample(cfg: &ExperimentConfig) -> Result<String> {
    let spec = cfg
        .counterexample
        .as_ref()
        .ok_or_else(|| Error::config("counterexample", "section is required"))?;
    fs::create_dir_all(&cfg.output)?;
    write_manifest(&cfg.output, cfg, "running")?;
    let report = three_wave_counterexample(&spec.lambdas, spec.s, spec.homogeneous, spec.dtau)?;
    csv_rows(&cfg.output.join("counterexample.csv"), &report.rows)?;
    #[derive(Serialize)]
    struct S {
        s: f64,
        homogeneous: bool,
        slope: f64,
    }
    let text = finish(
        cfg,
        &S {
            s: report.s,
            homogeneous: report.homogeneous,
            slope: report.slope,
        },
    )?;
    write_manifest(&cfg.output, cfg, "ok")?;
    Ok(text)
}

#[derive(Serialize)]
struct AttractorRunRow {
    run: String,
    sup_h1_of_l1: f64,
    entry_time: Option<f64>,
    decay_rate: Option<f64>,
}

#[derive(Serialize)]
struct AttractorSummaryFile {
    gamma: f64,
    k2: f64,
    t1: f64,
    law: NtLaw,
    forcing_l2: f64,
    radius: f64,
    sup: f64,
    mean_sup: f64,
    spread: f64,
    independent: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    min_decay_rate: Option<f64>,
    inconclusive: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
}

/// Seed ensemble with splitting statistics. An inconclusive ensemble writes
/// its outputs and then fails.
pub fn attractor(cfg: &ExperimentConfig) -> Result<String> {
    fs::create_dir_all(&cfg.output)?;
    let (s, runs) = attractor_experiment(cfg)?;
    let r = &s.report;
    let rows: Vec<AttractorRunRow> = runs
        .iter()
        .enumerate()
        .map(|(i, run)| AttractorRunRow {
            run: run.dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
            sup_h1_of_l1: r.per_run_sup[i],
            entry_time: r.per_run_entry[i],
            decay_rate: s.decay_rates[i],
        })
        .collect();
    csv_rows(&cfg.output.join("attractor_runs.csv"), &rows)?;
    let reason = r.reason.clone().or_else(|| s.min_decay_rate.is_none().then(|| "no decay fit for some run".to_string()));
    let text = finish(
        cfg,
        &AttractorSummaryFile {
            gamma: s.gamma,
            k2: s.k2,
            t1: s.t1,
            law: s.law,
            forcing_l2: s.forcing_l2,
            radius: r.radius,
            sup: r.sup,
            mean_sup: r.mean_sup,
            spread: r.spread,
            independent: r.independent,
            min_decay_rate: s.min_decay_rate,
            inconclusive: s.inconclusive,
            reason: reason.clone(),
        },
    )?;
    if s.inconclusive {
        write_manifest(&cfg.output, cfg, "inconclusive")?;
        return Err(Error::Inconclusive(reason.unwrap_or_default()));
    }
    write_manifest(&cfg.output, cfg, "ok")?;
    Ok(text)
}
