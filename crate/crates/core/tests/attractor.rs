mod common;

use std::fs;

use common::random_field;
use mkdv_core::attractor::*;
use mkdv_core::config::{ExperimentConfig, NtLaw};
use mkdv_core::diagnostics::read_records_csv;
use mkdv_core::symbols::split_low_high;
use mkdv_core::torus::{SpectralField, TorusGrid};
use mkdv_core::Error;
use num_complex::Complex64 as C;

const BASE: &str = r#"
[grid]
period = 6.283185307179586
n_modes = 32

[model]
gamma = 0.5

[forcing]
kind = "two_mode"
j1 = 1
j2 = 2
amplitude = 0.1

[initial]
kind = "random"
seed = 1
s = 0.95
size = 1.0
rolloff = 0.5

[run]
t_end = 2.0
dt = 0.005
stride = 10
checkpoint_stride = 40
"#;

fn cfg(extra: &str, out: &std::path::Path) -> ExperimentConfig {
    let mut c = ExperimentConfig::from_toml_str(&format!("{BASE}\n{extra}")).unwrap();
    c.output = out.to_path_buf();
    c
}

fn read_csv(dir: &std::path::Path) -> Vec<mkdv_core::diagnostics::EnergyRecord> {
    read_records_csv(fs::File::open(dir.join(DIAGNOSTICS_CSV)).unwrap()).unwrap()
}

#[test]
fn zero_data_and_forcing_stay_zero() {
    let dir = tempfile::tempdir().unwrap();
    let text = BASE.replace("kind = \"two_mode\"", "kind = \"zero\"\n#").replace("kind = \"random\"", "kind = \"zero\"\n#");
    let text: String = text
        .lines()
        .filter(|l| !["j1", "j2", "amplitude", "seed", "s =", "size", "rolloff"].iter().any(|k| l.starts_with(k)))
        .collect::<Vec<_>>()
        .join("\n");
    let c = ExperimentConfig::from_toml_str(&text).unwrap();
    let out = run_experiment(&c, dir.path()).unwrap();
    assert_eq!(out.records.len(), 41);
    for r in read_csv(dir.path()) {
        assert_eq!([r.l2, r.hs, r.h1_of_iu, r.energy, r.modified_energy, r.m_quartic, r.m_sextic], [0.0; 7]);
    }
}

#[test]
fn run_directory_layout_and_manifest_rerun() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let c = cfg("", &a);
    let out = run_experiment(&c, &a).unwrap();
    assert!(!a.join(FAILURE_MARKER).exists());
    assert!(a.join(CHECKPOINT_DIR).join("final.bin").exists());
    assert!(a.join(CHECKPOINT_DIR).join(checkpoint_name(400)).exists());
    let samples = load_checkpoints(&a).unwrap();
    assert_eq!(samples.len(), 11);
    assert!((samples[5].t - 1.0).abs() < 1e-12);
    assert_eq!(samples.last().unwrap().field, out.final_state.field);

    let m = Manifest::read(&a.join(MANIFEST)).unwrap();
    assert_eq!((m.status.as_str(), m.seed), ("ok", Some(1)));
    assert_eq!(m.config, c);
    let b = tmp.path().join("b");
    run_experiment(&m.config, &b).unwrap();
    let (ra, rb) = (read_csv(&a), read_csv(&b));
    assert_eq!(ra.len(), rb.len());
    for (x, y) in ra.iter().zip(&rb) {
        assert!((x.l2 - y.l2).abs() < 1e-12 && (x.energy - y.energy).abs() < 1e-12 && x.t == y.t);
    }
}

#[test]
fn resume_from_checkpoint_is_bit_exact() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let c = cfg("", &a);
    let full = run_experiment(&c, &a).unwrap();
    let ck = a.join(CHECKPOINT_DIR).join(checkpoint_name(160));
    let b = tmp.path().join("b");
    let resumed = resume(&c, &ck, &b, &full.records).unwrap();
    assert_eq!(resumed.final_state.field, full.final_state.field);
    assert_eq!(resumed.final_state.t, full.final_state.t);
    assert_eq!(read_csv(&b), read_csv(&a));
    // Mismatched grids are refused.
    let mut other = c.clone();
    other.grid.as_mut().unwrap().n_modes = 64;
    assert!(resume(&other, &ck, &tmp.path().join("c"), &[]).is_err());
}

#[test]
fn split_identity() {
    let g = TorusGrid::new(2.0, 64).unwrap();
    let u = random_field(g, 3, 1.0);
    for n in [0.0, 0.7, 3.2, 100.0] {
        let (lo, hi) = split_low_high(&u, n).unwrap();
        assert!(lo.add(&hi).unwrap().max_diff(&u).unwrap() < 1e-15);
        for j in 0..32 {
            let k = j as f64 / 2.0;
            if k > n {
                assert_eq!(lo.coeff(j).norm(), 0.0);
            }
        }
    }
}

#[test]
fn cutoff_laws() {
    let (g, k2, t1, s): (f64, f64, f64, f64) = (0.5, 0.01, 2.0, 0.95);
    let at_t1 = k2.powf(-1.0 / (2.0 * (1.0 - s)));
    for law in [NtLaw::Verbatim, NtLaw::Growing] {
        assert!((cutoff_at(t1, g, k2, t1, s, law) / at_t1 - 1.0).abs() < 1e-12);
    }
    assert!(cutoff_at(3.0, g, k2, t1, s, NtLaw::Verbatim) < at_t1);
    let grow = cutoff_at(3.0, g, k2, t1, s, NtLaw::Growing);
    assert!((grow / at_t1 - (g / (2.0 * (1.0 - s))).exp()).abs() < 1e-9);
}

#[test]
fn high_part_vanishes_once_the_cutoff_passes_the_mode() {
    let g = TorusGrid::new(1.0, 64).unwrap();
    let j = 20;
    let f = SpectralField::from_modes(g, &[(j, C::new(0.3, 0.1))]).unwrap();
    let (gamma, s) = (1.0, 0.95);
    let k2 = 2f64.powf(-2.0 * (1.0 - s));
    let samples: Vec<Sample> = (0..60).map(|i| Sample { t: 0.1 * i as f64, field: f.clone() }).collect();
    let splits = split_series(&samples, gamma, k2, 0.0, s, NtLaw::Growing).unwrap();
    let cross = splits.iter().position(|r| r.n_t >= j as f64).unwrap();
    assert!(cross > 0);
    assert!(splits[..cross].iter().all(|r| r.hs_of_l2 > 0.0 && r.h1_of_l1 == 0.0));
    assert!(splits[cross..].iter().all(|r| r.hs_of_l2 == 0.0 && r.h1_of_l1 > 0.0));
    assert!(matches!(split_series(&samples, gamma, k2, 10.0, s, NtLaw::Growing), Err(Error::Inconclusive(_))));
}

#[test]
fn unforced_norms_decay_at_the_damping_rate() {
    let dir = tempfile::tempdir().unwrap();
    let text = BASE
        .replace("amplitude = 0.1", "amplitude = 0.0")
        .replace("size = 1.0", "size = 0.2")
        .replace("t_end = 2.0", "t_end = 6.0");
    let c = ExperimentConfig::from_toml_str(&format!("{text}\n[splitting]\ns = 0.95\n")).unwrap();
    let out = run_experiment(&c, dir.path()).unwrap();
    let t: Vec<f64> = out.records.iter().map(|r| r.t).collect();
    let hs: Vec<f64> = out.records.iter().map(|r| r.hs).collect();
    let rate = decay_rate(&t, &hs, 0.0).unwrap();
    assert!((0.9 * 0.5..1.1 * 0.5).contains(&rate), "rate {rate}");
    assert!(decay_rate(&t[..2], &hs[..2], 0.0).is_err());
}

fn ensemble(extra: &str, out: &std::path::Path) -> AttractorSummary {
    ensemble_with_gamma(extra, out, 0.5)
}

fn ensemble_with_gamma(extra: &str, out: &std::path::Path, gamma: f64) -> AttractorSummary {
    let text = BASE
        .replace("gamma = 0.5", &format!("gamma = {gamma:?}"))
        .replace("t_end = 2.0", "t_end = 12.0").replace("checkpoint_stride = 40", "checkpoint_stride = 0");
    let mut c = ExperimentConfig::from_toml_str(&format!("{text}\n{extra}")).unwrap();
    c.output = out.to_path_buf();
    attractor_experiment(&c).unwrap().0
}

#[test]
fn absorbing_set_statistics() {
    let tmp = tempfile::tempdir().unwrap();
    let split = "[splitting]\ns = 0.95\nlaw = \"growing\"\nt1 = 6.0\nk2 = 1.0\n";
    let same = ensemble(&format!("{split}[attractor]\nseeds = [4, 4]\n"), &tmp.path().join("same"));
    assert_eq!(same.report.per_run_sup[0], same.report.per_run_sup[1]);
    assert_eq!(same.report.spread, 0.0);
    assert!(tmp.path().join("same/run_seed4_x1/splits.csv").exists());

    let scaled = ensemble(&format!("{split}[attractor]\nseeds = [4]\nscales = [1.0, 2.0]\n"), &tmp.path().join("x2"));
    let r = &scaled.report;
    assert!(r.spread < 0.25, "spread {}", r.spread);
    assert!(r.independent && !scaled.inconclusive);
    assert!((scaled.forcing_l2 / 0.5 * 1.1 - r.radius).abs() < 1e-12);

    let damped = ensemble_with_gamma(&format!("{split}[attractor]\nseeds = [4, 5]\n"), &tmp.path().join("g2"), 1.0);
    assert!(damped.report.radius < r.radius);
}

#[test]
fn ensemble_defaults_and_inconclusive_horizon() {
    let tmp = tempfile::tempdir().unwrap();
    // T1 beyond the horizon leaves no samples to split.
    let s = ensemble("[splitting]\ns = 0.95\nt1 = 50.0\n[attractor]\nseeds = [1, 2]\n", &tmp.path().join("late"));
    assert!(s.inconclusive && s.report.inconclusive);
    assert!(s.min_decay_rate.is_none());
    // Defaults: T1 from the entry times, K2 from the measured H1 norm.
    let d = ensemble("[splitting]\ns = 0.95\n[attractor]\nseeds = [1, 2]\n", &tmp.path().join("def"));
    assert_eq!(Some(d.t1), d.report.t1_empirical);
    assert!(d.k2 > 0.0);
    let one = RunSeries { records: vec![], splits: vec![] };
    assert!(matches!(absorbing_set_report(&[one], 1.0, 0.25), Err(Error::Config { .. })));
}

#[test]
fn entry_time_rules() {
    let rec = |t: f64, l2: f64| mkdv_core::diagnostics::EnergyRecord {
        t,
        l2,
        hs: 0.0,
        h1_of_iu: 0.0,
        energy: 0.0,
        modified_energy: 0.0,
        m_quartic: 0.0,
        m_sextic: 0.0,
    };
    let r = [rec(0.0, 3.0), rec(1.0, 0.5), rec(2.0, 1.5), rec(3.0, 0.9), rec(4.0, 0.8)];
    assert_eq!(entry_time(&r, 1.0), Some(3.0));
    assert_eq!(entry_time(&r, 5.0), Some(0.0));
    assert_eq!(entry_time(&r, 0.1), None);
}

#[test]
fn blowup_leaves_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let text = BASE
        .replace("size = 1.0", "size = 40.0")
        .replace("dt = 0.005", "dt = 0.05")
        .replace("t_end = 2.0", "t_end = 50.0")
        .replace("stride = 10\ncheckpoint_stride = 40", "stride = 1");
    let c = ExperimentConfig::from_toml_str(&text).unwrap();
    match run_experiment(&c, dir.path()) {
        Err(Error::Blowup { last_good_time }) => {
            let recs = read_csv(dir.path());
            assert!(!recs.is_empty());
            assert!(recs.last().unwrap().t <= last_good_time + 1e-12);
        }
        other => panic!("expected blowup, got {:?}", other.map(|o| o.final_state.t)),
    }
    assert!(dir.path().join(FAILURE_MARKER).exists());
    assert_eq!(Manifest::read(&dir.path().join(MANIFEST)).unwrap().status, "failed");
}
