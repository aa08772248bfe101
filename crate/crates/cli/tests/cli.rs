use std::fs;
use std::path::Path;
use std::process::Command;

const RUN: &str = r#"
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
t_end = 1.0
dt = 0.005
stride = 10
"#;

fn mkdv(dir: &Path, sub: &str, body: &str) -> (i32, String, String) {
    let cfg = dir.join("cfg.toml");
    let out = dir.join("out");
    fs::write(&cfg, format!("output = {:?}\n{body}", out.to_str().unwrap())).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_mkdv")).arg(sub).arg(&cfg).output().unwrap();
    (
        o.status.code().unwrap(),
        String::from_utf8_lossy(&o.stdout).into_owned(),
        String::from_utf8_lossy(&o.stderr).into_owned(),
    )
}

#[test]
fn simulate_writes_run_directory() {
    let d = tempfile::tempdir().unwrap();
    let (code, stdout, _) = mkdv(d.path(), "simulate", RUN);
    assert_eq!(code, 0);
    assert!(stdout.contains("final_t"));
    for f in ["diagnostics.csv", "manifest.toml", "summary.toml", "checkpoints/final.bin"] {
        assert!(d.path().join("out").join(f).exists(), "{f}");
    }
    let manifest = fs::read_to_string(d.path().join("out/manifest.toml")).unwrap();
    assert!(manifest.contains("status = \"ok\""));
}

#[test]
fn config_errors_exit_2() {
    let d = tempfile::tempdir().unwrap();
    let (code, _, err) = mkdv(d.path(), "simulate", &format!("{RUN}\nmystery = 1\n"));
    assert_eq!(code, 2);
    assert!(err.contains("mystery"));
    let (code, _, err) = mkdv(d.path(), "diagnose", RUN);
    assert_eq!(code, 2);
    assert!(err.contains("diagnostics"));
    let (code, _, _) = mkdv(d.path(), "simulate", &RUN.replace("dt = 0.005", "dt = 0.0"));
    assert_eq!(code, 2);
    let o = Command::new(env!("CARGO_BIN_EXE_mkdv"))
        .args(["slope", d.path().join("missing.toml").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn blowup_exits_3_and_marks_failure() {
    let d = tempfile::tempdir().unwrap();
    let body = RUN
        .replace("size = 1.0", "size = 40.0")
        .replace("dt = 0.005", "dt = 0.05")
        .replace("t_end = 1.0", "t_end = 50.0");
    let (code, _, err) = mkdv(d.path(), "simulate", &body);
    assert_eq!(code, 3, "{err}");
    assert!(d.path().join("out/FAILED").exists());
    assert!(d.path().join("out/diagnostics.csv").exists());
}

#[test]
fn inconclusive_exits_4() {
    let d = tempfile::tempdir().unwrap();
    let body = format!("{RUN}\n[splitting]\ns = 0.95\nt1 = 50.0\n[attractor]\nseeds = [1, 2]\n");
    let (code, _, err) = mkdv(d.path(), "attractor", &body);
    assert_eq!(code, 4, "{err}");
    assert!(d.path().join("out/summary.toml").exists());
    assert!(d.path().join("out/attractor_runs.csv").exists());

    let slope = "[grid]\nperiod = 1.0\nn_modes = 32\n[initial]\nkind = \"modes\"\nmodes = [{ index = 1, re = 0.3 }]\n\
                 [slope]\nn_cuts = [8.0, 16.0]\nt_end = 1e-5\ndt = 1e-7\ns = 0.5\n";
    let (code, _, err) = mkdv(d.path(), "slope", slope);
    assert_eq!(code, 4, "{err}");
    assert!(d.path().join("out/slope.csv").exists());
}

#[test]
fn attractor_succeeds_with_a_reachable_horizon() {
    let d = tempfile::tempdir().unwrap();
    let body = format!("{RUN}\n[splitting]\ns = 0.95\nlaw = \"growing\"\nt1 = 0.5\nk2 = 1.0\n[attractor]\nseeds = [1, 2]\n");
    let (code, stdout, err) = mkdv(d.path(), "attractor", &body);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.contains("spread"));
    assert!(d.path().join("out/run_seed1_x1/splits.csv").exists());
}

#[test]
fn lab_commands() {
    let d = tempfile::tempdir().unwrap();
    let lab = "[lab]\nlambdas = [1.0, 4.0]\nk_max = 1.0\ndtau = 0.5\nsize = 3\nseed = 2\nrefine = true\n";
    for sub in ["trilinear", "strichartz"] {
        let (code, stdout, err) = mkdv(d.path(), sub, lab);
        assert_eq!(code, 0, "{sub}: {err}");
        assert!(stdout.contains("refinement_change") && stdout.contains("lambda_slope"));
        let rows = fs::read_to_string(d.path().join(format!("out/{sub}.csv"))).unwrap();
        assert_eq!(rows.lines().count(), 1 + 2 * 2 * 3);
    }
    let ce = "[counterexample]\nlambdas = [4.0, 16.0, 64.0]\ns = 0.5\n";
    let (code, stdout, _) = mkdv(d.path(), "counterexample", ce);
    assert_eq!(code, 0);
    assert!(stdout.contains("slope"));
    let (code, _, _) = mkdv(d.path(), "counterexample", &ce.replace("4.0,", "5.0,"));
    assert_eq!(code, 2);
}
