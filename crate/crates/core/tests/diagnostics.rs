mod common;

use std::f64::consts::PI;

use common::{conv3_oracle, random_field};
use mkdv_core::diagnostics::*;
use mkdv_core::integrator::{evolve, ModelParams, Sign, SimState, StepperConfig};
use mkdv_core::profiles;
use mkdv_core::symbols::{apply, i_symbol, Multiplier};
use mkdv_core::torus::{SpectralField, TorusGrid};
use num_complex::Complex64 as C;

fn grid(l: f64, n: usize) -> TorusGrid {
    TorusGrid::new(l, n).unwrap()
}

#[test]
fn energy_of_zero_and_cosine() {
    let g = grid(2.0 * PI, 32);
    assert_eq!(energy(&SpectralField::zeros(g)), 0.0);
    let u = SpectralField::from_fn(g, |x| x.cos()).unwrap();
    assert!((energy(&u) - PI / 4.0).abs() < 1e-13);
    let a = 0.6;
    let u = SpectralField::from_fn(g, |x| a * (3.0 * x).cos()).unwrap();
    let expect = PI * 9.0 * a * a - 0.75 * PI * a.powi(4);
    assert!((energy(&u) - expect).abs() < 1e-13);
}

#[test]
fn energy_matches_convolution_oracle() {
    let g = grid(1.7, 16);
    let u = random_field(g, 3, 1.0);
    let m = g.max_index();
    let kin: f64 = (-m..=m)
        .map(|j| (2.0 * PI * j as f64 / g.period()).powi(2) * u.coeff(j).norm_sqr())
        .sum::<f64>()
        * g.period();
    let mut quart = 0.0;
    for j in -2 * m..=2 * m {
        let mut sq = C::new(0.0, 0.0);
        for j1 in -m..=m {
            sq += u.coeff(j1) * u.coeff(j - j1);
        }
        quart += sq.norm_sqr();
    }
    quart *= g.period();
    let e = energy(&u);
    assert!((e - (kin - quart)).abs() < 1e-10 * (kin + quart));
}

#[test]
fn modified_energy_with_identity_symbol_is_energy() {
    let g = grid(1.0, 32);
    let u = random_field(g, 4, 1.5);
    let mult = Multiplier::i_operator(g, 100.0, 0.5).unwrap();
    assert_eq!(modified_energy(&u, &mult).unwrap(), energy(&u));
    assert_eq!(modified_energy(&SpectralField::zeros(g), &mult).unwrap(), 0.0);
}

#[test]
fn modified_energy_of_high_single_mode() {
    let g = grid(1.0, 128);
    let (a, j, n_cut, s) = (0.3, 40, 8.0, 0.6);
    let u = SpectralField::from_modes(g, &[(j, C::new(a / 2.0, 0.0))]).unwrap();
    let mult = Multiplier::i_operator(g, n_cut, s).unwrap();
    let m = i_symbol(j as f64, n_cut, s);
    assert!((m - (j as f64 / n_cut).powf(s - 1.0)).abs() < 1e-15);
    let b = m * a;
    let expect = b * b * (2.0 * PI * j as f64).powi(2) / 2.0 - 3.0 * b.powi(4) / 8.0;
    assert!((modified_energy(&u, &mult).unwrap() / expect - 1.0).abs() < 1e-12);
}

#[test]
fn increment_vanishes_without_modes_above_the_knee() {
    let g = grid(1.0, 64);
    let mult = Multiplier::i_operator(g, 12.0, 0.5).unwrap();
    let u = SpectralField::from_index_fn(g, |j| {
        if (1..3).contains(&j) {
            C::new(0.4 / j as f64, 0.1)
        } else {
            C::new(0.0, 0.0)
        }
    });
    let t = increment_terms(&u, &mult).unwrap();
    assert!(t.quartic.abs() < 1e-12 && t.sextic.abs() < 1e-12);
    let id = Multiplier::i_operator(g, 1000.0, 0.5).unwrap();
    let t = increment_terms(&random_field(g, 1, 1.0), &id).unwrap();
    assert_eq!(t.total(), 0.0);
}

#[test]
fn increment_terms_match_convolution_oracle() {
    let g = grid(1.0, 32);
    let u = random_field(g, 8, 0.5);
    let (n_cut, s) = (3.0, 0.5);
    let mult = Multiplier::i_operator(g, n_cut, s).unwrap();
    let w = apply(&mult, &u).unwrap();
    let m = g.max_index();
    let l = g.period();
    let mut quartic = 0.0;
    let mut sextic = 0.0;
    for j in -m..=m {
        let k = j as f64 / l;
        let d = conv3_oracle(&w, &w, &w, j) - conv3_oracle(&u, &u, &u, j) * i_symbol(k, n_cut, s);
        let wxxx = w.coeff(j) * C::new(0.0, 2.0 * PI * k).powi(3);
        let w3x = conv3_oracle(&w, &w, &w, j) * C::new(0.0, 2.0 * PI * k);
        quartic += 4.0 * l * (wxxx.conj() * d).re;
        sextic += 8.0 * l * (w3x.conj() * d).re;
    }
    let t = increment_terms(&u, &mult).unwrap();
    assert!((t.quartic - quartic).abs() < 1e-10 * quartic.abs().max(1.0));
    assert!((t.sextic - sextic).abs() < 1e-10 * sextic.abs().max(1.0));
    assert!(t.quartic.abs() > 1e-3);
    assert_eq!(increment_m(&u, &mult, 2.0).unwrap(), 2.0 * t.total());
}

#[test]
fn increment_is_the_time_derivative_of_modified_energy() {
    let g = grid(1.0, 32);
    let u0 = random_field(g, 2, 1.5).scaled(0.5);
    let mult = Multiplier::i_operator(g, 4.0, 0.5).unwrap();
    let h = 1e-8;
    for renorm in [false, true] {
        let p = ModelParams::new(0.0, Sign::Focusing, renorm);
        let mut st = SimState::new(&u0, &SpectralField::zeros(g), p).unwrap();
        let cfg = StepperConfig::new(h / 4.0);
        let mut states = vec![st.clone()];
        for i in 1..=4 {
            st = evolve(st, i as f64 * h, &cfg, &mut []).unwrap();
            states.push(st.clone());
        }
        let e: Vec<f64> = states.iter().map(|s| modified_energy(&s.field, &mult).unwrap()).collect();
        let fd = (e[0] - 8.0 * e[1] + 8.0 * e[3] - e[4]) / (12.0 * h);
        let m = increment_terms(&states[2].field, &mult).unwrap().total();
        assert!(m.abs() > 1e-2);
        assert!((fd - m).abs() < 1e-5 * m.abs().max(1.0), "renorm {renorm}: {fd} vs {m}");
    }
}

#[test]
fn recorder_rejects_repeated_times() {
    use mkdv_core::integrator::Observer;
    let g = grid(1.0, 16);
    let st = SimState::new(&random_field(g, 1, 2.0), &SpectralField::zeros(g), ModelParams::new(0.0, Sign::Focusing, true)).unwrap();
    let mut rec = DiagnosticsRecorder::new(Multiplier::i_operator(g, 2.0, 0.5).unwrap(), 0.5, 1);
    rec.observe(&st, 0).unwrap();
    assert!(rec.observe(&st, 1).is_err());
}

#[test]
fn csv_has_header_and_round_trips() {
    let g = grid(2.0 * PI, 32);
    let u0 = random_field(g, 5, 2.0);
    let st = SimState::new(&u0, &SpectralField::zeros(g), ModelParams::new(0.1, Sign::Focusing, true)).unwrap();
    let mut rec = DiagnosticsRecorder::new(Multiplier::i_operator(g, 1.0, 0.5).unwrap(), 0.5, 5);
    evolve(st, 0.02, &StepperConfig::new(1e-3), &mut [&mut rec]).unwrap();
    let mut buf = Vec::new();
    write_records_csv(&rec.records, &mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t,l2,hs,h1_of_Iu,E_u,E_Iu,M_quartic,M_sextic");
    assert_eq!(text.lines().count(), rec.records.len() + 1);
    assert_eq!(read_records_csv(&buf[..]).unwrap(), rec.records);
    assert!(rec.records.windows(2).all(|w| w[1].t > w[0].t));
}

#[test]
fn simpson_is_exact_for_cubics_on_uneven_samples() {
    let t = [0.0, 0.1, 0.35, 0.4, 0.8, 1.0, 1.3];
    let f = |x: f64| 2.0 - x + 3.0 * x * x;
    let y: Vec<f64> = t[..5].iter().map(|&x| f(x)).collect();
    let exact = |a: f64, b: f64| (2.0 * b - b * b / 2.0 + b.powi(3)) - (2.0 * a - a * a / 2.0 + a.powi(3));
    assert!((integrate_samples(&t[..5], &y) - exact(0.0, 0.8)).abs() < 1e-14);
    // An even sample count leaves one trapezoid at the end.
    let lin: Vec<f64> = t.iter().map(|x| 1.0 + 2.0 * x).collect();
    assert!((integrate_samples(&t, &lin) - (1.3 + 1.69)).abs() < 1e-14);
    assert_eq!(integrate_samples(&[1.0], &[5.0]), 0.0);
}

#[test]
fn slope_fit_recovers_a_line() {
    let x = [0.0, 1.0, 2.0, 5.0];
    let y: Vec<f64> = x.iter().map(|v| 3.0 - 1.25 * v).collect();
    assert!((fit_slope(&x, &y) + 1.25).abs() < 1e-14);
}

#[test]
fn slope_is_degenerate_for_low_frequency_data() {
    let g = grid(1.0, 64);
    let u = SpectralField::from_modes(g, &[(1, C::new(0.3, 0.0))]).unwrap();
    let r = almost_conservation_slope(&u, &[8.0, 16.0], 1e-4, 0.5, &StepperConfig::new(1e-6), 10).unwrap();
    assert!(r.degenerate && r.slope.is_nan(), "{r:?}");
    assert!(almost_conservation_slope(&u, &[8.0], 1e-4, 0.5, &StepperConfig::new(1e-6), 10).is_err());
}

#[test]
fn increments_scale_quartically_with_amplitude() {
    let g = grid(1.0, 256);
    let base = profiles::random_field(g, 21, 1.5, 40.0).unwrap();
    let run = |amp: f64| {
        almost_conservation_slope(&base.scaled(amp), &[8.0, 16.0], 1e-6, 0.5, &StepperConfig::new(1e-9), 2).unwrap()
    };
    let a = run(0.25);
    let b = run(0.5);
    let ratio = b.increments[0] / a.increments[0];
    assert!((ratio / 16.0 - 1.0).abs() < 0.2, "ratio {ratio}");
    assert!(a.energy_drift < 1e-9);
}
