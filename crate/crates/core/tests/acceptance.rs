//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fail.

mod common;

use std::f64::consts::{FRAC_PI_2, PI};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use trailer_advisory::advisory::predict_orientation_with;
use trailer_advisory::inverse::{
    actual_from_virtual, signed_actual_virtual_steer, virtual_from_actual, MotionDirection,
};
use trailer_advisory::kinematics::{rates, step};
use trailer_advisory::session::replay_log;
use trailer_advisory::tracking::{ramped_sinusoid, run_tracking_experiment, TimeSeries};
use trailer_advisory::{ControlInput, SystemState, VehicleTrailerParams};

struct Outcome {
    pass: bool,
    detail: String,
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn round_trip_grid() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for lh_mag in [0.3, 1.0] {
        for lh in [lh_mag, -lh_mag] {
            let p = VehicleTrailerParams::default().with_hitch_offset(lh);
            for dir in [MotionDirection::Forward, MotionDirection::Reverse] {
                for &df in &linspace(-40f64.to_radians(), 40f64.to_radians(), 50) {
                    for &dpsi in &linspace(-60f64.to_radians(), 60f64.to_radians(), 50) {
                        let vt = virtual_from_actual(&p, df, dpsi, dir).unwrap();
                        let back = actual_from_virtual(&p, vt, dpsi, dir).unwrap();
                        worst = worst.max((back.delta_f - df).abs());
                        count += 1;
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: worst <= 1e-12 && elapsed < Duration::from_secs(1),
        detail: format!("{count} points, max error {worst:.3e} rad, {:.0} ms", elapsed.as_secs_f64() * 1e3),
    }
}

fn jackknife_closed_form() -> Outcome {
    let p = VehicleTrailerParams::default();
    let dpsi0: f64 = 0.01;
    let mut worst: f64 = 0.0;
    for v in [-1.0, 1.0] {
        let mut s = SystemState::new(0.0, 0.0, dpsi0, 0.0);
        let input = ControlInput::new(v, 0.0);
        let mut k = 0;
        for t_check in [1.0, 2.0, 5.0] {
            while (k as f64) * 0.01 < t_check - 1e-9 {
                s = step(&p, &s, &input, 0.01).unwrap();
                k += 1;
            }
            // reverse grows as e^{t/L_T}, forward decays as e^{-t/L_T}
            let expected = 2.0 * ((dpsi0 / 2.0).tan() * (-v * t_check / p.trailer_length).exp()).atan();
            worst = worst.max((s.hitch_angle() - expected).abs());
        }
    }
    Outcome {
        pass: worst < 1e-8,
        detail: format!("max |error| {worst:.3e} rad over t in {{1, 2, 5}} s, both directions"),
    }
}

fn steady_circle() -> Outcome {
    let p = VehicleTrailerParams::default();
    let df = 15f64.to_radians();
    let (l, lh, lt, tan) = (p.wheelbase, p.hitch_offset, p.trailer_length, df.tan());
    let f = |x: f64| x.sin() - lh / l * x.cos() * tan - lt / l * tan;
    let (mut lo, mut hi) = (0.0, FRAC_PI_2);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    let mut s = SystemState::aligned(0.0, 0.0, 0.0);
    for _ in 0..6000 {
        s = step(&p, &s, &ControlInput::new(1.0, df), 0.01).unwrap();
    }
    let err = (s.hitch_angle() - root).abs();
    Outcome {
        pass: err < 1e-6,
        detail: format!("root {root:.9} rad, simulated {:.9} rad at t = 60 s, error {err:.3e}", s.hitch_angle()),
    }
}

/// Hitch velocity direction in the trailer frame, from the geometry alone.
fn oracle_virtual_steer(p: &VehicleTrailerParams, df: f64, dpsi: f64) -> f64 {
    let raw = dpsi - (p.hitch_offset / p.wheelbase * df.tan()).atan();
    let mut w = (raw + PI).rem_euclid(2.0 * PI) - PI;
    if w > FRAC_PI_2 {
        w -= PI;
    } else if w <= -FRAC_PI_2 {
        w += PI;
    }
    w
}

fn instantaneous_equivalence() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut points = 0;
    for tag in common::DEMOS {
        let scenario = common::demo(tag);
        let profile = common::demo_profile(tag);
        for lh in [1.0, -1.0, 0.3] {
            let p = scenario.params.with_hitch_offset(lh);
            let mut s = scenario.initial_state;
            for k in 0..6000 {
                let input = profile.at(k as f64 * 0.01);
                let r = rates(&p, &s, &input).unwrap();
                if r.v_t.abs() > 1e-6 {
                    let measured = signed_actual_virtual_steer(&p, r.v_t, r.psi2_dot, s.psi2).unwrap().0;
                    let geometric = oracle_virtual_steer(&p, input.delta_f, s.hitch_angle());
                    worst = worst.max((measured - geometric).abs());
                    points += 1;
                }
                s = step(&p, &s, &input, 0.01).unwrap();
            }
        }
    }
    Outcome {
        pass: worst < 1e-9,
        detail: format!("{points} samples on both demo trajectories, L_H in {{1, -1, 0.3}}, max deviation {worst:.3e} rad"),
    }
}

fn tracking_reproduction() -> Outcome {
    let start = Instant::now();
    let dt = 0.001;
    let duration = 40.0;
    let desired = TimeSeries::sampled(dt, duration, ramped_sinusoid(0.2, 0.3, 4.0));
    let run = |lh: f64, v: f64| {
        run_tracking_experiment(
            &VehicleTrailerParams::default().with_hitch_offset(lh),
            &desired,
            &TimeSeries::constant(v),
            dt,
            duration,
        )
        .unwrap()
    };
    let mut notes = Vec::new();
    let mut pass = true;

    // (a) trend following at a moderate offset
    let mut min_corr = f64::INFINITY;
    for lh in [0.3, -0.3] {
        for v in [-1.0, 1.0] {
            min_corr = min_corr.min(run(lh, v).correlation());
        }
    }
    pass &= min_corr >= 0.9;
    notes.push(format!("(a) min correlation {min_corr:.4} at |L_H| = 0.3"));

    // (b) nonzero mismatch at one metre
    let mut min_mismatch = f64::INFINITY;
    for lh in [1.0, -1.0] {
        for v in [-1.0, 1.0] {
            min_mismatch = min_mismatch.min(run(lh, v).max_mismatch);
        }
    }
    pass &= min_mismatch > 1e-5;
    notes.push(format!("(b) min max-mismatch {min_mismatch:.3e} at |L_H| = 1"));

    // (c) monotone decay to zero offset
    let mut monotone = true;
    let mut at_zero: f64 = 0.0;
    for sign in [1.0, -1.0] {
        for v in [-1.0, 1.0] {
            let series: Vec<f64> = [1.0, 0.5, 0.1, 0.01, 0.0]
                .iter()
                .map(|m| run(sign * m, v).max_mismatch)
                .collect();
            monotone &= series.windows(2).all(|w| w[1] < w[0]);
            at_zero = at_zero.max(series[4]);
        }
    }
    pass &= monotone && at_zero < 1e-6;
    notes.push(format!("(c) monotone {monotone}, L_H = 0 mismatch {at_zero:.3e}"));

    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(10);
    notes.push(format!("{:.1} s", elapsed.as_secs_f64()));
    Outcome {
        pass,
        detail: notes.join("; "),
    }
}

fn advisory_consistency() -> Outcome {
    let p = VehicleTrailerParams::default();
    let mut worst_short: f64 = 0.0;
    let mut worst_long: f64 = 0.0;
    for &dpsi in &linspace(-45f64.to_radians(), 45f64.to_radians(), 31) {
        for &df in &linspace(-p.steer_limit, p.steer_limit, 31) {
            let s = SystemState::new(0.0, 0.0, dpsi, 0.0);
            let (sn, cs) = dpsi.sin_cos();
            let v_r = -1.0 / (cs + p.hitch_offset / p.wheelbase * sn * df.tan());
            for (horizon, worst) in [(0.1, &mut worst_short), (1.0, &mut worst_long)] {
                let pred = predict_orientation_with(&p, &s, df, horizon, -1.0).unwrap();
                let mut r = s;
                let steps = (horizon / 0.001f64).round() as usize;
                for _ in 0..steps {
                    r = step(&p, &r, &ControlInput::new(v_r, df), 0.001).unwrap();
                }
                let diff = (pred.predicted_psi_2 - r.psi2 + PI).rem_euclid(2.0 * PI) - PI;
                *worst = worst.max(diff.abs());
            }
        }
    }
    let ratio = worst_long / worst_short;
    Outcome {
        pass: worst_short < 1e-3 && ratio <= 100.0,
        detail: format!(
            "max error {worst_short:.3e} rad at 0.1 s (bound 1e-3), {worst_long:.3e} rad at 1 s, ratio {ratio:.1} (bound 100)"
        ),
    }
}

fn determinism_and_replay() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut pass = true;
    let mut notes = Vec::new();
    for tag in common::DEMOS {
        let first = common::scripted_session(tag);
        let second = common::scripted_session(tag);
        let same_log = first.log().to_ndjson().unwrap() == second.log().to_ndjson().unwrap();
        let path = dir.path().join(format!("{tag}.ndjson"));
        first.log().save(&path).unwrap();
        let replay = replay_log(&path).unwrap();
        let a = first.state();
        let b = replay.final_state;
        let bits = |s: &SystemState| [s.x, s.y, s.psi1, s.psi2, s.t].map(f64::to_bits);
        let identical = bits(a) == bits(&b);
        let segments = first.segment();
        pass &= same_log && identical && segments == 60;
        notes.push(format!(
            "{tag}: {segments} segments, identical logs {same_log}, bit-identical replay {identical}"
        ));
    }
    Outcome {
        pass,
        detail: notes.join("; "),
    }
}

fn protocol_golden() -> Outcome {
    let mut failures = Vec::new();
    let transcripts = common::golden_transcripts();
    for (name, text) in &transcripts {
        if let Err(e) = common::check_golden(name, text) {
            failures.push(e);
        }
    }
    let ticks = transcripts[1].1.lines().filter(|l| l.contains("\"kind\":\"state_tick\"")).count();
    if ticks != 20 {
        failures.push(format!("full segment has {ticks} ticks, expected 20"));
    }
    Outcome {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("{} transcripts byte-exact, 20 ticks per segment", transcripts.len())
        } else {
            failures.join("; ")
        },
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("round-trip identity", round_trip_grid),
        ("jackknife closed form", jackknife_closed_form),
        ("steady-circle oracle", steady_circle),
        ("measured and geometric virtual steer agree", instantaneous_equivalence),
        ("tracking experiment reproduction", tracking_reproduction),
        ("advisory consistency", advisory_consistency),
        ("determinism and replay", determinism_and_replay),
        ("protocol golden files", protocol_golden),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
