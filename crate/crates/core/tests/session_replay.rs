mod common;

use common::{demo, demo_profile, scripted_session, DEMOS};
use trailer_advisory::kinematics::{integrate, step};
use trailer_advisory::scenario::{load_scenario, save_scenario, Scenario};
use trailer_advisory::session::{parse_log, replay_log, replay_str, LogEvent, Session};
use trailer_advisory::trajectory::{simulate_profile, InputProfile};
use trailer_advisory::{ControlInput, Error, SystemState, VehicleTrailerParams};

fn max_state_gap(a: &SystemState, b: &SystemState) -> f64 {
    [a.x - b.x, a.y - b.y, a.psi1 - b.psi1, a.psi2 - b.psi2]
        .iter()
        .fold(0.0, |m, d| m.max(d.abs()))
}

#[test]
fn one_metre_straight_back() {
    let mut s = Session::new(demo("lt2_5")).unwrap();
    let out = s.advance_segment(ControlInput::new(-1.0, 0.0)).unwrap();
    assert!((out.state.x + 1.0).abs() < 1e-12);
    assert_eq!(out.state.y, 0.0);
    assert_eq!((out.state.psi1, out.state.psi2), (0.0, 0.0));
    assert_eq!(out.state.t, 1.0);
    assert!(!out.jackknife);
}

#[test]
fn segment_is_exactly_one_cadence_of_steps() {
    let mut s = Session::new(demo("lt1_5")).unwrap();
    let before = s.log().records.len();
    s.begin_segment(ControlInput::new(-0.5, 0.1)).unwrap();
    let mut n = 0;
    loop {
        n += 1;
        if s.step().unwrap().segment_complete {
            break;
        }
    }
    assert_eq!(n, 100);
    assert!(s.is_paused());
    assert_eq!(s.segment(), 1);
    // one state record per step, bracketed by the input and the pause
    assert_eq!(s.log().records.len() - before, 102);
    assert!(matches!(
        s.log().records.last().unwrap().event,
        LogEvent::Pause { segment: 1 }
    ));
}

#[test]
fn session_matches_direct_integration() {
    let scenario = demo("lt2_5");
    let input = ControlInput::new(-0.8, 0.3);
    let mut s = Session::new(scenario.clone()).unwrap();
    for _ in 0..3 {
        s.advance_segment(input).unwrap();
    }
    let direct = integrate(&scenario.params, &scenario.initial_state, &input, 0.01, 300).unwrap();
    assert!(max_state_gap(s.state(), &direct) < 1e-12);
    assert_eq!(s.state().t, 3.0);
}

#[test]
fn reversing_the_script_returns_home() {
    let scenario = demo("lt2_5");
    let script = [(-0.6, 0.3), (-0.6, -0.1), (0.4, 0.2), (-1.0, 0.0)];
    let mut s = Session::new(scenario.clone()).unwrap();
    for &(v, df) in &script {
        s.advance_segment(ControlInput::new(v, df)).unwrap();
    }
    let mut back = *s.state();
    for &(v, df) in script.iter().rev() {
        for _ in 0..100 {
            back = step(&scenario.params, &back, &ControlInput::new(-v, df), 0.01).unwrap();
        }
    }
    assert!(max_state_gap(&back, &scenario.initial_state) < 1e-8);
}

#[test]
fn what_if_queries_do_not_move_the_clock() {
    let mut s = Session::new(demo("lt2_5")).unwrap();
    s.advance_segment(ControlInput::new(-0.6, 0.5)).unwrap();
    let before = *s.state();
    for c in [-0.7, -0.2, 0.0, 0.3, 0.7] {
        s.query_prediction(c).unwrap();
    }
    assert_eq!(*s.state(), before);
    assert!(matches!(s.query_prediction(0.9), Err(Error::SteerLimit { .. })));
    assert_eq!(s.last_prediction().unwrap().candidate_delta_f, 0.7);
}

#[test]
fn demo_scripts_park_the_trailer() {
    for tag in DEMOS {
        let s = scripted_session(tag);
        let Some(LogEvent::ParkCheck(m)) = s.log().records.last().map(|r| r.event.clone()) else {
            panic!("{tag}: no park check at the end");
        };
        assert!(m.trailer_inside, "{tag}: footprint {:?}", m.footprint);
        assert!(m.orientation_error.abs() < 0.1, "{tag}: orientation {}", m.orientation_error);
        let max_hitch = s
            .log()
            .records
            .iter()
            .filter_map(|r| match r.event {
                LogEvent::State(st) => Some(st.hitch_angle().abs()),
                _ => None,
            })
            .fold(0.0, f64::max);
        assert!(max_hitch < s.scenario().jackknife_threshold, "{tag}: {max_hitch}");
    }
}

#[test]
fn demo_logs_replay_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    for tag in DEMOS {
        let s = scripted_session(tag);
        let path = dir.path().join(format!("{tag}.ndjson"));
        s.log().save(&path).unwrap();
        let replay = replay_log(&path).unwrap();
        assert_eq!(replay.final_state, *s.state());
        assert_eq!(replay.log, *s.log());
        assert_eq!(replay.states.len(), 6000);
        assert_eq!(replay.log.to_ndjson().unwrap(), std::fs::read_to_string(&path).unwrap());
    }
}

#[test]
fn streamed_log_file_equals_saved_log() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("live.ndjson");
    let mut s = Session::new(demo("lt1_5")).unwrap();
    s.attach_log_file(&path).unwrap();
    s.advance_segment(ControlInput::new(-0.5, 0.2)).unwrap();
    s.query_prediction(0.1).unwrap();
    s.advance_segment(ControlInput::new(-0.5, -0.2)).unwrap();
    let on_disk = std::fs::read_to_string(&path).unwrap();
    assert_eq!(on_disk, s.log().to_ndjson().unwrap());
}

#[test]
fn truncated_file_names_last_good_line() {
    let s = scripted_session("lt2_5");
    let text = s.log().to_ndjson().unwrap();
    let cut = text.len() - 40;
    match replay_str(&text[..cut]) {
        Err(Error::TruncatedLog { line, t }) => {
            let total = text.lines().count();
            assert_eq!(line, total - 1);
            assert!(t > 59.0);
        }
        other => panic!("expected truncation, got {other:?}"),
    }
}

#[test]
fn log_stopping_mid_segment_is_truncated() {
    let mut s = Session::new(demo("lt2_5")).unwrap();
    s.advance_segment(ControlInput::new(-1.0, 0.1)).unwrap();
    let text = s.log().to_ndjson().unwrap();
    let partial: String = text.split_inclusive('\n').take(60).collect();
    assert!(matches!(replay_str(&partial), Err(Error::TruncatedLog { line: 60, .. })));
}

#[test]
fn edited_state_diverges() {
    let mut s = Session::new(demo("lt2_5")).unwrap();
    s.advance_segment(ControlInput::new(-1.0, 0.1)).unwrap();
    let mut log = s.log().clone();
    if let LogEvent::State(st) = &mut log.records[30].event {
        st.psi2 += 1e-15;
    }
    let text = log.to_ndjson().unwrap();
    assert!(matches!(replay_str(&text), Err(Error::ReplayDivergence { line: 32 })));
}

#[test]
fn future_schema_is_refused() {
    let s = Session::new(demo("lt2_5")).unwrap();
    let text = s
        .log()
        .to_ndjson()
        .unwrap()
        .replacen("\"schema_version\":1", "\"schema_version\":7", 1);
    assert!(matches!(
        parse_log(&text),
        Err(Error::SchemaVersion { found: 7, expected: 1 })
    ));
}

#[test]
fn scenario_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for tag in DEMOS {
        let original = demo(tag);
        let path = dir.path().join("copy.json");
        save_scenario(&path, &original).unwrap();
        assert_eq!(load_scenario(&path).unwrap(), original);
    }
}

#[test]
fn scenario_defaults_fill_in() {
    let text = r#"{
        "schema_version": 1,
        "name": "bare",
        "params": {"L": 3.0, "L_H": -0.5, "L_T": 2.0, "L_F": 1.3, "L_R": 1.7,
                   "vehicle_width": 1.9, "trailer_width": 2.0, "steer_limit": 0.6},
        "initial_state": {"x_R": 0, "y_R": 0, "psi_1": 0, "psi_2": 0, "t": 0},
        "parking_space": [[0, 0], [4, 0], [4, 8], [0, 8]]
    }"#;
    let s = Scenario::from_json(text).unwrap();
    assert_eq!(s.dt, 0.01);
    assert_eq!(s.input_cadence, 1.0);
    assert_eq!(s.steps_per_segment(), 100);
    assert!(Session::new(s).is_ok());
}

#[test]
fn concave_parking_space_rejected() {
    let mut s = demo("lt2_5");
    s.parking_space = vec![[0.0, 0.0], [4.0, 0.0], [1.0, 1.0], [0.0, 4.0]];
    assert!(Session::new(s).is_err());
}

#[test]
fn zero_speed_profile_holds_pose() {
    let scenario = demo("lt2_5");
    let profile = InputProfile::from_csv("t,v_R,delta_f\n0,0,0.3\n5,0,-0.3\n".as_bytes(), false).unwrap();
    let rows = simulate_profile(&scenario.params, &scenario.initial_state, &profile, 0.01, 5.0, 5.0).unwrap();
    assert_eq!(rows.len(), 501);
    for r in &rows {
        assert_eq!(
            (r.state.x, r.state.y, r.state.psi1, r.state.psi2),
            (0.0, 0.0, 0.0, 0.0)
        );
    }
}

#[test]
fn halving_dt_moves_the_end_state_little() {
    let p = VehicleTrailerParams::default();
    let s0 = SystemState::aligned(0.0, 0.0, 0.0);
    let profile = InputProfile::from_csv(
        "t,v_R,delta_f\n0,-0.6,0.2\n4,-0.6,-0.1\n8,0.8,0.3\n12,-0.5,0.0\n".as_bytes(),
        false,
    )
    .unwrap();
    let run = |dt: f64| {
        simulate_profile(&p, &s0, &profile, dt, 16.0, 5.0)
            .unwrap()
            .last()
            .unwrap()
            .state
    };
    let gap = max_state_gap(&run(0.01), &run(0.005));
    assert!(gap < 1e-8, "gap {gap}");
}

#[test]
fn demo_profiles_are_within_limits() {
    for tag in DEMOS {
        let scenario = demo(tag);
        let profile = demo_profile(tag);
        let rows = simulate_profile(
            &scenario.params,
            &scenario.initial_state,
            &profile,
            scenario.dt,
            profile.duration(),
            scenario.speed_limit,
        )
        .unwrap();
        assert_eq!(rows.len(), 6001);
        let worst = rows.iter().map(|r| r.state.hitch_angle().abs()).fold(0.0, f64::max);
        assert!(worst < scenario.jackknife_threshold, "{tag}: {worst}");
    }
}
