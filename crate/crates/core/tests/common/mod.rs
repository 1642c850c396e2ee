#![allow(dead_code)]

use std::path::PathBuf;

use trailer_advisory::gateway::protocol::{Body, PredictPayload, SeqCounter};
use trailer_advisory::gateway::{EngineConfig, GatewayEngine, Role, WireMessage};
use trailer_advisory::scenario::{load_scenario, Scenario};
use trailer_advisory::session::Session;
use trailer_advisory::trajectory::InputProfile;
use trailer_advisory::ControlInput;

pub const DEMOS: [&str; 2] = ["lt2_5", "lt1_5"];

pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn demo(tag: &str) -> Scenario {
    load_scenario(crate_dir().join("scenarios").join(format!("{tag}.json"))).unwrap()
}

pub fn demo_profile(tag: &str) -> InputProfile {
    InputProfile::load(
        crate_dir().join("scenarios").join(format!("{tag}_inputs.csv")),
        false,
    )
    .unwrap()
}

/// Sixty one-second segments from the demo script, with what-if queries at
/// every stop and a park check at the end.
pub fn scripted_session(tag: &str) -> Session {
    let profile = demo_profile(tag);
    let mut session = Session::new(demo(tag)).unwrap();
    for k in 0..60 {
        let input = profile.at(k as f64);
        if input.v_r == 0.0 {
            for candidate in [-0.4, -0.1, 0.0, 0.25] {
                session.query_prediction(candidate).unwrap();
            }
        }
        session.advance_segment(input).unwrap();
    }
    session.check_parked().unwrap();
    session
}

/// A single client's view of an engine session, in the golden file format:
/// `> ` for what the client sent, `< ` for what it received.
pub struct Transcript {
    pub engine: GatewayEngine,
    id: u64,
    seq: SeqCounter,
    client_seq: u64,
    lines: Vec<String>,
}

impl Transcript {
    pub fn connect(scenario: Scenario, role: Role) -> Self {
        let mut engine = GatewayEngine::new(scenario, EngineConfig::default()).unwrap();
        let (id, hello) = engine.connect(role).unwrap();
        let mut t = Transcript {
            engine,
            id,
            seq: SeqCounter::default(),
            client_seq: 0,
            lines: Vec::new(),
        };
        t.receive(hello);
        t
    }

    fn receive(&mut self, out: Vec<trailer_advisory::gateway::Outbound>) {
        for o in out.into_iter().filter(|o| o.is_for(self.id)) {
            let msg = self.seq.stamp(&o);
            self.lines.push(format!("< {}", msg.encode()));
        }
    }

    pub fn send(&mut self, body: Body) {
        let text = WireMessage {
            seq: self.client_seq,
            corr: None,
            body,
        }
        .encode();
        self.client_seq += 1;
        self.lines.push(format!("> {text}"));
        let out = self.engine.handle_text(self.id, &text);
        self.receive(out);
    }

    pub fn set_input(&mut self, v_r: f64, delta_f: f64) {
        self.send(Body::SetInput(ControlInput::new(v_r, delta_f)));
    }

    pub fn predict(&mut self, delta_f: f64) {
        self.send(Body::Predict(PredictPayload { delta_f }));
    }

    pub fn ticks(&mut self, n: usize) {
        for _ in 0..n {
            let out = self.engine.tick();
            self.receive(out);
        }
    }

    pub fn finish_segment(&mut self) {
        let out = self.engine.run_segment();
        self.receive(out);
    }

    pub fn lines(&self) -> &[String] {
        &self.lines
    }

    pub fn text(&self) -> String {
        let mut s = self.lines.join("\n");
        s.push('\n');
        s
    }
}

/// The committed protocol fixtures, rebuilt from the engine.
pub fn golden_transcripts() -> Vec<(&'static str, String)> {
    let scenario = demo("lt2_5");

    let handshake = Transcript::connect(scenario.clone(), Role::Driver);

    let mut segment = Transcript::connect(scenario.clone(), Role::Driver);
    segment.set_input(-1.0, 0.2);
    segment.finish_segment();

    let mut at_pause = Transcript::connect(scenario.clone(), Role::Driver);
    at_pause.predict(0.2);

    let mut running = Transcript::connect(scenario, Role::Driver);
    running.set_input(-1.0, 0.2);
    running.ticks(10);
    running.predict(0.1);
    running.finish_segment();

    vec![
        ("handshake", handshake.text()),
        ("full_segment", segment.text()),
        ("predict_at_pause", at_pause.text()),
        ("predict_while_running", running.text()),
    ]
}

pub fn golden_path(name: &str) -> PathBuf {
    crate_dir().join("tests").join("golden").join(format!("{name}.txt"))
}

/// Compares against the committed file, or rewrites it when
/// `UPDATE_GOLDEN` is set.
pub fn check_golden(name: &str, actual: &str) -> Result<(), String> {
    let path = golden_path(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return Ok(());
    }
    let expected = std::fs::read_to_string(&path)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    if expected == actual {
        return Ok(());
    }
    let first = expected
        .lines()
        .zip(actual.lines())
        .position(|(a, b)| a != b)
        .unwrap_or_else(|| expected.lines().count().min(actual.lines().count()));
    Err(format!("{name}: first difference at line {}", first + 1))
}
