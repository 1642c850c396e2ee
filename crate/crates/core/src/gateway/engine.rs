//! The gateway's session loop with no I/O.
//!
//! The engine owns the one authoritative [`Session`]. Connection events and
//! client text go in; [`Outbound`] messages tagged with their recipients come
//! out. Simulated time moves only through [`GatewayEngine::tick`], so the
//! message stream is a pure function of the scenario and the inputs received,
//! whatever the transport's timing.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::kinematics::key_points;
use crate::scenario::{Scenario, SCHEMA_VERSION};
use crate::session::{Session, SessionSnapshot};

use super::protocol::{
    Body, ErrorCode, HelloPayload, LogExportPayload, Outbound, Role, ScenarioSummary, TickPayload,
    WireMessage, PROTOCOL_VERSION,
};

pub const DEFAULT_RENDER_DECIMATION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    /// Simulated seconds between state ticks.
    pub render_decimation: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            render_decimation: DEFAULT_RENDER_DECIMATION,
        }
    }
}

struct Client {
    role: Role,
    last_seq: Option<u64>,
}

pub struct GatewayEngine {
    session: Session,
    config: EngineConfig,
    decimation_steps: usize,
    steps_in_segment: usize,
    clients: BTreeMap<u64, Client>,
    next_client: u64,
}

fn decimation_steps(scenario: &Scenario, render_decimation: f64) -> Result<usize> {
    let ratio = render_decimation / scenario.dt;
    if !(ratio.is_finite() && ratio >= 0.5) || (ratio - ratio.round()).abs() > 1e-9 * ratio {
        return Err(Error::InvalidScenario(format!(
            "render decimation {render_decimation} s is not a positive multiple of dt {} s",
            scenario.dt
        )));
    }
    Ok(ratio.round() as usize)
}

impl GatewayEngine {
    pub fn new(scenario: Scenario, config: EngineConfig) -> Result<Self> {
        let decimation = decimation_steps(&scenario, config.render_decimation)?;
        Ok(GatewayEngine {
            session: Session::new(scenario)?,
            config,
            decimation_steps: decimation,
            steps_in_segment: 0,
            clients: BTreeMap::new(),
            next_client: 1,
        })
    }

    pub fn session(&self) -> &Session {
        &self.session
    }

    pub fn is_running(&self) -> bool {
        !self.session.is_paused()
    }

    pub fn snapshot(&self) -> SessionSnapshot {
        self.session.snapshot()
    }

    pub fn log_ndjson(&self) -> Result<String> {
        self.session.log().to_ndjson()
    }

    pub fn has_driver(&self) -> bool {
        self.clients.values().any(|c| c.role == Role::Driver)
    }

    /// Registers a client and returns its id and hello, or the refusal to
    /// send before closing.
    pub fn connect(&mut self, role: Role) -> std::result::Result<(u64, Vec<Outbound>), Body> {
        if role == Role::Driver && self.has_driver() {
            return Err(Body::error(
                ErrorCode::DriverTaken,
                "a driver is already connected",
            ));
        }
        let id = self.next_client;
        self.next_client += 1;
        self.clients.insert(id, Client { role, last_seq: None });
        Ok((id, vec![Outbound::to(id, self.hello(id, role))]))
    }

    /// A departing driver leaves the session as it is; a running segment
    /// still completes.
    pub fn disconnect(&mut self, id: u64) {
        self.clients.remove(&id);
    }

    fn hello(&self, client_id: u64, role: Role) -> Body {
        Body::Hello(Box::new(HelloPayload {
            protocol_version: PROTOCOL_VERSION,
            schema_version: SCHEMA_VERSION,
            client_id,
            role,
            render_decimation: self.config.render_decimation,
            scenario: ScenarioSummary::from(self.session.scenario()),
            snapshot: self.session.snapshot(),
        }))
    }

    pub fn handle_text(&mut self, id: u64, text: &str) -> Vec<Outbound> {
        let Some(client) = self.clients.get_mut(&id) else {
            return Vec::new();
        };
        let msg = match WireMessage::decode(text) {
            Ok(m) => m,
            Err((seq, reason)) => {
                return vec![Outbound {
                    target: super::protocol::Target::Client(id),
                    corr: seq,
                    body: Body::error(ErrorCode::Malformed, reason),
                }]
            }
        };
        if client.last_seq.is_some_and(|last| msg.seq <= last) {
            return vec![Outbound::reply(
                id,
                msg.seq,
                Body::error(
                    ErrorCode::BadSeq,
                    format!("seq {} does not follow {}", msg.seq, client.last_seq.unwrap_or(0)),
                ),
            )];
        }
        client.last_seq = Some(msg.seq);
        let role = client.role;
        self.handle(id, role, msg)
    }

    fn handle(&mut self, id: u64, role: Role, msg: WireMessage) -> Vec<Outbound> {
        let seq = msg.seq;
        let err = |code, message: String| vec![Outbound::reply(id, seq, Body::error(code, message))];
        let driver_only = |what: &str| {
            vec![Outbound::reply(
                id,
                seq,
                Body::error(ErrorCode::NotDriver, format!("only the driver may {what}")),
            )]
        };
        match msg.body {
            Body::SetInput(input) => {
                if role != Role::Driver {
                    return driver_only("set inputs");
                }
                match self.session.begin_segment(input) {
                    Ok(()) => {
                        self.steps_in_segment = 0;
                        Vec::new()
                    }
                    Err(Error::NotPaused) => err(ErrorCode::NotPaused, Error::NotPaused.to_string()),
                    Err(e) => err(ErrorCode::InvalidInput, e.to_string()),
                }
            }
            Body::Predict(p) => match self.session.query_prediction(p.delta_f) {
                Ok(pred) => vec![Outbound::reply(id, seq, Body::PredictionResult(pred))],
                Err(Error::NotPaused) => err(ErrorCode::NotPaused, Error::NotPaused.to_string()),
                Err(e) => err(ErrorCode::PredictionFailed, e.to_string()),
            },
            Body::Reset {} => {
                if role != Role::Driver {
                    return driver_only("reset the session");
                }
                match Session::new(self.session.scenario().clone()) {
                    Ok(s) => {
                        self.session = s;
                        vec![Outbound::all(Body::PauseRequestInput(Box::new(self.session.snapshot())))]
                    }
                    Err(e) => err(ErrorCode::ScenarioInvalid, e.to_string()),
                }
            }
            Body::LoadScenario(scenario) => {
                if role != Role::Driver {
                    return driver_only("load scenarios");
                }
                match self.load_scenario(*scenario) {
                    Ok(out) => out,
                    Err(Error::NotPaused) => err(ErrorCode::NotPaused, Error::NotPaused.to_string()),
                    Err(e) => err(ErrorCode::ScenarioInvalid, e.to_string()),
                }
            }
            Body::LogExport(_) => match self.log_ndjson() {
                Ok(text) => vec![Outbound::reply(
                    id,
                    seq,
                    Body::LogExport(LogExportPayload { ndjson: Some(text) }),
                )],
                Err(e) => err(ErrorCode::Malformed, e.to_string()),
            },
            other => err(
                ErrorCode::Malformed,
                format!("{} is not a client message", other.kind()),
            ),
        }
    }

    /// Replaces the session and greets every client again.
    pub fn load_scenario(&mut self, scenario: Scenario) -> Result<Vec<Outbound>> {
        if self.is_running() {
            return Err(Error::NotPaused);
        }
        let decimation = decimation_steps(&scenario, self.config.render_decimation)?;
        self.session = Session::new(scenario)?;
        self.decimation_steps = decimation;
        self.steps_in_segment = 0;
        Ok(self
            .clients
            .iter()
            .map(|(&id, c)| Outbound::to(id, self.hello(id, c.role)))
            .collect())
    }

    /// One integration step of the running segment. Emits a state tick every
    /// decimation interval and the pause request when the segment ends.
    ///
    /// If the model cannot take the step the session restarts from the
    /// scenario and every client is told why.
    pub fn tick(&mut self) -> Vec<Outbound> {
        if !self.is_running() {
            return Vec::new();
        }
        let input = self.session.input();
        let outcome = match self.session.step() {
            Ok(o) => o,
            Err(e) => {
                let mut out = vec![Outbound::all(Body::error(
                    ErrorCode::InvalidInput,
                    format!("segment aborted, session reset: {e}"),
                ))];
                if let Ok(fresh) = Session::new(self.session.scenario().clone()) {
                    self.session = fresh;
                }
                out.push(Outbound::all(Body::PauseRequestInput(Box::new(self.session.snapshot()))));
                return out;
            }
        };
        self.steps_in_segment += 1;
        let mut out = Vec::new();
        if self.steps_in_segment % self.decimation_steps == 0 || outcome.segment_complete {
            let state = outcome.state;
            out.push(Outbound::all(Body::StateTick(Box::new(TickPayload {
                t: state.t,
                state,
                key_points: key_points(&self.session.scenario().params, &state),
                hitch_angle: state.hitch_angle(),
                input,
                jackknife: outcome.jackknife,
            }))));
        }
        if outcome.segment_complete {
            out.push(Outbound::all(Body::PauseRequestInput(Box::new(self.session.snapshot()))));
        }
        out
    }

    /// Ticks until the segment ends.
    pub fn run_segment(&mut self) -> Vec<Outbound> {
        let mut out = Vec::new();
        while self.is_running() {
            out.extend(self.tick());
        }
        out
    }
}
