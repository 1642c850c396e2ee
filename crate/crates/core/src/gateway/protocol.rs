//! Wire format: one JSON object per WebSocket text frame,
//! `{"kind": ..., "seq": n, "corr": m?, "payload": {...}}`.

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::advisory::AdvisoryPrediction;
use crate::kinematics::{ControlInput, KeyPoints, SystemState};
use crate::scenario::Scenario;
use crate::session::SessionSnapshot;

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Driver,
    Observer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    NotPaused,
    DriverTaken,
    Malformed,
    NotDriver,
    InvalidInput,
    BadSeq,
    PredictionFailed,
    ScenarioInvalid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorPayload {
    pub code: ErrorCode,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub name: String,
    #[serde(rename = "L")]
    pub wheelbase: f64,
    #[serde(rename = "L_H")]
    pub hitch_offset: f64,
    #[serde(rename = "L_T")]
    pub trailer_length: f64,
    pub steer_limit: f64,
    pub speed_limit: f64,
    pub input_cadence: f64,
    pub dt: f64,
}

impl From<&Scenario> for ScenarioSummary {
    fn from(s: &Scenario) -> Self {
        ScenarioSummary {
            name: s.name.clone(),
            wheelbase: s.params.wheelbase,
            hitch_offset: s.params.hitch_offset,
            trailer_length: s.params.trailer_length,
            steer_limit: s.params.steer_limit,
            speed_limit: s.speed_limit,
            input_cadence: s.input_cadence,
            dt: s.dt,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HelloPayload {
    pub protocol_version: u32,
    pub schema_version: u32,
    pub client_id: u64,
    pub role: Role,
    pub render_decimation: f64,
    pub scenario: ScenarioSummary,
    pub snapshot: SessionSnapshot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickPayload {
    pub t: f64,
    pub state: SystemState,
    pub key_points: KeyPoints,
    pub hitch_angle: f64,
    pub input: ControlInput,
    pub jackknife: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictPayload {
    pub delta_f: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LogExportPayload {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ndjson: Option<String>,
}

/// Every message kind, in both directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum Body {
    Hello(Box<HelloPayload>),
    StateTick(Box<TickPayload>),
    PauseRequestInput(Box<SessionSnapshot>),
    SetInput(ControlInput),
    Predict(PredictPayload),
    PredictionResult(AdvisoryPrediction),
    Reset {},
    LoadScenario(Box<Scenario>),
    Error(ErrorPayload),
    LogExport(LogExportPayload),
}

impl Body {
    pub fn error(code: ErrorCode, message: impl Into<String>) -> Self {
        Body::Error(ErrorPayload {
            code,
            message: message.into(),
        })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Body::Hello(_) => "hello",
            Body::StateTick(_) => "state_tick",
            Body::PauseRequestInput(_) => "pause_request_input",
            Body::SetInput(_) => "set_input",
            Body::Predict(_) => "predict",
            Body::PredictionResult(_) => "prediction_result",
            Body::Reset {} => "reset",
            Body::LoadScenario(_) => "load_scenario",
            Body::Error(_) => "error",
            Body::LogExport(_) => "log_export",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WireMessage {
    pub seq: u64,
    /// Seq of the request this message answers.
    pub corr: Option<u64>,
    pub body: Body,
}

impl Serialize for WireMessage {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let tagged = serde_json::to_value(&self.body).map_err(serde::ser::Error::custom)?;
        let payload = tagged.get("payload").cloned().unwrap_or_else(|| serde_json::json!({}));
        let mut s = serializer.serialize_struct("WireMessage", 4)?;
        s.serialize_field("kind", self.body.kind())?;
        s.serialize_field("seq", &self.seq)?;
        if let Some(corr) = self.corr {
            s.serialize_field("corr", &corr)?;
        }
        s.serialize_field("payload", &payload)?;
        s.end()
    }
}

impl WireMessage {
    pub fn encode(&self) -> String {
        serde_json::to_string(self).expect("wire messages always serialize")
    }

    /// On failure returns the request's seq if it could be read, for use as
    /// the error's correlation id.
    pub fn decode(text: &str) -> Result<Self, (Option<u64>, String)> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| (None, e.to_string()))?;
        let obj = value.as_object().ok_or((None, "expected a JSON object".to_string()))?;
        let seq = obj.get("seq").and_then(|v| v.as_u64());
        let Some(seq) = seq else {
            return Err((None, "missing or invalid seq".into()));
        };
        let kind = obj
            .get("kind")
            .cloned()
            .ok_or((Some(seq), "missing kind".to_string()))?;
        let payload = obj.get("payload").cloned().unwrap_or_else(|| serde_json::json!({}));
        let body: Body = serde_json::from_value(serde_json::json!({ "kind": kind, "payload": payload }))
            .map_err(|e| (Some(seq), e.to_string()))?;
        let corr = obj.get("corr").and_then(|v| v.as_u64());
        Ok(WireMessage { seq, corr, body })
    }
}

/// Who a server message is for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    All,
    Client(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outbound {
    pub target: Target,
    pub corr: Option<u64>,
    pub body: Body,
}

impl Outbound {
    pub fn to(client: u64, body: Body) -> Self {
        Outbound {
            target: Target::Client(client),
            corr: None,
            body,
        }
    }

    pub fn all(body: Body) -> Self {
        Outbound {
            target: Target::All,
            corr: None,
            body,
        }
    }

    pub fn reply(client: u64, corr: u64, body: Body) -> Self {
        Outbound {
            target: Target::Client(client),
            corr: Some(corr),
            body,
        }
    }

    pub fn is_for(&self, client: u64) -> bool {
        match self.target {
            Target::All => true,
            Target::Client(c) => c == client,
        }
    }
}

/// Per-connection outgoing sequence numbers.
#[derive(Debug, Default)]
pub struct SeqCounter {
    next: u64,
}

impl SeqCounter {
    pub fn stamp(&mut self, out: &Outbound) -> WireMessage {
        let msg = WireMessage {
            seq: self.next,
            corr: out.corr,
            body: out.body.clone(),
        };
        self.next += 1;
        msg
    }

    /// Leaves a visible gap for messages that were dropped.
    pub fn skip(&mut self, n: u64) {
        self.next += n;
    }
}
