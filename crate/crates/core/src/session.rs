//! Stop, try, proceed: the interactive stepped session.
//!
//! A session is paused at every input boundary. While paused the driver may
//! ask for any number of predictions; time only moves when a segment runs,
//! with the chosen input held for one cadence. Everything that happens is
//! appended to a [`SessionLog`], which replays to the same states bit for bit.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::advisory::{predict_orientation, AdvisoryPrediction};
use crate::error::{Error, Result};
use crate::kinematics::{key_points, step, ControlInput, KeyPoints, SystemState};
use crate::scenario::{check_schema_version, park_metrics, ConvexPolygon, ParkMetrics, Scenario, SCHEMA_VERSION};
use crate::trajectory::TrajectoryRow;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", content = "payload", rename_all = "snake_case")]
pub enum LogEvent {
    Input(ControlInput),
    State(SystemState),
    PredictionQuery(AdvisoryPrediction),
    Pause { segment: u64 },
    ParkCheck(ParkMetrics),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub t: f64,
    #[serde(flatten)]
    pub event: LogEvent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub schema_version: u32,
    pub scenario: Scenario,
}

/// Header line followed by one record per line.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionLog {
    pub header: LogHeader,
    pub records: Vec<LogRecord>,
}

impl SessionLog {
    fn new(scenario: Scenario) -> Self {
        SessionLog {
            header: LogHeader {
                schema_version: SCHEMA_VERSION,
                scenario,
            },
            records: Vec::new(),
        }
    }

    pub fn to_ndjson(&self) -> Result<String> {
        let mut out = serde_json::to_string(&self.header)?;
        out.push('\n');
        for r in &self.records {
            out.push_str(&serde_json::to_string(r)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_ndjson()?).map_err(|e| Error::io(path, e))
    }

    /// One row for the initial state and one per logged state, each paired
    /// with the input in force from that instant.
    pub fn trajectory(&self) -> Vec<TrajectoryRow> {
        let mut rows = vec![TrajectoryRow {
            state: self.header.scenario.initial_state,
            input: ControlInput::stop(),
        }];
        let mut input = ControlInput::stop();
        for r in &self.records {
            match &r.event {
                LogEvent::Input(i) => {
                    input = *i;
                    if let Some(last) = rows.last_mut() {
                        last.input = input;
                    }
                }
                LogEvent::State(s) => rows.push(TrajectoryRow { state: *s, input }),
                LogEvent::Pause { .. } => {
                    input = ControlInput::stop();
                    if let Some(last) = rows.last_mut() {
                        last.input = input;
                    }
                }
                _ => {}
            }
        }
        rows
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Paused,
    Running { remaining: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub state: SystemState,
    pub segment_complete: bool,
    /// Hitch angle beyond the scenario's jackknife threshold.
    pub jackknife: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentOutcome {
    pub state: SystemState,
    pub jackknife: bool,
    pub records: Vec<LogRecord>,
}

/// Everything a client needs to draw the scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSnapshot {
    pub scenario_name: String,
    pub t: f64,
    pub segment: u64,
    pub state: SystemState,
    pub key_points: KeyPoints,
    pub hitch_angle: f64,
    pub input: ControlInput,
    pub paused: bool,
    pub jackknife: bool,
    pub parking_space: Vec<[f64; 2]>,
    pub last_prediction: Option<AdvisoryPrediction>,
}

pub struct Session {
    scenario: Scenario,
    polygon: ConvexPolygon,
    state: SystemState,
    input: ControlInput,
    phase: Phase,
    steps_taken: u64,
    segment: u64,
    jackknife: bool,
    last_prediction: Option<AdvisoryPrediction>,
    log: SessionLog,
    sink: Option<(std::path::PathBuf, BufWriter<File>)>,
}

impl Session {
    pub fn new(scenario: Scenario) -> Result<Self> {
        scenario.validate()?;
        let polygon = scenario.polygon()?;
        let state = scenario.initial_state;
        let mut session = Session {
            polygon,
            state,
            input: ControlInput::stop(),
            phase: Phase::Paused,
            steps_taken: 0,
            segment: 0,
            jackknife: state.is_jackknifed(scenario.jackknife_threshold),
            last_prediction: None,
            log: SessionLog::new(scenario.clone()),
            sink: None,
            scenario,
        };
        session.record(LogEvent::Pause { segment: 0 })?;
        Ok(session)
    }

    /// Writes the log so far to `path` and appends every later record.
    pub fn attach_log_file(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        w.write_all(self.log.to_ndjson()?.as_bytes())
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))?;
        self.sink = Some((path.to_path_buf(), w));
        Ok(())
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn state(&self) -> &SystemState {
        &self.state
    }

    pub fn input(&self) -> ControlInput {
        self.input
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn is_paused(&self) -> bool {
        self.phase == Phase::Paused
    }

    pub fn segment(&self) -> u64 {
        self.segment
    }

    pub fn log(&self) -> &SessionLog {
        &self.log
    }

    pub fn last_prediction(&self) -> Option<&AdvisoryPrediction> {
        self.last_prediction.as_ref()
    }

    fn record(&mut self, event: LogEvent) -> Result<()> {
        let rec = LogRecord { t: self.state.t, event };
        if let Some((path, w)) = &mut self.sink {
            let line = serde_json::to_string(&rec)?;
            writeln!(w, "{line}").map_err(|e| Error::io(path.clone(), e))?;
            if !matches!(rec.event, LogEvent::State(_)) {
                w.flush().map_err(|e| Error::io(path.clone(), e))?;
            }
        }
        self.log.records.push(rec);
        Ok(())
    }

    /// Validates the input and starts a segment. Nothing moves until
    /// [`Session::step`] is called.
    pub fn begin_segment(&mut self, input: ControlInput) -> Result<()> {
        if !self.is_paused() {
            return Err(Error::NotPaused);
        }
        input.validate(&self.scenario.params, self.scenario.speed_limit)?;
        self.input = input;
        self.last_prediction = None;
        self.phase = Phase::Running {
            remaining: self.scenario.steps_per_segment(),
        };
        self.record(LogEvent::Input(input))
    }

    /// One integration step of the running segment.
    pub fn step(&mut self) -> Result<StepOutcome> {
        let Phase::Running { remaining } = self.phase else {
            return Err(Error::NotRunning);
        };
        let mut next = step(&self.scenario.params, &self.state, &self.input, self.scenario.dt)?;
        self.steps_taken += 1;
        // Absolute step count keeps the clock free of accumulated rounding.
        next.t = self.scenario.initial_state.t + self.steps_taken as f64 * self.scenario.dt;
        self.state = next;
        let jackknife = next.is_jackknifed(self.scenario.jackknife_threshold);
        self.jackknife = jackknife;
        self.record(LogEvent::State(next))?;
        let remaining = remaining - 1;
        if remaining == 0 {
            self.phase = Phase::Paused;
            self.segment += 1;
            self.input = ControlInput::stop();
            self.record(LogEvent::Pause { segment: self.segment })?;
        } else {
            self.phase = Phase::Running { remaining };
        }
        Ok(StepOutcome {
            state: next,
            segment_complete: remaining == 0,
            jackknife,
        })
    }

    /// Runs a whole segment with `input` held, then pauses.
    pub fn advance_segment(&mut self, input: ControlInput) -> Result<SegmentOutcome> {
        let first = self.log.records.len();
        self.begin_segment(input)?;
        let mut jackknife = false;
        loop {
            let out = self.step()?;
            jackknife |= out.jackknife;
            if out.segment_complete {
                break;
            }
        }
        Ok(SegmentOutcome {
            state: self.state,
            jackknife,
            records: self.log.records[first..].to_vec(),
        })
    }

    /// What-if prediction on the frozen state. Never advances time.
    pub fn query_prediction(&mut self, candidate_delta_f: f64) -> Result<AdvisoryPrediction> {
        if !self.is_paused() {
            return Err(Error::NotPaused);
        }
        let pred = predict_orientation(&self.scenario.params, &self.state, candidate_delta_f)?;
        self.last_prediction = Some(pred);
        self.record(LogEvent::PredictionQuery(pred))?;
        Ok(pred)
    }

    pub fn check_parked(&mut self) -> Result<ParkMetrics> {
        if !self.is_paused() {
            return Err(Error::NotPaused);
        }
        let m = park_metrics(
            &self.polygon,
            &self.scenario.params,
            &self.state,
            self.scenario.trailer_overhang,
        );
        self.record(LogEvent::ParkCheck(m))?;
        Ok(m)
    }

    pub fn snapshot(&self) -> SessionSnapshot {
        SessionSnapshot {
            scenario_name: self.scenario.name.clone(),
            t: self.state.t,
            segment: self.segment,
            state: self.state,
            key_points: key_points(&self.scenario.params, &self.state),
            hitch_angle: self.state.hitch_angle(),
            input: self.input,
            paused: self.is_paused(),
            jackknife: self.jackknife,
            parking_space: self.scenario.parking_space.clone(),
            last_prediction: self.last_prediction,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Replay {
    pub scenario: Scenario,
    pub states: Vec<SystemState>,
    pub final_state: SystemState,
    pub log: SessionLog,
}

pub fn replay_log(path: impl AsRef<Path>) -> Result<Replay> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    replay_str(&text)
}

/// Re-runs a log through a fresh session and checks that every record comes
/// out identical.
pub fn replay_str(text: &str) -> Result<Replay> {
    let log = parse_log(text)?;
    let mut session = Session::new(log.header.scenario.clone())?;
    let line_of = |i: usize| i + 2;

    for (i, rec) in log.records.iter().enumerate() {
        if session.log.records.len() <= i {
            let applied = match &rec.event {
                LogEvent::Input(input) => session.begin_segment(*input),
                LogEvent::State(_) => session.step().map(|_| ()),
                LogEvent::PredictionQuery(p) => session.query_prediction(p.candidate_delta_f).map(|_| ()),
                LogEvent::ParkCheck(_) => session.check_parked().map(|_| ()),
                LogEvent::Pause { .. } => Err(Error::ReplayDivergence { line: line_of(i) }),
            };
            applied.map_err(|_| Error::ReplayDivergence { line: line_of(i) })?;
        }
        if session.log.records.get(i) != Some(rec) {
            return Err(Error::ReplayDivergence { line: line_of(i) });
        }
    }

    if !session.is_paused() || session.log.records.len() > log.records.len() {
        let (line, t) = match log.records.last() {
            Some(r) => (line_of(log.records.len() - 1), r.t),
            None => (1, log.header.scenario.initial_state.t),
        };
        return Err(Error::TruncatedLog { line, t });
    }

    let states = log
        .records
        .iter()
        .filter_map(|r| match r.event {
            LogEvent::State(s) => Some(s),
            _ => None,
        })
        .collect();
    Ok(Replay {
        scenario: log.header.scenario.clone(),
        states,
        final_state: *session.state(),
        log,
    })
}

/// Parses without re-simulating. Checks the schema version, record syntax
/// and time ordering.
pub fn parse_log(text: &str) -> Result<SessionLog> {
    let mut lines = text.split_inclusive('\n').enumerate().peekable();
    let Some((_, header_line)) = lines.next() else {
        return Err(Error::Malformed {
            line: 1,
            reason: "empty log".into(),
        });
    };
    let header_value: serde_json::Value =
        serde_json::from_str(header_line).map_err(|e| Error::Malformed {
            line: 1,
            reason: e.to_string(),
        })?;
    check_schema_version(&header_value).map_err(|e| match e {
        Error::SchemaVersion { .. } => e,
        other => Error::Malformed {
            line: 1,
            reason: other.to_string(),
        },
    })?;
    let header: LogHeader = serde_json::from_value(header_value).map_err(|e| Error::Malformed {
        line: 1,
        reason: e.to_string(),
    })?;

    let mut records: Vec<LogRecord> = Vec::new();
    while let Some((idx, raw)) = lines.next() {
        let line = idx + 1;
        let is_last = lines.peek().is_none();
        if raw.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<LogRecord>(raw) {
            Ok(rec) => {
                if let Some(prev) = records.last() {
                    if rec.t < prev.t {
                        return Err(Error::NonMonotonicTime { line });
                    }
                }
                records.push(rec);
            }
            Err(_) if is_last && !raw.ends_with('\n') => {
                let (line, t) = match records.last() {
                    Some(r) => (line - 1, r.t),
                    None => (1, header.scenario.initial_state.t),
                };
                return Err(Error::TruncatedLog { line, t });
            }
            Err(e) => {
                return Err(Error::Malformed {
                    line,
                    reason: e.to_string(),
                })
            }
        }
    }
    Ok(SessionLog { header, records })
}
