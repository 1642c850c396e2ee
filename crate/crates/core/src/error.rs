use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite angle {0}")]
    NonFiniteAngle(f64),

    #[error("invalid vehicle-trailer parameters: {0}")]
    InvalidParams(String),

    #[error("front steer angle {delta_f} rad is at or beyond the tan() singularity")]
    SteerSingularity { delta_f: f64 },

    #[error("steer angle {delta_f} rad exceeds the steer limit of {limit} rad")]
    SteerLimit { delta_f: f64, limit: f64 },

    #[error("speed {v_r} m/s exceeds the speed limit of {limit} m/s")]
    SpeedLimit { v_r: f64, limit: f64 },

    #[error("time step {0} s is outside (0, 0.1]")]
    InvalidTimeStep(f64),

    #[error("integration produced a non-finite state at t = {t} s")]
    NonFiniteState { t: f64 },

    #[error("hitch offset {hitch_offset} m is too close to zero; the virtual steer is locked to the hitch angle")]
    DegenerateHitch { hitch_offset: f64 },

    #[error("kinematic singularity: denominator {denominator} makes the trailer speed unbounded")]
    KinematicSingularity { denominator: f64 },

    #[error("trailer speed is zero; hitch velocity direction is undefined")]
    ZeroTrailerSpeed,

    #[error("jackknife at t = {t} s: hitch angle {hitch_angle} rad exceeds pi/2")]
    Jackknife { t: f64, hitch_angle: f64 },

    #[error("session is not paused")]
    NotPaused,

    #[error("no segment is running")]
    NotRunning,

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("degenerate parking polygon: {0}")]
    DegeneratePolygon(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("schema version {found} is not supported (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },

    #[error("malformed record at line {line}: {reason}")]
    Malformed { line: usize, reason: String },

    #[error("timestamps go backwards at line {line}")]
    NonMonotonicTime { line: usize },

    #[error("log is truncated; last valid record is line {line} (t = {t} s)")]
    TruncatedLog { line: usize, t: f64 },

    #[error("replay diverged from the logged state at line {line}")]
    ReplayDivergence { line: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
