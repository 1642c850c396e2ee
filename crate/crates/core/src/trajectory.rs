//! Open-loop simulation from an input profile, and trajectory CSV export.

use std::f64::consts::FRAC_PI_2;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{step, ControlInput, SystemState};
use crate::params::VehicleTrailerParams;
use crate::tracking::{fmt9, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub state: SystemState,
    /// Input applied from this row's time onward.
    pub input: ControlInput,
}

pub const TRAJECTORY_HEADER: [&str; 8] = [
    "t", "x_R", "y_R", "psi_1", "psi_2", "hitch_angle", "v_R", "delta_f",
];

pub fn write_trajectory_csv<W: Write>(rows: &[TrajectoryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    for r in rows {
        let s = &r.state;
        w.write_record([
            fmt9(s.t),
            fmt9(s.x),
            fmt9(s.y),
            fmt9(s.psi1),
            fmt9(s.psi2),
            fmt9(s.hitch_angle()),
            fmt9(r.input.v_r),
            fmt9(r.input.delta_f),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Piecewise-constant speed and steer, read with zero-order hold.
#[derive(Debug, Clone, PartialEq)]
pub struct InputProfile {
    pub speed: TimeSeries,
    pub steer: TimeSeries,
}

#[derive(Deserialize)]
struct ProfileRow {
    t: f64,
    #[serde(rename = "v_R")]
    v_r: f64,
    delta_f: f64,
}

impl InputProfile {
    /// CSV with header `t,v_R,delta_f`.
    pub fn from_csv<R: Read>(input: R, steer_in_degrees: bool) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let (mut t, mut v, mut d) = (Vec::new(), Vec::new(), Vec::new());
        for row in rdr.deserialize::<ProfileRow>() {
            let row = row?;
            t.push(row.t);
            v.push(row.v_r);
            d.push(if steer_in_degrees { row.delta_f.to_radians() } else { row.delta_f });
        }
        Ok(InputProfile {
            speed: TimeSeries::new(t.clone(), v)?,
            steer: TimeSeries::new(t, d)?,
        })
    }

    pub fn load(path: impl AsRef<Path>, steer_in_degrees: bool) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(file, steer_in_degrees)
    }

    pub fn at(&self, t: f64) -> ControlInput {
        ControlInput::new(self.speed.at(t), self.steer.at(t))
    }

    pub fn duration(&self) -> f64 {
        self.speed.last_time()
    }
}

/// Integrates the profile for `duration` seconds. Profile times are measured
/// from the initial state's `t`. Every input is checked against the steer
/// and speed limits before it is applied. A hitch angle beyond a right
/// angle aborts the run.
pub fn simulate_profile(
    params: &VehicleTrailerParams,
    initial: &SystemState,
    profile: &InputProfile,
    dt: f64,
    duration: f64,
    speed_limit: f64,
) -> Result<Vec<TrajectoryRow>> {
    params.validate()?;
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(Error::InvalidProfile(format!("duration must be non-negative, got {duration}")));
    }
    let steps = (duration / dt).round() as usize;
    let mut rows = Vec::with_capacity(steps + 1);
    let mut state = *initial;
    for k in 0..=steps {
        let elapsed = k as f64 * dt;
        state.t = initial.t + elapsed;
        let input = profile.at(elapsed);
        input.validate(params, speed_limit)?;
        rows.push(TrajectoryRow { state, input });
        if state.hitch_angle().abs() > FRAC_PI_2 {
            return Err(Error::Jackknife {
                t: state.t,
                hitch_angle: state.hitch_angle(),
            });
        }
        if k < steps {
            state = step(params, &state, &input, dt)?;
        }
    }
    Ok(rows)
}
