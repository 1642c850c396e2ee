//! Desired-versus-actual virtual steer experiment.
//!
//! A desired `delta_T` profile is pushed through the inverse mapping to get
//! the front steer, the forward model is stepped with that steer held, and
//! the virtual steer the trailer actually sees is measured from the model
//! outputs. Each recorded row pairs the desired value at `t_k` with the
//! measurement at `t_k`, taken with the steer that drove the rig there.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inverse::{actual_from_virtual, signed_actual_virtual_steer, MotionDirection, VirtualSteer};
use crate::kinematics::{rates, step, ControlInput, SystemState};
use crate::params::{HitchConfiguration, VehicleTrailerParams};

/// Samples held constant until the next sample time (zero-order hold).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    times: Vec<f64>,
    values: Vec<f64>,
}

const TIME_EPS: f64 = 1e-9;

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::InvalidProfile(
                "profile needs at least one sample and matching columns".into(),
            ));
        }
        if times.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidProfile("profile contains non-finite values".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidProfile("sample times must be strictly increasing".into()));
        }
        Ok(TimeSeries { times, values })
    }

    pub fn constant(value: f64) -> Self {
        TimeSeries {
            times: vec![0.0],
            values: vec![value],
        }
    }

    /// Samples `f` on the grid `k * dt` for `k = 0..=round(duration / dt)`.
    pub fn sampled(dt: f64, duration: f64, f: impl Fn(f64) -> f64) -> Self {
        let n = (duration / dt).round() as usize;
        let times: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
        let values = times.iter().map(|&t| f(t)).collect();
        TimeSeries { times, values }
    }

    pub fn at(&self, t: f64) -> f64 {
        let idx = self.times.partition_point(|&s| s <= t + TIME_EPS);
        self.values[idx.saturating_sub(1)]
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn last_time(&self) -> f64 {
        *self.times.last().expect("non-empty")
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        TimeSeries {
            times: self.times.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Sinusoid with a smoothstep ramp-in over `ramp` seconds, so that both the
/// profile and its slope start at zero from an aligned rig.
pub fn ramped_sinusoid(amplitude: f64, omega: f64, ramp: f64) -> impl Fn(f64) -> f64 {
    move |t: f64| {
        let r = if ramp > 0.0 { (t / ramp).clamp(0.0, 1.0) } else { 1.0 };
        amplitude * (omega * t).sin() * r * r * (3.0 - 2.0 * r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackingSample {
    pub t: f64,
    pub desired_delta_t: f64,
    pub applied_delta_f: f64,
    pub actual_delta_t: f64,
    pub hitch_angle: f64,
    pub direction: MotionDirection,
    pub saturated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingResult {
    /// `None` when the hitch sits on the rear axle.
    pub configuration: Option<HitchConfiguration>,
    pub hitch_offset: f64,
    pub samples: Vec<TrackingSample>,
    pub max_mismatch: f64,
    pub rms_mismatch: f64,
    pub saturated_steps: usize,
}

impl TrackingResult {
    pub fn mismatches(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples
            .iter()
            .map(|s| s.desired_delta_t - s.actual_delta_t)
    }

    /// Pearson correlation between desired and actual virtual steer.
    pub fn correlation(&self) -> f64 {
        let n = self.samples.len() as f64;
        let mean = |f: fn(&TrackingSample) -> f64| self.samples.iter().map(f).sum::<f64>() / n;
        let md = mean(|s| s.desired_delta_t);
        let ma = mean(|s| s.actual_delta_t);
        let (mut sdd, mut saa, mut sda) = (0.0, 0.0, 0.0);
        for s in &self.samples {
            let d = s.desired_delta_t - md;
            let a = s.actual_delta_t - ma;
            sdd += d * d;
            saa += a * a;
            sda += d * a;
        }
        sda / (sdd * saa).sqrt()
    }

    /// Columns `t, desired_delta_T, applied_delta_f, actual_delta_T,
    /// hitch_angle`, radians, nine decimals.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "desired_delta_T", "applied_delta_f", "actual_delta_T", "hitch_angle"])?;
        for s in &self.samples {
            w.write_record([
                fmt9(s.t),
                fmt9(s.desired_delta_t),
                fmt9(s.applied_delta_f),
                fmt9(s.actual_delta_t),
                fmt9(s.hitch_angle),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

pub(crate) fn fmt9(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.9}")
}

/// Runs the desired-versus-actual loop from an aligned rig at the origin.
///
/// The steer is recomputed once per step and held. Keep `dt * |v_R|` below
/// `|L_H|`, otherwise the sampled loop overshoots. With the hitch on the rear
/// axle the virtual steer is locked to the hitch angle, so the steer is
/// instead chosen per step to land the hitch angle on the next desired value.
pub fn run_tracking_experiment(
    params: &VehicleTrailerParams,
    desired: &TimeSeries,
    speed: &TimeSeries,
    dt: f64,
    duration: f64,
) -> Result<TrackingResult> {
    params.validate()?;
    if !(duration > 0.0) {
        return Err(Error::InvalidProfile(format!("duration must be positive, got {duration}")));
    }
    if speed.values().iter().any(|v| v.abs() <= 1e-9) {
        return Err(Error::InvalidProfile(
            "speed profile must be non-zero; the achieved virtual steer is undefined at rest".into(),
        ));
    }
    let steps = (duration / dt).round() as usize;
    let mut state = SystemState::aligned(0.0, 0.0, 0.0);
    let mut samples = Vec::with_capacity(steps + 1);
    let mut saturated_steps = 0;

    let mut input = command(params, &state, desired, speed, 0.0, dt)?;
    samples.push(measure(params, &state, &input, desired.at(0.0))?);

    for k in 0..steps {
        state = step(params, &state, &input.control, dt)?;
        let t = (k + 1) as f64 * dt;
        state.t = t;
        let hitch = state.hitch_angle();
        if hitch.abs() > FRAC_PI_2 {
            return Err(Error::Jackknife { t, hitch_angle: hitch });
        }
        if input.saturated {
            saturated_steps += 1;
        }
        samples.push(measure(params, &state, &input, desired.at(t))?);
        if k + 1 < steps {
            input = command(params, &state, desired, speed, t, dt)?;
        }
    }

    let n = samples.len() as f64;
    let mut max_mismatch: f64 = 0.0;
    let mut sum_sq = 0.0;
    for s in &samples {
        let e = s.desired_delta_t - s.actual_delta_t;
        max_mismatch = max_mismatch.max(e.abs());
        sum_sq += e * e;
    }
    Ok(TrackingResult {
        configuration: params.configuration(),
        hitch_offset: params.hitch_offset,
        samples,
        max_mismatch,
        rms_mismatch: (sum_sq / n).sqrt(),
        saturated_steps,
    })
}

struct Applied {
    control: ControlInput,
    direction: MotionDirection,
    saturated: bool,
}

fn command(
    params: &VehicleTrailerParams,
    state: &SystemState,
    desired: &TimeSeries,
    speed: &TimeSeries,
    t: f64,
    dt: f64,
) -> Result<Applied> {
    let v_r = speed.at(t);
    let direction = MotionDirection::from_speed(v_r);
    if params.is_degenerate_hitch() {
        let (delta_f, saturated) = land_hitch_angle(params, state, v_r, desired.at(t + dt), dt)?;
        return Ok(Applied {
            control: ControlInput::new(v_r, delta_f),
            direction,
            saturated,
        });
    }
    let cmd = actual_from_virtual(params, VirtualSteer(desired.at(t)), state.hitch_angle(), direction)?;
    Ok(Applied {
        control: ControlInput::new(v_r, cmd.delta_f),
        direction,
        saturated: cmd.saturated,
    })
}

/// Bisects the front steer so that one step ends at `target` hitch angle.
fn land_hitch_angle(
    params: &VehicleTrailerParams,
    state: &SystemState,
    v_r: f64,
    target: f64,
    dt: f64,
) -> Result<(f64, bool)> {
    let residual = |delta_f: f64| -> Result<f64> {
        let next = step(params, state, &ControlInput::new(v_r, delta_f), dt)?;
        Ok(crate::kinematics::wrap(next.hitch_angle() - target))
    };
    let limit = params.steer_limit;
    let (mut lo, mut hi) = (-limit, limit);
    let (mut r_lo, r_hi) = (residual(lo)?, residual(hi)?);
    if r_lo.signum() == r_hi.signum() {
        let best = if r_lo.abs() <= r_hi.abs() { lo } else { hi };
        return Ok((best, true));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let r_mid = residual(mid)?;
        if r_mid == 0.0 {
            return Ok((mid, false));
        }
        if r_mid.signum() == r_lo.signum() {
            lo = mid;
            r_lo = r_mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi), false))
}

fn measure(
    params: &VehicleTrailerParams,
    state: &SystemState,
    applied: &Applied,
    desired: f64,
) -> Result<TrackingSample> {
    let r = rates(params, state, &applied.control)?;
    let actual = signed_actual_virtual_steer(params, r.v_t, r.psi2_dot, state.psi2)?;
    Ok(TrackingSample {
        t: state.t,
        desired_delta_t: desired,
        applied_delta_f: applied.control.delta_f,
        actual_delta_t: actual.0,
        hitch_angle: state.hitch_angle(),
        direction: applied.direction,
        saturated: applied.saturated,
    })
}
