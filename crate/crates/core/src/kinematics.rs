//! Forward kinematics of the single-trailer rig and its fixed-step integrator.
//!
//! The rear axle is the reference point. The state is the rear-axle position
//! together with the vehicle and trailer yaw angles; the hitch angle is always
//! derived from the two yaws. Under the no-side-slip assumption the rig obeys
//!
//! ```text
//! psi1' = v_R / L * tan(delta_f)
//! psi2' = v_R / L_T * (sin(dpsi) - L_H / L * cos(dpsi) * tan(delta_f))
//! v_T   = v_R * (cos(dpsi) + L_H / L * sin(dpsi) * tan(delta_f))
//! ```
//!
//! with `dpsi = psi1 - psi2`. Everything here is a pure function of its
//! arguments.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::VehicleTrailerParams;

/// Default fixed integration step, seconds.
pub const DEFAULT_DT: f64 = 0.01;
/// Largest accepted integration step, seconds.
pub const MAX_DT: f64 = 0.1;
/// Default |v_R| limit, m/s.
pub const DEFAULT_SPEED_LIMIT: f64 = 5.0;
/// Default jackknife warning threshold on |hitch angle| (about 85 degrees).
pub const DEFAULT_JACKKNIFE_THRESHOLD: f64 = 1.484;
/// Steer angles this close to pi/2 are rejected outright.
pub const STEER_SINGULARITY_MARGIN: f64 = 1e-3;

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> Result<f64> {
    if !theta.is_finite() {
        return Err(Error::NonFiniteAngle(theta));
    }
    Ok(wrap(theta))
}

pub(crate) fn wrap(theta: f64) -> f64 {
    if theta > -PI && theta <= PI {
        return theta;
    }
    let r = theta.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    #[serde(rename = "x_R")]
    pub x: f64,
    #[serde(rename = "y_R")]
    pub y: f64,
    #[serde(rename = "psi_1")]
    pub psi1: f64,
    #[serde(rename = "psi_2")]
    pub psi2: f64,
    pub t: f64,
}

impl SystemState {
    /// Builds a state at `t = 0` with both yaws wrapped.
    pub fn new(x: f64, y: f64, psi1: f64, psi2: f64) -> Self {
        SystemState {
            x,
            y,
            psi1: wrap(psi1),
            psi2: wrap(psi2),
            t: 0.0,
        }
    }

    /// Rig stretched out along the heading `psi`, rear axle at `(x, y)`.
    pub fn aligned(x: f64, y: f64, psi: f64) -> Self {
        SystemState::new(x, y, psi, psi)
    }

    pub fn hitch_angle(&self) -> f64 {
        hitch_angle(self)
    }

    pub fn is_jackknifed(&self, threshold: f64) -> bool {
        self.hitch_angle().abs() > threshold
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite()
            && self.y.is_finite()
            && self.psi1.is_finite()
            && self.psi2.is_finite()
            && self.t.is_finite()
    }
}

/// The two model inputs, held constant over an integration step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlInput {
    #[serde(rename = "v_R")]
    pub v_r: f64,
    pub delta_f: f64,
}

impl ControlInput {
    pub fn new(v_r: f64, delta_f: f64) -> Self {
        ControlInput { v_r, delta_f }
    }

    pub fn stop() -> Self {
        ControlInput::new(0.0, 0.0)
    }

    pub fn validate(&self, params: &VehicleTrailerParams, speed_limit: f64) -> Result<()> {
        if !self.v_r.is_finite() || !self.delta_f.is_finite() {
            return Err(Error::NonFiniteAngle(self.delta_f));
        }
        if self.delta_f.abs() > params.steer_limit {
            return Err(Error::SteerLimit {
                delta_f: self.delta_f,
                limit: params.steer_limit,
            });
        }
        if self.v_r.abs() > speed_limit {
            return Err(Error::SpeedLimit {
                v_r: self.v_r,
                limit: speed_limit,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedRates {
    pub psi1_dot: f64,
    pub psi2_dot: f64,
    /// Signed trailer-axle speed.
    pub v_t: f64,
    pub x_dot: f64,
    pub y_dot: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyPoints {
    pub front_axle: [f64; 2],
    pub rear_axle: [f64; 2],
    pub hitch: [f64; 2],
    pub trailer_axle: [f64; 2],
}

/// `wrap(psi1 - psi2)`.
pub fn hitch_angle(state: &SystemState) -> f64 {
    wrap(state.psi1 - state.psi2)
}

fn check_steer(delta_f: f64) -> Result<()> {
    if !delta_f.is_finite() || delta_f.abs() >= FRAC_PI_2 - STEER_SINGULARITY_MARGIN {
        return Err(Error::SteerSingularity { delta_f });
    }
    Ok(())
}

pub fn rates(
    params: &VehicleTrailerParams,
    state: &SystemState,
    input: &ControlInput,
) -> Result<DerivedRates> {
    check_steer(input.delta_f)?;
    Ok(rates_unchecked(
        params,
        state.psi1,
        state.psi1 - state.psi2,
        input.v_r,
        input.delta_f.tan(),
    ))
}

#[inline]
fn rates_unchecked(
    params: &VehicleTrailerParams,
    psi1: f64,
    dpsi: f64,
    v_r: f64,
    tan_delta: f64,
) -> DerivedRates {
    let (s, c) = dpsi.sin_cos();
    let lh_over_l = params.hitch_offset / params.wheelbase;
    DerivedRates {
        psi1_dot: v_r / params.wheelbase * tan_delta,
        psi2_dot: v_r / params.trailer_length * (s - lh_over_l * c * tan_delta),
        v_t: v_r * (c + lh_over_l * s * tan_delta),
        x_dot: v_r * psi1.cos(),
        y_dot: v_r * psi1.sin(),
    }
}

pub fn key_points(params: &VehicleTrailerParams, state: &SystemState) -> KeyPoints {
    let (s1, c1) = state.psi1.sin_cos();
    let (s2, c2) = state.psi2.sin_cos();
    let rear = [state.x, state.y];
    let hitch = [
        rear[0] - params.hitch_offset * c1,
        rear[1] - params.hitch_offset * s1,
    ];
    KeyPoints {
        front_axle: [rear[0] + params.wheelbase * c1, rear[1] + params.wheelbase * s1],
        rear_axle: rear,
        hitch,
        trailer_axle: [
            hitch[0] - params.trailer_length * c2,
            hitch[1] - params.trailer_length * s2,
        ],
    }
}

type Vector = [f64; 4];

fn derivative(params: &VehicleTrailerParams, y: &Vector, v_r: f64, tan_delta: f64) -> Vector {
    let r = rates_unchecked(params, y[2], y[2] - y[3], v_r, tan_delta);
    [r.x_dot, r.y_dot, r.psi1_dot, r.psi2_dot]
}

fn axpy(y: &Vector, h: f64, k: &Vector) -> Vector {
    [y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2], y[3] + h * k[3]]
}

/// One classical RK4 step with the input held constant.
pub fn step(
    params: &VehicleTrailerParams,
    state: &SystemState,
    input: &ControlInput,
    dt: f64,
) -> Result<SystemState> {
    if !(dt > 0.0 && dt <= MAX_DT) {
        return Err(Error::InvalidTimeStep(dt));
    }
    check_steer(input.delta_f)?;
    let tan_delta = input.delta_f.tan();
    let v_r = input.v_r;

    let y0 = [state.x, state.y, state.psi1, state.psi2];
    let k1 = derivative(params, &y0, v_r, tan_delta);
    let k2 = derivative(params, &axpy(&y0, dt / 2.0, &k1), v_r, tan_delta);
    let k3 = derivative(params, &axpy(&y0, dt / 2.0, &k2), v_r, tan_delta);
    let k4 = derivative(params, &axpy(&y0, dt, &k3), v_r, tan_delta);
    let mut y1 = [0.0; 4];
    for i in 0..4 {
        y1[i] = y0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }

    let next = SystemState {
        x: y1[0],
        y: y1[1],
        psi1: wrap(y1[2]),
        psi2: wrap(y1[3]),
        t: state.t + dt,
    };
    if !next.is_finite() {
        return Err(Error::NonFiniteState { t: next.t });
    }
    Ok(next)
}

/// Takes `steps` RK4 steps with the input held.
pub fn integrate(
    params: &VehicleTrailerParams,
    state: &SystemState,
    input: &ControlInput,
    dt: f64,
    steps: usize,
) -> Result<SystemState> {
    let mut s = *state;
    for _ in 0..steps {
        s = step(params, &s, input, dt)?;
    }
    Ok(s)
}
