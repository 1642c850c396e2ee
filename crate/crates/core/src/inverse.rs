//! Virtual trailer steer.
//!
//! Put a fictitious steerable axle at the hitch and the trailer becomes a
//! standalone vehicle whose steer angle `delta_T` is the angle between the
//! hitch velocity and the trailer axis. This module maps between that angle
//! and the real front-wheel steer angle, applies the per-configuration,
//! per-direction sign convention of the mapping, and measures the achieved
//! `delta_T` from trailer motion.
//!
//! Only `tan(delta_T)` ever enters the kinematics, so virtual steer angles
//! are reported folded into `(-pi/2, pi/2]`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{wrap, STEER_SINGULARITY_MARGIN};
use crate::params::{HitchConfiguration, VehicleTrailerParams};

/// `|cos(dpsi) + sin(dpsi) tan(delta_T)|` below this is treated as singular.
pub const SINGULARITY_EPS: f64 = 1e-9;
/// Trailer speeds at or below this magnitude have no usable hitch direction.
pub const ZERO_SPEED_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VirtualSteer(pub f64);

impl VirtualSteer {
    pub fn radians(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotionDirection {
    Forward,
    Reverse,
}

impl MotionDirection {
    /// Zero speed counts as reverse: a stopped rig is about to back up.
    pub fn from_speed(v_r: f64) -> Self {
        if v_r > 0.0 {
            MotionDirection::Forward
        } else {
            MotionDirection::Reverse
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            MotionDirection::Forward => MotionDirection::Reverse,
            MotionDirection::Reverse => MotionDirection::Forward,
        }
    }
}

/// Sign applied to the steer mapping for each case.
///
/// | hitch              | reverse | forward |
/// |--------------------|---------|---------|
/// | behind rear axle   |   +1    |   -1    |
/// | ahead of rear axle |   -1    |   +1    |
pub fn branch_sign(configuration: HitchConfiguration, direction: MotionDirection) -> f64 {
    use HitchConfiguration::*;
    use MotionDirection::*;
    match (configuration, direction) {
        (BehindRearAxle, Reverse) | (AheadOfRearAxle, Forward) => 1.0,
        (BehindRearAxle, Forward) | (AheadOfRearAxle, Reverse) => -1.0,
    }
}

/// Result of mapping a virtual steer onto the front wheels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteerCommand {
    /// Front steer angle after clamping to the steer limit.
    pub delta_f: f64,
    /// Front steer angle before clamping.
    pub unclamped: f64,
    pub saturated: bool,
    pub configuration: HitchConfiguration,
    pub direction: MotionDirection,
    pub sign: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesiredRates {
    pub psi2_dot: f64,
    pub psi1_dot: f64,
}

fn fold_half_turn(angle: f64) -> f64 {
    if angle > FRAC_PI_2 {
        angle - PI
    } else if angle <= -FRAC_PI_2 {
        angle + PI
    } else {
        angle
    }
}

fn check_front_steer(delta_f: f64) -> Result<()> {
    if !delta_f.is_finite() || delta_f.abs() >= FRAC_PI_2 - STEER_SINGULARITY_MARGIN {
        return Err(Error::SteerSingularity { delta_f });
    }
    Ok(())
}

/// Direction of the hitch velocity relative to the trailer axis for a given
/// front steer and hitch angle, with no sign convention applied.
pub fn geometric_virtual_steer(
    params: &VehicleTrailerParams,
    delta_f: f64,
    delta_psi: f64,
) -> Result<f64> {
    check_front_steer(delta_f)?;
    let (s, c) = delta_psi.sin_cos();
    let t = delta_f.tan();
    let l = params.wheelbase;
    let lh = params.hitch_offset;
    Ok(fold_half_turn((l * s - lh * c * t).atan2(l * c + lh * s * t)))
}

/// Virtual steer implied by a front steer angle, under the sign convention
/// for `direction`.
///
/// The convention multiplies the front steer; applying it on the way in here
/// makes this the exact inverse of [`actual_from_virtual`] in every case.
pub fn virtual_from_actual(
    params: &VehicleTrailerParams,
    delta_f: f64,
    delta_psi: f64,
    direction: MotionDirection,
) -> Result<VirtualSteer> {
    let sign = params
        .configuration()
        .map_or(1.0, |config| branch_sign(config, direction));
    geometric_virtual_steer(params, sign * delta_f, delta_psi).map(VirtualSteer)
}

/// Front steer that produces the virtual steer `delta_t`, no sign convention.
pub fn geometric_front_steer(
    params: &VehicleTrailerParams,
    delta_t: VirtualSteer,
    delta_psi: f64,
) -> Result<f64> {
    if params.is_degenerate_hitch() {
        return Err(Error::DegenerateHitch {
            hitch_offset: params.hitch_offset,
        });
    }
    let (s, c) = delta_psi.sin_cos();
    let tau = delta_t.0.tan();
    let numerator = s - c * tau;
    let denominator = c + s * tau;
    if !denominator.is_finite() || denominator.abs() < SINGULARITY_EPS {
        return Err(Error::KinematicSingularity { denominator });
    }
    Ok((params.wheelbase * numerator / (params.hitch_offset * denominator)).atan())
}

/// Front steer command for a desired virtual steer.
pub fn actual_from_virtual(
    params: &VehicleTrailerParams,
    delta_t: VirtualSteer,
    delta_psi: f64,
    direction: MotionDirection,
) -> Result<SteerCommand> {
    let configuration = params.configuration().ok_or(Error::DegenerateHitch {
        hitch_offset: params.hitch_offset,
    })?;
    let sign = branch_sign(configuration, direction);
    let unclamped = sign * geometric_front_steer(params, delta_t, delta_psi)?;
    let limit = params.steer_limit;
    let delta_f = unclamped.clamp(-limit, limit);
    Ok(SteerCommand {
        delta_f,
        unclamped,
        saturated: delta_f != unclamped,
        configuration,
        direction,
        sign,
    })
}

/// Trailer-axle speed for a rear-axle speed `v_r`, from the virtual steer.
pub fn trailer_speed(
    v_r: f64,
    delta_psi: f64,
    delta_t: VirtualSteer,
) -> Result<f64> {
    let (s, c) = delta_psi.sin_cos();
    let denominator = c + s * delta_t.0.tan();
    if !denominator.is_finite() || denominator.abs() < SINGULARITY_EPS {
        return Err(Error::KinematicSingularity { denominator });
    }
    Ok(v_r / denominator)
}

pub fn desired_trailer_yaw_rate(params: &VehicleTrailerParams, v_t: f64, delta_t: VirtualSteer) -> f64 {
    v_t / params.trailer_length * delta_t.0.tan()
}

pub fn desired_vehicle_yaw_rate(
    params: &VehicleTrailerParams,
    v_t: f64,
    delta_t: VirtualSteer,
    delta_psi: f64,
) -> Result<f64> {
    if params.is_degenerate_hitch() {
        return Err(Error::DegenerateHitch {
            hitch_offset: params.hitch_offset,
        });
    }
    let (s, c) = delta_psi.sin_cos();
    Ok(v_t / params.hitch_offset * (s - c * delta_t.0.tan()))
}

/// Yaw rates the virtual steer asks of the trailer and of the vehicle.
pub fn desired_rates(
    params: &VehicleTrailerParams,
    v_t: f64,
    delta_t: VirtualSteer,
    delta_psi: f64,
) -> Result<DesiredRates> {
    Ok(DesiredRates {
        psi2_dot: desired_trailer_yaw_rate(params, v_t, delta_t),
        psi1_dot: desired_vehicle_yaw_rate(params, v_t, delta_t, delta_psi)?,
    })
}

/// Achieved virtual steer, measured from trailer speed, yaw rate and yaw.
///
/// Uses the speed magnitude, so in reverse it reports the mirror image of
/// the geometric angle; see [`signed_actual_virtual_steer`].
pub fn actual_virtual_steer(
    params: &VehicleTrailerParams,
    v_t: f64,
    psi2_dot: f64,
    psi2: f64,
) -> Result<VirtualSteer> {
    let speed = v_t.abs();
    if !(speed > ZERO_SPEED_EPS) {
        return Err(Error::ZeroTrailerSpeed);
    }
    let (s2, c2) = psi2.sin_cos();
    let lateral = params.trailer_length * psi2_dot;
    let heading = (speed * s2 + lateral * c2).atan2(speed * c2 - lateral * s2);
    Ok(VirtualSteer(wrap(heading - psi2)))
}

/// [`actual_virtual_steer`] expressed in the geometric convention, i.e.
/// multiplied by the sign of the trailer speed.
pub fn signed_actual_virtual_steer(
    params: &VehicleTrailerParams,
    v_t: f64,
    psi2_dot: f64,
    psi2: f64,
) -> Result<VirtualSteer> {
    let measured = actual_virtual_steer(params, v_t, psi2_dot, psi2)?;
    Ok(VirtualSteer(v_t.signum() * measured.0))
}
