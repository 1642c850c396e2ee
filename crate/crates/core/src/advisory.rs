//! Expected trailer orientation for a candidate steer angle.
//!
//! The prediction assumes the trailer backs up for `horizon` seconds at
//! `trailer_speed` with the virtual steer frozen at its current value, which
//! is a single Euler step of the trailer yaw equation. It is drawn as a
//! straight segment of trailer length from the trailer axle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inverse::geometric_virtual_steer;
use crate::kinematics::{key_points, wrap, SystemState};
use crate::params::VehicleTrailerParams;

pub const DEFAULT_HORIZON: f64 = 1.0;
pub const DEFAULT_TRAILER_SPEED: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdvisoryPrediction {
    pub candidate_delta_f: f64,
    pub implied_delta_t: f64,
    pub predicted_psi_2: f64,
    /// From the trailer axle, `L_T` long, pointing along `predicted_psi_2`.
    pub advisory_segment: [[f64; 2]; 2],
    pub horizon: f64,
    pub assumed_speed: f64,
}

/// One-second lookahead at 1 m/s in reverse.
pub fn predict_orientation(
    params: &VehicleTrailerParams,
    state: &SystemState,
    candidate_delta_f: f64,
) -> Result<AdvisoryPrediction> {
    predict_orientation_with(
        params,
        state,
        candidate_delta_f,
        DEFAULT_HORIZON,
        DEFAULT_TRAILER_SPEED,
    )
}

pub fn predict_orientation_with(
    params: &VehicleTrailerParams,
    state: &SystemState,
    candidate_delta_f: f64,
    horizon: f64,
    trailer_speed: f64,
) -> Result<AdvisoryPrediction> {
    params.validate()?;
    if !candidate_delta_f.is_finite() || candidate_delta_f.abs() > params.steer_limit {
        return Err(Error::SteerLimit {
            delta_f: candidate_delta_f,
            limit: params.steer_limit,
        });
    }
    if !(horizon >= 0.0 && horizon.is_finite()) || !trailer_speed.is_finite() {
        return Err(Error::InvalidParams(format!(
            "horizon {horizon} s and trailer speed {trailer_speed} m/s must be finite, horizon non-negative"
        )));
    }
    if !state.is_finite() {
        return Err(Error::NonFiniteState { t: state.t });
    }

    // The hitch velocity direction is a property of the geometry; the
    // direction of travel is carried by the sign of `trailer_speed`.
    let delta_t = geometric_virtual_steer(params, candidate_delta_f, state.hitch_angle())?;
    let predicted = wrap(
        state.psi2 + trailer_speed / params.trailer_length * delta_t.tan() * horizon,
    );
    let anchor = key_points(params, state).trailer_axle;
    let (s, c) = predicted.sin_cos();
    let tip = [
        anchor[0] + params.trailer_length * c,
        anchor[1] + params.trailer_length * s,
    ];
    Ok(AdvisoryPrediction {
        candidate_delta_f,
        implied_delta_t: delta_t,
        predicted_psi_2: predicted,
        advisory_segment: [anchor, tip],
        horizon,
        assumed_speed: trailer_speed,
    })
}

/// Predicts each candidate independently; a bad candidate yields an error in
/// its slot and the rest are still evaluated.
pub fn steer_sweep(
    params: &VehicleTrailerParams,
    state: &SystemState,
    candidates: &[f64],
) -> Vec<Result<AdvisoryPrediction>> {
    candidates
        .iter()
        .map(|&c| predict_orientation(params, state, c))
        .collect()
}

/// `n` candidates evenly spanning `[-steer_limit, steer_limit]`.
pub fn candidate_grid(params: &VehicleTrailerParams, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n)
            .map(|i| -params.steer_limit + 2.0 * params.steer_limit * i as f64 / (n - 1) as f64)
            .collect(),
    }
}
