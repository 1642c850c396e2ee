//! Rig geometry.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this magnitude the hitch is treated as sitting on the rear axle.
pub const DEGENERATE_HITCH_EPS: f64 = 1e-6;

/// Geometry of a car (or tractor) towing a single trailer.
///
/// `hitch_offset` is signed: positive puts the hitch behind the rear axle
/// (passenger car with a tow ball), negative puts it ahead of the rear axle
/// (fifth wheel on a semi-tractor).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleTrailerParams {
    #[serde(rename = "L")]
    pub wheelbase: f64,
    #[serde(rename = "L_H")]
    pub hitch_offset: f64,
    #[serde(rename = "L_T")]
    pub trailer_length: f64,
    /// CG to front axle. Rendering metadata only.
    #[serde(rename = "L_F")]
    pub cg_to_front: f64,
    /// CG to rear axle. Rendering metadata only.
    #[serde(rename = "L_R")]
    pub cg_to_rear: f64,
    pub vehicle_width: f64,
    pub trailer_width: f64,
    /// Maximum |front steer angle|, radians.
    pub steer_limit: f64,
}

/// Which side of the rear axle the hitch sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HitchConfiguration {
    /// Hitch behind the rear axle (`L_H > 0`).
    BehindRearAxle,
    /// Hitch ahead of the rear axle (`L_H < 0`).
    AheadOfRearAxle,
}

impl Default for VehicleTrailerParams {
    fn default() -> Self {
        VehicleTrailerParams {
            wheelbase: 3.0,
            hitch_offset: 1.0,
            trailer_length: 2.5,
            cg_to_front: 1.3,
            cg_to_rear: 1.7,
            vehicle_width: 1.9,
            trailer_width: 2.0,
            steer_limit: 45f64.to_radians(),
        }
    }
}

impl VehicleTrailerParams {
    pub fn with_hitch_offset(mut self, hitch_offset: f64) -> Self {
        self.hitch_offset = hitch_offset;
        self
    }

    pub fn with_trailer_length(mut self, trailer_length: f64) -> Self {
        self.trailer_length = trailer_length;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.wheelbase,
            self.hitch_offset,
            self.trailer_length,
            self.cg_to_front,
            self.cg_to_rear,
            self.vehicle_width,
            self.trailer_width,
            self.steer_limit,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("all parameters must be finite".into()));
        }
        if self.wheelbase <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "wheelbase must be positive, got {}",
                self.wheelbase
            )));
        }
        if self.trailer_length <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "trailer length must be positive, got {}",
                self.trailer_length
            )));
        }
        if !(self.steer_limit > 0.0 && self.steer_limit < FRAC_PI_2) {
            return Err(Error::InvalidParams(format!(
                "steer limit must lie in (0, pi/2), got {}",
                self.steer_limit
            )));
        }
        if self.vehicle_width < 0.0 || self.trailer_width < 0.0 {
            return Err(Error::InvalidParams("widths must be non-negative".into()));
        }
        Ok(())
    }

    /// `None` when the hitch sits on the rear axle.
    pub fn configuration(&self) -> Option<HitchConfiguration> {
        if self.is_degenerate_hitch() {
            None
        } else if self.hitch_offset > 0.0 {
            Some(HitchConfiguration::BehindRearAxle)
        } else {
            Some(HitchConfiguration::AheadOfRearAxle)
        }
    }

    pub fn is_degenerate_hitch(&self) -> bool {
        self.hitch_offset.abs() < DEGENERATE_HITCH_EPS
    }
}
