//! Reverse-parking advisory simulator for a car and a single trailer.
//!
//! The kinematic model, the virtual-steer mapping between front steer and
//! trailer steer, a trailer orientation advisory, and an interactive session
//! with logging and replay. The `gateway` module exposes sessions over a
//! WebSocket for a browser client.

pub mod error;
pub mod params;
pub mod kinematics;
pub mod inverse;
pub mod tracking;
pub mod advisory;
pub mod scenario;
pub mod trajectory;
pub mod session;
pub mod gateway;
pub mod cli;

pub use error::{Error, Result};
pub use inverse::{MotionDirection, SteerCommand, VirtualSteer};
pub use kinematics::{ControlInput, KeyPoints, SystemState};
pub use params::{HitchConfiguration, VehicleTrailerParams};
