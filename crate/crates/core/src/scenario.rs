//! Scenario files and the parking-space check.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{
    key_points, SystemState, DEFAULT_DT, DEFAULT_JACKKNIFE_THRESHOLD, DEFAULT_SPEED_LIMIT, MAX_DT,
};
use crate::params::VehicleTrailerParams;

pub const SCHEMA_VERSION: u32 = 1;

/// Tolerance for points on the polygon boundary.
pub const BOUNDARY_TOL: f64 = 1e-9;

fn default_cadence() -> f64 {
    1.0
}
fn default_dt() -> f64 {
    DEFAULT_DT
}
fn default_speed_limit() -> f64 {
    DEFAULT_SPEED_LIMIT
}
fn default_jackknife() -> f64 {
    DEFAULT_JACKKNIFE_THRESHOLD
}
fn default_overhang() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub params: VehicleTrailerParams,
    pub initial_state: SystemState,
    pub parking_space: Vec<[f64; 2]>,
    #[serde(default = "default_cadence")]
    pub input_cadence: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_speed_limit")]
    pub speed_limit: f64,
    #[serde(default = "default_jackknife")]
    pub jackknife_threshold: f64,
    /// Trailer body length behind the axle, added to the footprint.
    #[serde(default = "default_overhang")]
    pub trailer_overhang: f64,
}

impl Scenario {
    pub fn new(
        name: impl Into<String>,
        params: VehicleTrailerParams,
        initial_state: SystemState,
        parking_space: Vec<[f64; 2]>,
    ) -> Self {
        Scenario {
            schema_version: SCHEMA_VERSION,
            name: name.into(),
            description: None,
            params,
            initial_state,
            parking_space,
            input_cadence: default_cadence(),
            dt: default_dt(),
            speed_limit: default_speed_limit(),
            jackknife_threshold: default_jackknife(),
            trailer_overhang: default_overhang(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: self.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        self.params.validate()?;
        if !self.initial_state.is_finite() {
            return Err(Error::InvalidScenario("initial state must be finite".into()));
        }
        if !(self.dt > 0.0 && self.dt <= MAX_DT) {
            return Err(Error::InvalidScenario(format!("dt must lie in (0, {MAX_DT}], got {}", self.dt)));
        }
        if !(self.input_cadence > 0.0 && self.input_cadence.is_finite()) {
            return Err(Error::InvalidScenario("input cadence must be positive".into()));
        }
        let ratio = self.input_cadence / self.dt;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) || ratio.round() < 1.0 {
            return Err(Error::InvalidScenario(format!(
                "input cadence {} s is not an integer multiple of dt {} s",
                self.input_cadence, self.dt
            )));
        }
        if !(self.speed_limit > 0.0 && self.speed_limit.is_finite()) {
            return Err(Error::InvalidScenario("speed limit must be positive".into()));
        }
        if !(self.jackknife_threshold > 0.0 && self.jackknife_threshold <= PI) {
            return Err(Error::InvalidScenario("jackknife threshold must lie in (0, pi]".into()));
        }
        if !(self.trailer_overhang >= 0.0 && self.trailer_overhang.is_finite()) {
            return Err(Error::InvalidScenario("trailer overhang must be non-negative".into()));
        }
        ConvexPolygon::new(self.parking_space.clone())?;
        Ok(())
    }

    /// Integration steps per input segment.
    pub fn steps_per_segment(&self) -> usize {
        (self.input_cadence / self.dt).round() as usize
    }

    pub fn polygon(&self) -> Result<ConvexPolygon> {
        ConvexPolygon::new(self.parking_space.clone())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        check_schema_version(&value)?;
        let scenario: Scenario = serde_json::from_value(value)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub(crate) fn check_schema_version(value: &serde_json::Value) -> Result<()> {
    match value.get("schema_version").and_then(|v| v.as_u64()) {
        Some(v) if v == SCHEMA_VERSION as u64 => Ok(()),
        Some(v) => Err(Error::SchemaVersion {
            found: u32::try_from(v).unwrap_or(u32::MAX),
            expected: SCHEMA_VERSION,
        }),
        None => Err(Error::InvalidScenario("missing schema_version".into())),
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Scenario::from_json(&text)
}

pub fn save_scenario(path: impl AsRef<Path>, scenario: &Scenario) -> Result<()> {
    scenario.validate()?;
    let path = path.as_ref();
    let mut text = scenario.to_json()?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Strictly convex polygon, either winding.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<[f64; 2]>,
    orientation: f64,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

impl ConvexPolygon {
    pub fn new(vertices: Vec<[f64; 2]>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::DegeneratePolygon(format!("need at least 3 vertices, got {n}")));
        }
        if vertices.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::DegeneratePolygon("non-finite vertex".into()));
        }
        let mut orientation = 0.0;
        for i in 0..n {
            let c = cross(vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
            if c == 0.0 {
                return Err(Error::DegeneratePolygon(format!(
                    "vertices {}..{} are collinear or repeated",
                    i,
                    (i + 2) % n
                )));
            }
            if orientation == 0.0 {
                orientation = c.signum();
            } else if c.signum() != orientation {
                return Err(Error::DegeneratePolygon("polygon is not convex".into()));
            }
        }
        // Convex turns everywhere can still wind around more than once.
        let turning: f64 = (0..n)
            .map(|i| {
                let a = vertices[i];
                let b = vertices[(i + 1) % n];
                let c = vertices[(i + 2) % n];
                let h1 = (b[1] - a[1]).atan2(b[0] - a[0]);
                let h2 = (c[1] - b[1]).atan2(c[0] - b[0]);
                crate::kinematics::wrap(h2 - h1)
            })
            .sum();
        if (turning.abs() - 2.0 * PI).abs() > 1e-6 {
            return Err(Error::DegeneratePolygon("polygon is self-intersecting".into()));
        }
        Ok(ConvexPolygon {
            vertices,
            orientation,
        })
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    /// Closed containment: points within [`BOUNDARY_TOL`] of an edge count.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let len = (b[0] - a[0]).hypot(b[1] - a[1]);
            self.orientation * cross(a, b, p) >= -BOUNDARY_TOL * len
        })
    }

    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        0.5 * (0..n)
            .map(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                a[0] * b[1] - b[0] * a[1]
            })
            .sum::<f64>()
            .abs()
    }

    pub fn centroid(&self) -> [f64; 2] {
        let n = self.vertices.len();
        let (mut cx, mut cy, mut a2) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let w = a[0] * b[1] - b[0] * a[1];
            cx += (a[0] + b[0]) * w;
            cy += (a[1] + b[1]) * w;
            a2 += w;
        }
        [cx / (3.0 * a2), cy / (3.0 * a2)]
    }

    /// Heading of the longest edge, in `(-pi/2, pi/2]`.
    pub fn long_axis(&self) -> f64 {
        let n = self.vertices.len();
        let (mut best, mut heading) = (-1.0, 0.0);
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let len = (b[0] - a[0]).hypot(b[1] - a[1]);
            if len > best + 1e-12 {
                best = len;
                heading = (b[1] - a[1]).atan2(b[0] - a[0]);
            }
        }
        fold_axis(heading)
    }
}

fn fold_axis(theta: f64) -> f64 {
    let w = crate::kinematics::wrap(theta);
    if w > FRAC_PI_2 {
        w - PI
    } else if w <= -FRAC_PI_2 {
        w + PI
    } else {
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParkMetrics {
    pub trailer_inside: bool,
    /// Trailer heading minus the space's long axis, modulo a half turn.
    pub orientation_error: f64,
    /// Signed distance of the footprint center from the long axis through
    /// the space centroid, positive to the left of the axis.
    pub lateral_offset: f64,
    pub footprint: [[f64; 2]; 4],
}

/// Trailer footprint: from the hitch back `L_T + overhang`, `trailer_width`
/// wide, corners counter-clockwise starting front-left.
pub fn trailer_footprint(
    params: &VehicleTrailerParams,
    state: &SystemState,
    overhang: f64,
) -> [[f64; 2]; 4] {
    let hitch = key_points(params, state).hitch;
    let (s, c) = state.psi2.sin_cos();
    let back = params.trailer_length + overhang;
    let hw = 0.5 * params.trailer_width;
    let at = |along: f64, left: f64| {
        [
            hitch[0] - along * c - left * s,
            hitch[1] - along * s + left * c,
        ]
    };
    [at(0.0, hw), at(back, hw), at(back, -hw), at(0.0, -hw)]
}

pub fn check_parked(scenario: &Scenario, state: &SystemState) -> Result<ParkMetrics> {
    let polygon = scenario.polygon()?;
    Ok(park_metrics(&polygon, &scenario.params, state, scenario.trailer_overhang))
}

pub fn park_metrics(
    polygon: &ConvexPolygon,
    params: &VehicleTrailerParams,
    state: &SystemState,
    overhang: f64,
) -> ParkMetrics {
    let footprint = trailer_footprint(params, state, overhang);
    let trailer_inside = footprint.iter().all(|&p| polygon.contains(p));
    let axis = polygon.long_axis();
    let centroid = polygon.centroid();
    let center = [
        footprint.iter().map(|p| p[0]).sum::<f64>() / 4.0,
        footprint.iter().map(|p| p[1]).sum::<f64>() / 4.0,
    ];
    let (s, c) = axis.sin_cos();
    ParkMetrics {
        trailer_inside,
        orientation_error: fold_axis(state.psi2 - axis),
        lateral_offset: c * (center[1] - centroid[1]) - s * (center[0] - centroid[0]),
        footprint,
    }
}
