//! Single-plane constellation geometry.
//!
//! The ground user sits on the reference line through the Earth's center
//! (angle 0). Each satellite is described by the signed angle `gamma`
//! between its own Earth-center line and that reference line. Satellites
//! move clockwise, so `gamma` decreases over time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstellationConfig {
    pub satellite_count: usize,
    pub earth_radius_km: f64,
    pub orbit_altitude_km: f64,
    /// Angle between adjacent satellites, degrees.
    pub angular_spacing_deg: f64,
    /// Clockwise angular velocity, degrees per second.
    pub angular_velocity_deg_s: f64,
    /// Half-angle of the service cone, degrees.
    pub visibility_bound_deg: f64,
    /// Shift applied to the centred initial layout, degrees.
    pub initial_offset_deg: f64,
}

impl Default for ConstellationConfig {
    fn default() -> Self {
        Self {
            satellite_count: 12,
            earth_radius_km: 6371.0,
            orbit_altitude_km: 780.0,
            angular_spacing_deg: 4.0,
            angular_velocity_deg_s: 0.0002,
            visibility_bound_deg: 10.0,
            initial_offset_deg: 0.0,
        }
    }
}

impl ConstellationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.to_string()));
        if !(self.earth_radius_km > 0.0) {
            return bad("earth_radius_km must be positive");
        }
        if !(self.orbit_altitude_km > 0.0) {
            return bad("orbit_altitude_km must be positive");
        }
        if !(self.angular_spacing_deg > 0.0) {
            return bad("angular_spacing_deg must be positive");
        }
        if !(self.visibility_bound_deg > 0.0 && self.visibility_bound_deg < 90.0) {
            return bad("visibility_bound_deg out of (0,90)");
        }
        if !(self.angular_velocity_deg_s >= 0.0) || !self.angular_velocity_deg_s.is_finite() {
            return bad("angular_velocity_deg_s must be finite and nonnegative");
        }
        if !self.initial_offset_deg.is_finite() {
            return bad("initial_offset_deg must be finite");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatelliteState {
    pub index: usize,
    /// Signed Earth-center angle in (-180, 180], degrees.
    pub gamma_deg: f64,
    pub slant_range_km: f64,
    /// Absolute time at which the satellite's FCFS queue drains.
    pub backlog_release_time: f64,
}

/// Wraps an angle into (-180, 180].
pub fn normalize_deg(angle: f64) -> f64 {
    let wrapped = angle.rem_euclid(360.0);
    if wrapped > 180.0 {
        wrapped - 360.0
    } else {
        wrapped
    }
}

/// Cosine-rule distance between a ground point and a satellite at Earth-center
/// angle `gamma_deg`.
///
/// Evaluated as `H^2 + 4R(R+H) sin^2(gamma/2)`, which is algebraically equal to
/// `R^2 + (R+H)^2 - 2R(R+H)cos(gamma)` but exact at `gamma = 0`.
pub fn slant_range(gamma_deg: f64, earth_radius_km: f64, altitude_km: f64) -> f64 {
    let r = earth_radius_km;
    let orbit = r + altitude_km;
    let half = (gamma_deg.to_radians() * 0.5).sin();
    (altitude_km * altitude_km + 4.0 * r * orbit * half * half).sqrt()
}

pub fn is_visible(state: &SatelliteState, config: &ConstellationConfig) -> bool {
    state.gamma_deg.abs() < config.visibility_bound_deg
}

/// Angle of a satellite `dt` seconds after it was at `gamma_deg`.
pub fn gamma_after(gamma_deg: f64, config: &ConstellationConfig, dt: f64) -> f64 {
    normalize_deg(gamma_deg - config.angular_velocity_deg_s * dt)
}

/// Satellites evenly spaced and centred on the ground user, then shifted by
/// `initial_offset_deg`.
pub fn initial_states(config: &ConstellationConfig) -> Vec<SatelliteState> {
    let count = config.satellite_count;
    let first = -(count.saturating_sub(1) as f64) * config.angular_spacing_deg / 2.0
        + config.initial_offset_deg;
    (0..count)
        .map(|index| {
            let gamma_deg = normalize_deg(first + index as f64 * config.angular_spacing_deg);
            SatelliteState {
                index,
                gamma_deg,
                slant_range_km: slant_range(
                    gamma_deg,
                    config.earth_radius_km,
                    config.orbit_altitude_km,
                ),
                backlog_release_time: 0.0,
            }
        })
        .collect()
}

/// Moves every satellite clockwise by `V * dt`. Backlogs are carried unchanged.
pub fn advance(
    config: &ConstellationConfig,
    states: &[SatelliteState],
    dt: f64,
) -> Result<Vec<SatelliteState>> {
    if !(dt >= 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be >= 0, got {dt}")));
    }
    Ok(states
        .iter()
        .map(|s| {
            let gamma_deg = gamma_after(s.gamma_deg, config, dt);
            SatelliteState {
                gamma_deg,
                slant_range_km: slant_range(
                    gamma_deg,
                    config.earth_radius_km,
                    config.orbit_altitude_km,
                ),
                ..s.clone()
            }
        })
        .collect())
}
