//! Unit conversions and physical constants.
//!
//! Internally every frequency is an angular frequency in rad/ns. User-facing
//! values are ordinary frequencies in GHz, so `ω = 2π ν`.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Reduced Planck constant, J·s (exact SI 2019 value).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K (exact SI 2019 value).
pub const K_B: f64 = 1.380_649e-23;
/// Angular frequency scale: 1 rad/ns = 1e9 rad/s.
pub const RAD_PER_NS_TO_RAD_PER_S: f64 = 1e9;

/// GHz → rad/ns.
pub fn ghz(nu: f64) -> f64 {
    TAU * nu
}

/// rad/ns → GHz.
pub fn to_ghz(omega: f64) -> f64 {
    omega / TAU
}

/// Parses a temperature such as `25mK`, `0.025K` or `0.025` (kelvin).
pub fn parse_temperature(s: &str) -> Result<f64> {
    let s = s.trim();
    let (num, scale) = if let Some(v) = s.strip_suffix("mK") {
        (v, 1e-3)
    } else if let Some(v) = s.strip_suffix('K') {
        (v, 1.0)
    } else {
        (s, 1.0)
    };
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| Error::invalid("temperature", format!("cannot parse `{s}`")))?;
    if !value.is_finite() {
        return Err(Error::invalid("temperature", "must be finite"));
    }
    Ok(value * scale)
}
