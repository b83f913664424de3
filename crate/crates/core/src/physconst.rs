//! Physical inputs of the Stern-Gerlach pair experiment and the guidance
//! coefficients derived from them.
//!
//! Everything is CGS-Gaussian: lengths in cm, masses in g, fields in G,
//! magnetic moments in erg/G.

use serde::{Deserialize, Serialize};

use crate::error::PhysicsError;

/// Reduced Planck constant, erg s.
pub const HBAR: f64 = 1.054_571_817e-27;
/// Speed of light, cm/s.
pub const SPEED_OF_LIGHT: f64 = 2.998e10;
/// Bohr magneton, erg/G.
pub const BOHR_MAGNETON: f64 = 9.274e-21;
/// Atomic mass unit, g.
pub const ATOMIC_MASS_UNIT: f64 = 1.6605e-24;
/// Mass number used for the silver atom.
pub const SILVER_MASS_NUMBER: f64 = 108.0;

/// Raw experiment physics. Defaults describe the silver-atom beam.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawPhysicalInputs {
    /// erg/G
    pub magnetic_moment: f64,
    /// g
    pub mass: f64,
    /// Width of the initial Gaussian packet (std of |psi|^2), cm.
    pub packet_width: f64,
    /// Transverse field gradient dB/dz, G/cm.
    pub field_gradient: f64,
    /// cm
    pub magnet_length: f64,
    /// Longitudinal beam speed, cm/s.
    pub beam_speed: f64,
    /// cm/s
    pub light_speed: f64,
}

impl Default for RawPhysicalInputs {
    fn default() -> Self {
        Self {
            magnetic_moment: BOHR_MAGNETON,
            mass: SILVER_MASS_NUMBER * ATOMIC_MASS_UNIT,
            packet_width: 1e-3,
            field_gradient: 1e4,
            magnet_length: 30.0,
            beam_speed: 1e4,
            light_speed: SPEED_OF_LIGHT,
        }
    }
}

impl RawPhysicalInputs {
    /// Checks positivity and `beam_speed <= light_speed`. The field gradient
    /// may be zero (field-free drift).
    pub fn validate(&self) -> Result<(), PhysicsError> {
        let positive = [
            ("magnetic_moment", self.magnetic_moment),
            ("mass", self.mass),
            ("packet_width", self.packet_width),
            ("magnet_length", self.magnet_length),
            ("beam_speed", self.beam_speed),
            ("light_speed", self.light_speed),
        ];
        for (field, value) in positive {
            if !value.is_finite() || value <= 0.0 {
                return Err(PhysicsError::NotPositive { field, value });
            }
        }
        if !self.field_gradient.is_finite() || self.field_gradient < 0.0 {
            return Err(PhysicsError::Negative {
                field: "field_gradient",
                value: self.field_gradient,
            });
        }
        if self.beam_speed > self.light_speed {
            return Err(PhysicsError::Superluminal {
                beam_speed: self.beam_speed,
                light_speed: self.light_speed,
            });
        }
        Ok(())
    }

    /// Time spent inside the magnet, `L / v`.
    pub fn transit_time(&self) -> f64 {
        self.magnet_length / self.beam_speed
    }
}

/// Coefficients of the two-particle velocity law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedCoefficients {
    /// Transverse acceleration scale, cm/s^2.
    pub alpha: f64,
    /// cm^-1 s^-2
    pub beta: f64,
    /// Packet spreading rate, 1/s.
    pub k: f64,
    /// s
    pub transit_time: f64,
}

/// `alpha = (dB/dz) mu / 2m`, `beta = 2 alpha / dr0^2`, `k = hbar / (2 m dr0^2)`.
pub fn derive_coefficients(raw: &RawPhysicalInputs) -> Result<DerivedCoefficients, PhysicsError> {
    raw.validate()?;
    let width_sq = raw.packet_width * raw.packet_width;
    let alpha = raw.field_gradient * raw.magnetic_moment / (2.0 * raw.mass);
    let coeff = DerivedCoefficients {
        alpha,
        beta: 2.0 * alpha / width_sq,
        k: HBAR / (2.0 * raw.mass * width_sq),
        transit_time: raw.transit_time(),
    };
    for (field, value) in [
        ("alpha", coeff.alpha),
        ("beta", coeff.beta),
        ("k", coeff.k),
        ("transit_time", coeff.transit_time),
    ] {
        if !value.is_finite() {
            return Err(PhysicsError::NonFiniteDerived { field, value });
        }
    }
    Ok(coeff)
}
