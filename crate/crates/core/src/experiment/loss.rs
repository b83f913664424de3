//! Particle loss from the field transient emitted when a magnet switches.
//!
//! The transient sweeps a magnet-length slab of field gradient back toward
//! the source at light speed. A particle meeting it head-on spends
//! `L / (c + v)` inside it versus `L / v` inside the magnet proper.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Efficiency {
    /// Switching never removes particles.
    Efficient,
    /// A switch during flight removes the particle when the kick is large enough.
    Inefficient,
}

/// Time in the counter-propagating transient over time in the magnet,
/// `v / (v + c)`.
pub fn kick_ratio(beam_speed: f64, light_speed: f64) -> f64 {
    beam_speed / (beam_speed + light_speed)
}

/// Whether a particle reaches its detector.
pub fn detector_loss(
    efficiency: Efficiency,
    own_switch_in_flight: bool,
    beam_speed: f64,
    light_speed: f64,
    kick_threshold: f64,
) -> bool {
    match efficiency {
        Efficiency::Efficient => true,
        Efficiency::Inefficient => {
            !(own_switch_in_flight && kick_ratio(beam_speed, light_speed) >= kick_threshold)
        }
    }
}
