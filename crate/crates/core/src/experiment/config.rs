use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::infomodel::InformationMode;
use crate::integrate::IntegrationConfig;
use crate::physconst::{derive_coefficients, DerivedCoefficients, RawPhysicalInputs};

use super::loss::Efficiency;
use super::stats::Normalization;

/// How a magnet's orientation evolves over the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwitchPolicy {
    /// A fresh uniform choice from the side's two-angle menu at every launch.
    PerPairRandom,
    /// The first menu angle, never changed.
    Static,
    /// The `switches_a` / `switches_b` lists.
    ExplicitList,
}

/// Which magnets follow `switch_policy`; the others stay static.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SwitchingSides {
    Both,
    Alice,
    Bob,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegrationSettings {
    /// s
    pub dt: f64,
    pub record_every: usize,
}

impl Default for IntegrationSettings {
    fn default() -> Self {
        Self {
            dt: 1e-6,
            record_every: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSettings {
    pub n_pairs: u64,
    /// Alice's menu `(a, a')` and Bob's `(b, b')`, radians.
    pub angle_a: f64,
    pub angle_a_prime: f64,
    pub angle_b: f64,
    pub angle_b_prime: f64,
    pub mode: InformationMode,
    pub efficiency: Efficiency,
    pub normalization: Normalization,
    pub kick_threshold: f64,
    pub master_seed: u64,
    pub switch_policy: SwitchPolicy,
    pub switching_sides: SwitchingSides,
    /// `[time, angle]` entries for `explicit_list`.
    pub switches_a: Vec<[f64; 2]>,
    pub switches_b: Vec<[f64; 2]>,
    /// Time between pair launches, s.
    pub launch_interval: f64,
    /// Source to magnet entrance, cm.
    pub source_distance: f64,
    /// Distance between the two magnets, cm.
    pub separation: f64,
    /// Speed at which a setting change becomes known to the other side, cm/s.
    /// The default is far below light speed so that successive launches are
    /// spacelike separated.
    pub signal_speed: f64,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        Self {
            n_pairs: 4000,
            angle_a: 0.0,
            angle_a_prime: FRAC_PI_2,
            angle_b: FRAC_PI_4,
            angle_b_prime: 3.0 * FRAC_PI_4,
            mode: InformationMode::Nonlocal,
            efficiency: Efficiency::Efficient,
            normalization: Normalization::Singles,
            kick_threshold: 1e-3,
            master_seed: 0,
            switch_policy: SwitchPolicy::PerPairRandom,
            switching_sides: SwitchingSides::Both,
            switches_a: Vec::new(),
            switches_b: Vec::new(),
            launch_interval: 1e-2,
            source_distance: 30.0,
            separation: 120.0,
            signal_speed: 1.5e4,
        }
    }
}

/// Fully resolved configuration of one EPR run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub physics: RawPhysicalInputs,
    pub integration: IntegrationSettings,
    pub experiment: ExperimentSettings,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), Error> {
        self.physics
            .validate()
            .map_err(|e| config_err(format!("physics: {e}")))?;
        let e = &self.experiment;
        if e.n_pairs < 4 {
            return Err(config_err(format!(
                "experiment.n_pairs must be an integer >= 4, got {}",
                e.n_pairs
            )));
        }
        for (key, v) in [
            ("angle_a", e.angle_a),
            ("angle_a_prime", e.angle_a_prime),
            ("angle_b", e.angle_b),
            ("angle_b_prime", e.angle_b_prime),
        ] {
            if !v.is_finite() {
                return Err(config_err(format!("experiment.{key} must be a finite angle in radians")));
            }
        }
        if e.angle_a == e.angle_a_prime {
            return Err(config_err("experiment.angle_a and experiment.angle_a_prime must differ"));
        }
        if e.angle_b == e.angle_b_prime {
            return Err(config_err("experiment.angle_b and experiment.angle_b_prime must differ"));
        }
        if !(e.kick_threshold.is_finite() && e.kick_threshold >= 0.0) {
            return Err(config_err(format!(
                "experiment.kick_threshold must be a non-negative number, got {}",
                e.kick_threshold
            )));
        }
        for (key, v) in [
            ("source_distance", e.source_distance),
            ("separation", e.separation),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(config_err(format!(
                    "experiment.{key} must be a non-negative length in cm, got {v}"
                )));
            }
        }
        if !(e.signal_speed.is_finite() && e.signal_speed > 0.0) {
            return Err(config_err(format!(
                "experiment.signal_speed must be a positive speed in cm/s, got {}",
                e.signal_speed
            )));
        }
        let occupied = self.flight_time() + self.physics.transit_time();
        if !(e.launch_interval.is_finite() && e.launch_interval >= occupied) {
            return Err(config_err(format!(
                "experiment.launch_interval must be at least the source-to-exit time {occupied} s, got {}",
                e.launch_interval
            )));
        }
        if e.switch_policy == SwitchPolicy::ExplicitList {
            let sides: &[(&str, &Vec<[f64; 2]>)] = match e.switching_sides {
                SwitchingSides::Both => &[("switches_a", &e.switches_a), ("switches_b", &e.switches_b)],
                SwitchingSides::Alice => &[("switches_a", &e.switches_a)],
                SwitchingSides::Bob => &[("switches_b", &e.switches_b)],
            };
            for (key, list) in sides {
                if list.is_empty() {
                    return Err(config_err(format!(
                        "experiment.{key} must list [time, angle] entries for switch_policy = explicit_list"
                    )));
                }
                if list.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(config_err(format!("experiment.{key} entries must be finite")));
                }
            }
        }
        if !(self.integration.dt.is_finite() && self.integration.dt > 0.0) {
            return Err(config_err(format!(
                "integration.dt must be a positive step in s, got {}",
                self.integration.dt
            )));
        }
        self.integration_config()
            .validate()
            .map_err(|err| config_err(format!("integration.dt: {err}")))?;
        Ok(())
    }

    pub fn coefficients(&self) -> Result<DerivedCoefficients, Error> {
        Ok(derive_coefficients(&self.physics)?)
    }

    pub fn integration_config(&self) -> IntegrationConfig {
        IntegrationConfig {
            dt: self.integration.dt,
            transit_time: self.physics.transit_time(),
            record_every: self.integration.record_every,
        }
    }

    /// Source to magnet entrance, s.
    pub fn flight_time(&self) -> f64 {
        self.experiment.source_distance / self.physics.beam_speed
    }

    pub fn alice_menu(&self) -> [f64; 2] {
        [self.experiment.angle_a, self.experiment.angle_a_prime]
    }

    pub fn bob_menu(&self) -> [f64; 2] {
        [self.experiment.angle_b, self.experiment.angle_b_prime]
    }
}
