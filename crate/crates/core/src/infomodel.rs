//! What each observer can know about the partner's magnet.
//!
//! Every side keeps a history of its own magnet orientation. An observer
//! always sees her own magnet as it is now. In `Local` mode she sees the
//! partner's magnet as it was one signal-travel time ago; in `Nonlocal`
//! mode she sees it as it is now.

use serde::{Deserialize, Serialize};

use crate::error::TimelineError;
use crate::velocity::{SettingPair, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InformationMode {
    Local,
    Nonlocal,
}

/// A magnet orientation taking effect at `time`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Switch {
    pub time: f64,
    pub angle: f64,
}

impl Switch {
    pub fn new(time: f64, angle: f64) -> Self {
        Self { time, angle }
    }
}

/// Orientation histories of both magnets plus the geometry that sets the
/// retardation delay `separation / signal_speed`.
#[derive(Debug, Clone, PartialEq)]
pub struct SettingTimeline {
    alice: Vec<Switch>,
    bob: Vec<Switch>,
    separation: f64,
    signal_speed: f64,
}

impl SettingTimeline {
    pub fn new(
        alice: Vec<Switch>,
        bob: Vec<Switch>,
        separation: f64,
        signal_speed: f64,
    ) -> Result<Self, TimelineError> {
        check_history(&alice, "alice")?;
        check_history(&bob, "bob")?;
        if !(signal_speed.is_finite() && signal_speed > 0.0) {
            return Err(TimelineError::SignalSpeed(signal_speed));
        }
        if !(separation.is_finite() && separation >= 0.0) {
            return Err(TimelineError::Separation(separation));
        }
        Ok(Self {
            alice,
            bob,
            separation,
            signal_speed,
        })
    }

    /// Both magnets fixed forever.
    pub fn fixed(theta_a: f64, theta_b: f64, separation: f64, signal_speed: f64) -> Result<Self, TimelineError> {
        Self::new(
            vec![Switch::new(f64::NEG_INFINITY, theta_a)],
            vec![Switch::new(f64::NEG_INFINITY, theta_b)],
            separation,
            signal_speed,
        )
    }

    pub fn history(&self, side: Side) -> &[Switch] {
        match side {
            Side::Left => &self.alice,
            Side::Right => &self.bob,
        }
    }

    /// Time for a setting change to reach the other side.
    pub fn delay(&self) -> f64 {
        self.separation / self.signal_speed
    }

    /// Orientation of `side`'s magnet at time `t`.
    pub fn angle_at(&self, side: Side, t: f64) -> Result<f64, TimelineError> {
        let history = self.history(side);
        let idx = history.partition_point(|s| s.time <= t);
        if idx == 0 {
            return Err(TimelineError::BeforeFirstEntry { side: side.name(), t });
        }
        Ok(history[idx - 1].angle)
    }

    /// Whether `side`'s magnet changed orientation at any instant in
    /// `[from, to]`.
    pub fn switched_during(&self, side: Side, from: f64, to: f64) -> bool {
        let history = self.history(side);
        let start = history.partition_point(|s| s.time < from).max(1);
        let end = history.partition_point(|s| s.time <= to);
        (start..end).any(|i| history[i].angle != history[i - 1].angle)
    }
}

fn check_history(history: &[Switch], side: &'static str) -> Result<(), TimelineError> {
    let first = history.first().ok_or(TimelineError::Empty { side })?;
    if first.time > 0.0 || first.time.is_nan() {
        return Err(TimelineError::NoInitialSetting { side });
    }
    for (index, w) in history.windows(2).enumerate() {
        if !(w[1].time > w[0].time) {
            return Err(TimelineError::NotIncreasing { side, index: index + 1 });
        }
    }
    Ok(())
}

/// The setting pair `side` uses at `t_eval`: its own magnet as it is, the
/// partner's magnet as it is (`Nonlocal`) or as it was `delay()` ago (`Local`).
pub fn effective_settings(
    side: Side,
    t_eval: f64,
    timeline: &SettingTimeline,
    mode: InformationMode,
) -> Result<SettingPair, TimelineError> {
    let own = timeline.angle_at(side, t_eval)?;
    let partner_time = match mode {
        InformationMode::Nonlocal => t_eval,
        InformationMode::Local => t_eval - timeline.delay(),
    };
    let partner = timeline.angle_at(side.partner(), partner_time)?;
    Ok(match side {
        Side::Left => SettingPair::new(own, partner),
        Side::Right => SettingPair::new(partner, own),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn switching(delay_distance: f64, speed: f64) -> SettingTimeline {
        SettingTimeline::new(
            vec![Switch::new(-1.0, 0.0), Switch::new(0.0, 0.5)],
            vec![Switch::new(-1.0, 1.0), Switch::new(0.0, 2.0)],
            delay_distance,
            speed,
        )
        .unwrap()
    }

    #[test]
    fn static_timelines_agree_across_modes() {
        let tl = SettingTimeline::fixed(0.3, 1.2, 120.0, 1.0).unwrap();
        for t in [-5.0, 0.0, 1e-3, 10.0] {
            for side in [Side::Left, Side::Right] {
                let local = effective_settings(side, t, &tl, InformationMode::Local).unwrap();
                let nonlocal = effective_settings(side, t, &tl, InformationMode::Nonlocal).unwrap();
                assert_eq!(local, nonlocal);
            }
        }
    }

    #[test]
    fn local_sees_pre_switch_partner() {
        // delay 0.5 s, flight 0.1 s: the partner's launch-time switch is invisible.
        let tl = switching(50.0, 100.0);
        let t = 0.1;
        let alice = effective_settings(Side::Left, t, &tl, InformationMode::Local).unwrap();
        assert_eq!((alice.theta_a(), alice.theta_b()), (0.5, 1.0));
        let bob = effective_settings(Side::Right, t, &tl, InformationMode::Local).unwrap();
        assert_eq!((bob.theta_a(), bob.theta_b()), (0.0, 2.0));

        let alice = effective_settings(Side::Left, t, &tl, InformationMode::Nonlocal).unwrap();
        assert_eq!((alice.theta_a(), alice.theta_b()), (0.5, 2.0));
    }

    #[test]
    fn nonlocal_equals_local_with_zero_separation() {
        let tl = switching(0.0, 3.0);
        for t in [-0.5, 0.0, 0.2] {
            for side in [Side::Left, Side::Right] {
                assert_eq!(
                    effective_settings(side, t, &tl, InformationMode::Local).unwrap(),
                    effective_settings(side, t, &tl, InformationMode::Nonlocal).unwrap()
                );
            }
        }
    }

    #[test]
    fn lookup_before_history_is_an_error() {
        let tl = switching(500.0, 100.0);
        assert!(matches!(
            effective_settings(Side::Left, 0.1, &tl, InformationMode::Local),
            Err(TimelineError::BeforeFirstEntry { side: "bob", .. })
        ));
    }

    #[test]
    fn malformed_histories_rejected() {
        assert!(SettingTimeline::new(vec![], vec![Switch::new(0.0, 0.0)], 1.0, 1.0).is_err());
        assert!(SettingTimeline::new(
            vec![Switch::new(1.0, 0.0)],
            vec![Switch::new(0.0, 0.0)],
            1.0,
            1.0
        )
        .is_err());
        assert!(matches!(
            SettingTimeline::new(
                vec![Switch::new(0.0, 0.0), Switch::new(0.0, 1.0)],
                vec![Switch::new(0.0, 0.0)],
                1.0,
                1.0
            ),
            Err(TimelineError::NotIncreasing { index: 1, .. })
        ));
        assert!(SettingTimeline::fixed(0.0, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn switch_detection() {
        let tl = SettingTimeline::new(
            vec![
                Switch::new(-1.0, 0.0),
                Switch::new(1.0, 0.0),
                Switch::new(2.0, 1.0),
            ],
            vec![Switch::new(-1.0, 0.0)],
            1.0,
            1.0,
        )
        .unwrap();
        // Re-selecting the same angle is not a switch.
        assert!(!tl.switched_during(Side::Left, 0.5, 1.5));
        assert!(tl.switched_during(Side::Left, 2.0, 2.5));
        assert!(!tl.switched_during(Side::Left, 2.1, 5.0));
        assert!(!tl.switched_during(Side::Right, -10.0, 10.0));
    }
}
