//! Two masses on a spring, with the partner position taken instantaneously,
//! retarded by `tau`, or expanded to first order in `tau`.
//!
//! ```text
//! instantaneous: m1 x1'' = -k (x1 - x2)              m2 x2'' = k (x1 - x2)
//! retarded:      m1 x1'' = -k (x1 - x2(t - tau))      m2 x2'' = k (x1(t - tau) - x2)
//! expanded:      m1 x1'' = -k (x1 - x2) - tau k x2'   m2 x2'' = k (x1 - x2) - tau k x1'
//! center:        m1 x1'' = -k (M / m2) (x1 - X_cm(t)) and symmetrically for x2
//! ```
//!
//! `X_cm(t) = X_cm(0) + V_cm t` is fixed by momentum conservation.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::HookeError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HookeParams {
    /// g
    pub m1: f64,
    pub m2: f64,
    /// dyn/cm
    pub k_spring: f64,
    /// Retardation delay, s.
    pub tau: f64,
    pub x1_0: f64,
    pub x2_0: f64,
    pub v1_0: f64,
    pub v2_0: f64,
}

impl Default for HookeParams {
    fn default() -> Self {
        Self {
            m1: 1.0,
            m2: 1.0,
            k_spring: 1.0,
            tau: 0.0,
            x1_0: -1.1,
            x2_0: 1.1,
            v1_0: 0.0,
            v2_0: 0.0,
        }
    }
}

impl HookeParams {
    pub fn validate(&self) -> Result<(), HookeError> {
        for (name, v) in [("m1", self.m1), ("m2", self.m2), ("k_spring", self.k_spring)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(HookeError::Params(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return Err(HookeError::Params(format!("tau must be non-negative, got {}", self.tau)));
        }
        for (name, v) in [
            ("x1_0", self.x1_0),
            ("x2_0", self.x2_0),
            ("v1_0", self.v1_0),
            ("v2_0", self.v2_0),
        ] {
            if !v.is_finite() {
                return Err(HookeError::Params(format!("{name} must be finite")));
            }
        }
        Ok(())
    }

    /// Angular frequency of the relative coordinate, `sqrt(k / reduced mass)`.
    pub fn omega(&self) -> f64 {
        (self.k_spring * (self.m1 + self.m2) / (self.m1 * self.m2)).sqrt()
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.omega()
    }

    /// Delay from a sound speed and the initial separation, `|x2 - x1| / c_s`.
    pub fn with_sound_speed(mut self, sound_speed: f64) -> Self {
        self.tau = (self.x2_0 - self.x1_0).abs() / sound_speed;
        self
    }

    pub fn total_mass(&self) -> f64 {
        self.m1 + self.m2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpringMode {
    Instantaneous,
    Retarded,
    Expanded,
    /// Instantaneous dynamics written as each mass bound to the center of mass.
    CenterOfMass,
}

impl SpringMode {
    pub const ALL: [SpringMode; 4] = [
        SpringMode::Instantaneous,
        SpringMode::Retarded,
        SpringMode::Expanded,
        SpringMode::CenterOfMass,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SpringMode::Instantaneous => "instantaneous",
            SpringMode::Retarded => "retarded",
            SpringMode::Expanded => "expanded",
            SpringMode::CenterOfMass => "center_of_mass",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpringState {
    pub t: f64,
    pub x1: f64,
    pub x2: f64,
    pub v1: f64,
    pub v2: f64,
}

impl SpringState {
    pub fn momentum(&self, p: &HookeParams) -> f64 {
        p.m1 * self.v1 + p.m2 * self.v2
    }

    pub fn energy(&self, p: &HookeParams) -> f64 {
        let stretch = self.x1 - self.x2;
        0.5 * p.m1 * self.v1 * self.v1 + 0.5 * p.m2 * self.v2 * self.v2 + 0.5 * p.k_spring * stretch * stretch
    }
}

/// Past positions for the delayed force, linearly interpolated.
struct History {
    samples: VecDeque<(f64, f64, f64)>,
    /// Constant positions for `t <= 0`.
    before: (f64, f64),
}

impl History {
    fn new(x1: f64, x2: f64) -> Self {
        let mut samples = VecDeque::new();
        samples.push_back((0.0, x1, x2));
        Self {
            samples,
            before: (x1, x2),
        }
    }

    fn push(&mut self, t: f64, x1: f64, x2: f64, keep_after: f64) {
        self.samples.push_back((t, x1, x2));
        while self.samples.len() > 2 && self.samples[1].0 <= keep_after {
            self.samples.pop_front();
        }
    }

    fn at(&self, t: f64) -> (f64, f64) {
        if t <= 0.0 {
            return self.before;
        }
        let idx = self.samples.partition_point(|s| s.0 <= t);
        if idx == 0 {
            let s = self.samples[0];
            return (s.1, s.2);
        }
        if idx == self.samples.len() {
            let s = self.samples[idx - 1];
            return (s.1, s.2);
        }
        let (t0, a0, b0) = self.samples[idx - 1];
        let (t1, a1, b1) = self.samples[idx];
        let f = (t - t0) / (t1 - t0);
        (a0 + f * (a1 - a0), b0 + f * (b1 - b0))
    }
}

type Deriv = [f64; 4];

/// Integrates `[0, t_end]` with fixed step `dt`; returns every state.
pub fn simulate_spring(
    params: &HookeParams,
    mode: SpringMode,
    t_end: f64,
    dt: f64,
) -> Result<Vec<SpringState>, HookeError> {
    params.validate()?;
    if !(dt.is_finite() && dt > 0.0 && t_end.is_finite() && t_end > 0.0) {
        return Err(HookeError::Params(format!("need dt > 0 and T > 0, got dt = {dt}, T = {t_end}")));
    }
    let delayed = mode == SpringMode::Retarded && params.tau > 0.0;
    if delayed && dt > params.tau / 4.0 {
        return Err(HookeError::DelayUnderResolved { dt, tau: params.tau });
    }

    let p = *params;
    let steps = (t_end / dt).round().max(1.0) as usize;
    let h = t_end / steps as f64;
    let mut y = [p.x1_0, p.x2_0, p.v1_0, p.v2_0];
    let mass = p.total_mass();
    let x_cm0 = (p.m1 * p.x1_0 + p.m2 * p.x2_0) / mass;
    let v_cm = (p.m1 * p.v1_0 + p.m2 * p.v2_0) / mass;
    let mut history = History::new(p.x1_0, p.x2_0);

    let rhs = |t: f64, y: &Deriv, history: &History| -> Deriv {
        let [x1, x2, v1, v2] = *y;
        let k = p.k_spring;
        let (a1, a2) = match mode {
            SpringMode::Instantaneous => (-k * (x1 - x2) / p.m1, k * (x1 - x2) / p.m2),
            SpringMode::Retarded if !delayed => (-k * (x1 - x2) / p.m1, k * (x1 - x2) / p.m2),
            SpringMode::Retarded => {
                let (x1_ret, x2_ret) = history.at(t - p.tau);
                (-k * (x1 - x2_ret) / p.m1, k * (x1_ret - x2) / p.m2)
            }
            SpringMode::Expanded => (
                (-k * (x1 - x2) - p.tau * k * v2) / p.m1,
                (k * (x1 - x2) - p.tau * k * v1) / p.m2,
            ),
            SpringMode::CenterOfMass => {
                let x_cm = x_cm0 + v_cm * t;
                (
                    -k * (mass / p.m2) * (x1 - x_cm) / p.m1,
                    -k * (mass / p.m1) * (x2 - x_cm) / p.m2,
                )
            }
        };
        [v1, v2, a1, a2]
    };

    let mut out = Vec::with_capacity(steps + 1);
    out.push(SpringState {
        t: 0.0,
        x1: y[0],
        x2: y[1],
        v1: y[2],
        v2: y[3],
    });
    for step in 0..steps {
        let t = step as f64 * h;
        let k1 = rhs(t, &y, &history);
        let k2 = rhs(t + 0.5 * h, &axpy(&y, 0.5 * h, &k1), &history);
        let k3 = rhs(t + 0.5 * h, &axpy(&y, 0.5 * h, &k2), &history);
        let k4 = rhs(t + h, &axpy(&y, h, &k3), &history);
        for i in 0..4 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t1 = (step + 1) as f64 * h;
        if delayed {
            history.push(t1, y[0], y[1], t1 - p.tau - h);
        }
        out.push(SpringState {
            t: t1,
            x1: y[0],
            x2: y[1],
            v1: y[2],
            v2: y[3],
        });
    }
    Ok(out)
}

fn axpy(y: &Deriv, h: f64, k: &Deriv) -> Deriv {
    std::array::from_fn(|i| y[i] + h * k[i])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_mode_frequency() {
        // Antisymmetric start: relative coordinate is cos(omega t) scaled.
        let p = HookeParams::default();
        let omega = (2.0 * p.k_spring / p.m1).sqrt();
        assert!((p.omega() - omega).abs() < 1e-15);
        let period = p.period();
        let traj = simulate_spring(&p, SpringMode::Instantaneous, period, period / 2000.0).unwrap();
        let r0 = p.x1_0 - p.x2_0;
        for s in traj.iter().step_by(100) {
            let expect = r0 * (omega * s.t).cos();
            assert!(((s.x1 - s.x2) - expect).abs() < 1e-9, "t={} {}", s.t, s.x1 - s.x2);
        }
    }

    #[test]
    fn delay_must_be_resolved() {
        let p = HookeParams {
            tau: 0.01,
            ..Default::default()
        };
        assert!(matches!(
            simulate_spring(&p, SpringMode::Retarded, 1.0, 0.005),
            Err(HookeError::DelayUnderResolved { .. })
        ));
        assert!(simulate_spring(&p, SpringMode::Expanded, 1.0, 0.005).is_ok());
        assert!(simulate_spring(&p, SpringMode::Retarded, 1.0, 0.0025).is_ok());
    }

    #[test]
    fn zero_delay_retarded_matches_instantaneous_bitwise() {
        let p = HookeParams {
            m2: 2.5,
            v1_0: 0.3,
            ..Default::default()
        };
        let a = simulate_spring(&p, SpringMode::Instantaneous, 10.0, 0.01).unwrap();
        let b = simulate_spring(&p, SpringMode::Retarded, 10.0, 0.01).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn history_interpolates_linearly() {
        let mut h = History::new(0.0, 0.0);
        h.push(1.0, 2.0, -2.0, -1.0);
        h.push(2.0, 4.0, -4.0, -1.0);
        assert_eq!(h.at(1.5), (3.0, -3.0));
        assert_eq!(h.at(-0.5), (0.0, 0.0));
        assert_eq!(h.at(0.25), (0.5, -0.5));
    }

    #[test]
    fn sound_speed_sets_tau_from_initial_separation() {
        let p = HookeParams::default().with_sound_speed(110.0);
        assert!((p.tau - 0.02).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_params() {
        let p = HookeParams {
            m1: 0.0,
            ..Default::default()
        };
        assert!(simulate_spring(&p, SpringMode::Instantaneous, 1.0, 0.01).is_err());
    }
}
