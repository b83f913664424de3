//! Quantum-equilibrium initial conditions and fixed-step RK4 transport of a
//! pair through the magnets.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::IntegrateError;
use crate::physconst::DerivedCoefficients;
use crate::velocity::{velocity_unchecked, SettingPair, SpinWeights, TimeFactors, TrajectoryState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationConfig {
    /// Nominal RK4 step, s. The step actually taken is `T / round(T / dt)`
    /// so the last step lands on `T`.
    pub dt: f64,
    /// Transit time through the magnet, s.
    pub transit_time: f64,
    /// Keep every n-th state in the trajectory (0 keeps only the endpoints).
    pub record_every: usize,
}

impl IntegrationConfig {
    pub fn new(dt: f64, transit_time: f64) -> Self {
        Self {
            dt,
            transit_time,
            record_every: 0,
        }
    }

    pub fn validate(&self) -> Result<(), IntegrateError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(IntegrateError::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.transit_time.is_finite() && self.transit_time >= self.dt) {
            return Err(IntegrateError::Config(format!(
                "transit time {} must be at least dt = {}",
                self.transit_time, self.dt
            )));
        }
        if self.transit_time / self.dt < 10.0 {
            return Err(IntegrateError::Config(format!(
                "transit time {} s is less than 10 steps of {} s",
                self.transit_time, self.dt
            )));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.transit_time / self.dt).round().max(1.0) as usize
    }

    pub fn step_size(&self) -> f64 {
        self.transit_time / self.steps() as f64
    }
}

/// A Stern-Gerlach result: deflection up or down along the local field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Up,
    Down,
}

impl Outcome {
    /// Sign of the exit coordinate; an exact zero counts as up.
    pub fn from_position(z: f64) -> Self {
        if z < 0.0 {
            Outcome::Down
        } else {
            Outcome::Up
        }
    }

    pub fn value(self) -> i32 {
        match self {
            Outcome::Up => 1,
            Outcome::Down => -1,
        }
    }
}

/// One observer's computation of both trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct PairTrajectory {
    /// Integration step index and state, starting at t = 0 and ending at T.
    pub samples: Vec<(usize, TrajectoryState)>,
    pub outcome_l: Outcome,
    pub outcome_r: Outcome,
}

impl PairTrajectory {
    pub fn final_state(&self) -> TrajectoryState {
        self.samples.last().expect("trajectory has endpoints").1
    }
}

/// Alice's and Bob's views of the same pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairViews {
    pub alice: PairTrajectory,
    pub bob: PairTrajectory,
    /// True when both views came from one shared integration.
    pub shared: bool,
}

impl PairViews {
    /// Recorded outcomes: Alice reads her own particle, Bob his.
    pub fn outcomes(&self) -> (Outcome, Outcome) {
        (self.alice.outcome_l, self.bob.outcome_r)
    }
}

/// Independent zero-mean Gaussian draws of width `packet_width` for the two
/// particles, i.e. |psi|^2 sampling at magnet entry.
pub fn sample_initial<R: Rng + ?Sized>(rng: &mut R, packet_width: f64) -> (f64, f64) {
    let normal = Normal::new(0.0, packet_width).expect("packet width is positive");
    let z_l = normal.sample(rng);
    let z_r = normal.sample(rng);
    (z_l, z_r)
}

/// RK4 over `[0, T]` of both equations under a single setting pair.
pub fn integrate_system(
    init: (f64, f64),
    settings: &SettingPair,
    coeff: &DerivedCoefficients,
    cfg: &IntegrationConfig,
) -> Result<PairTrajectory, IntegrateError> {
    cfg.validate()?;
    if !(init.0.is_finite() && init.1.is_finite()) {
        return Err(IntegrateError::Diverged { step: 0, t: 0.0 });
    }
    let weights = settings.weights();
    let steps = cfg.steps();
    let h = cfg.step_size();

    let mut samples = Vec::with_capacity(steps.checked_div(cfg.record_every).unwrap_or(0) + 2);
    let (mut zl, mut zr) = init;
    samples.push((0, TrajectoryState::new(zl, zr, 0.0)));

    let mut f_start = TimeFactors::at(0.0, coeff);
    for step in 0..steps {
        let t0 = step as f64 * h;
        let t_mid = t0 + 0.5 * h;
        let t1 = (step + 1) as f64 * h;
        let f_mid = TimeFactors::at(t_mid, coeff);
        let f_end = TimeFactors::at(t1, coeff);

        (zl, zr) = rk4_step(zl, zr, h, &f_start, &f_mid, &f_end, &weights);
        f_start = f_end;

        if !(zl.is_finite() && zr.is_finite()) {
            return Err(IntegrateError::Diverged { step: step + 1, t: t1 });
        }
        let last = step + 1 == steps;
        if last || (cfg.record_every > 0 && (step + 1) % cfg.record_every == 0) {
            let t = if last { cfg.transit_time } else { t1 };
            samples.push((step + 1, TrajectoryState::new(zl, zr, t)));
        }
    }

    Ok(PairTrajectory {
        samples,
        outcome_l: Outcome::from_position(zl),
        outcome_r: Outcome::from_position(zr),
    })
}

#[inline]
fn rk4_step(
    zl: f64,
    zr: f64,
    h: f64,
    f0: &TimeFactors,
    fm: &TimeFactors,
    f1: &TimeFactors,
    w: &SpinWeights,
) -> (f64, f64) {
    let (k1l, k1r) = velocity_unchecked(zl, zr, f0, w);
    let (k2l, k2r) = velocity_unchecked(zl + 0.5 * h * k1l, zr + 0.5 * h * k1r, fm, w);
    let (k3l, k3r) = velocity_unchecked(zl + 0.5 * h * k2l, zr + 0.5 * h * k2r, fm, w);
    let (k4l, k4r) = velocity_unchecked(zl + h * k3l, zr + h * k3r, f1, w);
    (
        zl + h / 6.0 * (k1l + 2.0 * k2l + 2.0 * k3l + k4l),
        zr + h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r),
    )
}

/// Transports one pair. Alice integrates both equations with `settings_l`
/// (her information set), Bob with `settings_r`; when the two give the same
/// guidance a single integration serves both.
pub fn integrate_pair(
    init: (f64, f64),
    settings_l: &SettingPair,
    settings_r: &SettingPair,
    coeff: &DerivedCoefficients,
    cfg: &IntegrationConfig,
) -> Result<PairViews, IntegrateError> {
    let alice = integrate_system(init, settings_l, coeff, cfg)?;
    if settings_l.same_guidance(settings_r) {
        return Ok(PairViews {
            bob: alice.clone(),
            alice,
            shared: true,
        });
    }
    let bob = integrate_system(init, settings_r, coeff, cfg)?;
    Ok(PairViews {
        alice,
        bob,
        shared: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physconst::{derive_coefficients, RawPhysicalInputs};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn config_validation() {
        assert!(IntegrationConfig::new(1e-6, 3e-3).validate().is_ok());
        assert!(IntegrationConfig::new(0.0, 3e-3).validate().is_err());
        assert!(IntegrationConfig::new(1e-3, 3e-3).validate().is_err());
        let cfg = IntegrationConfig::new(1e-6, 3e-3);
        assert_eq!(cfg.steps(), 3000);
    }

    #[test]
    fn gaussian_sampling_contract() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let width = 1e-3;
        let draws: Vec<(f64, f64)> = (0..n).map(|_| sample_initial(&mut rng, width)).collect();
        let nf = n as f64;
        let mean_l = draws.iter().map(|d| d.0).sum::<f64>() / nf;
        let mean_r = draws.iter().map(|d| d.1).sum::<f64>() / nf;
        let std_l = (draws.iter().map(|d| (d.0 - mean_l).powi(2)).sum::<f64>() / nf).sqrt();
        let std_r = (draws.iter().map(|d| (d.1 - mean_r).powi(2)).sum::<f64>() / nf).sqrt();
        assert!(mean_l.abs() < 4.0 * width / nf.sqrt());
        assert!(mean_r.abs() < 4.0 * width / nf.sqrt());
        assert!((std_l / width - 1.0).abs() < 0.02);
        assert!((std_r / width - 1.0).abs() < 0.02);
        let cov = draws.iter().map(|d| (d.0 - mean_l) * (d.1 - mean_r)).sum::<f64>() / nf;
        assert!((cov / (std_l * std_r)).abs() < 4.0 / nf.sqrt());
    }

    #[test]
    fn sampling_is_deterministic() {
        let a: Vec<_> = {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            (0..10).map(|_| sample_initial(&mut rng, 1e-3)).collect()
        };
        let b: Vec<_> = {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            (0..10).map(|_| sample_initial(&mut rng, 1e-3)).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn recording_keeps_endpoints_and_stride() {
        let coeff = derive_coefficients(&RawPhysicalInputs::default()).unwrap();
        let mut cfg = IntegrationConfig::new(1e-5, 3e-3);
        cfg.record_every = 50;
        let traj = integrate_system((1e-4, -2e-4), &SettingPair::new(0.0, 0.4), &coeff, &cfg).unwrap();
        assert_eq!(traj.samples.first().unwrap().1.t, 0.0);
        assert_eq!(traj.final_state().t, 3e-3);
        assert_eq!(traj.samples.len(), 300 / 50 + 1);
        assert!(traj.samples.windows(2).all(|w| w[1].1.t > w[0].1.t));
    }

    #[test]
    fn shared_integration_when_guidance_matches() {
        let coeff = derive_coefficients(&RawPhysicalInputs::default()).unwrap();
        let cfg = IntegrationConfig::new(1e-5, 3e-3);
        let views = integrate_pair(
            (2e-4, 1e-4),
            &SettingPair::new(0.0, 1.0),
            &SettingPair::new(1.0, 0.0),
            &coeff,
            &cfg,
        )
        .unwrap();
        assert!(views.shared);
        let views = integrate_pair(
            (2e-4, 1e-4),
            &SettingPair::new(0.0, 1.0),
            &SettingPair::new(0.0, 0.5),
            &coeff,
            &cfg,
        )
        .unwrap();
        assert!(!views.shared);
    }

    #[test]
    fn exact_zero_counts_as_up() {
        assert_eq!(Outcome::from_position(0.0), Outcome::Up);
        assert_eq!(Outcome::from_position(-0.0), Outcome::Up);
        assert_eq!(Outcome::from_position(-1e-300), Outcome::Down);
    }
}
