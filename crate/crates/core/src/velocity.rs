//! Two-particle guidance law for a spin singlet in a pair of Stern-Gerlach
//! magnets.
//!
//! Each particle's velocity is a drift term from packet spreading plus a
//! spin term weighted by a quotient of four exponentials,
//!
//! ```text
//! ratio_L = (s^2 sinh u + c^2 sinh v) / (s^2 cosh u + c^2 cosh v)
//! ratio_R = (s^2 sinh u - c^2 sinh v) / (s^2 cosh u + c^2 cosh v)
//! u = w (z_L + z_R) / 2,  v = w (z_L - z_R) / 2,  w = beta t^2 / (1 + k^2 t^2)
//! ```
//!
//! With silver-atom parameters `w |z|` reaches 1e6 and beyond inside the
//! magnet, so the quotient is evaluated in a scaled form that never forms
//! `exp` of a large argument.

use serde::{Deserialize, Serialize};

use crate::error::VelocityError;
use crate::physconst::DerivedCoefficients;

/// Past this exponent magnitude the direct sinh/cosh form is abandoned for
/// the log-scaled one. `cosh(700)` is about 5e303.
const DIRECT_LIMIT: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    /// Alice's magnet.
    Left,
    /// Bob's magnet.
    Right,
}

impl Side {
    pub fn partner(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "alice",
            Side::Right => "bob",
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Angles {
    theta_a: f64,
    theta_b: f64,
}

/// Magnet orientations of both sides in the lab frame, with the spin weights
/// `s^2 = sin^2((theta_A - theta_B)/2)` and `c^2 = cos^2(...)` cached.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(from = "Angles", into = "Angles")]
pub struct SettingPair {
    theta_a: f64,
    theta_b: f64,
    weights: SpinWeights,
}

impl From<Angles> for SettingPair {
    fn from(a: Angles) -> Self {
        SettingPair::new(a.theta_a, a.theta_b)
    }
}

impl From<SettingPair> for Angles {
    fn from(p: SettingPair) -> Self {
        Angles {
            theta_a: p.theta_a,
            theta_b: p.theta_b,
        }
    }
}

impl PartialEq for SettingPair {
    fn eq(&self, other: &Self) -> bool {
        self.theta_a == other.theta_a && self.theta_b == other.theta_b
    }
}

impl SettingPair {
    pub fn new(theta_a: f64, theta_b: f64) -> Self {
        let half = 0.5 * (theta_a - theta_b);
        let (s, c) = half.sin_cos();
        Self {
            theta_a,
            theta_b,
            weights: SpinWeights::from_squares(s * s, c * c),
        }
    }

    pub fn theta_a(&self) -> f64 {
        self.theta_a
    }

    pub fn theta_b(&self) -> f64 {
        self.theta_b
    }

    pub fn delta(&self) -> f64 {
        self.theta_a - self.theta_b
    }

    /// `cos((theta_A - theta_B)/2)`
    pub fn c(&self) -> f64 {
        (0.5 * self.delta()).cos()
    }

    /// `sin((theta_A - theta_B)/2)`
    pub fn s(&self) -> f64 {
        (0.5 * self.delta()).sin()
    }

    pub fn weights(&self) -> SpinWeights {
        self.weights
    }

    /// True when both settings give the same velocity field.
    pub fn same_guidance(&self, other: &SettingPair) -> bool {
        self.weights.s2 == other.weights.s2 && self.weights.c2 == other.weights.c2
    }
}

/// `(s^2, c^2)` plus their logarithms for the scaled evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinWeights {
    pub s2: f64,
    pub c2: f64,
    ln_s2: f64,
    ln_c2: f64,
}

impl SpinWeights {
    fn from_squares(s2: f64, c2: f64) -> Self {
        Self {
            s2,
            c2,
            ln_s2: s2.ln(),
            ln_c2: c2.ln(),
        }
    }

    pub fn new(s2: f64, c2: f64) -> Result<Self, VelocityError> {
        if s2.is_nan() || c2.is_nan() {
            return Err(VelocityError::NaN { what: "spin weights" });
        }
        let ok = (0.0..=1.0).contains(&s2) && (0.0..=1.0).contains(&c2) && s2 + c2 > 0.0;
        if !ok {
            return Err(VelocityError::BadWeights { s2, c2 });
        }
        Ok(Self::from_squares(s2, c2))
    }
}

/// Positions of both particles in their own magnet-aligned frames at time
/// `t` after magnet entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryState {
    pub z_l: f64,
    pub z_r: f64,
    pub t: f64,
}

impl TrajectoryState {
    pub fn new(z_l: f64, z_r: f64, t: f64) -> Self {
        Self { z_l, z_r, t }
    }
}

/// `w = beta t^2 / (1 + k^2 t^2)`, in 1/cm.
pub fn exponent_scale(t: f64, coeff: &DerivedCoefficients) -> f64 {
    let kt2 = coeff.k * coeff.k * t * t;
    coeff.beta * t * t / (1.0 + kt2)
}

/// The exponential quotient for one side, bounded in `[-1, 1]`.
pub fn stable_ratio(u: f64, v: f64, s2: f64, c2: f64, side: Side) -> Result<f64, VelocityError> {
    if u.is_nan() || v.is_nan() {
        return Err(VelocityError::NaN { what: "exponent" });
    }
    let w = SpinWeights::new(s2, c2)?;
    let (l, r) = ratios(u, v, &w);
    Ok(match side {
        Side::Left => l,
        Side::Right => r,
    })
}

/// Both quotients at once; they share a denominator.
#[inline]
pub(crate) fn ratios(u: f64, v: f64, w: &SpinWeights) -> (f64, f64) {
    let u_active = w.s2 > 0.0;
    let v_active = w.c2 > 0.0;
    let big = (u_active && u.abs() > DIRECT_LIMIT) || (v_active && v.abs() > DIRECT_LIMIT);

    let (su, cu, sv, cv) = if !big {
        let (su, cu) = if u_active {
            (w.s2 * u.sinh(), w.s2 * u.cosh())
        } else {
            (0.0, 0.0)
        };
        let (sv, cv) = if v_active {
            (w.c2 * v.sinh(), w.c2 * v.cosh())
        } else {
            (0.0, 0.0)
        };
        (su, cu, sv, cv)
    } else {
        // Divide numerator and denominator by exp(m), m the largest
        // weighted exponent. Zero weights carry ln = -inf and drop out.
        let lu = w.ln_s2 + u.abs();
        let lv = w.ln_c2 + v.abs();
        let m = lu.max(lv);
        let (eu_hi, eu_lo) = scaled_pair(w.ln_s2, u.abs(), m);
        let (ev_hi, ev_lo) = scaled_pair(w.ln_c2, v.abs(), m);
        (
            (eu_hi - eu_lo).copysign(u),
            eu_hi + eu_lo,
            (ev_hi - ev_lo).copysign(v),
            ev_hi + ev_lo,
        )
    };

    let den = cu + cv;
    let l = ((su + sv) / den).clamp(-1.0, 1.0);
    let r = ((su - sv) / den).clamp(-1.0, 1.0);
    (l, r)
}

/// `(exp(ln_w + x - m), exp(ln_w - x - m))` with `x >= 0`.
#[inline]
fn scaled_pair(ln_w: f64, x: f64, m: f64) -> (f64, f64) {
    let hi = ln_w + x - m;
    if hi == f64::NEG_INFINITY {
        return (0.0, 0.0);
    }
    let lo = hi - 2.0 * x;
    let lo = if lo < -745.0 { 0.0 } else { lo.exp() };
    (hi.exp(), lo)
}

/// Pieces of the law that depend only on time.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TimeFactors {
    /// `k^2 t / (1 + k^2 t^2)`
    pub drift: f64,
    /// `alpha t [2 - k^2 t^2 / (1 + k^2 t^2)]`
    pub spin: f64,
    /// exponent scale `w`
    pub w: f64,
}

impl TimeFactors {
    #[inline]
    pub fn at(t: f64, coeff: &DerivedCoefficients) -> Self {
        let k2 = coeff.k * coeff.k;
        let denom = 1.0 + k2 * t * t;
        Self {
            drift: k2 * t / denom,
            spin: coeff.alpha * t * (2.0 - k2 * t * t / denom),
            w: coeff.beta * t * t / denom,
        }
    }
}

#[inline]
pub(crate) fn velocity_unchecked(
    z_l: f64,
    z_r: f64,
    f: &TimeFactors,
    weights: &SpinWeights,
) -> (f64, f64) {
    let u = 0.5 * f.w * (z_l + z_r);
    let v = 0.5 * f.w * (z_l - z_r);
    let (rl, rr) = ratios(u, v, weights);
    (f.drift * z_l + rl * f.spin, f.drift * z_r + rr * f.spin)
}

/// Velocities `(dz_L/dt, dz_R/dt)` in cm/s.
pub fn velocity_pair(
    state: &TrajectoryState,
    settings: &SettingPair,
    coeff: &DerivedCoefficients,
) -> Result<(f64, f64), VelocityError> {
    if state.t.is_nan() || state.z_l.is_nan() || state.z_r.is_nan() {
        return Err(VelocityError::NaN { what: "state" });
    }
    if state.t < 0.0 {
        return Err(VelocityError::NegativeTime(state.t));
    }
    let f = TimeFactors::at(state.t, coeff);
    Ok(velocity_unchecked(state.z_l, state.z_r, &f, &settings.weights()))
}
