//! Point transmitter → fully-absorbing sphere diffusion channel with
//! first-order degradation of the information molecules.
//!
//! Distances are in µm, times in s, the diffusion coefficient in µm²/s.

use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};
use crate::numerics::exp_times_erfc;

/// Diffusion coefficient and degradation rate of the carrier molecules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumConfig {
    /// Diffusion coefficient, µm²/s.
    pub diffusion: f64,
    /// Degradation rate constant, 1/s. Zero means the molecules never degrade.
    pub degradation: f64,
}

impl MediumConfig {
    pub fn new(diffusion: f64, degradation: f64) -> Result<Self> {
        let medium = MediumConfig { diffusion, degradation };
        medium.validate()?;
        Ok(medium)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.diffusion > 0.0 && self.diffusion.is_finite()) {
            return Err(Error::Domain(format!("diffusion coefficient must be positive, got {}", self.diffusion)));
        }
        if !(self.degradation >= 0.0 && self.degradation.is_finite()) {
            return Err(Error::Domain(format!("degradation rate must be >= 0, got {}", self.degradation)));
        }
        Ok(())
    }
}

/// Receiver radius and decision threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceiverConfig {
    /// Radius of the absorbing sphere, µm.
    pub radius: f64,
    /// Decide bit 1 iff the absorbed count reaches this value.
    pub threshold: u32,
}

impl ReceiverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::Domain(format!("receiver radius must be positive, got {}", self.radius)));
        }
        if self.threshold < 1 {
            return Err(Error::Domain("decision threshold must be >= 1".into()));
        }
        Ok(())
    }
}

/// Degradation rate from a half-life; an infinite half-life gives rate 0.
pub fn half_life_to_rate(half_life: f64) -> Result<f64> {
    if half_life == f64::INFINITY {
        return Ok(0.0);
    }
    if !(half_life > 0.0) || half_life.is_nan() {
        return Err(Error::Domain(format!("half-life must be positive, got {half_life}")));
    }
    Ok(LN_2 / half_life)
}

fn check_distance(r: f64, a: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain(format!("receiver radius must be positive, got {a}")));
    }
    if !(r >= a) || !r.is_finite() {
        return Err(Error::Domain(format!("transmitter distance {r} lies inside the receiver of radius {a}")));
    }
    Ok(())
}

/// Rate at which molecules released at distance `r` hit the receiver surface
/// at time `tau` (ignoring degradation).
pub fn hitting_rate(tau: f64, r: f64, medium: &MediumConfig, a: f64) -> Result<f64> {
    check_distance(r, a)?;
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("time must be positive, got {tau}")));
    }
    let gap = r - a;
    if gap == 0.0 || tau.is_infinite() {
        return Ok(0.0);
    }
    let d = medium.diffusion;
    // log form keeps tau^{-3/2} from overflowing as tau -> 0
    let log_rate = (a / r * gap / (4.0 * PI * d).sqrt()).ln() - 1.5 * tau.ln() - gap * gap / (4.0 * d * tau);
    Ok(log_rate.exp())
}

/// Fraction of molecules released at distance `r` that are absorbed,
/// undegraded, within time `t`.
///
/// With `u = (r−a)/√(4Dt)` and `v = √(µt)` this is
/// `(a/2r)·[e^{−2uv}·erfc(u−v) + e^{2uv}·erfc(u+v)]`, evaluated through
/// [`exp_times_erfc`] so neither exponential is formed on its own.
pub fn cir_fraction(t: f64, r: f64, medium: &MediumConfig, a: f64) -> Result<f64> {
    check_distance(r, a)?;
    if !(t > 0.0) {
        return Err(Error::Domain(format!("time must be positive, got {t}")));
    }
    if t.is_infinite() {
        return cir_fraction_infinite_time(r, medium, a);
    }
    if r == a {
        return Ok(1.0);
    }
    let u = (r - a) / (4.0 * medium.diffusion * t).sqrt();
    let ratio = a / r;
    if medium.degradation == 0.0 {
        return Ok(ratio * libm::erfc(u));
    }
    let v = (medium.degradation * t).sqrt();
    let cross = 2.0 * u * v;
    let h = 0.5 * ratio * (exp_times_erfc(-cross, u - v) + exp_times_erfc(cross, u + v));
    Ok(h.min(ratio))
}

/// Limit of [`cir_fraction`] as `t → ∞`: `(a/r)·exp(−√(µ/D)·(r−a))`.
pub fn cir_fraction_infinite_time(r: f64, medium: &MediumConfig, a: f64) -> Result<f64> {
    check_distance(r, a)?;
    let k = (medium.degradation / medium.diffusion).sqrt();
    Ok(a / r * (-k * (r - a)).exp())
}
