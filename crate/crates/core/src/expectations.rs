//! Scenario description and the expected absorbed-molecule counts.

use std::f64::consts::PI;

use crate::channel::{cir_fraction, MediumConfig, ReceiverConfig};
use crate::error::{Error, Result};
use crate::numerics::{integrate_semi_infinite, QuadratureSpec};

/// How the tagged (desired) transmitter is placed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TaggedMode {
    /// At a fixed distance `r_d` (µm) from the receiver centre.
    Fixed { distance: f64 },
    /// The nearest transmitter of the field is the tagged one.
    Nearest,
}

/// A complete link scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkConfig {
    pub medium: MediumConfig,
    pub receiver: ReceiverConfig,
    /// Molecules released for a 1 bit.
    pub molecules: u64,
    /// Prior probability of a 1 bit, shared by every transmitter.
    pub p1: f64,
    /// Slot duration, s.
    pub slot: f64,
    /// Interferer intensity, transmitters per µm³.
    pub intensity: f64,
    pub tagged: TaggedMode,
}

impl Default for LinkConfig {
    /// D = 74.9 µm²/s, µ = 5 s⁻¹, a = 4 µm, N = 100, p1 = 0.5, Ts = 0.5 s,
    /// λ = 1e-5 µm⁻³, tagged transmitter 4 µm off the receiver surface.
    fn default() -> Self {
        LinkConfig {
            medium: MediumConfig { diffusion: 74.9, degradation: 5.0 },
            receiver: ReceiverConfig { radius: 4.0, threshold: 10 },
            molecules: 100,
            p1: 0.5,
            slot: 0.5,
            intensity: 1e-5,
            tagged: TaggedMode::Fixed { distance: 8.0 },
        }
    }
}

impl LinkConfig {
    pub fn validate(&self) -> Result<()> {
        self.medium.validate()?;
        self.receiver.validate()?;
        if !(0.0..=1.0).contains(&self.p1) {
            return Err(Error::Domain(format!("p1 must lie in [0, 1], got {}", self.p1)));
        }
        if !(self.slot > 0.0) || self.slot.is_nan() {
            return Err(Error::Domain(format!("slot duration must be positive, got {}", self.slot)));
        }
        if !(self.intensity >= 0.0 && self.intensity.is_finite()) {
            return Err(Error::Domain(format!("intensity must be >= 0, got {}", self.intensity)));
        }
        if let TaggedMode::Fixed { distance } = self.tagged {
            if !(distance >= self.receiver.radius) || !distance.is_finite() {
                return Err(Error::Domain(format!(
                    "tagged distance {distance} lies inside the receiver of radius {}",
                    self.receiver.radius
                )));
            }
        }
        Ok(())
    }

    pub fn p0(&self) -> f64 {
        1.0 - self.p1
    }

    pub fn n(&self) -> f64 {
        self.molecules as f64
    }

    /// Channel response `h_{Ts}(r)` for this scenario.
    pub fn cir(&self, r: f64) -> Result<f64> {
        cir_fraction(self.slot, r, &self.medium, self.receiver.radius)
    }

    /// `h_{Ts}(z)` for quadrature nodes, which always lie outside the
    /// receiver; an invalid node yields NaN and fails the integration.
    pub(crate) fn cir_or_nan(&self, z: f64) -> f64 {
        self.cir(z).unwrap_or(f64::NAN)
    }

    /// The tagged distance in fixed mode.
    pub fn fixed_distance(&self) -> Result<f64> {
        match self.tagged {
            TaggedMode::Fixed { distance } => Ok(distance),
            TaggedMode::Nearest => Err(Error::UnsupportedMode("fixed-distance")),
        }
    }

    /// `4πλp1`, the prefactor of every integral over the interferer field.
    pub(crate) fn field_weight(&self) -> f64 {
        4.0 * PI * self.intensity * self.p1
    }
}

/// Expected number of absorbed molecules from the tagged transmitter.
pub fn expected_signal(cfg: &LinkConfig) -> Result<f64> {
    cfg.validate()?;
    let r_d = cfg.fixed_distance()?;
    Ok(cfg.p1 * cfg.n() * cfg.cir(r_d)?)
}

/// Expected number of absorbed interference molecules,
/// `4πλ·p1·N·∫_a^∞ h_{Ts}(z)·z² dz`.
pub fn expected_interference(cfg: &LinkConfig) -> Result<f64> {
    expected_interference_with(cfg, &QuadratureSpec::default())
}

pub fn expected_interference_with(cfg: &LinkConfig, spec: &QuadratureSpec) -> Result<f64> {
    cfg.validate()?;
    let weight = cfg.field_weight() * cfg.n();
    if weight == 0.0 {
        return Ok(0.0);
    }
    let integral = integrate_semi_infinite(|z| cfg.cir_or_nan(z) * z * z, cfg.receiver.radius, spec)?;
    Ok(weight * integral)
}

/// `expected_signal + expected_interference`.
pub fn expected_total(cfg: &LinkConfig) -> Result<f64> {
    Ok(expected_signal(cfg)? + expected_interference(cfg)?)
}

/// Interference mean for an unbounded slot:
/// `4πλ·p1·N·a·(D/µ + a·√(D/µ))`. Infinite without degradation.
pub fn expected_interference_infinite_slot(cfg: &LinkConfig) -> Result<f64> {
    cfg.validate()?;
    let mu = cfg.medium.degradation;
    if mu == 0.0 {
        return Err(Error::Divergence("interference mean is infinite without degradation"));
    }
    let a = cfg.receiver.radius;
    let length = (cfg.medium.diffusion / mu).sqrt();
    Ok(cfg.field_weight() * cfg.n() * a * (length * length + a * length))
}
