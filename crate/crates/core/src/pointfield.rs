//! Marked Poisson field of interfering transmitters around the receiver.
//!
//! The channel only depends on the distance to the receiver centre, so a
//! point is stored as its radius plus its transmit bit.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};

/// Simulation support of the interferer field: the shell `(r_min, r_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldConfig {
    /// Transmitters per µm³.
    pub intensity: f64,
    /// Inner radius, normally the receiver radius.
    pub r_min: f64,
    /// Truncation radius.
    pub r_max: f64,
}

impl FieldConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.intensity >= 0.0 && self.intensity.is_finite()) {
            return Err(Error::Domain(format!("intensity must be >= 0, got {}", self.intensity)));
        }
        if !(self.r_min > 0.0 && self.r_max > self.r_min && self.r_max.is_finite()) {
            return Err(Error::Domain(format!(
                "field shell requires 0 < r_min < r_max, got ({}, {}]",
                self.r_min, self.r_max
            )));
        }
        Ok(())
    }

    fn shell_volume(&self) -> f64 {
        4.0 / 3.0 * PI * (self.r_max.powi(3) - self.r_min.powi(3))
    }

    /// Mean number of transmitters in the shell.
    pub fn mean_count(&self) -> f64 {
        self.intensity * self.shell_volume()
    }
}

/// One interfering transmitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkedPoint {
    /// Distance from the receiver centre, µm.
    pub r: f64,
    /// Transmit bit in the current slot.
    pub bit: bool,
}

fn check_probability(p1: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p1) {
        return Err(Error::Domain(format!("bit probability must lie in [0, 1], got {p1}")));
    }
    Ok(())
}

/// Draws one realization of the marked field.
pub fn sample_field<R: Rng + ?Sized>(cfg: &FieldConfig, p1: f64, rng: &mut R) -> Result<Vec<MarkedPoint>> {
    let mut points = Vec::new();
    sample_field_into(cfg, p1, rng, &mut points)?;
    Ok(points)
}

/// As [`sample_field`], reusing `points` as the output buffer.
pub fn sample_field_into<R: Rng + ?Sized>(
    cfg: &FieldConfig,
    p1: f64,
    rng: &mut R,
    points: &mut Vec<MarkedPoint>,
) -> Result<()> {
    cfg.validate()?;
    check_probability(p1)?;
    points.clear();
    let mean = cfg.mean_count();
    if mean == 0.0 {
        return Ok(());
    }
    let count = Poisson::new(mean).map_err(|e| Error::Domain(format!("point count: {e}")))?.sample(rng) as usize;
    let inner = cfg.r_min.powi(3);
    let span = cfg.r_max.powi(3) - inner;
    points.reserve(count);
    for _ in 0..count {
        // u in (0, 1] keeps r strictly outside the inner sphere
        let u = 1.0 - rng.random::<f64>();
        let r = (inner + u * span).cbrt().min(cfg.r_max);
        let bit = rng.random_bool(p1);
        points.push(MarkedPoint { r, bit });
    }
    Ok(())
}

fn check_nearest(lambda: f64, a: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("intensity must be positive, got {lambda}")));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Domain(format!("receiver radius must be positive, got {a}")));
    }
    Ok(())
}

/// Density of the distance to the nearest transmitter of a field with
/// intensity `lambda` outside the ball of radius `a`.
pub fn nearest_distance_pdf(r: f64, lambda: f64, a: f64) -> Result<f64> {
    check_nearest(lambda, a)?;
    if !(r >= a) {
        return Err(Error::Domain(format!("distance {r} lies inside the receiver of radius {a}")));
    }
    let shell = 4.0 / 3.0 * PI * lambda * (r.powi(3) - a.powi(3));
    Ok(4.0 * PI * lambda * r * r * (-shell).exp())
}

/// Distribution function matching [`nearest_distance_pdf`].
pub fn nearest_distance_cdf(r: f64, lambda: f64, a: f64) -> Result<f64> {
    check_nearest(lambda, a)?;
    if r <= a {
        return Ok(0.0);
    }
    let shell = 4.0 / 3.0 * PI * lambda * (r.powi(3) - a.powi(3));
    Ok(-(-shell).exp_m1())
}

/// Inverse of [`nearest_distance_cdf`] at `u ∈ [0, 1)`.
pub fn nearest_distance_quantile(u: f64, lambda: f64, a: f64) -> Result<f64> {
    check_nearest(lambda, a)?;
    if !(0.0..1.0).contains(&u) {
        return Err(Error::Domain(format!("quantile level must lie in [0, 1), got {u}")));
    }
    Ok((a.powi(3) - 3.0 * (-u).ln_1p() / (4.0 * PI * lambda)).cbrt())
}

/// Draws the nearest-transmitter distance by inverse transform.
pub fn sample_nearest_distance<R: Rng + ?Sized>(lambda: f64, a: f64, rng: &mut R) -> Result<f64> {
    let u: f64 = rng.random();
    nearest_distance_quantile(u, lambda, a)
}
