//! Exact bit-error probabilities of the threshold detector.
//!
//! Given the field, the absorbed count is Poisson with a random mean `V`.
//! Averaging over the marked field turns `P(y = n)` into
//! `e^{−α₀−s}·𝔅_n(β)/n!`, where `s` is the tagged contribution, `α₀` and
//! `α_i` are integrals over the field and `β` equals `α` with `s` added to
//! its first entry. Everything below evaluates those sums through
//! [`scaled_bell_partial_sums`], which works on `α_i/i!` directly.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expectations::{LinkConfig, TaggedMode};
use crate::numerics::{integrate_semi_infinite, integrate_semi_infinite_vec, scaled_bell_partial_sums, QuadratureSpec};
use crate::pointfield::nearest_distance_pdf;

/// Default upper end of threshold searches.
pub const DEFAULT_ETA_MAX: u32 = 200;

/// Interference functionals for thresholds up to `η`.
///
/// `α_i` itself overflows a double for large `i` (it contains `(N·h)^i`), so
/// the vector stores `α_i / i!`; [`AlphaVector::alpha`] recovers `α_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaVector {
    /// `4πλp1·∫_a^∞ (1 − e^{−N·h(z)})·z² dz`
    pub alpha0: f64,
    /// `scaled[i-1] = α_i / i!` for `i = 1..η−1`.
    pub scaled: Vec<f64>,
}

impl AlphaVector {
    /// Number of entries, `η − 1`.
    pub fn len(&self) -> usize {
        self.scaled.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scaled.is_empty()
    }

    /// `α_i` for `1 ≤ i ≤ len()`; may be `+∞` when it exceeds the double range.
    pub fn alpha(&self, i: usize) -> f64 {
        let s = self.scaled[i - 1];
        if s == 0.0 {
            return 0.0;
        }
        (s.ln() + libm::lgamma((i + 1) as f64)).exp()
    }
}

/// Conditional and total error probabilities at one threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerBreakdown {
    pub eta: u32,
    /// P(decide 1 | sent 0)
    pub pe0: f64,
    /// P(decide 0 | sent 1)
    pub pe1: f64,
    /// `p0·pe0 + p1·pe1`
    pub pe: f64,
}

fn check_eta(eta: u32) -> Result<()> {
    if eta < 1 {
        return Err(Error::Domain("decision threshold must be >= 1".into()));
    }
    Ok(())
}

/// Poisson probability `x^i e^{−x} / i!`, evaluated in log space.
fn poisson_pmf(i: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if i == 0 { 1.0 } else { 0.0 };
    }
    let k = i as f64;
    (k * x.ln() - x - libm::lgamma(k + 1.0)).exp()
}

/// Computes `α₀` and `α_1..α_{η−1}` (stored as `α_i/i!`).
pub fn alpha_vector(cfg: &LinkConfig, eta: u32) -> Result<AlphaVector> {
    alpha_vector_with(cfg, eta, &QuadratureSpec::default())
}

pub fn alpha_vector_with(cfg: &LinkConfig, eta: u32, spec: &QuadratureSpec) -> Result<AlphaVector> {
    cfg.validate()?;
    check_eta(eta)?;
    let len = eta as usize - 1;
    let weight = cfg.field_weight();
    if weight == 0.0 || cfg.molecules == 0 {
        return Ok(AlphaVector { alpha0: 0.0, scaled: vec![0.0; len] });
    }
    let a = cfg.receiver.radius;
    let n = cfg.n();
    let wrap = |index: usize| move |e: Error| Error::Alpha { index, source: Box::new(e) };

    let alpha0 = integrate_semi_infinite(|z| -(-n * cfg.cir_or_nan(z)).exp_m1() * z * z, a, spec).map_err(wrap(0))?;
    let scaled = (1..=len)
        .into_par_iter()
        .map(|i| {
            integrate_semi_infinite(|z| poisson_pmf(i, n * cfg.cir_or_nan(z)) * z * z, a, spec)
                .map(|v| weight * v)
                .map_err(wrap(i))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AlphaVector { alpha0: weight * alpha0, scaled })
}

/// `P(y ≤ m)` for `m = 0..=m_max` when the tagged transmitter adds a Poisson
/// mean of `signal` on top of the field.
fn count_cdf(alpha: &AlphaVector, signal: f64, m_max: usize) -> Result<Vec<f64>> {
    let mut terms = alpha.scaled.clone();
    if let Some(first) = terms.first_mut() {
        *first += signal;
    } else if m_max > 0 {
        terms.push(signal);
    }
    let mut cdf = scaled_bell_partial_sums(&terms, -alpha.alpha0 - signal, m_max)?;
    for v in cdf.iter_mut() {
        debug_assert!(*v <= 1.0 + 1e-12, "cdf {v} above one");
        *v = v.min(1.0);
    }
    Ok(cdf)
}

/// `1 − CDF`, floored at zero; rounding in a CDF that has already converged
/// to one can otherwise leave `-1e-16`.
fn upper_tail(cdf: f64) -> f64 {
    let tail = 1.0 - cdf;
    debug_assert!(tail >= -1e-12);
    tail.max(0.0)
}

/// P(decide 1 | sent 0) `= 1 − e^{−α₀}·Σ_{n<η} 𝔅_n(α)/n!`.
pub fn pe_given_0(cfg: &LinkConfig, eta: u32) -> Result<f64> {
    let alpha = alpha_vector(cfg, eta)?;
    let cdf = count_cdf(&alpha, 0.0, eta as usize - 1)?;
    Ok(upper_tail(cdf[eta as usize - 1]))
}

/// P(decide 0 | sent 1) with the tagged transmitter at a fixed distance.
pub fn pe_given_1_fixed(cfg: &LinkConfig, eta: u32) -> Result<f64> {
    let r_d = cfg.fixed_distance()?;
    let alpha = alpha_vector(cfg, eta)?;
    let signal = cfg.n() * cfg.cir(r_d)?;
    let cdf = count_cdf(&alpha, signal, eta as usize - 1)?;
    Ok(cdf[eta as usize - 1])
}

/// P(decide 0 | sent 1) when the tagged transmitter is the nearest one:
/// the fixed-distance result averaged over the nearest-distance density.
pub fn pe_given_1_nearest(cfg: &LinkConfig, eta: u32) -> Result<f64> {
    if cfg.tagged != TaggedMode::Nearest {
        return Err(Error::UnsupportedMode("nearest"));
    }
    let alpha = alpha_vector(cfg, eta)?;
    let m = eta as usize - 1;
    let curve = nearest_miss_curve(cfg, &alpha, m, &QuadratureSpec::default())?;
    Ok(curve[m])
}

/// `∫_a^∞ f_{r_d}(r)·P(y ≤ m | r_d = r) dr` for `m = 0..=m_max`, all
/// components integrated on shared panels.
fn nearest_miss_curve(cfg: &LinkConfig, alpha: &AlphaVector, m_max: usize, spec: &QuadratureSpec) -> Result<Vec<f64>> {
    let lambda = cfg.intensity;
    let a = cfg.receiver.radius;
    if !(lambda > 0.0) {
        return Err(Error::Domain("nearest-transmitter mode needs a positive intensity".into()));
    }
    let n = cfg.n();
    let mut failure: Option<Error> = None;
    let integrand = |r: f64, out: &mut [f64]| {
        let evaluated =
            nearest_distance_pdf(r, lambda, a).and_then(|pdf| Ok((pdf, count_cdf(alpha, n * cfg.cir(r)?, m_max)?)));
        match evaluated {
            Ok((pdf, cdf)) => {
                for (o, c) in out.iter_mut().zip(cdf) {
                    *o = pdf * c;
                }
            }
            Err(e) => {
                failure.get_or_insert(e);
                out.fill(f64::NAN);
            }
        }
    };
    // Gap above the surface holding unit expected mass; for dense fields
    // this is far narrower than (3/(4πλ))^{1/3}.
    let scale = (a.powi(3) + 3.0 / (4.0 * PI * lambda)).cbrt() - a;
    let spec = QuadratureSpec { initial_window: spec.initial_window.min(scale), ..*spec };
    let result = integrate_semi_infinite_vec(integrand, m_max + 1, a, &spec);
    if let Some(e) = failure {
        return Err(e);
    }
    let mut curve = result?;
    for v in curve.iter_mut() {
        debug_assert!(*v <= 1.0 + 1e-9 && *v >= -1e-12);
        *v = v.clamp(0.0, 1.0);
    }
    Ok(curve)
}

/// Error probabilities for one threshold in the configured tagged mode.
pub fn pe_total(cfg: &LinkConfig, eta: u32) -> Result<BerBreakdown> {
    check_eta(eta)?;
    let curve = pe_curve_range(cfg, eta, eta)?;
    Ok(curve[0])
}

/// Error probabilities for every threshold `1..=eta_max`, sharing one
/// α-vector and one quadrature.
pub fn pe_curve(cfg: &LinkConfig, eta_max: u32) -> Result<Vec<BerBreakdown>> {
    pe_curve_range(cfg, 1, eta_max)
}

fn pe_curve_range(cfg: &LinkConfig, eta_lo: u32, eta_hi: u32) -> Result<Vec<BerBreakdown>> {
    check_eta(eta_lo)?;
    if eta_hi < eta_lo {
        return Err(Error::Domain(format!("empty threshold range {eta_lo}..={eta_hi}")));
    }
    let alpha = alpha_vector(cfg, eta_hi)?;
    let m_max = eta_hi as usize - 1;
    let miss0 = count_cdf(&alpha, 0.0, m_max)?;
    let miss1 = match cfg.tagged {
        TaggedMode::Fixed { distance } => count_cdf(&alpha, cfg.n() * cfg.cir(distance)?, m_max)?,
        TaggedMode::Nearest => nearest_miss_curve(cfg, &alpha, m_max, &QuadratureSpec::default())?,
    };
    Ok((eta_lo..=eta_hi)
        .map(|eta| {
            let m = eta as usize - 1;
            let pe0 = upper_tail(miss0[m]);
            let pe1 = miss1[m];
            BerBreakdown { eta, pe0, pe1, pe: cfg.p0() * pe0 + cfg.p1 * pe1 }
        })
        .collect())
}

/// Exhaustive search of the threshold minimizing the total error
/// probability over `1..=eta_max`; ties go to the smaller threshold.
pub fn optimal_threshold(cfg: &LinkConfig, eta_max: u32) -> Result<(u32, f64)> {
    let curve = pe_curve(cfg, eta_max)?;
    Ok(best_of(&curve))
}

pub(crate) fn best_of(curve: &[BerBreakdown]) -> (u32, f64) {
    let mut best = (curve[0].eta, curve[0].pe);
    for point in &curve[1..] {
        if point.pe < best.1 {
            best = (point.eta, point.pe);
        }
    }
    best
}
