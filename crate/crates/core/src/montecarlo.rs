//! Monte Carlo link simulator: Poisson interferer fields with random bits,
//! Poisson molecule counts and threshold decoding.
//!
//! Trials are split into fixed-size chunks. Chunk `k` draws from a ChaCha8
//! stream seeded with `seed` and switched to stream `k`, and chunk results are
//! merged in index order, so every estimate depends on the seed alone and not
//! on how rayon schedules the work.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expectations::{LinkConfig, TaggedMode};
use crate::numerics::{integrate_semi_infinite, QuadratureSpec};
use crate::pointfield::{sample_field_into, sample_nearest_distance, FieldConfig, MarkedPoint};

pub const DEFAULT_TRIALS: u64 = 10_000;
pub const DEFAULT_R_MAX: f64 = 150.0;
const CHUNK_TRIALS: u64 = 2_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    /// Trials per conditioned bit.
    pub trials: u64,
    pub seed: u64,
    /// Interferers beyond this radius (µm) are not simulated.
    pub r_max: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { trials: DEFAULT_TRIALS, seed: 0, r_max: DEFAULT_R_MAX }
    }
}

impl SimOptions {
    pub fn validate(&self, cfg: &LinkConfig) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::Domain("at least one trial is required".into()));
        }
        self.field(cfg).validate()
    }

    fn field(&self, cfg: &LinkConfig) -> FieldConfig {
        FieldConfig { intensity: cfg.intensity, r_min: cfg.receiver.radius, r_max: self.r_max }
    }

    /// `(chunk index, trials in chunk)` in merge order.
    fn chunks(&self) -> Vec<(u64, u64)> {
        let n = self.trials.div_ceil(CHUNK_TRIALS);
        (0..n).map(|k| (k, CHUNK_TRIALS.min(self.trials - k * CHUNK_TRIALS))).collect()
    }

    fn chunk_rng(&self, chunk: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(chunk);
        rng
    }
}

/// One simulated slot at the receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub tagged_bit: bool,
    /// Mean of the absorbed count given the field and the tagged distance.
    pub conditional_mean: f64,
    pub observed: u64,
    pub decoded: bool,
}

/// Monte Carlo error rates at one threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerEstimate {
    pub eta: u32,
    pub pe0_hat: f64,
    pub pe1_hat: f64,
    pub pe_hat: f64,
    pub se0: f64,
    pub se1: f64,
    /// Standard error of `pe_hat`.
    pub se: f64,
    pub trials_per_bit: u64,
    pub seed: u64,
}

/// Binomial standard error `√(p(1−p)/n)`.
pub fn binomial_se(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).max(0.0).sqrt()
}

/// Sample means of the absorbed counts with their standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedCountEstimate {
    pub e_s: f64,
    pub e_m: f64,
    pub e_t: f64,
    pub se_s: f64,
    pub se_m: f64,
    pub se_t: f64,
    pub trials: u64,
}

/// Reusable per-thread state for drawing slots.
struct Sampler<'a> {
    cfg: &'a LinkConfig,
    field: FieldConfig,
    points: Vec<MarkedPoint>,
}

impl<'a> Sampler<'a> {
    fn new(cfg: &'a LinkConfig, opts: &SimOptions) -> Self {
        Sampler { cfg, field: opts.field(cfg), points: Vec::new() }
    }

    /// `Σ bit·N·h(r)` over a fresh interferer field.
    fn interference<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<f64> {
        sample_field_into(&self.field, self.cfg.p1, rng, &mut self.points)?;
        let mut v = 0.0;
        for p in self.points.iter().filter(|p| p.bit) {
            v += self.cfg.cir(p.r)?;
        }
        Ok(self.cfg.n() * v)
    }

    fn tagged_distance<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        match self.cfg.tagged {
            TaggedMode::Fixed { distance } => Ok(distance),
            TaggedMode::Nearest => sample_nearest_distance(self.cfg.intensity, self.cfg.receiver.radius, rng),
        }
    }

    /// Draws the conditional mean for a slot with the given tagged bit.
    fn conditional_mean<R: Rng + ?Sized>(&mut self, bit: bool, rng: &mut R) -> Result<f64> {
        let mut v = self.interference(rng)?;
        if bit {
            let r_d = self.tagged_distance(rng)?;
            v += self.cfg.n() * self.cfg.cir(r_d)?;
        }
        Ok(v)
    }
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<u64> {
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|e| Error::Domain(format!("molecule count: {e}")))?;
    Ok(dist.sample(rng) as u64)
}

/// Simulates one slot with the tagged bit forced to `tagged_bit`.
pub fn simulate_trial<R: Rng + ?Sized>(
    cfg: &LinkConfig,
    tagged_bit: bool,
    eta: u32,
    r_max: f64,
    rng: &mut R,
) -> Result<TrialOutcome> {
    cfg.validate()?;
    check_eta(eta)?;
    let opts = SimOptions { trials: 1, seed: 0, r_max };
    opts.validate(cfg)?;
    let mut sampler = Sampler::new(cfg, &opts);
    let conditional_mean = sampler.conditional_mean(tagged_bit, rng)?;
    let observed = poisson_count(conditional_mean, rng)?;
    Ok(TrialOutcome { tagged_bit, conditional_mean, observed, decoded: observed >= eta as u64 })
}

fn check_eta(eta: u32) -> Result<()> {
    if eta < 1 {
        return Err(Error::Domain("decision threshold must be >= 1".into()));
    }
    Ok(())
}

/// Count histograms for both conditioned bits; the last bin collects every
/// count at or above it.
#[derive(Clone)]
struct Histograms {
    given0: Vec<u64>,
    given1: Vec<u64>,
}

impl Histograms {
    fn new(bins: usize) -> Self {
        Histograms { given0: vec![0; bins], given1: vec![0; bins] }
    }

    fn record(hist: &mut [u64], y: u64) {
        let last = hist.len() - 1;
        hist[(y as usize).min(last)] += 1;
    }

    fn merge(&mut self, other: &Histograms) {
        for (a, b) in self.given0.iter_mut().zip(&other.given0) {
            *a += b;
        }
        for (a, b) in self.given1.iter_mut().zip(&other.given1) {
            *a += b;
        }
    }
}

fn count_histograms(cfg: &LinkConfig, eta_max: u32, opts: &SimOptions) -> Result<Histograms> {
    cfg.validate()?;
    check_eta(eta_max)?;
    opts.validate(cfg)?;
    if cfg.tagged == TaggedMode::Nearest && !(cfg.intensity > 0.0) {
        return Err(Error::Domain("nearest-transmitter mode needs a positive intensity".into()));
    }
    let bins = eta_max as usize + 1;
    let parts: Vec<Result<Histograms>> = opts
        .chunks()
        .into_par_iter()
        .map(|(chunk, trials)| {
            let mut rng = opts.chunk_rng(chunk);
            let mut sampler = Sampler::new(cfg, opts);
            let mut hist = Histograms::new(bins);
            for _ in 0..trials {
                let v0 = sampler.conditional_mean(false, &mut rng)?;
                Histograms::record(&mut hist.given0, poisson_count(v0, &mut rng)?);
                let v1 = sampler.conditional_mean(true, &mut rng)?;
                Histograms::record(&mut hist.given1, poisson_count(v1, &mut rng)?);
            }
            Ok(hist)
        })
        .collect();
    let mut total = Histograms::new(bins);
    for part in parts {
        total.merge(&part?);
    }
    Ok(total)
}

/// Estimates for every threshold `1..=eta_max` from one set of draws.
///
/// Thresholds share the simulated counts, so neighbouring estimates are
/// strongly correlated; each one on its own is an ordinary binomial estimate.
pub fn simulate_curve(cfg: &LinkConfig, eta_max: u32, opts: &SimOptions) -> Result<Vec<BerEstimate>> {
    let hist = count_histograms(cfg, eta_max, opts)?;
    let n = opts.trials;
    let mut below0 = 0u64;
    let mut below1 = 0u64;
    let mut out = Vec::with_capacity(eta_max as usize);
    for eta in 1..=eta_max {
        below0 += hist.given0[eta as usize - 1];
        below1 += hist.given1[eta as usize - 1];
        let pe0_hat = (n - below0) as f64 / n as f64;
        let pe1_hat = below1 as f64 / n as f64;
        let se0 = binomial_se(pe0_hat, n);
        let se1 = binomial_se(pe1_hat, n);
        let (p0, p1) = (cfg.p0(), cfg.p1);
        out.push(BerEstimate {
            eta,
            pe0_hat,
            pe1_hat,
            pe_hat: p0 * pe0_hat + p1 * pe1_hat,
            se0,
            se1,
            se: (p0 * p0 * se0 * se0 + p1 * p1 * se1 * se1).sqrt(),
            trials_per_bit: n,
            seed: opts.seed,
        });
    }
    Ok(out)
}

/// Tagged transmitter at the configured fixed distance.
pub fn simulate_fixed(cfg: &LinkConfig, eta: u32, opts: &SimOptions) -> Result<BerEstimate> {
    cfg.fixed_distance()?;
    single(cfg, eta, opts)
}

/// Tagged distance drawn from the nearest-transmitter law, independently of
/// the interferer field.
pub fn simulate_nearest(cfg: &LinkConfig, eta: u32, opts: &SimOptions) -> Result<BerEstimate> {
    if cfg.tagged != TaggedMode::Nearest {
        return Err(Error::UnsupportedMode("nearest"));
    }
    single(cfg, eta, opts)
}

fn single(cfg: &LinkConfig, eta: u32, opts: &SimOptions) -> Result<BerEstimate> {
    check_eta(eta)?;
    Ok(*simulate_curve(cfg, eta, opts)?.last().expect("eta >= 1"))
}

#[derive(Clone, Copy, Default)]
struct Moments {
    n: u64,
    sum: [f64; 3],
    sum_sq: [f64; 3],
}

impl Moments {
    fn push(&mut self, x: [f64; 3]) {
        self.n += 1;
        for ((s, q), v) in self.sum.iter_mut().zip(&mut self.sum_sq).zip(x) {
            *s += v;
            *q += v * v;
        }
    }

    fn merge(&mut self, other: &Moments) {
        self.n += other.n;
        for (s, o) in self.sum.iter_mut().zip(other.sum) {
            *s += o;
        }
        for (q, o) in self.sum_sq.iter_mut().zip(other.sum_sq) {
            *q += o;
        }
    }

    fn mean_and_se(&self, k: usize) -> (f64, f64) {
        let n = self.n as f64;
        let mean = self.sum[k] / n;
        if self.n < 2 {
            return (mean, 0.0);
        }
        let var = ((self.sum_sq[k] - n * mean * mean) / (n - 1.0)).max(0.0);
        (mean, (var / n).sqrt())
    }
}

/// Sample means of the signal, interference and total conditional means,
/// with the tagged bit drawn from its prior.
pub fn estimate_expected_counts(cfg: &LinkConfig, opts: &SimOptions) -> Result<ExpectedCountEstimate> {
    cfg.validate()?;
    let r_d = cfg.fixed_distance()?;
    opts.validate(cfg)?;
    let signal = cfg.n() * cfg.cir(r_d)?;
    let parts: Vec<Result<Moments>> = opts
        .chunks()
        .into_par_iter()
        .map(|(chunk, trials)| {
            let mut rng = opts.chunk_rng(chunk);
            let mut sampler = Sampler::new(cfg, opts);
            let mut m = Moments::default();
            for _ in 0..trials {
                let s = if rng.random_bool(cfg.p1) { signal } else { 0.0 };
                let i = sampler.interference(&mut rng)?;
                m.push([s, i, s + i]);
            }
            Ok(m)
        })
        .collect();
    let mut total = Moments::default();
    for part in parts {
        total.merge(&part?);
    }
    let (e_s, se_s) = total.mean_and_se(0);
    let (e_m, se_m) = total.mean_and_se(1);
    let (e_t, se_t) = total.mean_and_se(2);
    Ok(ExpectedCountEstimate { e_s, e_m, e_t, se_s, se_m, se_t, trials: total.n })
}

/// Expected number of molecules absorbed from interferers beyond `r_max`,
/// `4πλ·p1·N·∫_{r_max}^∞ h(z)·z² dz`.
///
/// Dropping those interferers changes any error probability by at most this
/// much, since it bounds the probability that they contribute a molecule.
pub fn truncation_bias_bound(cfg: &LinkConfig, r_max: f64) -> Result<f64> {
    cfg.validate()?;
    if !(r_max >= cfg.receiver.radius) {
        return Err(Error::Domain(format!("truncation radius {r_max} lies inside the receiver")));
    }
    let weight = cfg.field_weight() * cfg.n();
    if weight == 0.0 {
        return Ok(0.0);
    }
    let tail = integrate_semi_infinite(|z| cfg.cir_or_nan(z) * z * z, r_max, &QuadratureSpec::default())?;
    Ok(weight * tail)
}
