//! Scenario files, parameter sweeps written as CSV, Monte Carlo validation
//! reports and the optimal-threshold search behind the `mcvd` binary.

use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::str::FromStr;

use crate::ber_analytic::{optimal_threshold, pe_curve, pe_total, BerBreakdown, DEFAULT_ETA_MAX};
use crate::channel::{MediumConfig, ReceiverConfig};
use crate::error::{Error, Result};
use crate::expectations::{
    expected_interference, expected_interference_infinite_slot, expected_signal, expected_total, LinkConfig, TaggedMode,
};
use crate::montecarlo::{binomial_se, simulate_curve, BerEstimate, SimOptions, DEFAULT_R_MAX, DEFAULT_TRIALS};

/// Flat scenario description, one field per config-file key.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    /// `D`, µm²/s.
    pub diffusion: f64,
    /// `mu`, 1/s.
    pub degradation: f64,
    /// `a`, µm.
    pub radius: f64,
    /// `N`.
    pub molecules: u64,
    pub p1: f64,
    /// `Ts`, s.
    pub slot: f64,
    /// `lambda`, transmitters per µm³.
    pub intensity: f64,
    pub r_max: f64,
    pub eta: u32,
    /// `tagged_mode = nearest`.
    pub nearest: bool,
    /// Tagged distance in fixed mode, µm.
    pub r_d: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            diffusion: 74.9,
            degradation: 5.0,
            radius: 4.0,
            molecules: 100,
            p1: 0.5,
            slot: 0.5,
            intensity: 1e-5,
            r_max: DEFAULT_R_MAX,
            eta: 10,
            nearest: false,
            r_d: 8.0,
        }
    }
}

pub const CONFIG_KEYS: [&str; 11] = ["D", "mu", "a", "N", "p1", "Ts", "lambda", "r_max", "eta", "tagged_mode", "r_d"];

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config(format!("invalid value {value:?} for {key}")))
}

impl Scenario {
    pub fn tagged(&self) -> TaggedMode {
        if self.nearest {
            TaggedMode::Nearest
        } else {
            TaggedMode::Fixed { distance: self.r_d }
        }
    }

    /// Builds and validates the link configuration.
    pub fn link(&self) -> Result<LinkConfig> {
        let cfg = LinkConfig {
            medium: MediumConfig { diffusion: self.diffusion, degradation: self.degradation },
            receiver: ReceiverConfig { radius: self.radius, threshold: self.eta },
            molecules: self.molecules,
            p1: self.p1,
            slot: self.slot,
            intensity: self.intensity,
            tagged: self.tagged(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn sim_options(&self, trials: u64, seed: u64) -> SimOptions {
        SimOptions { trials, seed, r_max: self.r_max }
    }

    /// Sets one config key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "D" => self.diffusion = parse_num(key, value)?,
            "mu" => self.degradation = parse_num(key, value)?,
            "a" => self.radius = parse_num(key, value)?,
            "N" => self.molecules = parse_num(key, value)?,
            "p1" => self.p1 = parse_num(key, value)?,
            "Ts" => self.slot = parse_num(key, value)?,
            "lambda" => self.intensity = parse_num(key, value)?,
            "r_max" => self.r_max = parse_num(key, value)?,
            "eta" => self.eta = parse_num(key, value)?,
            "r_d" => self.r_d = parse_num(key, value)?,
            "tagged_mode" => {
                self.nearest = match value {
                    "fixed" => false,
                    "nearest" => true,
                    _ => return Err(Error::Config(format!("tagged_mode must be fixed or nearest, got {value:?}"))),
                }
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown key {other:?} (expected one of {})",
                    CONFIG_KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Applies `key=value` assignment text.
    pub fn set_assignment(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got {assignment:?}")))?;
        self.set(key, value)
    }

    /// Applies a config file: `key = value` lines, `#` starts a comment.
    pub fn apply_config_text(&mut self, text: &str) -> Result<()> {
        for (number, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            self.set_assignment(line).map_err(|e| {
                Error::Config(format!("line {}: {}", number + 1, e.to_string().trim_start_matches("config error: ")))
            })?;
        }
        Ok(())
    }

    /// `fixed:<r_d>` or `nearest`.
    pub fn set_tagged(&mut self, spec: &str) -> Result<()> {
        match spec.split_once(':') {
            None if spec == "nearest" => self.nearest = true,
            Some(("fixed", r)) => {
                self.nearest = false;
                self.r_d = parse_num("r_d", r)?;
            }
            _ => return Err(Error::Config(format!("tagged mode must be fixed:<r_d> or nearest, got {spec:?}"))),
        }
        Ok(())
    }
}

/// Swept parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Eta,
    Rd,
    Lambda,
    Ts,
    Mu,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Eta => "eta",
            Axis::Rd => "r_d",
            Axis::Lambda => "lambda",
            Axis::Ts => "Ts",
            Axis::Mu => "mu",
        }
    }

    fn apply(self, scenario: &mut Scenario, value: f64) {
        match self {
            Axis::Eta => scenario.eta = value as u32,
            Axis::Rd => scenario.r_d = value,
            Axis::Lambda => scenario.intensity = value,
            Axis::Ts => scenario.slot = value,
            Axis::Mu => scenario.degradation = value,
        }
    }

    fn format(self, value: f64) -> String {
        match self {
            Axis::Eta => format!("{}", value as u32),
            _ => format_num(value),
        }
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "eta" => Axis::Eta,
            "r_d" => Axis::Rd,
            "lambda" => Axis::Lambda,
            "Ts" => Axis::Ts,
            "mu" => Axis::Mu,
            _ => return Err(Error::Config(format!("unknown axis {s:?} (expected eta, r_d, lambda, Ts or mu)"))),
        })
    }
}

/// Quantity requested from a sweep. Columns always appear in declaration
/// order, whatever order they were requested in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Output {
    /// Channel response at the tagged distance.
    H,
    ES,
    EM,
    ET,
    /// Interference mean for an unbounded slot.
    EMInf,
    Pe0,
    Pe1,
    Pe,
    PeMc,
    Se,
}

impl Output {
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Output::H => &["h"],
            Output::ES => &["E_S"],
            Output::EM => &["E_M"],
            Output::ET => &["E_T"],
            Output::EMInf => &["E_M_inf"],
            Output::Pe0 => &["pe0"],
            Output::Pe1 => &["pe1"],
            Output::Pe => &["pe"],
            Output::PeMc => &["pe0_mc", "pe1_mc", "pe_mc"],
            Output::Se => &["se0", "se1", "se"],
        }
    }

    fn needs_mc(self) -> bool {
        matches!(self, Output::PeMc | Output::Se)
    }

    fn needs_pe(self) -> bool {
        matches!(self, Output::Pe0 | Output::Pe1 | Output::Pe)
    }
}

impl FromStr for Output {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "h" => Output::H,
            "E_S" => Output::ES,
            "E_M" => Output::EM,
            "E_T" => Output::ET,
            "E_M_inf" => Output::EMInf,
            "pe0" => Output::Pe0,
            "pe1" => Output::Pe1,
            "pe" => Output::Pe,
            "pe_mc" => Output::PeMc,
            "se" => Output::Se,
            _ => return Err(Error::Config(format!("unknown output {s:?}"))),
        })
    }
}

/// Comma-separated outputs, e.g. `E_S,E_M,pe`.
pub fn parse_outputs(s: &str) -> Result<Vec<Output>> {
    let mut outputs = s.split(',').map(|item| item.trim().parse()).collect::<Result<Vec<Output>>>()?;
    outputs.sort();
    outputs.dedup();
    Ok(outputs)
}

/// Comma-separated numbers; an item `lo..hi` expands to the integers
/// `lo, lo+1, …, hi`.
pub fn parse_values(s: &str) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    for item in s.split(',').map(str::trim) {
        if let Some((lo, hi)) = item.split_once("..") {
            let lo: i64 = parse_num("range start", lo.trim())?;
            let hi: i64 = parse_num("range end", hi.trim())?;
            if hi < lo {
                return Err(Error::Config(format!("empty range {item:?}")));
            }
            values.extend((lo..=hi).map(|v| v as f64));
        } else {
            values.push(parse_num("value", item)?);
        }
    }
    Ok(values)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: Scenario,
    pub axis: Axis,
    pub values: Vec<f64>,
    pub outputs: Vec<Output>,
    /// Monte Carlo trials per bit; 0 disables the simulation.
    pub mc_trials: u64,
    pub seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Config("sweep needs at least one value".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("sweep values must be finite".into()));
        }
        if !self.values.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Config("sweep values must be strictly increasing".into()));
        }
        if self.axis == Axis::Eta && self.values.iter().any(|&v| v < 1.0 || v.fract() != 0.0 || v > u32::MAX as f64) {
            return Err(Error::Config("eta values must be positive integers".into()));
        }
        if self.axis == Axis::Rd && self.base.nearest {
            return Err(Error::Config("an r_d sweep needs fixed tagged mode".into()));
        }
        if self.outputs.is_empty() {
            return Err(Error::Config("no outputs requested".into()));
        }
        if self.mc_trials == 0 && self.outputs.iter().any(|o| o.needs_mc()) {
            return Err(Error::Config("pe_mc and se need --trials > 0".into()));
        }
        Ok(())
    }

    pub fn header(&self) -> Vec<String> {
        let mut header = vec![self.axis.name().to_string()];
        header.extend(self.outputs.iter().flat_map(|o| o.columns()).map(|c| c.to_string()));
        header
    }
}

/// Numbers with 17 significant digits, enough to round-trip any f64.
pub fn format_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn cell(v: &Result<f64>) -> String {
    match v {
        Ok(x) => format_num(*x),
        Err(e) => format!("ERR:{}", e.code()),
    }
}

/// A CSV table: header plus rows of preformatted cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[idx].as_str()).collect())
    }
}

/// Runs a sweep. Failures of individual quantities end up in `ERR:<code>`
/// cells; only an invalid spec fails the whole sweep.
pub fn run_sweep(spec: &SweepSpec) -> Result<Table> {
    spec.validate()?;
    let wants_pe = spec.outputs.iter().any(|o| o.needs_pe());
    let wants_mc = spec.outputs.iter().any(|o| o.needs_mc());

    // An eta sweep shares one analytic curve and one set of simulated draws.
    let (shared_pe, shared_mc) = if spec.axis == Axis::Eta {
        let eta_max = *spec.values.last().expect("validated") as u32;
        let link = spec.base.link();
        let pe = wants_pe.then(|| link.clone().and_then(|cfg| pe_curve(&cfg, eta_max)));
        let mc = wants_mc.then(|| {
            link.and_then(|cfg| simulate_curve(&cfg, eta_max, &spec.base.sim_options(spec.mc_trials, spec.seed)))
        });
        (pe, mc)
    } else {
        (None, None)
    };

    let mut rows = Vec::with_capacity(spec.values.len());
    for &value in &spec.values {
        let mut scenario = spec.base;
        spec.axis.apply(&mut scenario, value);
        let link = scenario.link();
        let eta = scenario.eta;
        let pe: Result<BerBreakdown> = match &shared_pe {
            Some(curve) => curve.as_ref().map(|c| c[eta as usize - 1]).map_err(Error::clone),
            None if wants_pe => link.clone().and_then(|cfg| pe_total(&cfg, eta)),
            // never read: no pe column was requested
            None => Err(Error::Config("pe not requested".into())),
        };
        let mc: Result<BerEstimate> = match &shared_mc {
            Some(curve) => curve.as_ref().map(|c| c[eta as usize - 1]).map_err(Error::clone),
            None if wants_mc => link.clone().and_then(|cfg| {
                simulate_curve(&cfg, eta, &scenario.sim_options(spec.mc_trials, spec.seed))
                    .map(|c| *c.last().expect("eta >= 1"))
            }),
            None => Err(Error::Config("simulation not requested".into())),
        };

        let mut row = vec![spec.axis.format(value)];
        for output in &spec.outputs {
            match output {
                Output::H => row.push(cell(&link.clone().and_then(|cfg| {
                    let r_d = cfg.fixed_distance()?;
                    cfg.cir(r_d)
                }))),
                Output::ES => row.push(cell(&link.clone().and_then(|cfg| expected_signal(&cfg)))),
                Output::EM => row.push(cell(&link.clone().and_then(|cfg| expected_interference(&cfg)))),
                Output::ET => row.push(cell(&link.clone().and_then(|cfg| expected_total(&cfg)))),
                Output::EMInf => {
                    row.push(cell(&link.clone().and_then(|cfg| expected_interference_infinite_slot(&cfg))))
                }
                Output::Pe0 => row.push(cell(&pe.clone().map(|p| p.pe0))),
                Output::Pe1 => row.push(cell(&pe.clone().map(|p| p.pe1))),
                Output::Pe => row.push(cell(&pe.clone().map(|p| p.pe))),
                Output::PeMc => {
                    row.push(cell(&mc.clone().map(|m| m.pe0_hat)));
                    row.push(cell(&mc.clone().map(|m| m.pe1_hat)));
                    row.push(cell(&mc.clone().map(|m| m.pe_hat)));
                }
                Output::Se => {
                    row.push(cell(&mc.clone().map(|m| m.se0)));
                    row.push(cell(&mc.clone().map(|m| m.se1)));
                    row.push(cell(&mc.clone().map(|m| m.se)));
                }
            }
        }
        rows.push(row);
    }
    Ok(Table { header: spec.header(), rows })
}

/// Minimum trials per bit accepted by [`validate`].
pub const MIN_VALIDATION_TRIALS: u64 = 1_000;

/// Agreement factor: a point passes when `|Δ| ≤ 3·se`.
pub const VALIDATION_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationRow {
    pub eta: u32,
    pub pe: f64,
    pub pe_mc: f64,
    /// Binomial standard error of the estimate, evaluated at the analytic
    /// conditional error rates.
    pub se: f64,
    /// `|Δ|/se`.
    pub z: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub rows: Vec<ValidationRow>,
    pub trials_per_bit: u64,
    pub seed: u64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.pass).count()
    }

    pub fn to_table(&self) -> Table {
        let header = ["eta", "pe", "pe_mc", "se", "z", "status"].map(String::from).to_vec();
        let rows = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.eta.to_string(),
                    format_num(r.pe),
                    format_num(r.pe_mc),
                    format_num(r.se),
                    format_num(r.z),
                    if r.pass { "PASS" } else { "FAIL" }.to_string(),
                ]
            })
            .collect();
        Table { header, rows }
    }
}

/// Standard error of `p0·p̂0 + p1·p̂1` when `p̂b` estimates `pe_b` from
/// `trials` independent slots.
pub fn combined_se(p0: f64, p1: f64, pe0: f64, pe1: f64, trials: u64) -> f64 {
    let se0 = binomial_se(pe0, trials);
    let se1 = binomial_se(pe1, trials);
    (p0 * p0 * se0 * se0 + p1 * p1 * se1 * se1).sqrt()
}

/// Pairs analytic values with estimates of the same thresholds.
pub fn compare(p1: f64, analytic: &[BerBreakdown], estimates: &[BerEstimate]) -> Result<ValidationReport> {
    if analytic.len() != estimates.len() || analytic.is_empty() {
        return Err(Error::Config("analytic and simulated curves must be non-empty and of equal length".into()));
    }
    let trials = estimates[0].trials_per_bit;
    let rows = analytic
        .iter()
        .zip(estimates)
        .map(|(a, m)| {
            let se = combined_se(1.0 - p1, p1, a.pe0, a.pe1, trials);
            let delta = (a.pe - m.pe_hat).abs();
            let z = if se > 0.0 {
                delta / se
            } else if delta == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            ValidationRow { eta: m.eta, pe: a.pe, pe_mc: m.pe_hat, se, z, pass: delta <= VALIDATION_SIGMAS * se }
        })
        .collect();
    Ok(ValidationReport { rows, trials_per_bit: trials, seed: estimates[0].seed })
}

/// Analytic error probabilities against simulation for every threshold in
/// `etas`, at the configured tagged mode.
pub fn validate(scenario: &Scenario, etas: RangeInclusive<u32>, trials: u64, seed: u64) -> Result<ValidationReport> {
    if trials < MIN_VALIDATION_TRIALS {
        return Err(Error::Config(format!("validation needs at least {MIN_VALIDATION_TRIALS} trials, got {trials}")));
    }
    let (lo, hi) = (*etas.start(), *etas.end());
    if lo < 1 || hi < lo {
        return Err(Error::Config(format!("invalid threshold range {lo}..={hi}")));
    }
    let cfg = scenario.link()?;
    let analytic = pe_curve(&cfg, hi)?;
    let simulated = simulate_curve(&cfg, hi, &scenario.sim_options(trials, seed))?;
    let from = lo as usize - 1;
    compare(cfg.p1, &analytic[from..], &simulated[from..])
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdReport {
    pub eta_star: u32,
    pub pe_star: f64,
    pub curve: Vec<BerBreakdown>,
}

impl ThresholdReport {
    pub fn summary(&self) -> String {
        format!("eta*={} pe*={}", self.eta_star, format_num(self.pe_star))
    }

    pub fn to_table(&self) -> Table {
        let header = ["eta", "pe0", "pe1", "pe"].map(String::from).to_vec();
        let rows = self
            .curve
            .iter()
            .map(|b| vec![b.eta.to_string(), format_num(b.pe0), format_num(b.pe1), format_num(b.pe)])
            .collect();
        Table { header, rows }
    }
}

pub fn find_threshold(scenario: &Scenario, eta_max: u32) -> Result<ThresholdReport> {
    let cfg = scenario.link()?;
    let (eta_star, pe_star) = optimal_threshold(&cfg, eta_max)?;
    let curve = pe_curve(&cfg, eta_max)?;
    Ok(ThresholdReport { eta_star, pe_star, curve })
}

pub const DEFAULT_VALIDATION_TRIALS: u64 = DEFAULT_TRIALS;
pub const DEFAULT_THRESHOLD_SEARCH: u32 = DEFAULT_ETA_MAX;

/// Human-readable one-line description of a scenario, for report headers.
pub fn describe(scenario: &Scenario) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        "D={} mu={} a={} N={} p1={} Ts={} lambda={} r_max={} eta={} ",
        scenario.diffusion,
        scenario.degradation,
        scenario.radius,
        scenario.molecules,
        scenario.p1,
        scenario.slot,
        scenario.intensity,
        scenario.r_max,
        scenario.eta
    );
    if scenario.nearest {
        s.push_str("tagged_mode=nearest");
    } else {
        let _ = write!(s, "tagged_mode=fixed r_d={}", scenario.r_d);
    }
    s
}
