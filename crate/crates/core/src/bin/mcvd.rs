use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mcvd::experiments::{
    describe, find_threshold, parse_outputs, parse_values, run_sweep, validate, Axis, Scenario, SweepSpec, Table,
    DEFAULT_THRESHOLD_SEARCH, DEFAULT_VALIDATION_TRIALS,
};
use mcvd::Error;

/// Channel, expectation and bit-error analysis for diffusion-based molecular
/// links with Poisson-field interference.
#[derive(Parser)]
#[command(name = "mcvd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Channel response h_Ts(r_d) along an axis (default: r_d).
    Cir(SweepArgs),
    /// Expected signal, interference and total counts along an axis (default: r_d).
    Expectations(SweepArgs),
    /// Error probabilities along an axis (default: eta = 1..30).
    BerSweep(SweepArgs),
    /// Analytic vs simulated Pe for each threshold; exits 1 on any FAIL.
    Validate(ValidateArgs),
    /// Threshold minimizing Pe, with the full curve.
    OptimalThreshold(ThresholdArgs),
}

#[derive(Args)]
struct ScenarioArgs {
    /// Flat key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one config key, e.g. --set lambda=2e-5 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// fixed:<r_d> or nearest.
    #[arg(long)]
    tagged: Option<String>,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl ScenarioArgs {
    fn scenario(&self) -> Result<Scenario, Error> {
        let mut scenario = Scenario::default();
        if let Some(path) = &self.config {
            let text =
                fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            scenario.apply_config_text(&text)?;
        }
        for assignment in &self.sets {
            scenario.set_assignment(assignment)?;
        }
        if let Some(tagged) = &self.tagged {
            scenario.set_tagged(tagged)?;
        }
        Ok(scenario)
    }

    fn emit(&self, table: &Table) -> Result<(), Error> {
        let csv = table.to_csv();
        match &self.out {
            Some(path) => {
                fs::write(path, csv).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
            }
            None => {
                print!("{csv}");
                Ok(())
            }
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: ScenarioArgs,
    /// eta, r_d, lambda, Ts or mu.
    #[arg(long)]
    axis: Option<String>,
    /// Comma-separated values; lo..hi expands to integers.
    #[arg(long)]
    values: Option<String>,
    /// Comma-separated subset of h, E_S, E_M, E_T, E_M_inf, pe0, pe1, pe, pe_mc, se.
    #[arg(long)]
    outputs: Option<String>,
    /// Monte Carlo trials per bit (0 = analytic only).
    #[arg(long, default_value_t = 0)]
    trials: u64,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    common: ScenarioArgs,
    /// Thresholds to check, lo..hi.
    #[arg(long, default_value = "1..30")]
    values: String,
    #[arg(long, default_value_t = DEFAULT_VALIDATION_TRIALS)]
    trials: u64,
}

#[derive(Args)]
struct ThresholdArgs {
    #[command(flatten)]
    common: ScenarioArgs,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD_SEARCH)]
    eta_max: u32,
}

fn sweep(args: &SweepArgs, default_axis: Axis, default_values: &str, default_outputs: &str) -> Result<(), Error> {
    let axis = match &args.axis {
        Some(a) => a.parse()?,
        None => default_axis,
    };
    let values = match (&args.values, args.axis.is_some()) {
        (Some(v), _) => parse_values(v)?,
        (None, false) => parse_values(default_values)?,
        (None, true) => return Err(Error::Config("--axis needs --values".into())),
    };
    let outputs = match &args.outputs {
        Some(o) => parse_outputs(o)?,
        None if args.trials > 0 && default_outputs.contains("pe") => {
            parse_outputs(&format!("{default_outputs},pe_mc,se"))?
        }
        None => parse_outputs(default_outputs)?,
    };
    let spec = SweepSpec {
        base: args.common.scenario()?,
        axis,
        values,
        outputs,
        mc_trials: args.trials,
        seed: args.common.seed,
    };
    args.common.emit(&run_sweep(&spec)?)
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Cir(args) => sweep(&args, Axis::Rd, "5,6,8,12,20,40", "h")?,
        Command::Expectations(args) => sweep(&args, Axis::Rd, "6,8,12,20,40", "E_S,E_M,E_T")?,
        Command::BerSweep(args) => sweep(&args, Axis::Eta, "1..30", "pe0,pe1,pe")?,
        Command::Validate(args) => {
            let scenario = args.common.scenario()?;
            let etas = parse_values(&args.values)?;
            let (lo, hi) = match (etas.first(), etas.last()) {
                (Some(&lo), Some(&hi)) if etas.len() == (hi - lo) as usize + 1 && lo >= 1.0 => (lo as u32, hi as u32),
                _ => return Err(Error::Config("validate needs a contiguous threshold range lo..hi".into())),
            };
            let report = validate(&scenario, lo..=hi, args.trials, args.common.seed)?;
            args.common.emit(&report.to_table())?;
            eprintln!(
                "{}; trials/bit={} seed={}: {} of {} thresholds within 3 se",
                describe(&scenario),
                report.trials_per_bit,
                report.seed,
                report.rows.len() - report.failures(),
                report.rows.len()
            );
            if !report.passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::OptimalThreshold(args) => {
            let report = find_threshold(&args.common.scenario()?, args.eta_max)?;
            args.common.emit(&report.to_table())?;
            if args.common.out.is_some() {
                println!("{}", report.summary());
            } else {
                eprintln!("{}", report.summary());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("mcvd: {e}");
            ExitCode::from(2)
        }
    }
}
