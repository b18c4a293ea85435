//! Command-line front end: one-off solver runs and full experiment sweeps
//! over a scenario config, written as CSV or JSON.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vlcbeam::harness::{
    emit_report, load_scenario, run_experiment, ExperimentKind, ExperimentSpec, RateReport,
    ReportFormat, Scenario, Scheme,
};
use vlcbeam::Error;

#[derive(Parser)]
#[command(name = "vlcbeam", version, about = "Indoor beam-steering simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand.
#[derive(Args)]
struct Common {
    /// Scenario config (JSON); omitted means built-in defaults.
    #[arg(long)]
    scenario: Option<String>,
    /// Output file; omitted means stdout.
    #[arg(long)]
    out: Option<String>,
    /// Output encoding.
    #[arg(long, default_value = "csv")]
    format: String,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Trials per sweep point.
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated scheme list (e.g. sbsf,no_steering).
    #[arg(long, value_delimiter = ',')]
    scheme: Vec<String>,
    /// Angular grid step override, degrees.
    #[arg(long)]
    delta_deg: Option<f64>,
    /// User counts, comma-separated.
    #[arg(long, value_delimiter = ',')]
    k: Vec<usize>,
    /// Beam counts, comma-separated.
    #[arg(long, value_delimiter = ',')]
    n_beams: Vec<usize>,
    /// Cancellation threshold for pairing.
    #[arg(long)]
    xi_star: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Single-beam steering schemes over random drops.
    Steer(Common),
    /// Joint multi-beam steering and user clustering.
    Cluster(Common),
    /// Clustering plus power reallocation across beams.
    Power(Common),
    /// In-beam superposition pairing and split optimization.
    Noma(Common),
    /// A named experiment family at its preset scale.
    Experiment {
        /// Experiment kind (e.g. single_beam_sweep, cdf_report).
        #[arg(long)]
        kind: String,
        #[command(flatten)]
        common: Common,
    },
}

fn scenario_for(common: &Common) -> Result<Scenario, Error> {
    let mut scenario = match &common.scenario {
        Some(path) => load_scenario(path)?,
        None => Scenario::default(),
    };
    if let Some(seed) = common.seed {
        scenario.seed = seed;
    }
    if let Some(delta) = common.delta_deg {
        scenario.delta_deg = delta;
    }
    scenario.validate()?;
    Ok(scenario)
}

fn apply_overrides(mut spec: ExperimentSpec, common: &Common) -> Result<ExperimentSpec, Error> {
    if let Some(trials) = common.trials {
        spec.trials = trials;
    }
    if !common.scheme.is_empty() {
        spec.schemes = common
            .scheme
            .iter()
            .map(|s| s.parse::<Scheme>())
            .collect::<Result<_, _>>()?;
    }
    if !common.k.is_empty() {
        spec.k_values = common.k.clone();
    }
    if !common.n_beams.is_empty() {
        spec.n_values = common.n_beams.clone();
    }
    if let Some(xi) = common.xi_star {
        spec.xi_star = xi;
    }
    spec.validate()?;
    Ok(spec)
}

fn write_out(report: &RateReport, common: &Common) -> Result<(), Error> {
    let format: ReportFormat = common.format.parse()?;
    match &common.out {
        Some(path) => emit_report(report, format, path),
        None => {
            let text = match format {
                ReportFormat::Csv => report.to_csv_string(),
                ReportFormat::Json => report.to_json_string()?,
            };
            print!("{text}");
            Ok(())
        }
    }
}

/// One-off subcommands are presets narrowed to one sweep point.
fn one_off(kind: ExperimentKind, defaults: (Vec<usize>, Vec<usize>, usize, Vec<Scheme>)) -> ExperimentSpec {
    let mut spec = ExperimentSpec::preset(kind);
    spec.k_values = defaults.0;
    spec.n_values = defaults.1;
    spec.trials = defaults.2;
    spec.schemes = defaults.3;
    spec
}

fn run(cli: Cli) -> Result<(), Error> {
    let (common, base) = match &cli.command {
        Command::Steer(c) => (
            c,
            one_off(
                ExperimentKind::SingleBeamSweep,
                (vec![2], vec![1], 1, vec![Scheme::NoSteering, Scheme::Sbsf]),
            ),
        ),
        Command::Cluster(c) => (
            c,
            one_off(
                ExperimentKind::MultiBeamSweep,
                (vec![10], vec![3], 1, vec![Scheme::MultiStream]),
            ),
        ),
        Command::Power(c) => (
            c,
            one_off(
                ExperimentKind::PowerOptSweep,
                (vec![10], vec![3], 1, vec![Scheme::MultiStream, Scheme::PowerOptSum]),
            ),
        ),
        Command::Noma(c) => (
            c,
            one_off(ExperimentKind::NomaCoeffSweep, (vec![10], vec![3], 1, vec![Scheme::Noma])),
        ),
        Command::Experiment { kind, common } => {
            (common, ExperimentSpec::preset(kind.parse::<ExperimentKind>()?))
        }
    };

    let scenario = scenario_for(common)?;
    let spec = apply_overrides(base, common)?;
    let report = run_experiment(&scenario, &spec)?;
    write_out(&report, common)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidInput(_) | Error::InvalidScenario(_) | Error::Format(_) => {
                    ExitCode::from(2)
                }
                _ => ExitCode::from(3),
            }
        }
    }
}
