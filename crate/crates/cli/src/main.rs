//! Command-line front end: scenario runs, gain statistics, link budgets,
//! and steering-vector dumps.
//!
//! Exit codes: 0 success, 1 bad arguments or config, 2 numerical failure
//! during a run, 3 I/O failure.

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use arraylink_core::budget::{BudgetRow, LinkBudget};
use arraylink_core::gain::{builtin_dipole, builtin_patch, load_pattern_table};
use arraylink_core::geometry::steering_vector;
use arraylink_core::report::{emit_results, gain_stats_report};
use arraylink_core::scenario::run_scenario;
use arraylink_core::{
    ArrayGeometry, Direction, Error, GainPattern, Result, ScenarioConfig, SPEED_OF_LIGHT_M_S,
};

#[derive(Parser)]
#[command(
    name = "arraylink",
    version,
    about = "Link-level simulator for planar arrays with per-element gain patterns"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a two-user rate scenario and write results.csv + manifest.json.
    Simulate(SimulateArgs),
    /// Write gain-variation statistics for one pattern.
    GainStats(GainStatsArgs),
    /// Print a link-budget breakdown.
    LinkBudget(BudgetArgs),
    /// Dump one steering vector as CSV (debug aid).
    Steering(SteeringArgs),
}

/// `ROWSxCOLS` grid shape, e.g. `4x8`.
#[derive(Debug, Clone, Copy)]
struct Grid {
    rows: usize,
    cols: usize,
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (rows, cols) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("expected ROWSxCOLS, got '{s}'"))?;
        let parse = |part: &str, what: &str| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| format!("bad {what} in '{s}': '{part}'"))
        };
        Ok(Grid { rows: parse(rows, "row count")?, cols: parse(cols, "column count")? })
    }
}

#[derive(Args)]
struct GeometryArgs {
    /// Array shape as ROWSxCOLS.
    #[arg(long, default_value = "4x8")]
    geometry: Grid,
    /// Element spacing in meters.
    #[arg(long, default_value_t = 0.071)]
    spacing_m: f64,
    /// Carrier frequency in Hz.
    #[arg(long, default_value_t = 2.6e9)]
    freq_hz: f64,
}

impl GeometryArgs {
    fn build(&self) -> Result<ArrayGeometry> {
        if !(self.freq_hz.is_finite() && self.freq_hz > 0.0) {
            return Err(Error::InvalidInput(format!(
                "carrier frequency must be positive and finite, got {} Hz",
                self.freq_hz
            )));
        }
        ArrayGeometry::new(
            self.geometry.rows,
            self.geometry.cols,
            self.spacing_m,
            SPEED_OF_LIGHT_M_S / self.freq_hz,
        )
    }
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct SimulateArgs {
    /// Scenario config JSON; the built-in default scenario when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's trial count.
    #[arg(long)]
    trials: Option<u64>,
    /// Directory for results.csv and manifest.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct GainStatsArgs {
    /// Pattern source: builtin:patch, builtin:dipole, builtin:reference,
    /// or a path to a pattern table CSV.
    #[arg(long)]
    pattern: String,
    #[command(flatten)]
    geometry: GeometryArgs,
    /// Zenith grid lower edge, degrees.
    #[arg(long, default_value_t = -75.0)]
    theta_min_deg: f64,
    /// Zenith grid upper edge, degrees.
    #[arg(long, default_value_t = 75.0)]
    theta_max_deg: f64,
    /// Zenith grid step, degrees.
    #[arg(long, default_value_t = 1.0)]
    theta_step_deg: f64,
    /// Azimuth probe angles, degrees (repeatable).
    #[arg(long = "phi-deg", default_values_t = [88.0, 89.0, 90.0, 91.0, 92.0])]
    phis_deg: Vec<f64>,
    /// Zenith angles of the per-element panel maps, probed at 90 deg
    /// azimuth (repeatable).
    #[arg(long = "panel-theta-deg", default_values_t = [-40.0, 40.0])]
    panel_thetas_deg: Vec<f64>,
    /// Directory for variation.csv, dynamic_range.csv and panel_maps.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct BudgetArgs {
    /// Transmit power, dBm.
    #[arg(long)]
    tx_dbm: f64,
    /// Transmit antenna gain, dBi.
    #[arg(long)]
    tx_gain_dbi: f64,
    /// Receive antenna gain, dBi.
    #[arg(long)]
    rx_gain_dbi: f64,
    /// Link distance, meters.
    #[arg(long)]
    distance_m: f64,
    /// Carrier frequency, Hz.
    #[arg(long)]
    freq_hz: f64,
    /// Extra dB term as name=value; losses negative (repeatable).
    #[arg(long = "extra", value_parser = parse_extra)]
    extras: Vec<BudgetRow>,
    /// Print CSV instead of aligned text.
    #[arg(long)]
    csv: bool,
}

fn parse_extra(s: &str) -> std::result::Result<BudgetRow, String> {
    let (label, value) =
        s.split_once('=').ok_or_else(|| format!("expected name=value, got '{s}'"))?;
    if label.trim().is_empty() {
        return Err(format!("empty item name in '{s}'"));
    }
    let value_db: f64 =
        value.trim().parse().map_err(|_| format!("bad dB value in '{s}': '{value}'"))?;
    Ok(BudgetRow { label: label.trim().to_string(), value_db })
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct SteeringArgs {
    #[command(flatten)]
    geometry: GeometryArgs,
    /// Zenith angle, degrees.
    #[arg(long)]
    theta_deg: f64,
    /// Azimuth angle, degrees.
    #[arg(long)]
    phi_deg: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::InvalidInput(_) | Error::OutsideGrid(_) | Error::PatternTable(_) => 1,
                Error::DegenerateChannel(_) => 2,
                Error::Io(_) => 3,
            })
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate(args) => simulate(args),
        Command::GainStats(args) => gain_stats(args),
        Command::LinkBudget(args) => link_budget(args),
        Command::Steering(args) => steering(args),
    }
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
            })?;
            serde_json::from_str::<ScenarioConfig>(&text)
                .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?
        }
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(trials) = args.trials {
        config.trials = trials;
    }
    config.validate()?;
    let curves = run_scenario(&config)?;
    emit_results(&curves, &args.out)?;
    println!(
        "wrote {} records ({} trials, seed {}) to {}",
        curves.records.len(),
        config.trials,
        config.seed,
        args.out.display()
    );
    Ok(())
}

fn resolve_pattern(source: &str, elements: usize) -> Result<GainPattern> {
    match source {
        "builtin:patch" => Ok(GainPattern::Synthetic(builtin_patch(elements)?)),
        "builtin:dipole" => Ok(GainPattern::Synthetic(builtin_dipole(elements)?)),
        "builtin:reference" => GainPattern::uniform(elements, 0.0),
        other if other.starts_with("builtin:") => Err(Error::InvalidInput(format!(
            "unknown builtin pattern '{other}'; have builtin:patch, builtin:dipole, builtin:reference"
        ))),
        path => {
            let file = File::open(path).map_err(|e| {
                Error::Io(std::io::Error::new(e.kind(), format!("{path}: {e}")))
            })?;
            Ok(GainPattern::Tabulated(load_pattern_table(BufReader::new(file), elements)?))
        }
    }
}

fn theta_grid(min_deg: f64, max_deg: f64, step_deg: f64) -> Result<Vec<f64>> {
    if !(min_deg.is_finite() && max_deg.is_finite() && step_deg.is_finite()) {
        return Err(Error::InvalidInput("zenith grid bounds must be finite".into()));
    }
    if step_deg <= 0.0 || max_deg < min_deg {
        return Err(Error::InvalidInput(format!(
            "bad zenith grid: {min_deg}..{max_deg} step {step_deg}"
        )));
    }
    let count = ((max_deg - min_deg) / step_deg + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| min_deg + i as f64 * step_deg).collect())
}

fn gain_stats(args: GainStatsArgs) -> Result<()> {
    let geom = args.geometry.build()?;
    let pattern = resolve_pattern(&args.pattern, geom.elements())?;
    let thetas = theta_grid(args.theta_min_deg, args.theta_max_deg, args.theta_step_deg)?;
    let panel_dirs: Vec<Direction> = args
        .panel_thetas_deg
        .iter()
        .map(|t| Direction::from_degrees(*t, 90.0))
        .collect::<Result<_>>()?;
    gain_stats_report(&pattern, &geom, &thetas, &args.phis_deg, &panel_dirs, &args.out)?;
    println!(
        "wrote variation.csv, dynamic_range.csv, panel_maps.csv to {}",
        args.out.display()
    );
    Ok(())
}

fn link_budget(args: BudgetArgs) -> Result<()> {
    if !(args.freq_hz.is_finite() && args.freq_hz > 0.0) {
        return Err(Error::InvalidInput(format!(
            "carrier frequency must be positive and finite, got {} Hz",
            args.freq_hz
        )));
    }
    let budget = LinkBudget {
        tx_power_dbm: args.tx_dbm,
        tx_gain_dbi: args.tx_gain_dbi,
        rx_gain_dbi: args.rx_gain_dbi,
        distance_m: args.distance_m,
        wavelength_m: SPEED_OF_LIGHT_M_S / args.freq_hz,
        extra_items: args.extras,
    };
    let rows = budget.breakdown()?;
    let received = budget.received_power_dbm()?;
    if args.csv {
        println!("item,value_db");
        for row in &rows {
            println!("{},{}", row.label, row.value_db);
        }
        println!("received level (dBm),{received}");
    } else {
        let width = rows
            .iter()
            .map(|r| r.label.len())
            .chain(["received level (dBm)".len()])
            .max()
            .unwrap_or(0);
        for row in &rows {
            println!("{:<width$}  {:>10.3}", row.label, row.value_db);
        }
        println!("{:-<width$}  {:->10}", "", "");
        println!("{:<width$}  {:>10.3}", "received level (dBm)", received);
    }
    Ok(())
}

fn steering(args: SteeringArgs) -> Result<()> {
    let geom = args.geometry.build()?;
    let dir = Direction::from_degrees(args.theta_deg, args.phi_deg)?;
    let a = steering_vector(&geom, dir);
    println!("element,re,im");
    for (m, entry) in a.iter().enumerate() {
        println!("{m},{},{}", entry.re, entry.im);
    }
    Ok(())
}
