use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use eompc::config::{resolve_config_path, CONFIG_DIR_ENV};
use eompc::{app, load, Error, LoadedConfig, Method, Override};

/// Energy-optimal AUV waypoint transfers: direct collocation, EO-EMPC and
/// baselines.
#[derive(Debug, Parser)]
#[command(name = "eompc", version)]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// Suite file. Defaults to paper_suite.toml in the configuration
    /// directory.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Configuration directory searched for --config and the default suite.
    #[arg(long, env = CONFIG_DIR_ENV, hide_env_values = true)]
    config_dir: Option<PathBuf>,
    /// Dotted-path override, e.g. `scenarios.nominal.goal=[1.0, 1.0]`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Args)]
struct OutArgs {
    #[arg(long, short, default_value = "eompc-out")]
    out: PathBuf,
    /// Overwrite existing output files.
    #[arg(long)]
    force: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario of the suite.
    Simulate {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        out: OutArgs,
        /// Scenario id (optional when the suite has one scenario).
        #[arg(long, short)]
        scenario: Option<String>,
        /// Method(s) to run; defaults to the scenario's list.
        #[arg(long, short, value_parser = parse_method)]
        method: Vec<Method>,
    },
    /// Run every scenario and method of the suite.
    Suite {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        out: OutArgs,
        /// Worker threads (default: number of runs, capped at the cores).
        #[arg(long, short)]
        jobs: Option<usize>,
    },
    /// Solve the energy-optimal transfer of one scenario by direct collocation.
    DcSolve {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        out: OutArgs,
        #[arg(long, short)]
        scenario: Option<String>,
        /// Also solve the full 6-DOF problem and report its energy shares.
        #[arg(long)]
        full: bool,
    },
    /// Print the energy-optimal cruise speed of the configured vehicle.
    CruiseSpeed {
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Load and validate a suite without running it.
    ValidateConfig {
        #[command(flatten)]
        config: ConfigArgs,
    },
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse()
}

fn load_config(args: &ConfigArgs) -> Result<LoadedConfig, Error> {
    let path = resolve_config_path(args.config.as_deref(), args.config_dir.as_deref());
    let overrides = args.set.iter().map(|s| s.parse::<Override>()).collect::<Result<Vec<_>, _>>()?;
    Ok(load(&path, &overrides)?)
}

fn failures_to_error(failures: Vec<String>) -> Result<(), Error> {
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Error::Failed(failures.join("\n")))
    }
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Simulate { config, out, scenario, method } => {
            let loaded = app::select(&load_config(&config)?, scenario.as_deref(), &method)?;
            let report = app::suite(&loaded, &out.out, None, out.force)?;
            print!("{}", report.markdown);
            failures_to_error(report.failures())
        }
        Command::Suite { config, out, jobs } => {
            let loaded = load_config(&config)?;
            let report = app::suite(&loaded, &out.out, jobs, out.force)?;
            print!("{}", report.markdown);
            failures_to_error(report.failures())
        }
        Command::DcSolve { config, out, scenario, full } => {
            let loaded = load_config(&config)?;
            let report = app::dc_solve(&loaded, scenario.as_deref(), full, &out.out, out.force)?;
            print!("{}", report.markdown);
            Ok(())
        }
        Command::CruiseSpeed { config } => {
            let loaded = load_config(&config)?;
            print!("{}", app::cruise_speed(&loaded.config));
            Ok(())
        }
        Command::ValidateConfig { config } => {
            let loaded = load_config(&config)?;
            println!("{}", app::validate(&loaded)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
