use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use phonon_squeezing::config::RawConfig;
use phonon_squeezing::{run_scenario, write_csv, Error, Scenario, ScenarioConfig};

/// Run a squeezing scenario and write its table as CSV.
#[derive(Parser, Debug)]
#[command(version)]
struct Args {
    /// fig1, fig2a, fig2b, fig2c, fig3a, fig3b, sweep or oracle-check
    #[arg(long)]
    scenario: String,
    /// Flat `key = value` file layered over the scenario preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `key=value` override, applied after the config file. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    out: PathBuf,
}

fn run(args: &Args) -> Result<(), Error> {
    let scenario: Scenario = args.scenario.parse()?;
    let mut raw = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
                line: 0,
                key: "--config".into(),
                reason: format!("{}: {e}", path.display()),
            })?;
            RawConfig::parse(&text)?
        }
        None => RawConfig::default(),
    };
    raw.apply_overrides(&args.set)?;
    let cfg = ScenarioConfig::resolve(scenario, &raw)?;
    let table = run_scenario(&cfg)?;
    write_csv(&table, &args.out)
}

fn main() -> ExitCode {
    // Usage errors are configuration errors; clap would otherwise exit with 2.
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("simulate: {e}");
            if e.is_config_error() || matches!(e, Error::Io(_)) {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
